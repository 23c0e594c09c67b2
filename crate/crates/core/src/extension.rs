//! The extension of a lattice function to reverse-cumulative profiles, its
//! greedy evaluation, maximal chains, and the chain-based modular lower bound.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::checks::{Verdict, Violation, Worst, TOL};
use crate::error::{Error, Result};
use crate::lattice::{LatticeDomain, LatticePoint};
use crate::oracle::Oracle;
use crate::separable::SeparableFunction;

/// Per coordinate `i`, the values `rho_i(1) >= ... >= rho_i(k_i - 1)` in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoProfile {
    pub values: Vec<Vec<f64>>,
}

impl RhoProfile {
    /// Validates shape, range and monotonicity (up to [`TOL`]).
    pub fn new(domain: &LatticeDomain, values: Vec<Vec<f64>>) -> Result<Self> {
        let rho = Self { values };
        rho.validate(domain)?;
        Ok(rho)
    }

    /// Constant profile, every entry equal to `t`.
    pub fn uniform(domain: &LatticeDomain, t: f64) -> Self {
        Self { values: domain.sizes().iter().map(|&k| vec![t; k - 1]).collect() }
    }

    pub fn validate(&self, domain: &LatticeDomain) -> Result<()> {
        if self.values.len() != domain.n() {
            return Err(Error::arg("profile has the wrong number of coordinates"));
        }
        for (i, (rho, &k)) in self.values.iter().zip(domain.sizes()).enumerate() {
            if rho.len() + 1 != k {
                return Err(Error::arg(format!("profile for coordinate {i} needs {} entries", k - 1)));
            }
            if rho.iter().any(|&r| !(-TOL..=1.0 + TOL).contains(&r)) {
                return Err(Error::arg(format!("profile for coordinate {i} leaves [0, 1]")));
            }
            if rho.windows(2).any(|w| w[1] > w[0] + TOL) {
                return Err(Error::arg(format!("profile for coordinate {i} is not non-increasing")));
            }
        }
        Ok(())
    }

    /// Pairs with a weight vector: `sum_i sum_j w_i(j) rho_i(j)`.
    pub fn dot(&self, weights: &SeparableFunction) -> f64 {
        self.values
            .iter()
            .zip(&weights.increments)
            .map(|(r, w)| r.iter().zip(w).map(|(a, b)| a * b).sum::<f64>())
            .sum()
    }

    /// Level of coordinate `i` selected by threshold `t`.
    pub fn level(&self, i: usize, t: f64) -> Result<usize> {
        theta(&self.values[i], t)
    }

    /// The lattice point `(theta(rho_1, t), ..., theta(rho_n, t))`.
    pub fn threshold(&self, t: f64) -> Result<LatticePoint> {
        (0..self.values.len()).map(|i| self.level(i, t)).collect::<Result<Vec<_>>>().map(LatticePoint)
    }
}

/// Indicator profile of `y`: `rho_i(j) = 1` for `j <= y_i`, else 0.
pub fn rho_from_point(domain: &LatticeDomain, y: &[usize]) -> Result<RhoProfile> {
    domain.check_point(y)?;
    let values = domain
        .sizes()
        .iter()
        .zip(y)
        .map(|(&k, &yi)| (1..k).map(|j| if j <= yi { 1.0 } else { 0.0 }).collect())
        .collect();
    Ok(RhoProfile { values })
}

/// The level selected by threshold `t` in `(0, 1]`: the largest `j` with
/// `t <= rho_i(j)`, or 0 when there is none. Intervals are right-closed.
pub fn theta(rho_i: &[f64], t: f64) -> Result<usize> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::arg(format!("threshold {t} outside (0, 1]")));
    }
    Ok(rho_i.iter().rposition(|&r| t <= r).map_or(0, |p| p + 1))
}

/// A maximal chain `0 = p_0 < p_1 < ... < p_r = k_max`, stored as the
/// sequence of coordinates raised at each step.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Chain {
    increments: Vec<usize>,
}

impl Chain {
    pub fn new(domain: &LatticeDomain, increments: Vec<usize>) -> Result<Self> {
        let mut counts = vec![0usize; domain.n()];
        for &i in &increments {
            if i >= domain.n() {
                return Err(Error::arg(format!("chain raises unknown coordinate {i}")));
            }
            counts[i] += 1;
        }
        if counts.iter().zip(domain.sizes()).any(|(&c, &k)| c != k - 1) {
            return Err(Error::arg("chain must raise every coordinate i exactly k_i - 1 times"));
        }
        Ok(Self { increments })
    }

    pub fn increments(&self) -> &[usize] {
        &self.increments
    }

    pub fn len(&self) -> usize {
        self.increments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.increments.is_empty()
    }

    /// All `r + 1` chain points, starting at 0.
    pub fn points(&self) -> Vec<LatticePoint> {
        let n = self.increments.iter().max().map_or(0, |m| m + 1);
        let mut p = vec![0usize; n];
        let mut out = Vec::with_capacity(self.increments.len() + 1);
        out.push(LatticePoint(p.clone()));
        for &i in &self.increments {
            p[i] += 1;
            out.push(LatticePoint(p.clone()));
        }
        out
    }

    /// Whether `p_{sum y} = y`.
    pub fn contains(&self, y: &[usize]) -> bool {
        let steps = y.iter().sum::<usize>();
        if steps > self.increments.len() {
            return false;
        }
        let mut counts = vec![0usize; y.len()];
        for &i in &self.increments[..steps] {
            if i >= y.len() {
                return false;
            }
            counts[i] += 1;
        }
        counts == y
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ChainMode {
    Canonical,
    Randomized { seed: u64 },
}

/// A chain through `y`.
///
/// Canonical raises coordinate 1 to `y_1`, ..., coordinate n to `y_n`, then
/// each coordinate in turn to its top level. Randomized shuffles the steps
/// before `y` and the steps after `y` independently.
pub fn chain_containing(domain: &LatticeDomain, y: &[usize], mode: ChainMode) -> Result<Chain> {
    domain.check_point(y)?;
    let (mut before, mut after) = canonical_halves(domain, y);
    if let ChainMode::Randomized { seed } = mode {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        before.shuffle(&mut rng);
        after.shuffle(&mut rng);
    }
    before.extend(after);
    Ok(Chain { increments: before })
}

fn canonical_halves(domain: &LatticeDomain, y: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let before = y.iter().enumerate().flat_map(|(i, &yi)| std::iter::repeat_n(i, yi)).collect();
    let after = domain
        .sizes()
        .iter()
        .zip(y)
        .enumerate()
        .flat_map(|(i, (&k, &yi))| std::iter::repeat_n(i, k - 1 - yi))
        .collect();
    (before, after)
}

/// Modular function read off a chain: `w_i(j) = f(p_s) - f(p_{s-1})` where
/// step `s` raises coordinate `i` to level `j`, constant `f(0)`. Costs `r + 1`
/// evaluations.
pub fn weights_along_chain(f: &Oracle, chain: &Chain) -> SeparableFunction {
    let d = f.domain();
    let mut weights = SeparableFunction::zero(d);
    let mut p = d.zero();
    let mut prev = f.eval(&p);
    weights.constant = prev;
    for &i in &chain.increments {
        p.0[i] += 1;
        let cur = f.eval(&p);
        weights.increments[i][p[i] - 1] = cur - prev;
        prev = cur;
    }
    weights
}

/// Evaluates the extension at `rho` with the greedy algorithm.
///
/// Entries are visited in decreasing order. Within a coordinate the level
/// order is kept, so a profile that is only monotone up to [`TOL`] still
/// yields a valid chain. Cross-coordinate ties go to the lower coordinate.
/// Returns the value together with the greedy weights (constant `f(0)`);
/// costs exactly `r + 1` evaluations.
pub fn greedy_extension(f: &Oracle, rho: &RhoProfile) -> Result<(f64, SeparableFunction)> {
    let d = f.domain();
    rho.validate(d)?;
    let chain = greedy_chain(d, rho);
    let weights = weights_along_chain(f, &chain);
    Ok((weights.constant + rho.dot(&weights), weights))
}

/// The chain visiting profile entries in decreasing order (merge of the
/// per-coordinate sequences).
pub fn greedy_chain(domain: &LatticeDomain, rho: &RhoProfile) -> Chain {
    let mut next = vec![0usize; domain.n()];
    let mut increments = Vec::with_capacity(domain.chain_length());
    loop {
        let mut pick: Option<(usize, f64)> = None;
        for (i, r) in rho.values.iter().enumerate() {
            if let Some(&v) = r.get(next[i]) {
                if pick.is_none_or(|(_, best)| v > best) {
                    pick = Some((i, v));
                }
            }
        }
        let Some((i, _)) = pick else { break };
        next[i] += 1;
        increments.push(i);
    }
    Chain { increments }
}

/// The modular lower bound `h_{f,y}` from a chain containing `y`.
///
/// Tight on every chain point; below `f` everywhere when `f` is submodular.
pub fn lower_bound(f: &Oracle, y: &[usize], chain: &Chain) -> Result<SeparableFunction> {
    f.domain().check_point(y)?;
    if !chain.contains(y) {
        return Err(Error::arg("chain does not contain the anchor point"));
    }
    Ok(weights_along_chain(f, chain))
}

/// Chains through `y` that between them put every raisable coordinate
/// directly after `y` and every lowerable coordinate directly before it.
///
/// Chain `c` moves the `c`-th choice (counting from the end of the canonical
/// order) to the last step before `y` and the `c`-th choice to the first step
/// after `y`; duplicates are dropped.
pub fn adjacent_chain_family(domain: &LatticeDomain, y: &[usize]) -> Result<Vec<Chain>> {
    domain.check_point(y)?;
    let (before, after) = canonical_halves(domain, y);
    let lowerable: Vec<usize> = (0..domain.n()).filter(|&i| y[i] > 0).collect();
    let raisable: Vec<usize> = (0..domain.n()).filter(|&i| y[i] + 1 < domain.levels(i)).collect();
    let count = lowerable.len().max(raisable.len()).max(1);
    let mut family: Vec<Chain> = Vec::with_capacity(count);
    for c in 0..count {
        let mut b = before.clone();
        if !lowerable.is_empty() {
            let last = lowerable[(lowerable.len() - 1 - c % lowerable.len()) % lowerable.len()];
            let pos = b.iter().rposition(|&i| i == last).expect("coordinate present before y");
            let moved = b.remove(pos);
            b.push(moved);
        }
        let mut a = after.clone();
        if !raisable.is_empty() {
            let first = raisable[c % raisable.len()];
            let pos = a.iter().position(|&i| i == first).expect("coordinate present after y");
            let moved = a.remove(pos);
            a.insert(0, moved);
        }
        b.extend(a);
        let chain = Chain { increments: b };
        if !family.contains(&chain) {
            family.push(chain);
        }
    }
    Ok(family)
}

/// Checks `weights` against the base polyhedron of `f`: prefix sums at most
/// `f(x) - f(0)` everywhere, with equality at `k_max`. The weights' constant
/// is ignored.
pub fn base_vertex_check(f: &Oracle, weights: &SeparableFunction, cap: usize) -> Result<Verdict> {
    let d = f.domain();
    d.ensure_within_cap(cap)?;
    weights.ensure_matches(d)?;
    let f0 = f.eval(&d.zero());
    let shifted = SeparableFunction { constant: 0.0, ..weights.clone() };
    let mut worst = Worst::default();
    for x in d.points() {
        let slack = shifted.value(&x) - (f.eval(&x) - f0);
        if slack > TOL {
            worst.offer(&x, Violation::BaseInequality, slack);
        }
    }
    let top = d.k_max();
    let gap = (shifted.value(&top) - (f.eval(&top) - f0)).abs();
    if gap > TOL {
        worst.offer(&top, Violation::BaseEquality, gap);
    }
    Ok(worst.verdict())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checks::check_submodular;
    use crate::lattice::DEFAULT_CAP;

    fn dom(sizes: &[usize]) -> LatticeDomain {
        LatticeDomain::new(sizes.to_vec()).unwrap()
    }

    fn neg_product() -> Oracle {
        Oracle::from_fn(dom(&[3, 3]), |x| -((x[0] * x[1]) as f64))
    }

    #[test]
    fn indicator_profiles() {
        let d = dom(&[3, 3]);
        assert_eq!(rho_from_point(&d, &[1, 0]).unwrap().values, vec![vec![1.0, 0.0], vec![0.0, 0.0]]);
        assert!(rho_from_point(&d, &[0, 0]).unwrap().values.iter().flatten().all(|&v| v == 0.0));
        assert!(rho_from_point(&d, &[2, 2]).unwrap().values.iter().flatten().all(|&v| v == 1.0));
        assert!(rho_from_point(&d, &[3, 0]).is_err());
    }

    #[test]
    fn theta_levels() {
        let rho = [0.8, 0.5];
        assert_eq!(theta(&rho, 0.9).unwrap(), 0);
        assert_eq!(theta(&rho, 0.6).unwrap(), 1);
        assert_eq!(theta(&rho, 0.3).unwrap(), 2);
        assert_eq!(theta(&[0.5, 0.5], 0.5).unwrap(), 2);
        assert_eq!(theta(&rho, 0.8).unwrap(), 1);
        assert!(theta(&rho, 0.0).is_err());
        assert!(theta(&rho, 1.5).is_err());
        let d = dom(&[4, 3]);
        let y = [2, 1];
        let ind = rho_from_point(&d, &y).unwrap();
        for t in [1e-6, 0.3, 0.99, 1.0] {
            assert_eq!(ind.threshold(t).unwrap().0, y.to_vec());
        }
    }

    #[test]
    fn greedy_single_coordinate() {
        let table = [0.0, 2.0, 3.0];
        let f = Oracle::from_fn(dom(&[3]), move |x| table[x[0]]);
        let rho = RhoProfile::new(f.domain(), vec![vec![0.8, 0.5]]).unwrap();
        let (value, w) = greedy_extension(&f, &rho).unwrap();
        assert!((value - 2.1).abs() < 1e-12);
        assert_eq!(w.increments, vec![vec![2.0, 1.0]]);
        assert_eq!(f.calls(), 3);
        // integral form: 0.5 * f(2) + 0.3 * f(1) + 0.2 * f(0)
        assert!((value - (0.5 * 3.0 + 0.3 * 2.0)).abs() < 1e-12);
    }

    #[test]
    fn greedy_two_coordinates() {
        let f = neg_product();
        let rho = RhoProfile::new(f.domain(), vec![vec![0.9, 0.4], vec![0.7, 0.2]]).unwrap();
        let chain = greedy_chain(f.domain(), &rho);
        assert_eq!(chain.increments(), &[0, 1, 0, 1]);
        let (value, w) = greedy_extension(&f, &rho).unwrap();
        assert!((value + 1.5).abs() < 1e-12);
        assert_eq!(w.increments, vec![vec![0.0, -1.0], vec![-1.0, -2.0]]);
    }

    #[test]
    fn greedy_rejects_bad_profiles() {
        let f = neg_product();
        let rho = RhoProfile { values: vec![vec![0.2, 0.4], vec![0.0, 0.0]] };
        assert!(greedy_extension(&f, &rho).is_err());
        let rho = RhoProfile { values: vec![vec![1.2, 0.4], vec![0.0, 0.0]] };
        assert!(greedy_extension(&f, &rho).is_err());
    }

    #[test]
    fn greedy_recovers_lattice_values() {
        let f = Oracle::from_fn(dom(&[3, 4, 2]), |x| {
            ((x[0] + 2 * x[1]) as f64).sqrt() - (x[2] * x[0]) as f64
        });
        let d = f.domain().clone();
        for y in d.points() {
            let (value, _) = greedy_extension(&f, &rho_from_point(&d, &y).unwrap()).unwrap();
            assert!((value - f.eval(&y)).abs() < 1e-9);
        }
    }

    #[test]
    fn canonical_chain() {
        let d = dom(&[3, 3]);
        let c = chain_containing(&d, &[1, 1], ChainMode::Canonical).unwrap();
        assert_eq!(c.increments(), &[0, 1, 0, 1]);
        let pts: Vec<Vec<usize>> = c.points().into_iter().map(|p| p.0).collect();
        assert_eq!(pts, vec![vec![0, 0], vec![1, 0], vec![1, 1], vec![2, 1], vec![2, 2]]);
        assert!(c.contains(&[1, 1]));
        assert!(c.contains(&[0, 0]));
        assert!(c.contains(&[2, 2]));
        assert!(!c.contains(&[0, 1]));
    }

    #[test]
    fn randomized_chains_contain_anchor() {
        let d = dom(&[4, 3, 5]);
        for y in d.points() {
            for seed in 0..3 {
                let c = chain_containing(&d, &y, ChainMode::Randomized { seed }).unwrap();
                assert!(c.contains(&y));
                assert_eq!(c.points().last().unwrap(), &d.k_max());
                assert!(Chain::new(&d, c.increments().to_vec()).is_ok());
            }
        }
    }

    #[test]
    fn chain_validation() {
        let d = dom(&[3, 2]);
        assert!(Chain::new(&d, vec![0, 1, 0]).is_ok());
        assert!(Chain::new(&d, vec![0, 1]).is_err());
        assert!(Chain::new(&d, vec![0, 2, 0]).is_err());
    }

    #[test]
    fn lower_bound_examples() {
        let f = neg_product();
        let d = f.domain().clone();
        let chain = chain_containing(&d, &[1, 1], ChainMode::Canonical).unwrap();
        let h = lower_bound(&f, &[1, 1], &chain).unwrap();
        assert_eq!(f.calls(), 5);
        assert_eq!(h.increments, vec![vec![0.0, -1.0], vec![-1.0, -2.0]]);
        assert_eq!(h.value(&[1, 1]), -1.0);
        assert_eq!(h.value(&[0, 1]), -1.0);
        assert_eq!(h.value(&[2, 2]), -4.0);
        for x in d.points() {
            assert!(h.value(&x) <= f.eval(&x) + 1e-9);
        }
        let other = chain_containing(&d, &[2, 0], ChainMode::Canonical).unwrap();
        assert!(lower_bound(&f, &[1, 1], &other).is_err());
    }

    #[test]
    fn lower_bound_of_separable_is_exact() {
        let s = SeparableFunction::new(2.0, vec![vec![1.0, -4.0], vec![3.0, 3.5, -1.0]]);
        let f = s.to_oracle();
        let d = f.domain().clone();
        for seed in 0..5 {
            let y = d.point_at(seed as usize * 2);
            let chain = chain_containing(&d, &y, ChainMode::Randomized { seed }).unwrap();
            assert_eq!(lower_bound(&f, &y, &chain).unwrap(), s);
        }
    }

    #[test]
    fn adjacent_family_examples() {
        let d = dom(&[3, 3]);
        let fam = adjacent_chain_family(&d, &[1, 1]).unwrap();
        let incs: Vec<&[usize]> = fam.iter().map(|c| c.increments()).collect();
        assert_eq!(incs, vec![&[0, 1, 0, 1][..], &[1, 0, 1, 0][..]]);

        let fam = adjacent_chain_family(&d, &[0, 0]).unwrap();
        let firsts: Vec<usize> = fam.iter().map(|c| c.increments()[0]).collect();
        assert_eq!(firsts, vec![0, 1]);

        let fam = adjacent_chain_family(&d, &[2, 2]).unwrap();
        let lasts: Vec<usize> = fam.iter().map(|c| *c.increments().last().unwrap()).collect();
        assert_eq!(lasts, vec![1, 0]);
    }

    #[test]
    fn adjacent_family_covers_neighbours() {
        let d = dom(&[3, 4, 2]);
        for y in d.points() {
            let fam = adjacent_chain_family(&d, &y).unwrap();
            assert!(fam.len() <= d.n());
            let s = y.total();
            for i in 0..d.n() {
                if y[i] > 0 {
                    assert!(fam.iter().any(|c| c.increments()[s - 1] == i));
                }
                if y[i] + 1 < d.levels(i) {
                    assert!(fam.iter().any(|c| c.increments()[s] == i));
                }
            }
            assert!(fam.iter().all(|c| c.contains(&y)));
        }
    }

    #[test]
    fn base_vertex_examples() {
        let f = neg_product();
        assert!(check_submodular(&f, DEFAULT_CAP).unwrap().holds());
        let rho = RhoProfile::new(f.domain(), vec![vec![0.9, 0.4], vec![0.7, 0.2]]).unwrap();
        let (_, w) = greedy_extension(&f, &rho).unwrap();
        assert!(base_vertex_check(&f, &w, DEFAULT_CAP).unwrap().holds());

        let g = Oracle::from_fn(dom(&[3, 3]), |x| (x[0] * x[1]) as f64);
        let chain = chain_containing(g.domain(), &[1, 1], ChainMode::Canonical).unwrap();
        let w = weights_along_chain(&g, &chain);
        let verdict = base_vertex_check(&g, &w, DEFAULT_CAP).unwrap();
        let witness = verdict.witness().unwrap();
        assert_eq!(witness.violation, Violation::BaseInequality);
        // w = ([0, 1], [1, 2]); (0, 1) already violates by 1, (0, 2) is worst at 3.
        assert_eq!(witness.point.0, vec![0, 2]);
        assert_eq!(witness.value, 3.0);

        let s = SeparableFunction::new(0.0, vec![vec![1.0, 2.0], vec![-1.0, 0.5]]);
        assert!(base_vertex_check(&s.to_oracle(), &s, DEFAULT_CAP).unwrap().holds());
    }
}
