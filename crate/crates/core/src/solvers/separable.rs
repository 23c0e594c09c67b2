use crate::lattice::{LatticeDomain, LatticePoint};
use crate::separable::SeparableFunction;
use crate::error::Result;

/// Exact minimiser of a modular function: each coordinate independently takes
/// the level with the smallest prefix sum (lowest level on ties).
pub fn minimize_separable(s: &SeparableFunction, domain: &LatticeDomain) -> Result<(LatticePoint, f64)> {
    s.ensure_matches(domain)?;
    let mut point = Vec::with_capacity(domain.n());
    let mut value = s.constant;
    for i in 0..domain.n() {
        let (level, best) = s
            .prefixes(i)
            .into_iter()
            .enumerate()
            .fold((0, 0.0), |acc, (l, p)| if p < acc.1 { (l, p) } else { acc });
        point.push(level);
        value += best;
    }
    Ok((LatticePoint(point), value))
}

/// Exact minimiser of a modular function subject to `sum_i x_i <= budget`.
///
/// Dynamic program over (coordinate, remaining budget) in
/// `O(n * budget * max k_i)`; ties resolve to the lexicographically smallest
/// point.
pub fn minimize_separable_cardinality(
    s: &SeparableFunction,
    domain: &LatticeDomain,
    budget: usize,
) -> Result<(LatticePoint, f64)> {
    s.ensure_matches(domain)?;
    let n = domain.n();
    let budget = budget.min(domain.chain_length());
    let prefixes: Vec<Vec<f64>> = (0..n).map(|i| s.prefixes(i)).collect();

    // best[i][b]: minimal contribution of coordinates i.. with budget b.
    let mut best = vec![vec![0.0f64; budget + 1]; n + 1];
    for i in (0..n).rev() {
        for b in 0..=budget {
            best[i][b] = (0..prefixes[i].len().min(b + 1))
                .map(|l| prefixes[i][l] + best[i + 1][b - l])
                .fold(f64::INFINITY, f64::min);
        }
    }

    // Forward pass: smallest level that attains the optimum of the tail.
    let mut point = Vec::with_capacity(n);
    let mut remaining = budget;
    let mut value = s.constant;
    for i in 0..n {
        let target = best[i][remaining];
        let level = (0..prefixes[i].len().min(remaining + 1))
            .find(|&l| prefixes[i][l] + best[i + 1][remaining - l] <= target + 1e-12)
            .expect("the optimum is attained by some level");
        value += prefixes[i][level];
        remaining -= level;
        point.push(level);
    }
    Ok((LatticePoint(point), value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::brute_force_minimize;
    use crate::lattice::DEFAULT_CAP;
    use proptest::prelude::*;

    fn example() -> (SeparableFunction, LatticeDomain) {
        let s = SeparableFunction::new(0.0, vec![vec![2.0, -3.0], vec![-1.0, 4.0]]);
        let d = s.domain();
        (s, d)
    }

    #[test]
    fn unconstrained_examples() {
        let (s, d) = example();
        assert_eq!(minimize_separable(&s, &d).unwrap(), (LatticePoint(vec![2, 1]), -2.0));
        let pos = SeparableFunction::new(1.0, vec![vec![1.0, 1.0], vec![0.5]]);
        assert_eq!(minimize_separable(&pos, &pos.domain()).unwrap(), (LatticePoint(vec![0, 0]), 1.0));
        let neg = SeparableFunction::new(0.0, vec![vec![-1.0, -1.0], vec![-0.5]]);
        assert_eq!(minimize_separable(&neg, &neg.domain()).unwrap().0, LatticePoint(vec![2, 1]));
        let wrong = LatticeDomain::new(vec![3, 3, 3]).unwrap();
        assert!(minimize_separable(&s, &wrong).is_err());
    }

    #[test]
    fn cardinality_examples() {
        let (s, d) = example();
        assert_eq!(minimize_separable_cardinality(&s, &d, 2).unwrap(), (LatticePoint(vec![0, 1]), -1.0));
        assert_eq!(minimize_separable_cardinality(&s, &d, 0).unwrap(), (LatticePoint(vec![0, 0]), 0.0));
        assert_eq!(minimize_separable_cardinality(&s, &d, 1000).unwrap(), minimize_separable(&s, &d).unwrap());
    }

    fn table() -> impl Strategy<Value = SeparableFunction> {
        prop::collection::vec(prop::collection::vec(-5i32..5, 1..4), 1..4).prop_map(|w| {
            SeparableFunction::new(0.0, w.into_iter().map(|r| r.into_iter().map(f64::from).collect()).collect())
        })
    }

    proptest! {
        #[test]
        fn unconstrained_matches_enumeration(s in table()) {
            let d = s.domain();
            let (x, v) = minimize_separable(&s, &d).unwrap();
            let (bx, bv) = brute_force_minimize(&s.to_oracle(), DEFAULT_CAP).unwrap();
            prop_assert!((v - bv).abs() < 1e-9);
            prop_assert_eq!(x, bx);
        }

        #[test]
        fn cardinality_matches_enumeration(s in table(), budget in 0usize..8) {
            let d = s.domain();
            let (x, v) = minimize_separable_cardinality(&s, &d, budget).unwrap();
            let best = d
                .points()
                .filter(|p| p.total() <= budget)
                .map(|p| (s.value(&p), p))
                .fold(None::<(f64, LatticePoint)>, |acc, (val, p)| match acc {
                    Some((bv, _)) if bv <= val => acc,
                    _ => Some((val, p)),
                })
                .unwrap();
            prop_assert!(x.total() <= budget);
            prop_assert!((v - best.0).abs() < 1e-9);
            prop_assert_eq!(x, best.1);
        }
    }
}
