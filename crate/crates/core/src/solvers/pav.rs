/// Euclidean projection onto non-increasing sequences (pool adjacent violators).
pub fn project_non_increasing(values: &[f64]) -> Vec<f64> {
    // Blocks of (sum, count); merged while a later block mean exceeds an earlier one.
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(values.len());
    for &v in values {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (s2, c2) = blocks[blocks.len() - 1];
            let (s1, c1) = blocks[blocks.len() - 2];
            if s2 / c2 as f64 > s1 / c1 as f64 {
                blocks.pop();
                *blocks.last_mut().unwrap() = (s1 + s2, c1 + c2);
            } else {
                break;
            }
        }
    }
    blocks.into_iter().flat_map(|(s, c)| std::iter::repeat_n(s / c as f64, c)).collect()
}

/// Projection onto non-increasing sequences in `[0, 1]`. Clamping after the
/// isotonic fit is exact because the box bounds are the same for every entry.
pub fn project_profile(values: &[f64]) -> Vec<f64> {
    project_non_increasing(values).into_iter().map(|v| v.clamp(0.0, 1.0)).collect()
}
