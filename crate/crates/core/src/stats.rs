//! Descriptive and robust statistics over score vectors.

/// Arithmetic mean and population standard deviation (divisor `n`).
///
/// Uses a two-pass computation so that constant inputs give exactly zero.
/// Panics on an empty slice.
pub fn mean_std(s: &[f64]) -> (f64, f64) {
    assert!(!s.is_empty(), "mean_std of an empty slice");
    // Summation can round a constant sequence away from its value.
    if s.iter().all(|&v| v == s[0]) {
        return (s[0], 0.0);
    }
    let n = s.len() as f64;
    let mean = s.iter().sum::<f64>() / n;
    let var = s.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Median and median absolute deviation (unscaled).
///
/// Even-length medians are the midpoint of the two central order statistics.
/// Panics on an empty slice.
pub fn median_mad(s: &[f64]) -> (f64, f64) {
    assert!(!s.is_empty(), "median_mad of an empty slice");
    let mut buf = s.to_vec();
    let med = median_in_place(&mut buf);
    for (b, v) in buf.iter_mut().zip(s) {
        *b = (v - med).abs();
    }
    let mad = median_in_place(&mut buf);
    (med, mad)
}

fn median_in_place(buf: &mut [f64]) -> f64 {
    let n = buf.len();
    let mid = n / 2;
    let (_, upper, _) = buf.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if n % 2 == 1 {
        upper
    } else {
        // Lower central element is the max of the left partition.
        let lower = buf[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    }
}

/// Pearson correlation. Returns `None` when either input has zero variance.
pub(crate) fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    debug_assert_eq!(a.len(), b.len());
    let (ma, _) = mean_std(a);
    let (mb, _) = mean_std(b);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}
