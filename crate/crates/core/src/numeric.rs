//! Small numerical helpers shared across modules.

/// Pairwise (cascade) summation; error grows like `O(log n)`.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 16;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let (lo, hi) = values.split_at(values.len() / 2);
    pairwise_sum(lo) + pairwise_sum(hi)
}

/// `(l - 1)!!` for even `l`, with `(-1)!! = 1`. Returns 0 for odd `l` and
/// `None` on `u128` overflow.
pub fn double_factorial_odd_below(l: u32) -> Option<u128> {
    if l % 2 == 1 {
        return Some(0);
    }
    (1..l as u128)
        .step_by(2)
        .try_fold(1u128, |acc, k| acc.checked_mul(k))
}

/// `n choose 2`.
pub fn choose2(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Mean and standard error from `batches` contiguous batch means.
///
/// Falls back to one value per batch when fewer samples than batches exist.
pub fn batch_mean_stderr(values: &[f64], batches: usize) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(values) / n as f64;
    let batches = batches.min(n).max(1);
    if batches < 2 {
        return (mean, f64::NAN);
    }
    let size = n / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| {
            let start = b * size;
            let end = if b + 1 == batches { n } else { start + size };
            pairwise_sum(&values[start..end]) / (end - start) as f64
        })
        .collect();
    let bm = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|m| (m - bm).powi(2)).sum::<f64>() / (batches - 1) as f64;
    (mean, (var / batches as f64).sqrt())
}

/// Plain i.i.d. standard error of the mean.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = pairwise_sum(values) / n;
    let dev: Vec<f64> = values.iter().map(|v| (v - mean).powi(2)).collect();
    let var = pairwise_sum(&dev) / (n - 1.0);
    (mean, (var / n).sqrt())
}
