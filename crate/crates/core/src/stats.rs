//! Batch-means error estimates.

/// Mean and standard error from equal-weight batch means.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub batches: usize,
}

pub fn batch_estimate(batch_means: &[f64]) -> BatchEstimate {
    let b = batch_means.len();
    let mean = batch_means.iter().sum::<f64>() / b as f64;
    let var = if b > 1 {
        batch_means.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (b - 1) as f64
    } else {
        0.0
    };
    BatchEstimate {
        mean,
        stderr: (var / b as f64).sqrt(),
        batches: b,
    }
}

/// Splits `0..n` into `batches` contiguous ranges of near-equal size.
pub fn batch_ranges(n: usize, batches: usize) -> Vec<std::ops::Range<usize>> {
    (0..batches).map(|b| (b * n / batches)..((b + 1) * n / batches)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_cover() {
        let r = batch_ranges(10, 3);
        assert_eq!(r, vec![0..3, 3..6, 6..10]);
        let e = batch_estimate(&[1.0, 3.0]);
        assert_eq!(e.mean, 2.0);
        assert!((e.stderr - 1.0).abs() < 1e-15);
    }
}
