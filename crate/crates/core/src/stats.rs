//! Sample summaries without distributional assumptions.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub count: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub stderr: f64,
    pub median: f64,
    pub q10: f64,
    pub q90: f64,
    pub min: f64,
    pub max: f64,
}

impl SampleStats {
    /// Summary of `samples`; every field is NaN (count 0) for an empty slice.
    pub fn from_samples(samples: &[f64]) -> Self {
        let count = samples.len();
        if count == 0 {
            return SampleStats {
                count,
                mean: f64::NAN,
                std_dev: f64::NAN,
                stderr: f64::NAN,
                median: f64::NAN,
                q10: f64::NAN,
                q90: f64::NAN,
                min: f64::NAN,
                max: f64::NAN,
            };
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mean = sorted.iter().sum::<f64>() / count as f64;
        let std_dev = if count > 1 {
            (sorted.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
        } else {
            0.0
        };
        SampleStats {
            count,
            mean,
            std_dev,
            stderr: std_dev / (count as f64).sqrt(),
            median: quantile_sorted(&sorted, 0.5),
            q10: quantile_sorted(&sorted, 0.1),
            q90: quantile_sorted(&sorted, 0.9),
            min: sorted[0],
            max: sorted[count - 1],
        }
    }

    pub fn from_counts(samples: &[u64]) -> Self {
        let as_f64: Vec<f64> = samples.iter().map(|&x| x as f64).collect();
        Self::from_samples(&as_f64)
    }
}

/// Linear-interpolation quantile (Hyndman–Fan type 7) of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}
