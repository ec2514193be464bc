use crate::geometry::Point2D;

/// Mean localization error over localized nodes, as a fraction of `r`.
///
/// Nodes without an estimate are skipped; `None` when no node was localized.
pub fn normalized_error(truths: &[Point2D], estimates: &[Option<Point2D>], r: f64) -> Option<f64> {
    assert_eq!(truths.len(), estimates.len(), "one estimate slot per node");
    assert!(r > 0.0, "radio range must be positive");
    let errors: Vec<f64> = truths
        .iter()
        .zip(estimates)
        .filter_map(|(t, e)| e.map(|e| t.distance(e)))
        .collect();
    if errors.is_empty() {
        return None;
    }
    Some(errors.iter().sum::<f64>() / errors.len() as f64 / r)
}

/// Mean, sample standard deviation, min and max of a series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl Moments {
    pub fn of(values: &[f64]) -> Option<Moments> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Some(Moments {
            count: values.len(),
            mean,
            std: var.sqrt(),
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }

    /// Standard error of the mean.
    pub fn sem(&self) -> f64 {
        self.std / (self.count as f64).sqrt()
    }
}

/// Differences `a[i] - b[i]` over pairs where both sides are defined.
pub fn paired_differences(a: &[Option<f64>], b: &[Option<f64>]) -> Vec<f64> {
    a.iter().zip(b).filter_map(|(x, y)| Some((*x)? - (*y)?)).collect()
}
