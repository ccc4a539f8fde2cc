//! Small numeric helpers shared across modules.

/// Pairwise summation. Deterministic and far more accurate than a plain
/// left-to-right fold on the long node sums used by quadrature.
pub fn sum_pairwise(values: &[f64]) -> f64 {
    const BLOCK: usize = 128;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    sum_pairwise(&values[..mid]) + sum_pairwise(&values[mid..])
}

/// Mean of a slice via pairwise summation.
pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    sum_pairwise(values) / values.len() as f64
}

/// Largest absolute value (0 for an empty slice).
pub fn sup_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Root-mean-square norm.
pub fn rms(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let sq: Vec<f64> = values.iter().map(|v| v * v).collect();
    (sum_pairwise(&sq) / values.len() as f64).sqrt()
}

/// Least-squares slope of y against x.
pub fn lsq_slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2, "slope needs at least two points");
    let mx = mean(x);
    let my = mean(y);
    let mut num = 0.0;
    let mut den = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        num += (xi - mx) * (yi - my);
        den += (xi - mx) * (xi - mx);
    }
    num / den
}
