//! The Hilbert projective metric on the open simplex.
//!
//! d_H(x, y) = log( max_i x_i/y_i / min_i x_i/y_i ). Nonnegative matrices
//! with positive row sums act as weak contractions of d_H; strictly
//! positive matrices act as uniform contractions.

use crate::error::{Error, Result};

/// Hilbert distance between two vectors with strictly positive entries.
/// Scale-invariant, so inputs need not be normalized.
pub fn hilbert_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::InvalidInput(format!(
            "dimension mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let mut max_ratio = f64::NEG_INFINITY;
    let mut min_ratio = f64::INFINITY;
    for (&xi, &yi) in x.iter().zip(y) {
        if xi <= 0.0 || yi <= 0.0 || !xi.is_finite() || !yi.is_finite() {
            return Err(Error::InvalidInput(
                "hilbert_distance needs strictly positive coordinates".into(),
            ));
        }
        let r = xi / yi;
        max_ratio = max_ratio.max(r);
        min_ratio = min_ratio.min(r);
    }
    Ok((max_ratio / min_ratio).ln())
}

/// Hilbert diameter of a finite point set (max pairwise distance).
pub fn hilbert_diameter(points: &[Vec<f64>]) -> Result<f64> {
    let mut d = 0.0f64;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            d = d.max(hilbert_distance(&points[i], &points[j])?);
        }
    }
    Ok(d)
}

/// Normalizes a positive vector onto the simplex |x| = 1.
pub fn project_simplex(x: &[f64]) -> Vec<f64> {
    let s: f64 = x.iter().sum();
    x.iter().map(|v| v / s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_iff_equal() {
        let x = vec![0.2, 0.3, 0.5];
        assert_eq!(hilbert_distance(&x, &x).unwrap(), 0.0);
        let y = vec![0.4, 0.6, 1.0]; // same projective point
        assert_relative_eq!(hilbert_distance(&x, &y).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn hand_value() {
        // ratio extremes 3/2 and 3/4, distance log 2
        let d = hilbert_distance(&[0.5, 0.5], &[1.0 / 3.0, 2.0 / 3.0]).unwrap();
        assert_relative_eq!(d, 2.0f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn symmetric() {
        let x = vec![0.1, 0.9];
        let y = vec![0.7, 0.3];
        assert_relative_eq!(
            hilbert_distance(&x, &y).unwrap(),
            hilbert_distance(&y, &x).unwrap(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn rejects_zero_coordinate() {
        assert!(hilbert_distance(&[0.0, 1.0], &[0.5, 0.5]).is_err());
    }
}
