//! Suspension-flow scaffolding over symbolic bases: hitting times of
//! cylinder sections and Abramov's entropy formula.

use serde::Serialize;

use crate::error::{Error, Result};

/// A base distribution together with per-letter roof values, the data of a
/// suspension flow over a Bernoulli base with a zeroth-coordinate roof.
#[derive(Clone, Debug, Serialize)]
pub struct SuspensionSpec {
    pub probs: Vec<f64>,
    pub roofs: Vec<f64>,
}

impl SuspensionSpec {
    pub fn new(probs: Vec<f64>, roofs: Vec<f64>) -> Result<Self> {
        if probs.len() != roofs.len() || probs.is_empty() {
            return Err(Error::InvalidInput("probs and roofs must match and be nonempty".into()));
        }
        if probs.iter().any(|&p| p < 0.0 || !p.is_finite()) {
            return Err(Error::InvalidInput("probabilities must be nonnegative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!("probabilities sum to {total}, not 1")));
        }
        if roofs.iter().any(|&c| !c.is_finite()) {
            return Err(Error::InvalidInput("roof values must be finite".into()));
        }
        Ok(SuspensionSpec { probs, roofs })
    }

    /// mu(f) = sum p_i c_i.
    pub fn mean_roof(&self) -> f64 {
        self.probs.iter().zip(&self.roofs).map(|(p, c)| p * c).sum()
    }

    /// Total mass of (mu x Lebesgue) restricted to the region under the
    /// roof; equals mu(f), so the lifted probability measure is the
    /// restriction divided by this.
    pub fn lifted_mass(&self) -> f64 {
        self.mean_roof()
    }

    /// First hitting time of the cylinder section from a base point given
    /// as indices into this spec's alphabet.
    pub fn hitting_time(&self, seq: &[usize], cylinder: &[usize]) -> Result<f64> {
        if seq.iter().chain(cylinder).any(|&i| i >= self.roofs.len()) {
            return Err(Error::InvalidInput("letter index out of range".into()));
        }
        first_hitting_time(seq, |&i| self.roofs[i], cylinder)
    }
}

/// Abramov: entropy of the suspension flow = h(T; mu) / mu(f).
pub fn abramov_entropy(h_base: f64, mean_roof: f64) -> Result<f64> {
    if mean_roof <= 0.0 || mean_roof.is_nan() {
        return Err(Error::InvalidInput(format!(
            "mean roof must be positive, got {mean_roof}"
        )));
    }
    if h_base < 0.0 {
        return Err(Error::InvalidInput("base entropy must be nonnegative".into()));
    }
    Ok(h_base / mean_roof)
}

/// First hitting time of the section C x {0} from (x, 0): the Birkhoff sum
/// of the roof up to the first k >= 1 with shift^k(x) in the cylinder of
/// `cylinder`. The sequence slice is the simulation horizon.
pub fn first_hitting_time<V: PartialEq>(
    seq: &[V],
    roof: impl Fn(&V) -> f64,
    cylinder: &[V],
) -> Result<f64> {
    if cylinder.is_empty() {
        return Err(Error::InvalidInput("cylinder word must be nonempty".into()));
    }
    if cylinder.len() >= seq.len() {
        return Err(Error::CapExceeded("sequence shorter than the cylinder".into()));
    }
    let mut time = 0.0;
    for k in 0..seq.len() - cylinder.len() {
        time += roof(&seq[k]);
        let start = k + 1;
        if &seq[start..start + cylinder.len()] == cylinder {
            return Ok(time);
        }
    }
    Err(Error::CapExceeded(
        "orbit did not hit the section within the horizon".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn abramov_values() {
        let l2 = 2f64.ln();
        assert_relative_eq!(abramov_entropy(l2, l2).unwrap(), 1.0);
        assert_relative_eq!(abramov_entropy(0.0, 3.0).unwrap(), 0.0);
        assert_relative_eq!(abramov_entropy(l2, 2.0).unwrap(), 0.346573, epsilon = 1e-6);
        assert!(abramov_entropy(l2, 0.0).is_err());
        assert!(abramov_entropy(l2, -1.0).is_err());
    }

    #[test]
    fn hitting_time_immediate_return() {
        // x in C with immediate return in one base step: time = roof(x0)
        let seq = [0u8, 0, 1, 0];
        let t = first_hitting_time(&seq, |_| 0.7, &[0]).unwrap();
        assert_relative_eq!(t, 0.7);
    }

    #[test]
    fn hitting_time_birkhoff_sum() {
        let seq = [0u8, 1, 1, 0, 1, 0];
        // first reoccurrence of "01" at shift 3
        let t = first_hitting_time(&seq, |&v| if v == 0 { 1.0 } else { 0.25 }, &[0, 1]).unwrap();
        assert_relative_eq!(t, 1.0 + 0.25 + 0.25);
        // additivity over two consecutive returns
        let t2 = first_hitting_time(&seq[3..], |&v| if v == 0 { 1.0 } else { 0.25 }, &[0]).unwrap();
        let direct = first_hitting_time(&seq, |&v| if v == 0 { 1.0 } else { 0.25 }, &[0]).unwrap();
        assert_relative_eq!(direct + t2, 1.0 + 0.25 + 0.25 + 1.0 + 0.25);
    }

    #[test]
    fn hitting_time_horizon() {
        let seq = [0u8, 1, 1, 1];
        assert!(first_hitting_time(&seq, |_| 1.0, &[0, 0]).is_err());
    }

    #[test]
    fn spec_hitting_time_by_index() {
        let spec = SuspensionSpec::new(vec![0.5, 0.5], vec![1.0, 0.25]).unwrap();
        let t = spec.hitting_time(&[0, 1, 1, 0, 1], &[0, 1]).unwrap();
        assert_relative_eq!(t, 1.0 + 0.25 + 0.25);
        assert!(spec.hitting_time(&[0, 7], &[0]).is_err());
    }

    #[test]
    fn suspension_spec_mass() {
        let spec = SuspensionSpec::new(vec![0.5, 0.5], vec![1.0, 3.0]).unwrap();
        assert_relative_eq!(spec.mean_roof(), 2.0);
        assert_relative_eq!(spec.lifted_mass(), 2.0);
        assert!(SuspensionSpec::new(vec![0.7, 0.7], vec![1.0, 1.0]).is_err());
        assert!(SuspensionSpec::new(vec![1.0, 0.0], vec![1.0]).is_err());
    }
}
