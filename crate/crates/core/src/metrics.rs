//! Entropy, efficiency and attenuation figures of merit.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sources::AmplitudeProfile;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("{name} must be nonnegative and finite, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("denominator is zero")]
    ZeroDenominator,
    #[error("useful qubits {useful} exceed total {total}")]
    UsefulExceedsTotal { useful: f64, total: f64 },
    #[error("probabilities sum to {0}, expected 1")]
    NotNormalized(f64),
}

fn nonneg(name: &'static str, value: f64) -> Result<f64, MetricsError> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(MetricsError::Negative { name, value })
    }
}

/// Shannon entropy in bits of a probability vector, `0·log 0 = 0`.
pub fn entropy_bits(p: &[f64]) -> Result<f64, MetricsError> {
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-10 || p.iter().any(|&x| x.is_nan() || x < 0.0) {
        return Err(MetricsError::NotNormalized(total));
    }
    Ok(-p
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| x * x.log2())
        .sum::<f64>())
}

/// Entropy of one photon's reduced state, `−Σ |a_i|² log2 |a_i|²`.
pub fn von_neumann_entropy(profile: &AmplitudeProfile) -> f64 {
    // AmplitudeProfile is normalized by construction.
    entropy_bits(&profile.probabilities()).expect("profile is normalized")
}

/// `η_q = q_u / q_t`.
pub fn intrinsic_efficiency(q_u: f64, q_t: f64) -> Result<f64, MetricsError> {
    let q_u = nonneg("q_u", q_u)?;
    let q_t = nonneg("q_t", q_t)?;
    if q_t == 0.0 {
        return Err(MetricsError::ZeroDenominator);
    }
    if q_u > q_t {
        return Err(MetricsError::UsefulExceedsTotal {
            useful: q_u,
            total: q_t,
        });
    }
    Ok(q_u / q_t)
}

/// `η_t = m_u / (q_t + b_t)`.
pub fn total_efficiency(m_u: f64, q_t: f64, b_t: f64) -> Result<f64, MetricsError> {
    let m_u = nonneg("m_u", m_u)?;
    let q_t = nonneg("q_t", q_t)?;
    let b_t = nonneg("b_t", b_t)?;
    let den = q_t + b_t;
    if den == 0.0 {
        return Err(MetricsError::ZeroDenominator);
    }
    Ok(m_u / den)
}

/// Fraction of photons surviving distance `length`: `e^{−λL}`.
pub fn attenuation_survival(lambda: f64, length: f64) -> Result<f64, MetricsError> {
    let lambda = nonneg("lambda", lambda)?;
    let length = nonneg("length", length)?;
    Ok((-lambda * length).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyInput {
    pub q_u: f64,
    pub q_t: f64,
    pub m_u: f64,
    pub b_t: f64,
}

impl EfficiencyInput {
    pub fn intrinsic(&self) -> Result<f64, MetricsError> {
        intrinsic_efficiency(self.q_u, self.q_t)
    }

    pub fn total(&self) -> Result<f64, MetricsError> {
        total_efficiency(self.m_u, self.q_t, self.b_t)
    }
}

/// How the quantum cost of one pair is counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QubitAccounting {
    /// `2 S(ρ)` qubits per pair.
    Entropy,
    /// `2 log2 d` qubits per pair, whatever the entanglement.
    PhotonCount,
}

/// Per-dit cost for the entangled protocol: `m_u = log2 d`, `b_t = log2 d`,
/// and `q_t` per `accounting`.
pub fn entangled_per_dit(
    profile: &AmplitudeProfile,
    accounting: QubitAccounting,
) -> EfficiencyInput {
    let bits = (profile.dim() as f64).log2();
    let q_t = match accounting {
        QubitAccounting::Entropy => 2.0 * von_neumann_entropy(profile),
        QubitAccounting::PhotonCount => 2.0 * bits,
    };
    EfficiencyInput {
        q_u: q_t,
        q_t,
        m_u: bits,
        b_t: bits,
    }
}

/// `log2 d / (log2 d + 2 S(ρ))`.
pub fn entangled_total_efficiency(profile: &AmplitudeProfile) -> f64 {
    entangled_per_dit(profile, QubitAccounting::Entropy)
        .total()
        .expect("log2 d > 0 for d >= 2")
}

/// Pooled error count with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DetectionSummary {
    pub checked: u64,
    pub errors: u64,
}

impl DetectionSummary {
    pub fn rate(&self) -> f64 {
        if self.checked == 0 {
            0.0
        } else {
            self.errors as f64 / self.checked as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.checked == 0 {
            return 0.0;
        }
        let p = self.rate();
        (p * (1.0 - p) / self.checked as f64).sqrt()
    }

    pub fn merge(self, other: DetectionSummary) -> DetectionSummary {
        DetectionSummary {
            checked: self.checked + other.checked,
            errors: self.errors + other.errors,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_examples() {
        for d in [2, 3, 5, 16] {
            let s = von_neumann_entropy(&AmplitudeProfile::uniform(d).unwrap());
            assert!((s - (d as f64).log2()).abs() < 1e-12);
        }
        let product = AmplitudeProfile::from_probabilities(&[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(von_neumann_entropy(&product), 0.0);
        let p = AmplitudeProfile::from_probabilities(&[0.8, 0.2]).unwrap();
        assert!((von_neumann_entropy(&p) - 0.721928094887362).abs() < 1e-12);
    }

    #[test]
    fn efficiency_examples() {
        assert_eq!(intrinsic_efficiency(90.0, 100.0), Ok(0.9));
        assert_eq!(intrinsic_efficiency(7.0, 7.0), Ok(1.0));
        assert_eq!(
            intrinsic_efficiency(1.0, 0.0),
            Err(MetricsError::ZeroDenominator)
        );
        assert!(intrinsic_efficiency(2.0, 1.0).is_err());
        assert_eq!(
            total_efficiency(1.0, 0.0, 0.0),
            Err(MetricsError::ZeroDenominator)
        );
        let p = AmplitudeProfile::from_probabilities(&[0.8, 0.2]).unwrap();
        // 1 / (1 + 2·0.7219280948873623), mpmath at 30 digits
        assert!((entangled_total_efficiency(&p) - 0.409_189_380_367_009_3).abs() < 1e-12);
        for d in [2, 3, 4, 7] {
            let u = AmplitudeProfile::uniform(d).unwrap();
            assert!((entangled_total_efficiency(&u) - 1.0 / 3.0).abs() < 1e-12);
            let raw = entangled_per_dit(&u, QubitAccounting::PhotonCount)
                .total()
                .unwrap();
            assert!((raw - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn photon_count_accounting_ignores_entanglement() {
        let p = AmplitudeProfile::from_probabilities(&[0.9, 0.1]).unwrap();
        let raw = entangled_per_dit(&p, QubitAccounting::PhotonCount)
            .total()
            .unwrap();
        assert!((raw - 1.0 / 3.0).abs() < 1e-12);
        assert!(entangled_total_efficiency(&p) > raw);
    }

    #[test]
    fn attenuation() {
        assert_eq!(attenuation_survival(0.3, 0.0), Ok(1.0));
        assert!((attenuation_survival(1.0, 2f64.ln()).unwrap() - 0.5).abs() < 1e-15);
        assert!(attenuation_survival(-1.0, 1.0).is_err());
        assert!(attenuation_survival(1.0, -1.0).is_err());
        let mut prev = 1.0;
        for i in 0..50 {
            let s = attenuation_survival(0.2, i as f64 * 0.5).unwrap();
            assert!(s <= prev);
            prev = s;
        }
    }

    #[test]
    fn detection_summary_merge() {
        let a = DetectionSummary {
            checked: 10,
            errors: 2,
        };
        let b = DetectionSummary {
            checked: 30,
            errors: 8,
        };
        let m = a.merge(b);
        assert_eq!(m.rate(), 0.25);
        assert_eq!(DetectionSummary::default().rate(), 0.0);
    }
}
