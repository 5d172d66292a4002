//! Quantum channel from Alice to Bob: loss, an optional eavesdropper, and
//! depolarization, applied in that order.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::attenuation_survival;
use crate::qudit::{Basis, MeasurementRecord, QuditError};
use crate::sources::{PhotonSlot, Register};

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("slot was already lost and cannot be transmitted")]
    AlreadyLost,
    #[error("invalid channel model: {0}")]
    InvalidModel(String),
    #[error(transparent)]
    Qudit(#[from] QuditError),
}

/// Exponential attenuation `N(L) = N(0) e^{−λL}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Attenuation {
    pub lambda: f64,
    pub length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ChannelModel {
    pub loss: Option<Attenuation>,
    pub depolarize_p: f64,
}

impl ChannelModel {
    pub fn ideal() -> Self {
        Self::default()
    }

    pub fn survival_probability(&self) -> Result<f64, ChannelError> {
        match self.loss {
            None => Ok(1.0),
            Some(a) => attenuation_survival(a.lambda, a.length)
                .map_err(|e| ChannelError::InvalidModel(e.to_string())),
        }
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        self.survival_probability()?;
        if !(0.0..=1.0).contains(&self.depolarize_p) {
            return Err(ChannelError::InvalidModel(format!(
                "depolarize_p {} outside [0, 1]",
                self.depolarize_p
            )));
        }
        Ok(())
    }
}

/// How an intercept-resend attacker picks her measuring basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisPolicy {
    RandomZx,
    FixedZ,
    FixedX,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Adversary {
    #[default]
    None,
    /// Reads the public classical channel but never touches photons.
    Passive,
    /// Measures every traveling photon and resends the collapsed eigenstate.
    InterceptResend { policy: BasisPolicy },
}

impl Adversary {
    pub fn is_present(&self) -> bool {
        !matches!(self, Adversary::None)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmitResult {
    pub delivered: bool,
    pub slot: PhotonSlot,
    /// Eve's measurement, when she intercepted this photon.
    pub interception: Option<MeasurementRecord>,
}

pub fn transmit<R: Rng + ?Sized>(
    register: &mut Register,
    slot: PhotonSlot,
    model: &ChannelModel,
    adversary: &Adversary,
    rng: &mut R,
) -> Result<TransmitResult, ChannelError> {
    if slot.lost {
        return Err(ChannelError::AlreadyLost);
    }
    let survive = model.survival_probability()?;
    if survive < 1.0 && rng.random::<f64>() >= survive {
        return Ok(TransmitResult {
            delivered: false,
            slot: PhotonSlot { lost: true, ..slot },
            interception: None,
        });
    }

    let d = register.dim(&slot);
    let interception = match adversary {
        Adversary::InterceptResend { policy } => {
            let basis = match policy {
                BasisPolicy::FixedZ => Basis::Zd,
                BasisPolicy::FixedX => Basis::Xd,
                BasisPolicy::RandomZx => {
                    if rng.random::<bool>() {
                        Basis::Xd
                    } else {
                        Basis::Zd
                    }
                }
            };
            // After a projective measurement the photon is already the
            // eigenstate Eve resends, and any partner is disentangled.
            Some(register.measure(&slot, basis, rng)?)
        }
        Adversary::None | Adversary::Passive => None,
    };

    if model.depolarize_p > 0.0 && rng.random::<f64>() < model.depolarize_p {
        let k = rng.random_range(0..d);
        register.replace(&slot, Basis::Zd.ket(d, k)?, rng)?;
    }

    Ok(TransmitResult {
        delivered: true,
        slot,
        interception,
    })
}

/// Analytic probability that one decoy, drawn uniformly from the `Z_d` and
/// `X_d` eigenstates, fails Bob's check after an intercept-resend attack.
///
/// A mismatch needs Eve's basis to be conjugate to the decoy's; her
/// eigenstate then yields a uniformly random outcome in Bob's basis. Under
/// every policy exactly half of the decoys are in the conjugate basis.
pub fn expected_detection_rate(d: usize, policy: BasisPolicy) -> f64 {
    let conjugate_fraction = match policy {
        BasisPolicy::RandomZx | BasisPolicy::FixedZ | BasisPolicy::FixedX => 0.5,
    };
    conjugate_fraction * (d as f64 - 1.0) / d as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qudit::{zd_ket, Basis, JointState, Subsystem};
    use crate::sources::{make_decoy, make_pure_pair, AmplitudeProfile, SlotPart};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ideal_channel_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut reg = Register::new();
        let prof = AmplitudeProfile::from_probabilities(&[0.6, 0.4]).unwrap();
        let pair = make_pure_pair(&prof).unwrap();
        let (_, b) = reg.add_pair(pair.clone());
        let r = transmit(
            &mut reg,
            b,
            &ChannelModel::ideal(),
            &Adversary::None,
            &mut rng,
        )
        .unwrap();
        assert!(r.delivered && r.interception.is_none());
        match reg.get(b.state) {
            crate::sources::QuantumSystem::Pair(p) => {
                assert!((p.fidelity(&pair).unwrap() - 1.0).abs() < 1e-10)
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn lost_slot_cannot_be_resent() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut reg = Register::new();
        let mut slot = reg.add_single(zd_ket(2, 0).unwrap());
        slot.lost = true;
        assert!(matches!(
            transmit(
                &mut reg,
                slot,
                &ChannelModel::ideal(),
                &Adversary::None,
                &mut rng
            ),
            Err(ChannelError::AlreadyLost)
        ));
    }

    #[test]
    fn model_validation() {
        let bad = ChannelModel {
            loss: None,
            depolarize_p: 1.5,
        };
        assert!(bad.validate().is_err());
        let neg = ChannelModel {
            loss: Some(Attenuation {
                lambda: -1.0,
                length: 1.0,
            }),
            depolarize_p: 0.0,
        };
        assert!(neg.validate().is_err());
    }

    #[test]
    fn closed_form_values() {
        assert!((expected_detection_rate(2, BasisPolicy::RandomZx) - 0.25).abs() < 1e-15);
        assert!((expected_detection_rate(3, BasisPolicy::RandomZx) - 1.0 / 3.0).abs() < 1e-15);
        assert!((expected_detection_rate(2, BasisPolicy::FixedZ) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn fixed_z_attack_on_z_decoys_is_silent() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let eve = Adversary::InterceptResend {
            policy: BasisPolicy::FixedZ,
        };
        let mut reg = Register::new();
        let mut x_errors = 0usize;
        let mut x_total = 0usize;
        for _ in 0..20_000 {
            let (s, rec) = make_decoy(3, &mut rng).unwrap();
            let (basis, index) = rec.eigenstate().unwrap();
            let slot = reg.add_single(s);
            transmit(&mut reg, slot, &ChannelModel::ideal(), &eve, &mut rng).unwrap();
            let out = reg.measure(&slot, basis, &mut rng).unwrap().outcome;
            match basis {
                Basis::Zd => assert_eq!(out, index),
                Basis::Xd => {
                    x_total += 1;
                    x_errors += usize::from(out != index);
                }
            }
        }
        let rate = x_errors as f64 / x_total as f64;
        assert!((rate - 2.0 / 3.0).abs() < 0.02, "{rate}");
    }

    #[test]
    fn interception_disentangles_pair() {
        // Bell pair (|00⟩+|11⟩)/√2; Eve measures B in X. Afterwards A and B
        // are independent in Z given Eve's result.
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let eve = Adversary::InterceptResend {
            policy: BasisPolicy::FixedX,
        };
        let prof = AmplitudeProfile::uniform(2).unwrap();
        // counts[eve][a][b]
        let mut counts = [[[0usize; 2]; 2]; 2];
        for _ in 0..40_000 {
            let mut reg = Register::new();
            let (a, b) = reg.add_pair(make_pure_pair(&prof).unwrap());
            let r = transmit(&mut reg, b, &ChannelModel::ideal(), &eve, &mut rng).unwrap();
            let e = r.interception.unwrap().outcome;
            let ra = reg.measure(&a, Basis::Zd, &mut rng).unwrap().outcome;
            let rb = reg.measure(&b, Basis::Zd, &mut rng).unwrap().outcome;
            counts[e][ra][rb] += 1;
        }
        for table in counts {
            let n: usize = table.iter().flatten().sum();
            for ra in 0..2 {
                for rb in 0..2 {
                    let pa = (table[ra][0] + table[ra][1]) as f64 / n as f64;
                    let pb = (table[0][rb] + table[1][rb]) as f64 / n as f64;
                    let pab = table[ra][rb] as f64 / n as f64;
                    assert!((pab - pa * pb).abs() < 0.02, "{pab} vs {}", pa * pb);
                }
            }
        }
    }

    #[test]
    fn depolarized_pair_member_becomes_random_z_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let model = ChannelModel {
            loss: None,
            depolarize_p: 1.0,
        };
        let mut reg = Register::new();
        let s = 0.5f64.sqrt();
        let bell = JointState::new(
            2,
            vec![
                crate::qudit::Amplitude::new(s, 0.0),
                Default::default(),
                Default::default(),
                crate::qudit::Amplitude::new(s, 0.0),
            ],
        )
        .unwrap();
        let (a, b) = reg.add_pair(bell);
        assert_eq!(b.part, SlotPart::B);
        transmit(&mut reg, b, &model, &Adversary::None, &mut rng).unwrap();
        match reg.get(a.state) {
            crate::sources::QuantumSystem::Pair(p) => {
                let pb = p.marginal_probabilities(Subsystem::B, Basis::Zd);
                assert!(pb.iter().any(|&x| (x - 1.0).abs() < 1e-12));
            }
            _ => unreachable!(),
        }
    }
}
