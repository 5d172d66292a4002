//! End-to-end sessions of the two deterministic secure communication
//! protocols.
//!
//! Both protocols send photons one way, from Alice to Bob, check the channel
//! with decoy photons whose positions and states are revealed only after Bob
//! confirms receipt, and then let Bob read each message dit from one
//! classical announcement per position.

mod decode;
mod entangled;
mod layout;
mod session;
mod single_photon;
pub mod transcript;

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::ChannelError;
use crate::metrics::DetectionSummary;
use crate::qudit::{check_dim, Basis, MeasurementRecord, QuditError};
use crate::sources::PreparationRecord;

pub use decode::{decode_entangled, decode_single_photon};
pub use entangled::{delayed_encode_entangled, run_entangled_dsqc};
pub use layout::SequenceLayout;
pub use single_photon::{delayed_encode_single_photon, run_single_photon_dsqc};
pub use transcript::{Entry, PayloadKind, Sender, Transcript};

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("message dimension {message} does not match source dimension {source_dim}")]
    DimensionMismatch { message: usize, source_dim: usize },
    #[error("dit {dit} out of range for dimension {d}")]
    InvalidDit { dit: usize, d: usize },
    #[error("message of {len} dits exceeds session capacity {capacity}")]
    MessageTooLong { len: usize, capacity: usize },
    #[error("session would contain no photons")]
    EmptySequence,
    #[error("invalid protocol config: {0}")]
    InvalidConfig(String),
    #[error("check mode {0:?} is not available for this protocol")]
    UnsupportedCheck(CheckMode),
    #[error("{reveals} reveals but {outcomes} outcomes")]
    Misaligned { reveals: usize, outcomes: usize },
    #[error("position {position}: measured in {measured} but revealed {revealed}")]
    BasisMismatch {
        position: usize,
        measured: Basis,
        revealed: Basis,
    },
    #[error("reveal at position {0} is not an eigenstate record")]
    NotAnEigenstate(usize),
    #[error("malformed transcript: {0}")]
    Transcript(String),
    #[error(transparent)]
    Qudit(#[from] QuditError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// Message of base-`d` symbols.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecretMessage {
    d: usize,
    dits: Vec<usize>,
}

impl SecretMessage {
    pub fn new(d: usize, dits: Vec<usize>) -> Result<Self, ProtocolError> {
        check_dim(d)?;
        if let Some(&dit) = dits.iter().find(|&&x| x >= d) {
            return Err(ProtocolError::InvalidDit { dit, d });
        }
        Ok(Self { d, dits })
    }

    pub fn random<R: Rng + ?Sized>(
        d: usize,
        len: usize,
        rng: &mut R,
    ) -> Result<Self, ProtocolError> {
        check_dim(d)?;
        Ok(Self {
            d,
            dits: (0..len).map(|_| rng.random_range(0..d)).collect(),
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn dits(&self) -> &[usize] {
        &self.dits
    }

    pub fn len(&self) -> usize {
        self.dits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dits.is_empty()
    }

    /// Split into messages of at most `capacity` dits.
    pub fn chunks(&self, capacity: usize) -> Vec<SecretMessage> {
        self.dits
            .chunks(capacity.max(1))
            .map(|c| SecretMessage {
                d: self.d,
                dits: c.to_vec(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckMode {
    /// Decoy photons in random `Z_d`/`X_d` eigenstates.
    Decoys,
    /// Unencoded pairs measured by both parties in `Z_d` only. Blind to any
    /// attack that preserves the `Z_d` correlation.
    PairSample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Message encoded on the photons before transmission.
    Eager,
    /// Message folded into the classical announcements after the check.
    Delayed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    /// Fraction of sequence positions used for the channel check.
    pub decoy_fraction: f64,
    /// Abort when the check error rate exceeds this value.
    pub threshold: f64,
    pub check: CheckMode,
    /// Use the anti-correlated pair form; `None` means "only for d = 2".
    pub anti_correlated: Option<bool>,
    /// Fixed sequence length. `None` sizes the sequence to the message.
    pub sequence_len: Option<usize>,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            decoy_fraction: 0.1,
            threshold: 0.05,
            check: CheckMode::Decoys,
            anti_correlated: None,
            sequence_len: None,
        }
    }
}

impl ProtocolConfig {
    pub fn anti_correlated_for(&self, d: usize) -> bool {
        self.anti_correlated.unwrap_or(d == 2)
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        if !(0.0..1.0).contains(&self.decoy_fraction) {
            return Err(ProtocolError::InvalidConfig(format!(
                "decoy_fraction {} outside [0, 1)",
                self.decoy_fraction
            )));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(ProtocolError::InvalidConfig(format!(
                "threshold {} outside [0, 1]",
                self.threshold
            )));
        }
        Ok(())
    }

    fn fixed_checks(&self, n: usize) -> usize {
        (n as f64 * self.decoy_fraction).round() as usize
    }

    /// Message positions available in one session, if bounded.
    pub fn capacity(&self) -> Option<usize> {
        self.sequence_len.map(|n| n - self.fixed_checks(n))
    }

    /// `(total positions, check positions)` for a message of `msg_len` dits.
    pub fn plan(&self, msg_len: usize) -> Result<(usize, usize), ProtocolError> {
        self.validate()?;
        let (total, checks) = match self.sequence_len {
            Some(n) => {
                let checks = self.fixed_checks(n);
                let capacity = n - checks;
                if msg_len > capacity {
                    return Err(ProtocolError::MessageTooLong {
                        len: msg_len,
                        capacity,
                    });
                }
                (n, checks)
            }
            None => {
                let f = self.decoy_fraction;
                let checks = if f == 0.0 || msg_len == 0 {
                    0
                } else {
                    (msg_len as f64 * f / (1.0 - f) - 1e-9).ceil() as usize
                };
                (msg_len + checks, checks)
            }
        };
        if total == 0 {
            return Err(ProtocolError::EmptySequence);
        }
        Ok((total, checks))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    Entangled,
    SinglePhoton,
}

/// Check outcomes split by the basis of the checked state.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CheckStats {
    pub zd: DetectionSummary,
    pub xd: DetectionSummary,
}

impl CheckStats {
    pub fn total(&self) -> DetectionSummary {
        self.zd.merge(self.xd)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorAnalysis {
    pub rate: f64,
    pub per_basis: CheckStats,
}

/// Compare Bob's outcomes on check photons against Alice's reveals.
///
/// `reveals[i]` and `outcomes[i]` refer to the same photon. Every record must
/// be an eigenstate record and Bob must have measured in its basis.
pub fn error_rate_analysis(
    reveals: &[PreparationRecord],
    outcomes: &[MeasurementRecord],
) -> Result<ErrorAnalysis, ProtocolError> {
    if reveals.len() != outcomes.len() {
        return Err(ProtocolError::Misaligned {
            reveals: reveals.len(),
            outcomes: outcomes.len(),
        });
    }
    let mut stats = CheckStats::default();
    for (r, o) in reveals.iter().zip(outcomes) {
        let (basis, index) = r
            .eigenstate()
            .ok_or(ProtocolError::NotAnEigenstate(r.position))?;
        if o.basis != basis {
            return Err(ProtocolError::BasisMismatch {
                position: r.position,
                measured: o.basis,
                revealed: basis,
            });
        }
        let slot = match basis {
            Basis::Zd => &mut stats.zd,
            Basis::Xd => &mut stats.xd,
        };
        slot.checked += 1;
        slot.errors += u64::from(o.outcome != index);
    }
    Ok(ErrorAnalysis {
        rate: stats.total().rate(),
        per_basis: stats,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerBasisError {
    pub zd: f64,
    pub xd: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SessionEfficiency {
    /// Message positions over all positions.
    pub eta_q: f64,
    /// Total efficiency with the entropy-based qubit cost.
    pub eta_t: f64,
    /// Total efficiency counting every photon as `log2 d` qubits.
    pub eta_t_photon_count: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LossCounts {
    pub sent: usize,
    pub lost: usize,
    pub checks_lost: usize,
    pub message_lost: usize,
}

/// What an eavesdropper recovers by running Bob's decoder on her own
/// observations and the public transcript.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EveStats {
    pub intercepted: usize,
    pub guessed: usize,
    pub correct: usize,
}

impl EveStats {
    pub fn accuracy(&self) -> f64 {
        if self.guessed == 0 {
            0.0
        } else {
            self.correct as f64 / self.guessed as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionReport {
    pub protocol: Protocol,
    pub variant: Variant,
    pub d: usize,
    /// Bob's decoded dits, `None` where the photon was lost. Absent when the
    /// session aborted.
    pub decoded: Option<Vec<Option<usize>>>,
    pub aborted: bool,
    pub decoy_error_rate: f64,
    pub per_basis_error: PerBasisError,
    pub check: CheckStats,
    pub efficiency: SessionEfficiency,
    pub losses: LossCounts,
    pub eve: Option<EveStats>,
    pub transcript: Transcript,
    pub layout: SequenceLayout,
}

impl SessionReport {
    /// `(decoded dits, correctly decoded dits)` against the sent message.
    pub fn accuracy_against(&self, msg: &SecretMessage) -> (usize, usize) {
        let Some(decoded) = &self.decoded else {
            return (0, 0);
        };
        decoded
            .iter()
            .zip(msg.dits())
            .filter_map(|(got, &want)| got.map(|g| g == want))
            .fold((0, 0), |(n, ok), hit| (n + 1, ok + usize::from(hit)))
    }
}

/// Positions Bob learns were lost, in the order he reported them.
pub(crate) fn lost_positions(delivered: &[bool]) -> BTreeSet<usize> {
    delivered
        .iter()
        .enumerate()
        .filter(|(_, &ok)| !ok)
        .map(|(p, _)| p)
        .collect()
}

pub(crate) fn session_checks(analysis: &ErrorAnalysis) -> (f64, PerBasisError, CheckStats) {
    (
        analysis.rate,
        PerBasisError {
            zd: analysis.per_basis.zd.rate(),
            xd: analysis.per_basis.xd.rate(),
        },
        analysis.per_basis,
    )
}
