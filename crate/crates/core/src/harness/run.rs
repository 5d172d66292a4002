use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use super::config::{ConfigError, MessageSpec, ScenarioConfig};
use super::seeds::trial_seed;
use crate::metrics::DetectionSummary;
use crate::protocols::{
    delayed_encode_entangled, delayed_encode_single_photon, run_entangled_dsqc,
    run_single_photon_dsqc, CheckStats, Protocol, ProtocolError, SecretMessage, SessionReport,
    Transcript, Variant,
};
use crate::SimRng;

/// Outcome of one trial: one message, sent over as many sessions as the
/// configured sequence length requires.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: usize,
    #[serde(with = "hex_seed")]
    pub seed: u64,
    pub sessions: usize,
    pub aborted: bool,
    pub message_len: usize,
    pub decoded: usize,
    pub correct: usize,
    pub decoy_error_rate: f64,
    pub checked_zd: u64,
    pub errors_zd: u64,
    pub checked_xd: u64,
    pub errors_xd: u64,
    pub slots_sent: usize,
    pub slots_lost: usize,
    pub eta_q: f64,
    pub eta_t: f64,
    pub eta_t_photon_count: f64,
    pub transcript_bits: u64,
    pub eve_intercepted: usize,
    pub eve_guessed: usize,
    pub eve_correct: usize,
}

impl TrialRecord {
    pub fn checks(&self) -> CheckStats {
        CheckStats {
            zd: DetectionSummary {
                checked: self.checked_zd,
                errors: self.errors_zd,
            },
            xd: DetectionSummary {
                checked: self.checked_xd,
                errors: self.errors_xd,
            },
        }
    }
}

/// TOML integers are signed 64-bit, so derived seeds are written as hex.
mod hex_seed {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{v:#018x}"))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        let s = String::deserialize(d)?;
        let digits = s
            .strip_prefix("0x")
            .ok_or_else(|| D::Error::custom("seed must start with 0x"))?;
        u64::from_str_radix(digits, 16).map_err(D::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub trials: usize,
    /// Mean of the per-trial check error rates.
    pub mean_error_rate: f64,
    pub abort_fraction: f64,
    /// Correct dits over decoded dits, pooled over all trials.
    pub decode_accuracy: f64,
    /// Check errors over checked photons, pooled over all trials.
    pub detection_rate: f64,
    pub detection_rate_zd: f64,
    pub detection_rate_xd: f64,
    pub checked: u64,
    pub eta_q: f64,
    /// Mean over trials that were not aborted; 0 when every trial aborted.
    pub eta_t: f64,
    pub eta_t_photon_count: f64,
    pub loss_rate: f64,
    pub eve_accuracy: f64,
    pub eve_guessed: usize,
}

impl Aggregates {
    /// Deterministic fold over trials in index order.
    pub fn from_trials(trials: &[TrialRecord]) -> Self {
        let n = trials.len().max(1) as f64;
        let mean = |f: &dyn Fn(&TrialRecord) -> f64| trials.iter().map(f).sum::<f64>() / n;
        let checks = trials
            .iter()
            .fold(CheckStats::default(), |acc, t| CheckStats {
                zd: acc.zd.merge(t.checks().zd),
                xd: acc.xd.merge(t.checks().xd),
            });
        let ratio = |num: usize, den: usize| {
            if den == 0 {
                0.0
            } else {
                num as f64 / den as f64
            }
        };
        let completed: Vec<&TrialRecord> = trials.iter().filter(|t| !t.aborted).collect();
        let completed_mean = |f: &dyn Fn(&TrialRecord) -> f64| {
            if completed.is_empty() {
                0.0
            } else {
                completed.iter().map(|t| f(t)).sum::<f64>() / completed.len() as f64
            }
        };
        let sum = |f: &dyn Fn(&TrialRecord) -> usize| trials.iter().map(f).sum::<usize>();
        Aggregates {
            trials: trials.len(),
            mean_error_rate: mean(&|t| t.decoy_error_rate),
            abort_fraction: mean(&|t| f64::from(u8::from(t.aborted))),
            decode_accuracy: ratio(sum(&|t| t.correct), sum(&|t| t.decoded)),
            detection_rate: checks.total().rate(),
            detection_rate_zd: checks.zd.rate(),
            detection_rate_xd: checks.xd.rate(),
            checked: checks.total().checked,
            eta_q: mean(&|t| t.eta_q),
            eta_t: completed_mean(&|t| t.eta_t),
            eta_t_photon_count: completed_mean(&|t| t.eta_t_photon_count),
            loss_rate: ratio(sum(&|t| t.slots_lost), sum(&|t| t.slots_sent)),
            eve_accuracy: ratio(sum(&|t| t.eve_correct), sum(&|t| t.eve_guessed)),
            eve_guessed: sum(&|t| t.eve_guessed),
        }
    }
}

pub const SUMMARY_SCHEMA: &str = "dsqc-run-summary/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema: String,
    pub config: ScenarioConfig,
    pub aggregates: Aggregates,
    pub trials: Vec<TrialRecord>,
}

impl RunSummary {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run summary serializes")
    }
}

/// Summary plus the transcripts of every session, per trial.
#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub summary: RunSummary,
    pub transcripts: Vec<Vec<Transcript>>,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("trial {trial}: {source}")]
    Protocol {
        trial: usize,
        #[source]
        source: ProtocolError,
    },
}

fn run_session(
    cfg: &ScenarioConfig,
    msg: &SecretMessage,
    rng: &mut SimRng,
) -> Result<SessionReport, ProtocolError> {
    let pc = cfg.protocol_config();
    match (cfg.protocol, cfg.variant) {
        (Protocol::Entangled, v) => {
            let profile = cfg
                .profile
                .build(cfg.d)
                .map_err(ProtocolError::InvalidConfig)?;
            let run = match v {
                Variant::Eager => run_entangled_dsqc::<SimRng>,
                Variant::Delayed => delayed_encode_entangled::<SimRng>,
            };
            run(msg, &profile, &pc, &cfg.channel, &cfg.adversary, rng)
        }
        (Protocol::SinglePhoton, Variant::Eager) => {
            run_single_photon_dsqc(msg, &pc, &cfg.channel, &cfg.adversary, rng)
        }
        (Protocol::SinglePhoton, Variant::Delayed) => {
            delayed_encode_single_photon(msg, &pc, &cfg.channel, &cfg.adversary, rng)
        }
    }
}

/// Run a single trial with its own seeded stream.
pub fn run_trial(
    cfg: &ScenarioConfig,
    index: usize,
) -> Result<(TrialRecord, Vec<Transcript>), ProtocolError> {
    let seed = trial_seed(cfg.seed, index);
    let mut rng = SimRng::seed_from_u64(seed);
    let msg = match &cfg.message {
        MessageSpec::Random { length } => SecretMessage::random(cfg.d, *length, &mut rng)?,
        MessageSpec::Explicit { dits } => SecretMessage::new(cfg.d, dits.clone())?,
    };
    let chunks = match cfg.protocol_config().capacity() {
        Some(0) => {
            return Err(ProtocolError::MessageTooLong {
                len: msg.len(),
                capacity: 0,
            })
        }
        Some(cap) => msg.chunks(cap),
        None => vec![msg],
    };

    let mut rec = TrialRecord {
        index,
        seed,
        sessions: 0,
        aborted: false,
        message_len: chunks.iter().map(SecretMessage::len).sum(),
        decoded: 0,
        correct: 0,
        decoy_error_rate: 0.0,
        checked_zd: 0,
        errors_zd: 0,
        checked_xd: 0,
        errors_xd: 0,
        slots_sent: 0,
        slots_lost: 0,
        eta_q: 0.0,
        eta_t: 0.0,
        eta_t_photon_count: 0.0,
        transcript_bits: 0,
        eve_intercepted: 0,
        eve_guessed: 0,
        eve_correct: 0,
    };
    let mut transcripts = Vec::with_capacity(chunks.len());
    let mut positions = 0usize;
    let mut message_positions = 0usize;
    let mut completed = 0usize;
    for chunk in &chunks {
        let report = run_session(cfg, chunk, &mut rng)?;
        rec.sessions += 1;
        let (decoded, correct) = report.accuracy_against(chunk);
        rec.decoded += decoded;
        rec.correct += correct;
        rec.checked_zd += report.check.zd.checked;
        rec.errors_zd += report.check.zd.errors;
        rec.checked_xd += report.check.xd.checked;
        rec.errors_xd += report.check.xd.errors;
        rec.slots_sent += report.losses.sent;
        rec.slots_lost += report.losses.lost;
        positions += report.layout.total_len();
        message_positions += report.layout.message_positions().len();
        rec.transcript_bits += report.transcript.bit_count();
        if let Some(eve) = report.eve {
            rec.eve_intercepted += eve.intercepted;
            rec.eve_guessed += eve.guessed;
            rec.eve_correct += eve.correct;
        }
        if !report.aborted {
            completed += 1;
            rec.eta_t += report.efficiency.eta_t;
            rec.eta_t_photon_count += report.efficiency.eta_t_photon_count;
        }
        transcripts.push(report.transcript);
        if report.aborted {
            rec.aborted = true;
            break;
        }
    }
    rec.decoy_error_rate = rec.checks().total().rate();
    rec.eta_q = message_positions as f64 / positions as f64;
    if completed > 0 {
        rec.eta_t /= completed as f64;
        rec.eta_t_photon_count /= completed as f64;
    }
    Ok((rec, transcripts))
}

/// Run every trial of a scenario. Identical configs give identical summaries
/// regardless of how trials are scheduled.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioOutcome, RunError> {
    cfg.validate()?;
    let one =
        |i: usize| run_trial(cfg, i).map_err(|source| RunError::Protocol { trial: i, source });

    #[cfg(feature = "parallel")]
    let results: Vec<_> = {
        use rayon::prelude::*;
        (0..cfg.trials).into_par_iter().map(one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<_> = (0..cfg.trials).map(one).collect();

    let mut trials = Vec::with_capacity(cfg.trials);
    let mut transcripts = Vec::with_capacity(cfg.trials);
    for r in results {
        let (rec, t) = r?;
        trials.push(rec);
        transcripts.push(t);
    }
    Ok(ScenarioOutcome {
        summary: RunSummary {
            schema: SUMMARY_SCHEMA.to_string(),
            config: cfg.clone(),
            aggregates: Aggregates::from_trials(&trials),
            trials,
        },
        transcripts,
    })
}
