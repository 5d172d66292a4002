//! Scenario configuration, read from TOML.
//!
//! ```toml
//! name = "example"
//! protocol = "entangled"        # or "single-photon"
//! variant = "eager"             # or "delayed"
//! d = 2
//! trials = 100
//! seed = 7
//! decoy_fraction = 0.1
//! threshold = 0.05
//! check = "decoys"              # or "pair-sample" (entangled only)
//! # anti_correlated = true      # default: true exactly when d = 2
//! # sequence_len = 512          # default: sized to the message
//!
//! [profile]
//! kind = "probabilities"        # or "uniform", "amplitudes" (re = [...], im = [...])
//! p = [0.8, 0.2]
//!
//! [message]
//! kind = "random"               # or "explicit" with dits = [...]
//! length = 256
//!
//! [channel]
//! depolarize_p = 0.0
//! loss = { lambda = 1.0, length = 0.5 }
//!
//! [adversary]
//! kind = "intercept-resend"     # or "none", "passive"
//! policy = "random-zx"          # or "fixed-z", "fixed-x"
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{Adversary, ChannelModel};
use crate::protocols::{CheckMode, Protocol, ProtocolConfig, Variant};
use crate::qudit::{Amplitude, MAX_DIM};
use crate::sources::AmplitudeProfile;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProfileSpec {
    Uniform,
    Probabilities { p: Vec<f64> },
    Amplitudes { re: Vec<f64>, im: Vec<f64> },
}

impl ProfileSpec {
    pub fn build(&self, d: usize) -> Result<AmplitudeProfile, String> {
        let r = match self {
            ProfileSpec::Uniform => AmplitudeProfile::uniform(d),
            ProfileSpec::Probabilities { p } => {
                if p.len() != d {
                    return Err(format!("{} probabilities for d = {d}", p.len()));
                }
                AmplitudeProfile::from_probabilities(p)
            }
            ProfileSpec::Amplitudes { re, im } => {
                if re.len() != d || im.len() != d {
                    return Err(format!(
                        "{} real and {} imaginary parts for d = {d}",
                        re.len(),
                        im.len()
                    ));
                }
                AmplitudeProfile::new(
                    re.iter()
                        .zip(im)
                        .map(|(&a, &b)| Amplitude::new(a, b))
                        .collect(),
                )
            }
        };
        r.map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MessageSpec {
    Random { length: usize },
    Explicit { dits: Vec<usize> },
}

impl MessageSpec {
    pub fn len(&self) -> usize {
        match self {
            MessageSpec::Random { length } => *length,
            MessageSpec::Explicit { dits } => dits.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn default_profile() -> ProfileSpec {
    ProfileSpec::Uniform
}

fn default_decoy_fraction() -> f64 {
    0.1
}

fn default_threshold() -> f64 {
    0.05
}

fn default_check() -> CheckMode {
    CheckMode::Decoys
}

fn default_variant() -> Variant {
    Variant::Eager
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    pub protocol: Protocol,
    #[serde(default = "default_variant")]
    pub variant: Variant,
    pub d: usize,
    pub trials: usize,
    pub seed: u64,
    #[serde(default = "default_decoy_fraction")]
    pub decoy_fraction: f64,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_check")]
    pub check: CheckMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anti_correlated: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence_len: Option<usize>,
    #[serde(default = "default_profile")]
    pub profile: ProfileSpec,
    pub message: MessageSpec,
    #[serde(default)]
    pub channel: ChannelModel,
    #[serde(default)]
    pub adversary: Adversary,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldError {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid scenario config:\n{}", list(.0))]
    Invalid(Vec<FieldError>),
    #[error("cannot parse scenario config: {0}")]
    Parse(#[from] toml::de::Error),
}

fn list(errors: &[FieldError]) -> String {
    errors
        .iter()
        .map(|e| format!("  - {e}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl ScenarioConfig {
    pub fn from_toml(s: &str) -> Result<Self, ConfigError> {
        let cfg: ScenarioConfig = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario config serializes")
    }

    pub fn protocol_config(&self) -> ProtocolConfig {
        ProtocolConfig {
            decoy_fraction: self.decoy_fraction,
            threshold: self.threshold,
            check: self.check,
            anti_correlated: self.anti_correlated,
            sequence_len: self.sequence_len,
        }
    }

    /// Check every field and report all offending ones together.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut errs = Vec::new();
        let mut bad =
            |field: &'static str, message: String| errs.push(FieldError { field, message });
        let d_ok = (2..=MAX_DIM).contains(&self.d);
        if !d_ok {
            bad("d", format!("{} outside 2..={MAX_DIM}", self.d));
        }
        if self.seed > i64::MAX as u64 {
            bad("seed", format!("{} does not fit a TOML integer", self.seed));
        }
        if self.trials == 0 {
            bad("trials", "must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.decoy_fraction) {
            bad(
                "decoy_fraction",
                format!("{} outside [0, 1)", self.decoy_fraction),
            );
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            bad("threshold", format!("{} outside [0, 1]", self.threshold));
        }
        if self.check == CheckMode::PairSample && self.protocol == Protocol::SinglePhoton {
            bad(
                "check",
                "pair-sample checks need the entangled protocol".into(),
            );
        }
        if self.sequence_len == Some(0) {
            bad("sequence_len", "must be at least 1".into());
        }
        if d_ok && self.protocol == Protocol::Entangled {
            if let Err(e) = self.profile.build(self.d) {
                bad("profile", e);
            }
        }
        if self.message.is_empty() {
            bad("message", "must contain at least one dit".into());
        }
        if let MessageSpec::Explicit { dits } = &self.message {
            if let Some(x) = dits.iter().find(|&&x| x >= self.d) {
                bad(
                    "message",
                    format!("dit {x} out of range for d = {}", self.d),
                );
            }
        }
        if let Some(loss) = self.channel.loss {
            if !(loss.lambda.is_finite() && loss.lambda >= 0.0) {
                bad(
                    "channel.loss.lambda",
                    format!("{} must be >= 0", loss.lambda),
                );
            }
            if !(loss.length.is_finite() && loss.length >= 0.0) {
                bad(
                    "channel.loss.length",
                    format!("{} must be >= 0", loss.length),
                );
            }
        }
        if !(0.0..=1.0).contains(&self.channel.depolarize_p) {
            bad(
                "channel.depolarize_p",
                format!("{} outside [0, 1]", self.channel.depolarize_p),
            );
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(errs))
        }
    }
}
