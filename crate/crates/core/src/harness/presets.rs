//! Named scenarios shipped with the simulator.

use crate::channel::{Adversary, Attenuation, BasisPolicy, ChannelModel};
use crate::protocols::{CheckMode, Protocol, Variant};

use super::config::{MessageSpec, ProfileSpec, ScenarioConfig};

pub const PRESET_NAMES: &[&str] = &[
    "baseline-ideal",
    "eve-intercept",
    "eve-z-only-no-decoy",
    "lossy-channel",
    "depolarizing",
    "delayed-encoding",
    "single-photon-ideal",
];

fn base(name: &str) -> ScenarioConfig {
    ScenarioConfig {
        name: name.to_string(),
        protocol: Protocol::Entangled,
        variant: Variant::Eager,
        d: 2,
        trials: 100,
        seed: 20_070_101,
        decoy_fraction: 0.1,
        threshold: 0.05,
        check: CheckMode::Decoys,
        anti_correlated: None,
        sequence_len: None,
        profile: ProfileSpec::Probabilities { p: vec![0.8, 0.2] },
        message: MessageSpec::Random { length: 256 },
        channel: ChannelModel::ideal(),
        adversary: Adversary::None,
    }
}

pub fn preset(name: &str) -> Option<ScenarioConfig> {
    let cfg = match name {
        "baseline-ideal" => base(name),
        // 48 trials × 223 decoys ≈ 1.07·10^4 checked decoys.
        "eve-intercept" => ScenarioConfig {
            trials: 48,
            message: MessageSpec::Random { length: 2000 },
            adversary: Adversary::InterceptResend {
                policy: BasisPolicy::RandomZx,
            },
            ..base(name)
        },
        "eve-z-only-no-decoy" => ScenarioConfig {
            trials: 20,
            check: CheckMode::PairSample,
            adversary: Adversary::InterceptResend {
                policy: BasisPolicy::FixedZ,
            },
            ..base(name)
        },
        "lossy-channel" => ScenarioConfig {
            message: MessageSpec::Random { length: 1000 },
            channel: ChannelModel {
                loss: Some(Attenuation {
                    lambda: 1.0,
                    length: std::f64::consts::LN_2,
                }),
                depolarize_p: 0.0,
            },
            ..base(name)
        },
        "depolarizing" => ScenarioConfig {
            trials: 50,
            threshold: 0.1,
            message: MessageSpec::Random { length: 1000 },
            channel: ChannelModel {
                loss: None,
                depolarize_p: 0.1,
            },
            ..base(name)
        },
        "delayed-encoding" => ScenarioConfig {
            trials: 50,
            variant: Variant::Delayed,
            d: 3,
            profile: ProfileSpec::Probabilities {
                p: vec![0.5, 0.3, 0.2],
            },
            ..base(name)
        },
        "single-photon-ideal" => ScenarioConfig {
            trials: 50,
            protocol: Protocol::SinglePhoton,
            d: 4,
            profile: ProfileSpec::Uniform,
            ..base(name)
        },
        _ => return None,
    };
    Some(cfg)
}

pub fn all_presets() -> Vec<ScenarioConfig> {
    PRESET_NAMES
        .iter()
        .map(|n| preset(n).expect("every listed preset exists"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for cfg in all_presets() {
            cfg.validate()
                .unwrap_or_else(|e| panic!("{}: {e}", cfg.name));
        }
        assert!(preset("nope").is_none());
    }
}
