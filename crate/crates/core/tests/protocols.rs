use dsqc_core::channel::{Adversary, Attenuation, BasisPolicy, ChannelModel};
use dsqc_core::protocols::{
    delayed_encode_entangled, delayed_encode_single_photon, run_entangled_dsqc,
    run_single_photon_dsqc, CheckMode, PayloadKind, ProtocolConfig, ProtocolError, SecretMessage,
    SessionReport, Transcript, Variant,
};
use dsqc_core::sources::AmplitudeProfile;
use dsqc_core::SimRng;
use rand::{Rng, SeedableRng};

const DIMS: [usize; 6] = [2, 3, 4, 5, 8, 16];

fn random_profile(d: usize, rng: &mut SimRng) -> AmplitudeProfile {
    let w: Vec<f64> = (0..d).map(|_| rng.random::<f64>() + 0.05).collect();
    let s: f64 = w.iter().sum();
    AmplitudeProfile::from_probabilities(&w.iter().map(|x| x / s).collect::<Vec<_>>()).unwrap()
}

#[allow(clippy::too_many_arguments)]
fn run(
    protocol: &str,
    variant: Variant,
    msg: &SecretMessage,
    profile: &AmplitudeProfile,
    cfg: &ProtocolConfig,
    channel: &ChannelModel,
    adversary: &Adversary,
    rng: &mut SimRng,
) -> Result<SessionReport, ProtocolError> {
    match (protocol, variant) {
        ("entangled", Variant::Eager) => {
            run_entangled_dsqc(msg, profile, cfg, channel, adversary, rng)
        }
        ("entangled", Variant::Delayed) => {
            delayed_encode_entangled(msg, profile, cfg, channel, adversary, rng)
        }
        (_, Variant::Eager) => run_single_photon_dsqc(msg, cfg, channel, adversary, rng),
        (_, Variant::Delayed) => delayed_encode_single_photon(msg, cfg, channel, adversary, rng),
    }
}

fn ceil_log2(n: usize) -> u64 {
    (n as f64).log2().ceil().max(1.0) as u64
}

#[test]
fn ideal_channel_decodes_every_dit() {
    let mut rng = SimRng::seed_from_u64(1);
    for d in DIMS {
        for protocol in ["entangled", "single-photon"] {
            for variant in [Variant::Eager, Variant::Delayed] {
                for _ in 0..3 {
                    let msg = SecretMessage::random(d, 64, &mut rng).unwrap();
                    let profile = random_profile(d, &mut rng);
                    let r = run(
                        protocol,
                        variant,
                        &msg,
                        &profile,
                        &ProtocolConfig::default(),
                        &ChannelModel::ideal(),
                        &Adversary::None,
                        &mut rng,
                    )
                    .unwrap();
                    assert!(!r.aborted);
                    assert_eq!(r.decoy_error_rate, 0.0);
                    let want: Vec<Option<usize>> = msg.dits().iter().map(|&m| Some(m)).collect();
                    assert_eq!(
                        r.decoded.as_ref(),
                        Some(&want),
                        "{protocol} {variant:?} d={d}"
                    );
                }
            }
        }
    }
}

#[test]
fn anti_correlated_choice_does_not_affect_decoding() {
    let mut rng = SimRng::seed_from_u64(2);
    for d in [2, 3, 5] {
        for anti in [false, true] {
            let cfg = ProtocolConfig {
                anti_correlated: Some(anti),
                ..ProtocolConfig::default()
            };
            let msg = SecretMessage::random(d, 100, &mut rng).unwrap();
            let profile = random_profile(d, &mut rng);
            let r = run_entangled_dsqc(
                &msg,
                &profile,
                &cfg,
                &ChannelModel::ideal(),
                &Adversary::None,
                &mut rng,
            )
            .unwrap();
            assert_eq!(r.accuracy_against(&msg), (100, 100));
        }
    }
}

#[test]
fn message_phase_bit_accounting() {
    let mut rng = SimRng::seed_from_u64(3);
    for d in DIMS {
        let msg = SecretMessage::random(d, 50, &mut rng).unwrap();
        let profile = AmplitudeProfile::uniform(d).unwrap();
        let w = ceil_log2(d);
        for variant in [Variant::Eager, Variant::Delayed] {
            let e = run(
                "entangled",
                variant,
                &msg,
                &profile,
                &ProtocolConfig::default(),
                &ChannelModel::ideal(),
                &Adversary::None,
                &mut rng,
            )
            .unwrap();
            assert_eq!(e.transcript.message_phase_bits(), 50 * w);
            let s = run(
                "single-photon",
                variant,
                &msg,
                &profile,
                &ProtocolConfig::default(),
                &ChannelModel::ideal(),
                &Adversary::None,
                &mut rng,
            )
            .unwrap();
            assert_eq!(s.transcript.message_phase_bits(), 50 * (1 + w));
        }
    }
}

#[test]
fn every_transcript_entry_matches_its_encoding() {
    let mut rng = SimRng::seed_from_u64(4);
    let d = 5;
    let msg = SecretMessage::random(d, 90, &mut rng).unwrap();
    let profile = AmplitudeProfile::uniform(d).unwrap();
    let channel = ChannelModel {
        loss: Some(Attenuation {
            lambda: 0.5,
            length: 1.0,
        }),
        depolarize_p: 0.0,
    };
    let r = run_entangled_dsqc(
        &msg,
        &profile,
        &ProtocolConfig::default(),
        &channel,
        &Adversary::None,
        &mut rng,
    )
    .unwrap();
    let total = r.layout.total_len();
    let wp = ceil_log2(total);
    let wd = ceil_log2(d);
    for e in r.transcript.entries() {
        let n = e.payload.len() as u64;
        let want = match e.kind {
            PayloadKind::ReceiptConfirm | PayloadKind::CheckVerdict => 1,
            PayloadKind::LossReport => n * wp,
            PayloadKind::DecoyReveal => (n / 3) * (wp + 1 + wd),
            PayloadKind::OutcomeAnnounce | PayloadKind::DifferenceAnnounce => n * wd,
            PayloadKind::OriginalStateReveal => (n / 2) * (1 + wd),
        };
        assert_eq!(e.bits, want, "{:?}", e.kind);
    }
    assert_eq!(
        r.transcript.bit_count(),
        r.transcript.entries().iter().map(|e| e.bits).sum::<u64>()
    );
}

#[test]
fn eager_and_delayed_agree_on_the_same_seed() {
    for d in [2, 3, 4] {
        let profile = AmplitudeProfile::from_probabilities(&vec![1.0 / d as f64; d]).unwrap();
        let mut seed_rng = SimRng::seed_from_u64(50 + d as u64);
        let msg = SecretMessage::random(d, 200, &mut seed_rng).unwrap();
        let cfg = ProtocolConfig::default();
        let eager = run_entangled_dsqc(
            &msg,
            &profile,
            &cfg,
            &ChannelModel::ideal(),
            &Adversary::None,
            &mut SimRng::seed_from_u64(7),
        )
        .unwrap();
        let delayed = delayed_encode_entangled(
            &msg,
            &profile,
            &cfg,
            &ChannelModel::ideal(),
            &Adversary::None,
            &mut SimRng::seed_from_u64(7),
        )
        .unwrap();
        assert_eq!(eager.decoded, delayed.decoded);
        assert_eq!(eager.layout, delayed.layout);
        assert_eq!(eager.transcript.bit_count(), delayed.transcript.bit_count());
    }
}

#[test]
fn passive_eve_with_transcript_only_guesses_at_chance() {
    for d in [2usize, 3, 5] {
        let mut rng = SimRng::seed_from_u64(10 + d as u64);
        let profile = AmplitudeProfile::from_probabilities(&{
            let mut p = vec![0.1 / (d - 1) as f64; d];
            p[0] = 0.9;
            p
        })
        .unwrap();
        let mut guessed = 0;
        let mut correct = 0;
        for variant in [Variant::Eager, Variant::Delayed] {
            let msg = SecretMessage::random(d, 3000, &mut rng).unwrap();
            let r = run(
                "entangled",
                variant,
                &msg,
                &profile,
                &ProtocolConfig::default(),
                &ChannelModel::ideal(),
                &Adversary::Passive,
                &mut rng,
            )
            .unwrap();
            let eve = r.eve.unwrap();
            assert_eq!(eve.intercepted, 0);
            guessed += eve.guessed;
            correct += eve.correct;
        }
        let acc = correct as f64 / guessed as f64;
        let p = 1.0 / d as f64;
        let sigma = (p * (1.0 - p) / guessed as f64).sqrt();
        assert!((acc - p).abs() < 4.0 * sigma, "d={d}: {acc}");
    }
}

#[test]
fn z_only_attack_without_decoys_is_invisible_and_complete() {
    let mut rng = SimRng::seed_from_u64(11);
    let cfg = ProtocolConfig {
        check: CheckMode::PairSample,
        ..ProtocolConfig::default()
    };
    let adversary = Adversary::InterceptResend {
        policy: BasisPolicy::FixedZ,
    };
    for d in [2, 3, 4] {
        let profile = random_profile(d, &mut rng);
        for variant in [Variant::Eager, Variant::Delayed] {
            let msg = SecretMessage::random(d, 400, &mut rng).unwrap();
            let r = run(
                "entangled",
                variant,
                &msg,
                &profile,
                &cfg,
                &ChannelModel::ideal(),
                &adversary,
                &mut rng,
            )
            .unwrap();
            assert!(!r.aborted);
            assert!(r.check.total().checked > 0);
            assert_eq!(r.check.total().errors, 0);
            assert_eq!(r.accuracy_against(&msg), (400, 400));
            let eve = r.eve.unwrap();
            assert_eq!((eve.guessed, eve.correct), (400, 400));
        }
    }
}

#[test]
fn z_only_attack_is_caught_by_decoys() {
    let mut rng = SimRng::seed_from_u64(12);
    let adversary = Adversary::InterceptResend {
        policy: BasisPolicy::FixedZ,
    };
    let profile = AmplitudeProfile::from_probabilities(&[0.8, 0.2]).unwrap();
    let msg = SecretMessage::random(2, 1000, &mut rng).unwrap();
    let r = run_entangled_dsqc(
        &msg,
        &profile,
        &ProtocolConfig::default(),
        &ChannelModel::ideal(),
        &adversary,
        &mut rng,
    )
    .unwrap();
    assert!(r.aborted);
    assert!(r.decoded.is_none());
    assert_eq!(r.check.zd.errors, 0);
    assert!(r.check.xd.errors > 0);
    assert!(r.transcript.find(PayloadKind::OutcomeAnnounce).is_none());
}

#[test]
fn intercept_resend_aborts_both_protocols() {
    let mut rng = SimRng::seed_from_u64(13);
    let adversary = Adversary::InterceptResend {
        policy: BasisPolicy::RandomZx,
    };
    for d in [2, 3, 8] {
        let profile = AmplitudeProfile::uniform(d).unwrap();
        for protocol in ["entangled", "single-photon"] {
            let msg = SecretMessage::random(d, 500, &mut rng).unwrap();
            let r = run(
                protocol,
                Variant::Eager,
                &msg,
                &profile,
                &ProtocolConfig::default(),
                &ChannelModel::ideal(),
                &adversary,
                &mut rng,
            )
            .unwrap();
            assert!(r.aborted, "{protocol} d={d}");
            assert!(r.decoy_error_rate > 0.05);
            assert!(r
                .transcript
                .entries()
                .iter()
                .all(|e| !e.kind.is_message_phase()));
        }
    }
}

#[test]
fn losses_leave_gaps_but_no_errors() {
    let mut rng = SimRng::seed_from_u64(14);
    let channel = ChannelModel {
        loss: Some(Attenuation {
            lambda: 1.0,
            length: 1.0,
        }),
        depolarize_p: 0.0,
    };
    for d in [2, 3] {
        let profile = random_profile(d, &mut rng);
        for protocol in ["entangled", "single-photon"] {
            for variant in [Variant::Eager, Variant::Delayed] {
                let msg = SecretMessage::random(d, 500, &mut rng).unwrap();
                let r = run(
                    protocol,
                    variant,
                    &msg,
                    &profile,
                    &ProtocolConfig::default(),
                    &channel,
                    &Adversary::None,
                    &mut rng,
                )
                .unwrap();
                assert!(!r.aborted);
                let (decoded, correct) = r.accuracy_against(&msg);
                assert_eq!(decoded, correct);
                assert!(r.losses.lost > 0);
                assert_eq!(r.losses.lost, r.losses.checks_lost + r.losses.message_lost);
                if variant == Variant::Eager {
                    assert_eq!(decoded, 500 - r.losses.message_lost);
                }
            }
        }
    }
}

#[test]
fn depolarizing_channel_error_rate() {
    let mut rng = SimRng::seed_from_u64(15);
    let channel = ChannelModel {
        loss: None,
        depolarize_p: 0.1,
    };
    let cfg = ProtocolConfig {
        threshold: 1.0,
        decoy_fraction: 0.5,
        ..ProtocolConfig::default()
    };
    let profile = AmplitudeProfile::from_probabilities(&[0.8, 0.2]).unwrap();
    let mut checked = 0;
    let mut errors = 0;
    for _ in 0..10 {
        let msg = SecretMessage::random(2, 1000, &mut rng).unwrap();
        let r =
            run_entangled_dsqc(&msg, &profile, &cfg, &channel, &Adversary::None, &mut rng).unwrap();
        checked += r.check.total().checked;
        errors += r.check.total().errors;
    }
    let rate = errors as f64 / checked as f64;
    assert!((rate - 0.05).abs() < 0.01, "{rate}");
}

#[test]
fn configuration_errors() {
    let mut rng = SimRng::seed_from_u64(16);
    let msg = SecretMessage::random(3, 10, &mut rng).unwrap();
    let profile = AmplitudeProfile::uniform(2).unwrap();
    let err = run_entangled_dsqc(
        &msg,
        &profile,
        &ProtocolConfig::default(),
        &ChannelModel::ideal(),
        &Adversary::None,
        &mut rng,
    )
    .unwrap_err();
    assert!(matches!(
        err,
        ProtocolError::DimensionMismatch {
            message: 3,
            source_dim: 2
        }
    ));

    let pair_sample = ProtocolConfig {
        check: CheckMode::PairSample,
        ..ProtocolConfig::default()
    };
    let err = run_single_photon_dsqc(
        &msg,
        &pair_sample,
        &ChannelModel::ideal(),
        &Adversary::None,
        &mut rng,
    )
    .unwrap_err();
    assert!(matches!(err, ProtocolError::UnsupportedCheck(_)));

    let short = ProtocolConfig {
        sequence_len: Some(8),
        ..ProtocolConfig::default()
    };
    let profile3 = AmplitudeProfile::uniform(3).unwrap();
    let err = run_entangled_dsqc(
        &msg,
        &profile3,
        &short,
        &ChannelModel::ideal(),
        &Adversary::None,
        &mut rng,
    )
    .unwrap_err();
    assert!(matches!(err, ProtocolError::MessageTooLong { len: 10, .. }));

    assert!(SecretMessage::new(3, vec![0, 3]).is_err());
    let bad = ChannelModel {
        loss: None,
        depolarize_p: 1.5,
    };
    assert!(run_single_photon_dsqc(
        &msg,
        &ProtocolConfig::default(),
        &bad,
        &Adversary::None,
        &mut rng
    )
    .is_err());
}

#[test]
fn transcript_log_round_trips() {
    let mut rng = SimRng::seed_from_u64(17);
    let msg = SecretMessage::random(4, 40, &mut rng).unwrap();
    let r = delayed_encode_single_photon(
        &msg,
        &ProtocolConfig::default(),
        &ChannelModel::ideal(),
        &Adversary::None,
        &mut rng,
    )
    .unwrap();
    let text = r.transcript.to_jsonl();
    assert_eq!(text.lines().count(), r.transcript.entries().len());
    assert_eq!(Transcript::from_jsonl(&text).unwrap(), r.transcript);
}
