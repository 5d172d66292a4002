//! Protocol over pure entangled pairs.
//!
//! Alice keeps photon A of every pair and sends photon B, with decoys spliced
//! in at secret positions. Each pair is drawn from the shifted alphabet
//! `(U_s ⊗ U_s)|Ψ⟩`, so Bob's `Z_d` marginal is uniform, while the pair keeps
//! the fixed correlation `R_B − R_A ≡ c (mod d)`. Encoding `U_m` on photon B
//! moves that difference to `c + m`, which Bob reads after Alice announces
//! `R_A`.

use std::collections::BTreeMap;

use rand::Rng;

use super::decode::{decode_entangled, PublicLayout};
use super::session::{confirm_receipt, efficiency, eve_stats, run_check, send_sequence, CheckPlan};
use super::transcript::{PayloadKind, Sender, Transcript, Widths};
use super::{
    CheckMode, Protocol, ProtocolConfig, ProtocolError, SecretMessage, SequenceLayout,
    SessionReport, Variant,
};
use crate::channel::{Adversary, ChannelModel};
use crate::metrics::von_neumann_entropy;
use crate::qudit::{shift_unitary, Basis};
use crate::sources::{
    correlation_offset, make_decoy, randomized_pair, AmplitudeProfile, PhotonSlot, PreparationKind,
    PreparationRecord, Register,
};

/// Run one session with the message encoded on the traveling photons.
pub fn run_entangled_dsqc<R: Rng + ?Sized>(
    msg: &SecretMessage,
    profile: &AmplitudeProfile,
    cfg: &ProtocolConfig,
    channel: &ChannelModel,
    adversary: &Adversary,
    rng: &mut R,
) -> Result<SessionReport, ProtocolError> {
    entangled_session(msg, profile, cfg, channel, adversary, Variant::Eager, rng)
}

/// Run one session where Alice sends unencoded photons and, once the check
/// passes, announces `(dit + R_A) mod d` instead of `R_A`.
pub fn delayed_encode_entangled<R: Rng + ?Sized>(
    msg: &SecretMessage,
    profile: &AmplitudeProfile,
    cfg: &ProtocolConfig,
    channel: &ChannelModel,
    adversary: &Adversary,
    rng: &mut R,
) -> Result<SessionReport, ProtocolError> {
    entangled_session(msg, profile, cfg, channel, adversary, Variant::Delayed, rng)
}

fn entangled_session<R: Rng + ?Sized>(
    msg: &SecretMessage,
    profile: &AmplitudeProfile,
    cfg: &ProtocolConfig,
    channel: &ChannelModel,
    adversary: &Adversary,
    variant: Variant,
    rng: &mut R,
) -> Result<SessionReport, ProtocolError> {
    let d = profile.dim();
    if msg.d() != d {
        return Err(ProtocolError::DimensionMismatch {
            message: msg.d(),
            source_dim: d,
        });
    }
    channel.validate()?;
    let (total, n_checks) = cfg.plan(msg.len())?;
    let anti = cfg.anti_correlated_for(d);
    let offset = correlation_offset(anti);
    let widths = Widths::new(total, d);
    let layout = SequenceLayout::random(total, n_checks, rng);

    // (1) preparation
    let mut reg = Register::new();
    let mut travel: Vec<PhotonSlot> = Vec::with_capacity(total);
    let mut home: Vec<Option<PhotonSlot>> = Vec::with_capacity(total);
    let mut preps: Vec<PreparationRecord> = Vec::with_capacity(total);
    for pos in 0..total {
        let decoy = cfg.check == CheckMode::Decoys && layout.is_check(pos);
        let mut rec = if decoy {
            let (s, rec) = make_decoy(d, rng)?;
            travel.push(reg.add_single(s));
            home.push(None);
            rec
        } else {
            let (pair, rec) = randomized_pair(profile, anti, rng)?;
            let (a, b) = reg.add_pair(pair);
            travel.push(b);
            home.push(Some(a));
            rec
        };
        rec.position = pos;
        preps.push(rec);
    }

    // Dits bound to message positions; spare positions carry random filler.
    let bound: Vec<usize> = (0..layout.message_positions().len())
        .map(|k| {
            msg.dits()
                .get(k)
                .copied()
                .unwrap_or_else(|| rng.random_range(0..d))
        })
        .collect();

    // (2) eager encoding on photon B
    if variant == Variant::Eager {
        for (&pos, &m) in layout.message_positions().iter().zip(&bound) {
            if m != 0 {
                reg.apply(&travel[pos], &shift_unitary(d, m)?)?;
            }
        }
    }

    // (3) transmission
    let transport = send_sequence(&mut reg, &mut travel, channel, adversary, rng)?;
    let mut transcript = Transcript::new();
    confirm_receipt(&mut transcript, &transport.delivered, widths);

    // (4) channel check
    let mut reveals = Vec::with_capacity(n_checks);
    for &pos in layout.check_positions() {
        match cfg.check {
            CheckMode::Decoys => reveals.push(preps[pos]),
            CheckMode::PairSample => {
                let a = home[pos].expect("sampled check position holds a pair");
                let ra = reg.measure(&a, Basis::Zd, rng)?.outcome;
                reveals.push(PreparationRecord {
                    kind: PreparationKind::Decoy {
                        basis: Basis::Zd,
                        index: (ra + offset) % d,
                    },
                    position: pos,
                });
            }
        }
    }
    let check = run_check(
        &mut reg,
        &travel,
        &CheckPlan {
            reveals: &reveals,
            delivered: &transport.delivered,
            threshold: cfg.threshold,
        },
        &mut transcript,
        widths,
        rng,
    )?;

    let losses = transport.loss_counts(&layout);
    let message_positions_total = layout.message_positions().len();
    let entropy = von_neumann_entropy(profile);
    let bits = (d as f64).log2();

    if check.aborted {
        return Ok(SessionReport {
            protocol: Protocol::Entangled,
            variant,
            d,
            decoded: None,
            aborted: true,
            decoy_error_rate: check.rate,
            per_basis_error: check.per_basis_error,
            check: check.stats,
            efficiency: efficiency(total, message_positions_total, 0, 0.0, 0.0, 0.0, 0.0),
            losses,
            eve: None,
            transcript,
            layout,
        });
    }

    // (5) both parties measure the remaining photons in Z_d
    let public = PublicLayout::from_transcript(&transcript, total)?;
    let delivered_msg: Vec<usize> = public.delivered_message_positions().collect();
    let mut ra = Vec::with_capacity(delivered_msg.len());
    let mut bob = BTreeMap::new();
    for &pos in &delivered_msg {
        let a = home[pos].expect("message position holds a pair");
        ra.push(reg.measure(&a, Basis::Zd, rng)?.outcome);
        bob.insert(pos, reg.measure(&travel[pos], Basis::Zd, rng)?.outcome);
    }

    // (6) announcement
    match variant {
        Variant::Eager => {
            let payload: Vec<u64> = ra.iter().map(|&r| r as u64).collect();
            let n = payload.len() as u64;
            transcript.push(
                Sender::Alice,
                PayloadKind::OutcomeAnnounce,
                payload,
                n * widths.dit,
            );
        }
        Variant::Delayed => {
            let payload: Vec<u64> = ra
                .iter()
                .zip(msg.dits())
                .map(|(&r, &m)| ((m + r) % d) as u64)
                .collect();
            let n = payload.len() as u64;
            transcript.push(
                Sender::Alice,
                PayloadKind::DifferenceAnnounce,
                payload,
                n * widths.dit,
            );
        }
    }

    // (7) decoding
    let decoded = decode_entangled(&transcript, &bob, d, total, offset, msg.len())?;
    let eve = if adversary.is_present() {
        let eve_view: BTreeMap<usize, usize> = delivered_msg
            .iter()
            .map(|&p| (p, transport.eve[p].map_or(0, |r| r.outcome)))
            .collect();
        let guess = decode_entangled(&transcript, &eve_view, d, total, offset, msg.len())?;
        let intercepted = delivered_msg
            .iter()
            .filter(|&&p| transport.eve[p].is_some())
            .count();
        Some(eve_stats(&guess, msg, intercepted))
    } else {
        None
    };

    let announced = transcript
        .entries()
        .iter()
        .filter(|e| e.kind.is_message_phase())
        .map(|e| e.payload.len())
        .sum::<usize>();
    Ok(SessionReport {
        protocol: Protocol::Entangled,
        variant,
        d,
        decoded: Some(decoded),
        aborted: false,
        decoy_error_rate: check.rate,
        per_basis_error: check.per_basis_error,
        check: check.stats,
        efficiency: efficiency(
            total,
            message_positions_total,
            announced,
            bits,
            bits,
            2.0 * entropy,
            2.0 * bits,
        ),
        losses,
        eve,
        transcript,
        layout,
    })
}
