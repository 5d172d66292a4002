//! Protocol over single qudits prepared in random `Z_d` or `X_d` eigenstates.
//!
//! A `Z_d` photon carries dit `m` through `U_m` and an `X_d` photon through
//! `U_m^x`; either way the eigenstate index moves by `m`. After the check
//! Alice reveals each photon's original basis and index and Bob reads the
//! dit as the index difference.

use std::collections::BTreeMap;

use rand::Rng;

use super::decode::{decode_single_photon, revealed_states, PublicLayout};
use super::session::{confirm_receipt, efficiency, eve_stats, run_check, send_sequence, CheckPlan};
use super::transcript::{basis_code, PayloadKind, Sender, Transcript, Widths};
use super::{
    CheckMode, Protocol, ProtocolConfig, ProtocolError, SecretMessage, SequenceLayout,
    SessionReport, Variant,
};
use crate::channel::{Adversary, ChannelModel};
use crate::qudit::{check_dim, phase_shift_unitary, shift_unitary, Basis};
use crate::sources::{make_decoy, make_single_photon, PhotonSlot, PreparationRecord, Register};

pub fn run_single_photon_dsqc<R: Rng + ?Sized>(
    msg: &SecretMessage,
    cfg: &ProtocolConfig,
    channel: &ChannelModel,
    adversary: &Adversary,
    rng: &mut R,
) -> Result<SessionReport, ProtocolError> {
    single_photon_session(msg, cfg, channel, adversary, Variant::Eager, rng)
}

/// Photons travel unencoded; the reveal of each retained photon becomes
/// `(basis, (index + dit) mod d)`.
pub fn delayed_encode_single_photon<R: Rng + ?Sized>(
    msg: &SecretMessage,
    cfg: &ProtocolConfig,
    channel: &ChannelModel,
    adversary: &Adversary,
    rng: &mut R,
) -> Result<SessionReport, ProtocolError> {
    single_photon_session(msg, cfg, channel, adversary, Variant::Delayed, rng)
}

fn single_photon_session<R: Rng + ?Sized>(
    msg: &SecretMessage,
    cfg: &ProtocolConfig,
    channel: &ChannelModel,
    adversary: &Adversary,
    variant: Variant,
    rng: &mut R,
) -> Result<SessionReport, ProtocolError> {
    let d = msg.d();
    check_dim(d)?;
    if cfg.check != CheckMode::Decoys {
        return Err(ProtocolError::UnsupportedCheck(cfg.check));
    }
    channel.validate()?;
    let (total, n_checks) = cfg.plan(msg.len())?;
    let widths = Widths::new(total, d);
    let layout = SequenceLayout::random(total, n_checks, rng);

    // (S1) preparation and eager encoding
    let mut reg = Register::new();
    let mut travel: Vec<PhotonSlot> = Vec::with_capacity(total);
    let mut preps: Vec<PreparationRecord> = Vec::with_capacity(total);
    for pos in 0..total {
        let (s, mut rec) = if layout.is_check(pos) {
            make_decoy(d, rng)?
        } else {
            make_single_photon(d, rng)?
        };
        rec.position = pos;
        travel.push(reg.add_single(s));
        preps.push(rec);
    }
    let bound: Vec<usize> = (0..layout.message_positions().len())
        .map(|k| {
            msg.dits()
                .get(k)
                .copied()
                .unwrap_or_else(|| rng.random_range(0..d))
        })
        .collect();
    if variant == Variant::Eager {
        for (&pos, &m) in layout.message_positions().iter().zip(&bound) {
            let (basis, _) = preps[pos].eigenstate().expect("single photon record");
            let u = match basis {
                Basis::Zd => shift_unitary(d, m)?,
                Basis::Xd => phase_shift_unitary(d, m)?,
            };
            reg.apply(&travel[pos], &u)?;
        }
    }

    // (S2) transmission
    let transport = send_sequence(&mut reg, &mut travel, channel, adversary, rng)?;
    let mut transcript = Transcript::new();
    confirm_receipt(&mut transcript, &transport.delivered, widths);

    // (S3) decoy check
    let reveals: Vec<PreparationRecord> =
        layout.check_positions().iter().map(|&p| preps[p]).collect();
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
    let bits = (d as f64).log2();

    if check.aborted {
        return Ok(SessionReport {
            protocol: Protocol::SinglePhoton,
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

    // (S4) reveal of the retained photons' original states
    let public = PublicLayout::from_transcript(&transcript, total)?;
    let delivered_msg: Vec<usize> = public.delivered_message_positions().collect();
    let mut payload = Vec::with_capacity(delivered_msg.len() * 2);
    let announced = match variant {
        Variant::Eager => delivered_msg.len(),
        Variant::Delayed => delivered_msg.len().min(msg.len()),
    };
    for (k, &pos) in delivered_msg.iter().enumerate().take(announced) {
        let (basis, index) = preps[pos].eigenstate().expect("single photon record");
        let shown = match variant {
            Variant::Eager => index,
            Variant::Delayed => (index + msg.dits()[k]) % d,
        };
        payload.extend([basis_code(basis), shown as u64]);
    }
    transcript.push(
        Sender::Alice,
        PayloadKind::OriginalStateReveal,
        payload,
        announced as u64 * (1 + widths.dit),
    );

    let mut bob = BTreeMap::new();
    for (pos, basis, _) in revealed_states(&transcript, total)? {
        bob.insert(pos, reg.measure(&travel[pos], basis, rng)?.outcome);
    }

    // (S5) decoding
    let decoded = decode_single_photon(&transcript, &bob, d, total, msg.len(), variant)?;
    let eve = if adversary.is_present() {
        let eve_view: BTreeMap<usize, usize> = bob
            .keys()
            .map(|&p| (p, transport.eve[p].map_or(0, |r| r.outcome)))
            .collect();
        let guess = decode_single_photon(&transcript, &eve_view, d, total, msg.len(), variant)?;
        let intercepted = bob.keys().filter(|&&p| transport.eve[p].is_some()).count();
        Some(eve_stats(&guess, msg, intercepted))
    } else {
        None
    };

    // One qudit per dit; the reveal costs one basis bit plus the index.
    Ok(SessionReport {
        protocol: Protocol::SinglePhoton,
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
            1.0 + bits,
            bits,
            bits,
        ),
        losses,
        eve,
        transcript,
        layout,
    })
}
