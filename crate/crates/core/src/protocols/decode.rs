//! Receiver-side decoding from public announcements and local outcomes.
//!
//! Decoders see only the transcript and the receiver's own measurement
//! outcomes, keyed by sequence position. The same functions decode Eve's
//! view when handed her interception outcomes instead.

use std::collections::{BTreeMap, BTreeSet};

use super::transcript::{basis_from_code, PayloadKind, Transcript};
use super::{ProtocolError, Variant};
use crate::qudit::Basis;

/// Message positions and lost positions, reconstructed from the transcript.
pub(crate) struct PublicLayout {
    pub message_positions: Vec<usize>,
    pub lost: BTreeSet<usize>,
}

impl PublicLayout {
    pub fn from_transcript(t: &Transcript, total_len: usize) -> Result<Self, ProtocolError> {
        let lost: BTreeSet<usize> = t
            .find(PayloadKind::LossReport)
            .map(|e| e.payload.iter().map(|&p| p as usize).collect())
            .unwrap_or_default();
        let checks: BTreeSet<usize> = match t.find(PayloadKind::DecoyReveal) {
            Some(e) => {
                if e.payload.len() % 3 != 0 {
                    return Err(ProtocolError::Transcript(
                        "decoy reveal is not a list of triples".into(),
                    ));
                }
                e.payload.chunks(3).map(|c| c[0] as usize).collect()
            }
            None => BTreeSet::new(),
        };
        Ok(Self {
            message_positions: (0..total_len).filter(|p| !checks.contains(p)).collect(),
            lost,
        })
    }

    pub fn delivered_message_positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.message_positions
            .iter()
            .copied()
            .filter(|p| !self.lost.contains(p))
    }
}

fn outcome(outcomes: &BTreeMap<usize, usize>, pos: usize) -> Result<usize, ProtocolError> {
    outcomes
        .get(&pos)
        .copied()
        .ok_or_else(|| ProtocolError::Transcript(format!("no local outcome for position {pos}")))
}

fn sub_mod(a: usize, b: usize, d: usize) -> usize {
    (a % d + d - b % d) % d
}

/// Decode the entangled protocol.
///
/// `outcomes` holds `Z_d` results for delivered message positions and
/// `offset` is the public correlation offset of the pair alphabet. Eager
/// sessions give `(R_B − R_A − offset) mod d`; delayed sessions give
/// `(D − (R_B − offset)) mod d`.
pub fn decode_entangled(
    transcript: &Transcript,
    outcomes: &BTreeMap<usize, usize>,
    d: usize,
    total_len: usize,
    offset: usize,
    msg_len: usize,
) -> Result<Vec<Option<usize>>, ProtocolError> {
    let layout = PublicLayout::from_transcript(transcript, total_len)?;
    if let Some(e) = transcript.find(PayloadKind::OutcomeAnnounce) {
        let mut announced = e.payload.iter();
        let mut out = Vec::with_capacity(msg_len);
        for &pos in layout.message_positions.iter().take(msg_len) {
            if layout.lost.contains(&pos) {
                out.push(None);
                continue;
            }
            let ra = *announced
                .next()
                .ok_or_else(|| ProtocolError::Transcript("outcome announcement too short".into()))?
                as usize;
            let rb = outcome(outcomes, pos)?;
            out.push(Some(sub_mod(rb, ra + offset, d)));
        }
        Ok(out)
    } else if let Some(e) = transcript.find(PayloadKind::DifferenceAnnounce) {
        let mut out = vec![None; msg_len];
        for (k, (pos, &diff)) in layout
            .delivered_message_positions()
            .zip(&e.payload)
            .enumerate()
            .take(msg_len)
        {
            let rb = outcome(outcomes, pos)?;
            let ra = sub_mod(rb, offset, d);
            out[k] = Some(sub_mod(diff as usize, ra, d));
        }
        Ok(out)
    } else {
        Err(ProtocolError::Transcript(
            "no outcome or difference announcement".into(),
        ))
    }
}

/// Bases Alice revealed for the delivered message photons, in order.
pub(crate) fn revealed_states(
    transcript: &Transcript,
    total_len: usize,
) -> Result<Vec<(usize, Basis, usize)>, ProtocolError> {
    let layout = PublicLayout::from_transcript(transcript, total_len)?;
    let e = transcript
        .find(PayloadKind::OriginalStateReveal)
        .ok_or_else(|| ProtocolError::Transcript("no original-state reveal".into()))?;
    if e.payload.len() % 2 != 0 {
        return Err(ProtocolError::Transcript(
            "original-state reveal is not a list of pairs".into(),
        ));
    }
    Ok(layout
        .delivered_message_positions()
        .zip(e.payload.chunks(2))
        .map(|(pos, c)| (pos, basis_from_code(c[0]), c[1] as usize))
        .collect())
}

/// Decode the single-photon protocol from `outcomes` measured in the
/// revealed bases. Eager: `(outcome − index) mod d`. Delayed: the revealed
/// index already includes the dit, so `(revealed − outcome) mod d`.
pub fn decode_single_photon(
    transcript: &Transcript,
    outcomes: &BTreeMap<usize, usize>,
    d: usize,
    total_len: usize,
    msg_len: usize,
    variant: Variant,
) -> Result<Vec<Option<usize>>, ProtocolError> {
    let layout = PublicLayout::from_transcript(transcript, total_len)?;
    let reveals = revealed_states(transcript, total_len)?;
    match variant {
        Variant::Eager => {
            let by_pos: BTreeMap<usize, usize> = reveals.iter().map(|&(p, _, i)| (p, i)).collect();
            layout
                .message_positions
                .iter()
                .take(msg_len)
                .map(|pos| match by_pos.get(pos) {
                    None => Ok(None),
                    Some(&index) => Ok(Some(sub_mod(outcome(outcomes, *pos)?, index, d))),
                })
                .collect()
        }
        Variant::Delayed => {
            let mut out = vec![None; msg_len];
            for (k, &(pos, _, combined)) in reveals.iter().enumerate().take(msg_len) {
                out[k] = Some(sub_mod(combined, outcome(outcomes, pos)?, d));
            }
            Ok(out)
        }
    }
}
