//! Steps shared by both protocols.

use rand::Rng;

use super::transcript::{basis_code, PayloadKind, Sender, Transcript, Widths};
use super::{
    error_rate_analysis, lost_positions, session_checks, CheckStats, EveStats, LossCounts,
    PerBasisError, ProtocolError, SecretMessage, SequenceLayout, SessionEfficiency,
};
use crate::channel::{transmit, Adversary, ChannelModel};
use crate::metrics::total_efficiency;
use crate::qudit::MeasurementRecord;
use crate::sources::{PhotonSlot, PreparationRecord, Register};

pub(crate) struct Transport {
    pub delivered: Vec<bool>,
    pub eve: Vec<Option<MeasurementRecord>>,
}

impl Transport {
    pub fn loss_counts(&self, layout: &SequenceLayout) -> LossCounts {
        let lost = self.delivered.iter().filter(|&&ok| !ok).count();
        let checks_lost = layout
            .check_positions()
            .iter()
            .filter(|&&p| !self.delivered[p])
            .count();
        LossCounts {
            sent: self.delivered.len(),
            lost,
            checks_lost,
            message_lost: lost - checks_lost,
        }
    }
}

/// Send every traveling photon through the channel exactly once, in order.
pub(crate) fn send_sequence<R: Rng + ?Sized>(
    reg: &mut Register,
    travel: &mut [PhotonSlot],
    channel: &ChannelModel,
    adversary: &Adversary,
    rng: &mut R,
) -> Result<Transport, ProtocolError> {
    let mut delivered = Vec::with_capacity(travel.len());
    let mut eve = Vec::with_capacity(travel.len());
    for slot in travel.iter_mut() {
        let r = transmit(reg, *slot, channel, adversary, rng)?;
        *slot = r.slot;
        delivered.push(r.delivered);
        eve.push(r.interception);
    }
    Ok(Transport { delivered, eve })
}

/// Bob confirms receipt and lists the positions that never arrived.
pub(crate) fn confirm_receipt(t: &mut Transcript, delivered: &[bool], w: Widths) {
    t.push(Sender::Bob, PayloadKind::ReceiptConfirm, Vec::new(), 1);
    let lost: Vec<u64> = lost_positions(delivered)
        .into_iter()
        .map(|p| p as u64)
        .collect();
    let bits = lost.len() as u64 * w.pos;
    t.push(Sender::Bob, PayloadKind::LossReport, lost, bits);
}

pub(crate) struct CheckPlan<'a> {
    pub reveals: &'a [PreparationRecord],
    pub delivered: &'a [bool],
    pub threshold: f64,
}

pub(crate) struct CheckOutcome {
    pub rate: f64,
    pub per_basis_error: PerBasisError,
    pub stats: CheckStats,
    pub aborted: bool,
}

/// Alice reveals every check position and state; Bob measures the delivered
/// ones in the revealed basis and announces whether to continue.
pub(crate) fn run_check<R: Rng + ?Sized>(
    reg: &mut Register,
    travel: &[PhotonSlot],
    plan: &CheckPlan<'_>,
    t: &mut Transcript,
    w: Widths,
    rng: &mut R,
) -> Result<CheckOutcome, ProtocolError> {
    let mut payload = Vec::with_capacity(plan.reveals.len() * 3);
    for r in plan.reveals {
        let (basis, index) = r
            .eigenstate()
            .ok_or(ProtocolError::NotAnEigenstate(r.position))?;
        payload.extend([r.position as u64, basis_code(basis), index as u64]);
    }
    let bits = plan.reveals.len() as u64 * (w.pos + 1 + w.dit);
    t.push(Sender::Alice, PayloadKind::DecoyReveal, payload, bits);

    let arrived: Vec<PreparationRecord> = plan
        .reveals
        .iter()
        .filter(|r| plan.delivered[r.position])
        .copied()
        .collect();
    let outcomes = arrived
        .iter()
        .map(|r| {
            let (basis, _) = r.eigenstate().expect("checked above");
            reg.measure(&travel[r.position], basis, rng)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let analysis = error_rate_analysis(&arrived, &outcomes)?;
    let (rate, per_basis_error, stats) = session_checks(&analysis);
    let aborted = rate > plan.threshold;
    t.push(
        Sender::Bob,
        PayloadKind::CheckVerdict,
        vec![u64::from(aborted)],
        1,
    );
    Ok(CheckOutcome {
        rate,
        per_basis_error,
        stats,
        aborted,
    })
}

/// Session efficiencies for `n` decoded dits, with per-dit message bits
/// `m_per`, classical bits `b_per`, and quantum cost `q_per` (entropy-based)
/// or `q_raw_per` (photon count).
pub(crate) fn efficiency(
    total: usize,
    message_positions: usize,
    n: usize,
    m_per: f64,
    b_per: f64,
    q_per: f64,
    q_raw_per: f64,
) -> SessionEfficiency {
    let eta_q = message_positions as f64 / total as f64;
    let nf = n as f64;
    let eta = |q: f64| {
        if n == 0 {
            0.0
        } else {
            total_efficiency(nf * m_per, nf * q, nf * b_per).unwrap_or(0.0)
        }
    };
    SessionEfficiency {
        eta_q,
        eta_t: eta(q_per),
        eta_t_photon_count: eta(q_raw_per),
    }
}

pub(crate) fn eve_stats(
    guess: &[Option<usize>],
    msg: &SecretMessage,
    intercepted: usize,
) -> EveStats {
    let (guessed, correct) = guess
        .iter()
        .zip(msg.dits())
        .filter_map(|(g, &m)| g.map(|g| g == m))
        .fold((0, 0), |(n, ok), hit| (n + 1, ok + usize::from(hit)));
    EveStats {
        intercepted,
        guessed,
        correct,
    }
}
