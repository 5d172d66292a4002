//! Classical-channel log of one session.
//!
//! Every entry carries its payload as a flat list of integers and the number
//! of bits it costs on the wire. With `w_pos = ⌈log2 total_len⌉` and
//! `w_dit = ⌈log2 d⌉` (both at least 1) the encodings are:
//!
//! | kind                  | payload                        | bits                        |
//! |-----------------------|--------------------------------|-----------------------------|
//! | `ReceiptConfirm`      | empty                          | 1                           |
//! | `LossReport`          | lost positions                 | `n · w_pos`                 |
//! | `DecoyReveal`         | `(position, basis, index)` × n | `n · (w_pos + 1 + w_dit)`   |
//! | `CheckVerdict`        | `[1]` abort or `[0]` continue  | 1                           |
//! | `OutcomeAnnounce`     | one outcome per position       | `n · w_dit`                 |
//! | `DifferenceAnnounce`  | one dit per position           | `n · w_dit`                 |
//! | `OriginalStateReveal` | `(basis, index)` × n           | `n · (1 + w_dit)`           |
//!
//! Bases are encoded as 0 for `Z_d` and 1 for `X_d`.

use serde::{Deserialize, Serialize};

use crate::qudit::Basis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sender {
    Alice,
    Bob,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PayloadKind {
    ReceiptConfirm,
    DecoyReveal,
    CheckVerdict,
    OutcomeAnnounce,
    OriginalStateReveal,
    DifferenceAnnounce,
    LossReport,
}

impl PayloadKind {
    /// Entries that carry message-dependent announcements.
    pub fn is_message_phase(self) -> bool {
        matches!(
            self,
            PayloadKind::OutcomeAnnounce
                | PayloadKind::OriginalStateReveal
                | PayloadKind::DifferenceAnnounce
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry {
    pub sender: Sender,
    pub kind: PayloadKind,
    pub bits: u64,
    pub payload: Vec<u64>,
}

/// Field widths used by the encoding table above.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Widths {
    pub pos: u64,
    pub dit: u64,
}

fn ceil_log2(n: usize) -> u64 {
    if n <= 1 {
        1
    } else {
        u64::from(usize::BITS - (n - 1).leading_zeros())
    }
}

impl Widths {
    pub fn new(total_len: usize, d: usize) -> Self {
        Self {
            pos: ceil_log2(total_len),
            dit: ceil_log2(d),
        }
    }
}

pub(crate) fn basis_code(b: Basis) -> u64 {
    match b {
        Basis::Zd => 0,
        Basis::Xd => 1,
    }
}

pub(crate) fn basis_from_code(c: u64) -> Basis {
    if c == 0 {
        Basis::Zd
    } else {
        Basis::Xd
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Transcript {
    entries: Vec<Entry>,
    bit_count: u64,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, sender: Sender, kind: PayloadKind, payload: Vec<u64>, bits: u64) {
        self.bit_count += bits;
        self.entries.push(Entry {
            sender,
            kind,
            bits,
            payload,
        });
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn bit_count(&self) -> u64 {
        self.bit_count
    }

    pub fn message_phase_bits(&self) -> u64 {
        self.entries
            .iter()
            .filter(|e| e.kind.is_message_phase())
            .map(|e| e.bits)
            .sum()
    }

    pub fn find(&self, kind: PayloadKind) -> Option<&Entry> {
        self.entries.iter().find(|e| e.kind == kind)
    }

    /// One JSON object per line with fields `seq, sender, kind, bits, payload`.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for (seq, e) in self.entries.iter().enumerate() {
            out.push_str(&entry_line(seq, e, None));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(s: &str) -> Result<Self, serde_json::Error> {
        let mut t = Transcript::new();
        for line in s.lines().filter(|l| !l.trim().is_empty()) {
            let l: LogLine = serde_json::from_str(line)?;
            t.push(l.sender, l.kind, l.payload, l.bits);
        }
        Ok(t)
    }
}

/// A transcript entry as written to a line-delimited log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogLine {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trial: Option<usize>,
    pub seq: usize,
    pub sender: Sender,
    pub kind: PayloadKind,
    pub bits: u64,
    pub payload: Vec<u64>,
}

pub(crate) fn entry_line(seq: usize, e: &Entry, trial: Option<usize>) -> String {
    let line = LogLine {
        trial,
        seq,
        sender: e.sender,
        kind: e.kind,
        bits: e.bits,
        payload: e.payload.clone(),
    };
    serde_json::to_string(&line).expect("log line serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn widths() {
        assert_eq!(Widths::new(1, 2), Widths { pos: 1, dit: 1 });
        assert_eq!(Widths::new(256, 3), Widths { pos: 8, dit: 2 });
        assert_eq!(Widths::new(257, 16), Widths { pos: 9, dit: 4 });
        assert_eq!(Widths::new(2000, 5).dit, 3);
    }

    #[test]
    fn bit_count_accumulates() {
        let mut t = Transcript::new();
        t.push(Sender::Bob, PayloadKind::ReceiptConfirm, vec![], 1);
        t.push(
            Sender::Alice,
            PayloadKind::OutcomeAnnounce,
            vec![1, 0, 1],
            3,
        );
        assert_eq!(t.bit_count(), 4);
        assert_eq!(t.message_phase_bits(), 3);
        let back = Transcript::from_jsonl(&t.to_jsonl()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn jsonl_field_order() {
        let mut t = Transcript::new();
        t.push(Sender::Bob, PayloadKind::CheckVerdict, vec![0], 1);
        assert_eq!(
            t.to_jsonl(),
            "{\"seq\":0,\"sender\":\"Bob\",\"kind\":\"CheckVerdict\",\"bits\":1,\"payload\":[0]}\n"
        );
    }
}
