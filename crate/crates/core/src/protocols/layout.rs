use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Ordered photon sequence split into check positions (decoys or sampled
/// pairs) and message positions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceLayout {
    total_len: usize,
    check_positions: Vec<usize>,
    message_positions: Vec<usize>,
}

impl SequenceLayout {
    /// Build a layout from an explicit set of check positions.
    pub fn from_checks(total_len: usize, mut checks: Vec<usize>) -> Self {
        checks.sort_unstable();
        checks.dedup();
        checks.retain(|&p| p < total_len);
        let mut is_check = vec![false; total_len];
        for &p in &checks {
            is_check[p] = true;
        }
        let message_positions = (0..total_len).filter(|&p| !is_check[p]).collect();
        Self {
            total_len,
            check_positions: checks,
            message_positions,
        }
    }

    /// `n_checks` positions drawn uniformly without replacement.
    pub fn random<R: Rng + ?Sized>(total_len: usize, n_checks: usize, rng: &mut R) -> Self {
        let n_checks = n_checks.min(total_len);
        let checks = sample(rng, total_len, n_checks).into_vec();
        Self::from_checks(total_len, checks)
    }

    pub fn total_len(&self) -> usize {
        self.total_len
    }

    pub fn check_positions(&self) -> &[usize] {
        &self.check_positions
    }

    pub fn message_positions(&self) -> &[usize] {
        &self.message_positions
    }

    pub fn is_check(&self, pos: usize) -> bool {
        self.check_positions.binary_search(&pos).is_ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    proptest! {
        #[test]
        fn partition_is_disjoint_and_complete(total in 0usize..300, frac in 0.0f64..1.0, seed: u64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = (total as f64 * frac) as usize;
            let l = SequenceLayout::random(total, n, &mut rng);
            prop_assert_eq!(l.check_positions().len(), n);
            prop_assert_eq!(l.check_positions().len() + l.message_positions().len(), total);
            let mut all: Vec<usize> = l.check_positions().iter().chain(l.message_positions()).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..total).collect::<Vec<_>>());
            for &p in l.check_positions() {
                prop_assert!(l.is_check(p));
            }
        }
    }
}
