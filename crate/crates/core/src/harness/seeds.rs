//! Per-trial seeds derived from the master seed.
//!
//! Trial `i` gets the `i`-th output of a SplitMix64 generator started at the
//! master seed: `mix(master + (i + 1) · γ)` with `γ = 0x9E3779B97F4A7C15`.
//! Each seed is a pure function of `(master, i)`, so trials can run in any
//! order or in parallel.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn trial_seed(master: u64, trial: usize) -> u64 {
    mix(master.wrapping_add((trial as u64).wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}
