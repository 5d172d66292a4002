//! Preparation of pure entangled pairs, decoy photons and single photons.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::qudit::{
    check_dim, hadamard_d, shift_unitary, Amplitude, Basis, JointState, PureState, QuditError,
    Result, Subsystem, NORM_TOL,
};

/// Coefficients `a_j` of the correlated pair `Σ_j a_j |j⟩_A |j⟩_B`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeProfile {
    dim: usize,
    a: Vec<Amplitude>,
}

impl AmplitudeProfile {
    pub fn new(a: Vec<Amplitude>) -> Result<Self> {
        check_dim(a.len())?;
        if a.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
            return Err(QuditError::NonFinite);
        }
        let n: f64 = a.iter().map(|x| x.norm_sqr()).sum();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(QuditError::NotNormalized(n));
        }
        Ok(Self { dim: a.len(), a })
    }

    /// Maximally entangled profile `a_j = 1/√d`.
    pub fn uniform(d: usize) -> Result<Self> {
        check_dim(d)?;
        let s = 1.0 / (d as f64).sqrt();
        Ok(Self {
            dim: d,
            a: vec![Amplitude::new(s, 0.0); d],
        })
    }

    /// Real nonnegative amplitudes `a_j = √p_j`.
    pub fn from_probabilities(p: &[f64]) -> Result<Self> {
        if p.iter().any(|&x| x.is_nan() || x < 0.0) {
            return Err(QuditError::NonFinite);
        }
        Self::new(p.iter().map(|&x| Amplitude::new(x.sqrt(), 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.a
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.a.iter().map(|x| x.norm_sqr()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PreparationKind {
    /// Pair with collective shift `m` applied to both photons.
    EntangledPair {
        shift: usize,
    },
    Decoy {
        basis: Basis,
        index: usize,
    },
    SinglePhoton {
        basis: Basis,
        index: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreparationRecord {
    pub kind: PreparationKind,
    pub position: usize,
}

impl PreparationRecord {
    /// Basis and index for eigenstate preparations.
    pub fn eigenstate(&self) -> Option<(Basis, usize)> {
        match self.kind {
            PreparationKind::Decoy { basis, index }
            | PreparationKind::SinglePhoton { basis, index } => Some((basis, index)),
            PreparationKind::EntangledPair { .. } => None,
        }
    }
}

/// `Σ_j a_j |j⟩_A |j⟩_B`.
pub fn make_pure_pair(profile: &AmplitudeProfile) -> Result<JointState> {
    let d = profile.dim;
    let mut amps = vec![Amplitude::new(0.0, 0.0); d * d];
    for (j, a) in profile.a.iter().enumerate() {
        amps[j * d + j] = *a;
    }
    JointState::new(d, amps)
}

/// Pair in the anti-correlated form: the correlated pair followed by `U_1`
/// on B. At `d = 2` this is `a|01⟩ + b|10⟩`.
pub fn make_anti_correlated_pair(profile: &AmplitudeProfile) -> Result<JointState> {
    make_pure_pair(profile)?.apply_local(Subsystem::B, &shift_unitary(profile.dim, 1)?)
}

/// Offset `c` such that `R_B − R_A ≡ c (mod d)` for an unencoded pair.
pub fn correlation_offset(anti_correlated: bool) -> usize {
    usize::from(anti_correlated)
}

/// Draw `m` uniformly and return `(U_m ⊗ U_m)` applied to the base pair.
pub fn randomized_pair<R: Rng + ?Sized>(
    profile: &AmplitudeProfile,
    anti_correlated: bool,
    rng: &mut R,
) -> Result<(JointState, PreparationRecord)> {
    let d = profile.dim;
    let m = rng.random_range(0..d);
    Ok((
        shifted_pair(profile, anti_correlated, m)?,
        PreparationRecord {
            kind: PreparationKind::EntangledPair { shift: m },
            position: 0,
        },
    ))
}

/// Base pair with a fixed collective shift `m`.
pub fn shifted_pair(
    profile: &AmplitudeProfile,
    anti_correlated: bool,
    m: usize,
) -> Result<JointState> {
    let base = if anti_correlated {
        make_anti_correlated_pair(profile)?
    } else {
        make_pure_pair(profile)?
    };
    let u = shift_unitary(profile.dim, m)?;
    base.apply_local(Subsystem::A, &u)?
        .apply_local(Subsystem::B, &u)
}

fn random_eigenstate<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<(PureState, Basis, usize)> {
    check_dim(d)?;
    let basis = if rng.random::<bool>() {
        Basis::Xd
    } else {
        Basis::Zd
    };
    let index = rng.random_range(0..d);
    Ok((basis.ket(d, index)?, basis, index))
}

/// Decoy photon: uniformly random basis and index.
pub fn make_decoy<R: Rng + ?Sized>(
    d: usize,
    rng: &mut R,
) -> Result<(PureState, PreparationRecord)> {
    let (s, basis, index) = random_eigenstate(d, rng)?;
    Ok((
        s,
        PreparationRecord {
            kind: PreparationKind::Decoy { basis, index },
            position: 0,
        },
    ))
}

/// Decoy obtained by measuring photon A of `pair` in `Z_d`, which leaves B in
/// a `Z_d` eigenstate, then applying `I` or `H_d` to B.
pub fn decoy_from_pair<R: Rng + ?Sized>(
    mut pair: JointState,
    rng: &mut R,
) -> Result<(PureState, PreparationRecord)> {
    let d = pair.dim();
    pair.measure(Subsystem::A, Basis::Zd, rng)?;
    let probs = pair.marginal_probabilities(Subsystem::B, Basis::Zd);
    let index = probs
        .iter()
        .position(|&p| p > 0.5)
        .expect("photon B is in a Z_d eigenstate after A is measured");
    let b = Basis::Zd.ket(d, index)?;
    let basis = if rng.random::<bool>() {
        Basis::Xd
    } else {
        Basis::Zd
    };
    let photon = match basis {
        Basis::Zd => b,
        Basis::Xd => b.apply(&hadamard_d(d)?)?,
    };
    Ok((
        photon,
        PreparationRecord {
            kind: PreparationKind::Decoy { basis, index },
            position: 0,
        },
    ))
}

/// Single photon in a random `Z_d` or `X_d` eigenstate.
pub fn make_single_photon<R: Rng + ?Sized>(
    d: usize,
    rng: &mut R,
) -> Result<(PureState, PreparationRecord)> {
    let (s, basis, index) = random_eigenstate(d, rng)?;
    Ok((
        s,
        PreparationRecord {
            kind: PreparationKind::SinglePhoton { basis, index },
            position: 0,
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StateId(pub usize);

#[derive(Debug, Clone, PartialEq)]
pub enum QuantumSystem {
    Single(PureState),
    Pair(JointState),
}

/// Which part of a stored system a photon is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SlotPart {
    Whole,
    A,
    B,
}

impl From<Subsystem> for SlotPart {
    fn from(s: Subsystem) -> Self {
        match s {
            Subsystem::A => SlotPart::A,
            Subsystem::B => SlotPart::B,
        }
    }
}

/// A physical photon, which may share its quantum state with a partner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhotonSlot {
    pub state: StateId,
    pub part: SlotPart,
    pub lost: bool,
}

/// Session-owned store of every quantum system in flight.
#[derive(Debug, Clone, Default)]
pub struct Register {
    systems: Vec<QuantumSystem>,
}

impl Register {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_single(&mut self, s: PureState) -> PhotonSlot {
        self.systems.push(QuantumSystem::Single(s));
        PhotonSlot {
            state: StateId(self.systems.len() - 1),
            part: SlotPart::Whole,
            lost: false,
        }
    }

    /// Returns the (A, B) slots of a new pair.
    pub fn add_pair(&mut self, s: JointState) -> (PhotonSlot, PhotonSlot) {
        self.systems.push(QuantumSystem::Pair(s));
        let id = StateId(self.systems.len() - 1);
        (
            PhotonSlot {
                state: id,
                part: SlotPart::A,
                lost: false,
            },
            PhotonSlot {
                state: id,
                part: SlotPart::B,
                lost: false,
            },
        )
    }

    pub fn get(&self, id: StateId) -> &QuantumSystem {
        &self.systems[id.0]
    }

    pub fn dim(&self, slot: &PhotonSlot) -> usize {
        match self.get(slot.state) {
            QuantumSystem::Single(s) => s.dim(),
            QuantumSystem::Pair(p) => p.dim(),
        }
    }

    fn subsystem(part: SlotPart) -> Subsystem {
        match part {
            SlotPart::A => Subsystem::A,
            SlotPart::B => Subsystem::B,
            SlotPart::Whole => panic!("a pair slot must name subsystem A or B"),
        }
    }

    pub fn apply(&mut self, slot: &PhotonSlot, u: &crate::qudit::Unitary) -> Result<()> {
        let sys = &mut self.systems[slot.state.0];
        match sys {
            QuantumSystem::Single(s) => *s = s.apply(u)?,
            QuantumSystem::Pair(p) => *p = p.apply_local(Self::subsystem(slot.part), u)?,
        }
        Ok(())
    }

    pub fn measure<R: Rng + ?Sized>(
        &mut self,
        slot: &PhotonSlot,
        basis: Basis,
        rng: &mut R,
    ) -> Result<crate::qudit::MeasurementRecord> {
        match &mut self.systems[slot.state.0] {
            QuantumSystem::Single(s) => s.measure(basis, rng),
            QuantumSystem::Pair(p) => p.measure(Self::subsystem(slot.part), basis, rng),
        }
    }

    /// Discard the photon's current state and put `fresh` in its place.
    pub fn replace<R: Rng + ?Sized>(
        &mut self,
        slot: &PhotonSlot,
        fresh: PureState,
        rng: &mut R,
    ) -> Result<()> {
        match &mut self.systems[slot.state.0] {
            QuantumSystem::Single(s) => {
                if s.dim() != fresh.dim() {
                    return Err(QuditError::DimensionMismatch {
                        left: s.dim(),
                        right: fresh.dim(),
                    });
                }
                *s = fresh;
                Ok(())
            }
            QuantumSystem::Pair(p) => p.replace_subsystem(Self::subsystem(slot.part), &fresh, rng),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qudit::{xd_ket, zd_ket};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn anti_correlated_two_dim_form() {
        let (a, b) = (0.8f64.sqrt(), 0.2f64.sqrt());
        let prof = AmplitudeProfile::from_probabilities(&[0.8, 0.2]).unwrap();
        let psi = make_anti_correlated_pair(&prof).unwrap();
        assert!((psi.amplitude(0, 1).re - a).abs() < 1e-15);
        assert!((psi.amplitude(1, 0).re - b).abs() < 1e-15);
        assert_eq!(psi.amplitude(0, 0).norm(), 0.0);
        assert_eq!(psi.amplitude(1, 1).norm(), 0.0);
    }

    #[test]
    fn uniform_anti_correlated_is_psi_plus() {
        let psi = make_anti_correlated_pair(&AmplitudeProfile::uniform(2).unwrap()).unwrap();
        let s = 0.5f64.sqrt();
        let want = [0.0, s, s, 0.0];
        for (amp, w) in psi.amplitudes().iter().zip(want) {
            assert!((amp.re - w).abs() < 1e-15 && amp.im == 0.0);
        }
    }

    #[test]
    fn three_dim_pair_layout() {
        let prof = AmplitudeProfile::from_probabilities(&[0.5, 0.3, 0.2]).unwrap();
        let pair = make_pure_pair(&prof).unwrap();
        let probs: Vec<f64> = pair.amplitudes().iter().map(|a| a.norm_sqr()).collect();
        let want = [0.5, 0.0, 0.0, 0.0, 0.3, 0.0, 0.0, 0.0, 0.2];
        for (p, w) in probs.iter().zip(want) {
            assert!((p - w).abs() < 1e-15);
        }
    }

    #[test]
    fn profile_validation() {
        assert!(matches!(
            AmplitudeProfile::from_probabilities(&[0.5, 0.6]),
            Err(QuditError::NotNormalized(_))
        ));
        assert!(AmplitudeProfile::from_probabilities(&[1.0]).is_err());
        assert!(AmplitudeProfile::from_probabilities(&[-0.1, 1.1]).is_err());
    }

    #[test]
    fn shift_one_on_two_dim_gives_primed_state() {
        let prof = AmplitudeProfile::from_probabilities(&[0.8, 0.2]).unwrap();
        let primed = shifted_pair(&prof, true, 1).unwrap();
        assert!((primed.amplitude(1, 0).re - 0.8f64.sqrt()).abs() < 1e-15);
        assert!((primed.amplitude(0, 1).re - 0.2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn randomized_pairs_keep_z_correlation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (d, anti) in [(2, true), (3, false), (5, false), (4, true)] {
            let prof = AmplitudeProfile::uniform(d).unwrap();
            let c = correlation_offset(anti);
            for _ in 0..40 {
                let (mut pair, rec) = randomized_pair(&prof, anti, &mut rng).unwrap();
                assert!(matches!(rec.kind, PreparationKind::EntangledPair { shift } if shift < d));
                let ra = pair
                    .measure(Subsystem::A, Basis::Zd, &mut rng)
                    .unwrap()
                    .outcome;
                let rb = pair
                    .measure(Subsystem::B, Basis::Zd, &mut rng)
                    .unwrap()
                    .outcome;
                assert_eq!((rb + d - ra) % d, c);
            }
        }
    }

    #[test]
    fn decoys_match_their_records() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in [2, 3, 8] {
            for _ in 0..50 {
                let (mut s, rec) = make_decoy(d, &mut rng).unwrap();
                let (basis, index) = rec.eigenstate().unwrap();
                assert!(s.same_up_to_phase(&basis.ket(d, index).unwrap()));
                assert_eq!(s.measure(basis, &mut rng).unwrap().outcome, index);
            }
        }
        let want = xd_ket(3, 1).unwrap();
        assert_eq!(Basis::Xd.ket(3, 1).unwrap(), want);
        assert_eq!(Basis::Zd.ket(2, 1).unwrap(), zd_ket(2, 1).unwrap());
    }

    #[test]
    fn decoy_from_pair_is_an_eigenstate_of_its_record() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let prof = AmplitudeProfile::from_probabilities(&[0.5, 0.3, 0.2]).unwrap();
        for _ in 0..60 {
            let (pair, _) = randomized_pair(&prof, false, &mut rng).unwrap();
            let (s, rec) = decoy_from_pair(pair, &mut rng).unwrap();
            let (basis, index) = rec.eigenstate().unwrap();
            assert!(s.same_up_to_phase(&basis.ket(3, index).unwrap()));
        }
    }

    #[test]
    fn register_measure_and_replace() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut reg = Register::new();
        let prof = AmplitudeProfile::uniform(2).unwrap();
        let (a, b) = reg.add_pair(make_pure_pair(&prof).unwrap());
        reg.replace(&b, zd_ket(2, 1).unwrap(), &mut rng).unwrap();
        assert_eq!(reg.measure(&b, Basis::Zd, &mut rng).unwrap().outcome, 1);
        let ra = reg.measure(&a, Basis::Zd, &mut rng).unwrap().outcome;
        assert!(ra < 2);
        let single = reg.add_single(zd_ket(2, 0).unwrap());
        assert_eq!(single.part, SlotPart::Whole);
        assert_eq!(reg.dim(&single), 2);
    }
}
