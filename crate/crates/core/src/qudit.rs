//! Exact state algebra for single qudits and two-qudit pairs.
//!
//! Dimensions are limited to `2..=MAX_DIM`. Joint amplitudes are stored with
//! subsystem A as the slow index: `amps[j * d + k]` is the coefficient of
//! `|j⟩_A ⊗ |k⟩_B`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported qudit dimension.
pub const MAX_DIM: usize = 16;

/// Tolerance used for normalization, unitarity and phase-equality checks.
pub const NORM_TOL: f64 = 1e-10;

pub type Amplitude = Complex64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuditError {
    #[error("dimension {0} outside supported range 2..={MAX_DIM}")]
    Dimension(usize),
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("expected {expected} amplitudes, got {got}")]
    Length { expected: usize, got: usize },
    #[error("state not normalized (squared norm {0})")]
    NotNormalized(f64),
    #[error("non-finite amplitude")]
    NonFinite,
    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),
}

pub type Result<T, E = QuditError> = std::result::Result<T, E>;

pub fn check_dim(d: usize) -> Result<()> {
    if (2..=MAX_DIM).contains(&d) {
        Ok(())
    } else {
        Err(QuditError::Dimension(d))
    }
}

fn check_index(d: usize, index: usize) -> Result<()> {
    if index < d {
        Ok(())
    } else {
        Err(QuditError::IndexOutOfRange { index, dim: d })
    }
}

/// `e^{2πi k/d}` with `k` reduced modulo `d` first.
pub fn root_of_unity(d: usize, k: usize) -> Amplitude {
    let k = k % d;
    if k == 0 {
        return Amplitude::new(1.0, 0.0);
    }
    Amplitude::from_polar(1.0, 2.0 * PI * k as f64 / d as f64)
}

fn squared_norm(amps: &[Amplitude]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum()
}

fn validate_amps(amps: &[Amplitude]) -> Result<()> {
    if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
        return Err(QuditError::NonFinite);
    }
    let n = squared_norm(amps);
    if (n - 1.0).abs() > NORM_TOL {
        return Err(QuditError::NotNormalized(n));
    }
    Ok(())
}

fn renormalize(amps: &mut [Amplitude]) {
    let n = squared_norm(amps).sqrt();
    for a in amps.iter_mut() {
        *a /= n;
    }
}

/// Measuring basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    /// Computational basis `|0⟩ … |d−1⟩`.
    Zd,
    /// Fourier-conjugate basis `|l⟩_x = (1/√d) Σ_j e^{2πi jl/d} |j⟩`.
    Xd,
}

impl Basis {
    pub const ALL: [Basis; 2] = [Basis::Zd, Basis::Xd];

    pub fn ket(self, d: usize, index: usize) -> Result<PureState> {
        match self {
            Basis::Zd => zd_ket(d, index),
            Basis::Xd => xd_ket(d, index),
        }
    }

    pub fn conjugate(self) -> Basis {
        match self {
            Basis::Zd => Basis::Xd,
            Basis::Xd => Basis::Zd,
        }
    }

    /// Amplitude vectors of every basis element, unchecked dimension.
    fn vectors(self, d: usize) -> Vec<Vec<Amplitude>> {
        (0..d)
            .map(|k| match self {
                Basis::Zd => {
                    let mut v = vec![Amplitude::new(0.0, 0.0); d];
                    v[k] = Amplitude::new(1.0, 0.0);
                    v
                }
                Basis::Xd => fourier_column(d, k),
            })
            .collect()
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Basis::Zd => f.write_str("Z"),
            Basis::Xd => f.write_str("X"),
        }
    }
}

fn fourier_column(d: usize, l: usize) -> Vec<Amplitude> {
    let s = 1.0 / (d as f64).sqrt();
    (0..d).map(|j| root_of_unity(d, j * l) * s).collect()
}

/// Normalized state of a single qudit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PureState {
    dim: usize,
    amps: Vec<Amplitude>,
}

impl PureState {
    pub fn new(amps: Vec<Amplitude>) -> Result<Self> {
        check_dim(amps.len())?;
        validate_amps(&amps)?;
        Ok(Self {
            dim: amps.len(),
            amps,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        squared_norm(&self.amps)
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &PureState) -> Result<Amplitude> {
        if self.dim != other.dim {
            return Err(QuditError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|⟨self|other⟩|²`; equals 1 exactly when the states agree up to global phase.
    pub fn fidelity(&self, other: &PureState) -> Result<f64> {
        self.overlap(other).map(|o| o.norm_sqr())
    }

    pub fn same_up_to_phase(&self, other: &PureState) -> bool {
        self.fidelity(other)
            .map(|f| (f - 1.0).abs() < NORM_TOL)
            .unwrap_or(false)
    }

    pub fn apply(&self, u: &Unitary) -> Result<PureState> {
        if u.dim != self.dim {
            return Err(QuditError::DimensionMismatch {
                left: u.dim,
                right: self.dim,
            });
        }
        Ok(PureState {
            dim: self.dim,
            amps: u.mul_vec(&self.amps),
        })
    }

    /// Born probabilities for a measurement in `basis`.
    pub fn probabilities(&self, basis: Basis) -> Vec<f64> {
        basis
            .vectors(self.dim)
            .iter()
            .map(|e| inner(e, &self.amps).norm_sqr())
            .collect()
    }

    /// Projective measurement; the state collapses onto the observed basis vector.
    pub fn measure<R: Rng + ?Sized>(
        &mut self,
        basis: Basis,
        rng: &mut R,
    ) -> Result<MeasurementRecord> {
        validate_amps(&self.amps)?;
        let vectors = basis.vectors(self.dim);
        let projections: Vec<Amplitude> = vectors.iter().map(|e| inner(e, &self.amps)).collect();
        let probs: Vec<f64> = projections.iter().map(|p| p.norm_sqr()).collect();
        let outcome = sample_index(&probs, rng);
        let p = projections[outcome];
        let scale = p / p.norm();
        self.amps = vectors[outcome].iter().map(|e| e * scale).collect();
        renormalize(&mut self.amps);
        Ok(MeasurementRecord { basis, outcome })
    }
}

/// `⟨e|v⟩`
fn inner(e: &[Amplitude], v: &[Amplitude]) -> Amplitude {
    e.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let total: f64 = probs.iter().sum();
    let u: f64 = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_nonzero = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last_nonzero = i;
        }
        acc += p;
        if u < acc && p > 0.0 {
            return i;
        }
    }
    last_nonzero
}

pub fn zd_ket(d: usize, j: usize) -> Result<PureState> {
    check_dim(d)?;
    check_index(d, j)?;
    Ok(PureState {
        dim: d,
        amps: Basis::Zd.vectors(d).swap_remove(j),
    })
}

pub fn xd_ket(d: usize, l: usize) -> Result<PureState> {
    check_dim(d)?;
    check_index(d, l)?;
    Ok(PureState {
        dim: d,
        amps: fourier_column(d, l),
    })
}

pub fn overlap(s1: &PureState, s2: &PureState) -> Result<Amplitude> {
    s1.overlap(s2)
}

/// Outcome of one projective measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub basis: Basis,
    pub outcome: usize,
}

/// Square unitary matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary {
    dim: usize,
    matrix: Vec<Amplitude>,
}

impl Unitary {
    pub fn from_matrix(dim: usize, matrix: Vec<Amplitude>) -> Result<Self> {
        check_dim(dim)?;
        if matrix.len() != dim * dim {
            return Err(QuditError::Length {
                expected: dim * dim,
                got: matrix.len(),
            });
        }
        let u = Self { dim, matrix };
        let dev = u.unitarity_deviation();
        if dev > NORM_TOL {
            return Err(QuditError::NotUnitary(dev));
        }
        Ok(u)
    }

    pub fn identity(d: usize) -> Result<Self> {
        shift_unitary(d, 0)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> Amplitude {
        self.matrix[row * self.dim + col]
    }

    pub fn adjoint(&self) -> Unitary {
        let d = self.dim;
        let mut m = vec![Amplitude::new(0.0, 0.0); d * d];
        for r in 0..d {
            for c in 0..d {
                m[c * d + r] = self.matrix[r * d + c].conj();
            }
        }
        Unitary { dim: d, matrix: m }
    }

    pub fn compose(&self, rhs: &Unitary) -> Result<Unitary> {
        if self.dim != rhs.dim {
            return Err(QuditError::DimensionMismatch {
                left: self.dim,
                right: rhs.dim,
            });
        }
        let d = self.dim;
        let mut m = vec![Amplitude::new(0.0, 0.0); d * d];
        for r in 0..d {
            for c in 0..d {
                m[r * d + c] = (0..d)
                    .map(|k| self.matrix[r * d + k] * rhs.matrix[k * d + c])
                    .sum();
            }
        }
        Ok(Unitary { dim: d, matrix: m })
    }

    /// Largest entrywise deviation of `U·U†` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for r in 0..d {
            for c in 0..d {
                let v: Amplitude = (0..d)
                    .map(|k| self.matrix[r * d + k] * self.matrix[c * d + k].conj())
                    .sum();
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((v - Amplitude::new(target, 0.0)).norm());
            }
        }
        worst
    }

    fn mul_vec(&self, v: &[Amplitude]) -> Vec<Amplitude> {
        let d = self.dim;
        (0..d)
            .map(|r| (0..d).map(|c| self.matrix[r * d + c] * v[c]).sum())
            .collect()
    }
}

/// `H_d` with entry `(j, k) = e^{2πi jk/d}/√d`, so `H_d|j⟩ = |j⟩_x`.
pub fn hadamard_d(d: usize) -> Result<Unitary> {
    check_dim(d)?;
    let s = 1.0 / (d as f64).sqrt();
    let mut m = Vec::with_capacity(d * d);
    for j in 0..d {
        for k in 0..d {
            m.push(root_of_unity(d, j * k) * s);
        }
    }
    Ok(Unitary { dim: d, matrix: m })
}

/// Cyclic shift `U_m = Σ_j |j+m mod d⟩⟨j|`.
pub fn shift_unitary(d: usize, m: usize) -> Result<Unitary> {
    check_dim(d)?;
    check_index(d, m)?;
    let mut mat = vec![Amplitude::new(0.0, 0.0); d * d];
    for j in 0..d {
        mat[((j + m) % d) * d + j] = Amplitude::new(1.0, 0.0);
    }
    Ok(Unitary {
        dim: d,
        matrix: mat,
    })
}

/// Phase-twisted shift `U_m^x = Σ_j e^{2πi jm/d} |j+m mod d⟩⟨j|`.
///
/// Maps `|l⟩_x` to `|l+m⟩_x` up to a global phase, whereas the plain shift
/// leaves every `X_d` eigenstate unchanged up to phase.
pub fn phase_shift_unitary(d: usize, m: usize) -> Result<Unitary> {
    check_dim(d)?;
    check_index(d, m)?;
    let mut mat = vec![Amplitude::new(0.0, 0.0); d * d];
    for j in 0..d {
        mat[((j + m) % d) * d + j] = root_of_unity(d, j * m);
    }
    Ok(Unitary {
        dim: d,
        matrix: mat,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subsystem {
    A,
    B,
}

impl Subsystem {
    pub fn partner(self) -> Subsystem {
        match self {
            Subsystem::A => Subsystem::B,
            Subsystem::B => Subsystem::A,
        }
    }
}

/// Normalized state of a two-qudit pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointState {
    dim: usize,
    amps: Vec<Amplitude>,
}

impl JointState {
    pub fn new(dim: usize, amps: Vec<Amplitude>) -> Result<Self> {
        check_dim(dim)?;
        if amps.len() != dim * dim {
            return Err(QuditError::Length {
                expected: dim * dim,
                got: amps.len(),
            });
        }
        validate_amps(&amps)?;
        Ok(Self { dim, amps })
    }

    pub fn product(a: &PureState, b: &PureState) -> Result<Self> {
        if a.dim != b.dim {
            return Err(QuditError::DimensionMismatch {
                left: a.dim,
                right: b.dim,
            });
        }
        let amps = a
            .amps
            .iter()
            .flat_map(|x| b.amps.iter().map(move |y| x * y))
            .collect();
        Ok(Self { dim: a.dim, amps })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.amps
    }

    pub fn amplitude(&self, a: usize, b: usize) -> Amplitude {
        self.amps[a * self.dim + b]
    }

    pub fn norm_sqr(&self) -> f64 {
        squared_norm(&self.amps)
    }

    pub fn fidelity(&self, other: &JointState) -> Result<f64> {
        if self.dim != other.dim {
            return Err(QuditError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(inner(&self.amps, &other.amps).norm_sqr())
    }

    /// `(u ⊗ I)` or `(I ⊗ u)` applied to the pair.
    pub fn apply_local(&self, sub: Subsystem, u: &Unitary) -> Result<JointState> {
        let d = self.dim;
        if u.dim != d {
            return Err(QuditError::DimensionMismatch {
                left: u.dim,
                right: d,
            });
        }
        let mut out = vec![Amplitude::new(0.0, 0.0); d * d];
        for a in 0..d {
            for b in 0..d {
                out[a * d + b] = match sub {
                    Subsystem::A => (0..d).map(|k| u.entry(a, k) * self.amps[k * d + b]).sum(),
                    Subsystem::B => (0..d).map(|k| u.entry(b, k) * self.amps[a * d + k]).sum(),
                };
            }
        }
        Ok(JointState { dim: d, amps: out })
    }

    /// Unnormalized conditional state of the partner of `sub` given that
    /// `sub` projects onto `e`.
    fn partner_component(&self, sub: Subsystem, e: &[Amplitude]) -> Vec<Amplitude> {
        let d = self.dim;
        (0..d)
            .map(|p| {
                (0..d)
                    .map(|k| {
                        let idx = match sub {
                            Subsystem::A => k * d + p,
                            Subsystem::B => p * d + k,
                        };
                        e[k].conj() * self.amps[idx]
                    })
                    .sum()
            })
            .collect()
    }

    fn assemble(&self, sub: Subsystem, own: &[Amplitude], partner: &[Amplitude]) -> Vec<Amplitude> {
        let (a, b) = match sub {
            Subsystem::A => (own, partner),
            Subsystem::B => (partner, own),
        };
        a.iter()
            .flat_map(|x| b.iter().map(move |y| x * y))
            .collect()
    }

    /// Born probabilities of measuring only `sub` in `basis`.
    pub fn marginal_probabilities(&self, sub: Subsystem, basis: Basis) -> Vec<f64> {
        basis
            .vectors(self.dim)
            .iter()
            .map(|e| squared_norm(&self.partner_component(sub, e)))
            .collect()
    }

    /// Joint Born probabilities for measuring A in `basis_a` and B in
    /// `basis_b`, indexed `[ka * d + kb]`.
    pub fn joint_probabilities(&self, basis_a: Basis, basis_b: Basis) -> Vec<f64> {
        let d = self.dim;
        let va = basis_a.vectors(d);
        let vb = basis_b.vectors(d);
        let mut out = Vec::with_capacity(d * d);
        for ea in &va {
            for eb in &vb {
                let e = self.assemble(Subsystem::A, ea, eb);
                out.push(inner(&e, &self.amps).norm_sqr());
            }
        }
        out
    }

    /// Measure one subsystem. The pair collapses to a product of the observed
    /// basis vector and the partner's conditional state.
    pub fn measure<R: Rng + ?Sized>(
        &mut self,
        sub: Subsystem,
        basis: Basis,
        rng: &mut R,
    ) -> Result<MeasurementRecord> {
        validate_amps(&self.amps)?;
        let vectors = basis.vectors(self.dim);
        let partners: Vec<Vec<Amplitude>> = vectors
            .iter()
            .map(|e| self.partner_component(sub, e))
            .collect();
        let probs: Vec<f64> = partners.iter().map(|p| squared_norm(p)).collect();
        let outcome = sample_index(&probs, rng);
        let mut amps = self.assemble(sub, &vectors[outcome], &partners[outcome]);
        renormalize(&mut amps);
        self.amps = amps;
        Ok(MeasurementRecord { basis, outcome })
    }

    /// Replace `sub` by `fresh`, leaving the partner in the mixture it would
    /// be in had `sub` been discarded. The mixture is sampled by first
    /// measuring `sub` in `Z_d`.
    pub fn replace_subsystem<R: Rng + ?Sized>(
        &mut self,
        sub: Subsystem,
        fresh: &PureState,
        rng: &mut R,
    ) -> Result<()> {
        if fresh.dim != self.dim {
            return Err(QuditError::DimensionMismatch {
                left: fresh.dim,
                right: self.dim,
            });
        }
        let rec = self.measure(sub, Basis::Zd, rng)?;
        let e = &Basis::Zd.vectors(self.dim)[rec.outcome];
        let mut partner = self.partner_component(sub, e);
        renormalize(&mut partner);
        self.amps = self.assemble(sub, &fresh.amps, &partner);
        Ok(())
    }
}

/// Free-function form of [`JointState::apply_local`].
pub fn apply_local(state: &JointState, sub: Subsystem, u: &Unitary) -> Result<JointState> {
    state.apply_local(sub, u)
}
