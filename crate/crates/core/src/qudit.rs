//! Dense state-vector mechanics for one qudit (Bob) and two qudits
//! (Bob ⊗ Eve).
//!
//! Everything is expressed in the computational basis. Two-qudit states are
//! indexed as `first * d + second`, with the travelling qudit first and Eve's
//! ancilla second.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldElement;
use crate::mub::{inner, MubTable};

const NORM_TOL: f64 = 1e-10;
const PROB_TOL: f64 = 1e-8;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// A normalized pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let n: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(n));
        }
        Ok(PureState { amplitudes })
    }

    /// Rescales an arbitrary non-zero vector to unit norm.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let n: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::NotNormalized(n));
        }
        let s = 1.0 / n.sqrt();
        amplitudes.iter_mut().for_each(|a| *a *= s);
        Ok(PureState { amplitudes })
    }

    /// `|v_t^k>` taken from the table.
    pub fn basis(table: &MubTable, k: usize, t: usize) -> Result<Self> {
        Ok(PureState { amplitudes: table.basis_vector(k, t)? })
    }

    /// `a ⊗ b`.
    pub fn product(a: &PureState, b: &PureState) -> Self {
        let mut amplitudes = Vec::with_capacity(a.dim() * b.dim());
        for x in &a.amplitudes {
            for y in &b.amplitudes {
                amplitudes.push(x * y);
            }
        }
        PureState { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Euclidean distance `‖self − other‖`; no phase is factored out.
    pub fn distance(&self, other: &PureState) -> f64 {
        distance(&self.amplitudes, &other.amplitudes)
    }

    /// `|<self|other>|²`.
    pub fn fidelity(&self, other: &PureState) -> f64 {
        inner(&self.amplitudes, &other.amplitudes).norm_sqr()
    }
}

pub(crate) fn distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// A dense square matrix acting on the computational basis, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOp {
    dim: usize,
    matrix: Vec<Complex64>,
}

impl UnitaryOp {
    /// Wraps a row-major matrix. Unitarity is not checked here; see
    /// [`UnitaryOp::unitarity_deviation`].
    pub fn from_matrix(dim: usize, matrix: Vec<Complex64>) -> Result<Self> {
        if matrix.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, actual: matrix.len() });
        }
        Ok(UnitaryOp { dim, matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![Complex64::new(1.0, 0.0); dim])
    }

    pub fn diagonal(entries: &[Complex64]) -> Self {
        let dim = entries.len();
        let mut matrix = vec![zero(); dim * dim];
        for (i, &e) in entries.iter().enumerate() {
            matrix[i * dim + i] = e;
        }
        UnitaryOp { dim, matrix }
    }

    /// The permutation matrix sending `|j>` to `|perm[j]>`.
    pub fn permutation(perm: &[usize]) -> Self {
        let dim = perm.len();
        let mut matrix = vec![zero(); dim * dim];
        for (j, &i) in perm.iter().enumerate() {
            matrix[i * dim + j] = Complex64::new(1.0, 0.0);
        }
        UnitaryOp { dim, matrix }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[row * self.dim + col]
    }

    pub fn matrix(&self) -> &[Complex64] {
        &self.matrix
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut matrix = vec![zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                matrix[j * n + i] = self.matrix[i * n + j].conj();
            }
        }
        UnitaryOp { dim: n, matrix }
    }

    /// The product `self · rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &UnitaryOp) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, actual: rhs.dim });
        }
        let n = self.dim;
        let mut matrix = vec![zero(); n * n];
        for i in 0..n {
            for l in 0..n {
                let a = self.matrix[i * n + l];
                if a == zero() {
                    continue;
                }
                for j in 0..n {
                    matrix[i * n + j] += a * rhs.matrix[l * n + j];
                }
            }
        }
        Ok(UnitaryOp { dim: n, matrix })
    }

    /// `self ⊗ rhs`.
    pub fn tensor(&self, rhs: &UnitaryOp) -> Self {
        let (a, b) = (self.dim, rhs.dim);
        let n = a * b;
        let mut matrix = vec![zero(); n * n];
        for i1 in 0..a {
            for j1 in 0..a {
                let x = self.matrix[i1 * a + j1];
                if x == zero() {
                    continue;
                }
                for i2 in 0..b {
                    for j2 in 0..b {
                        matrix[(i1 * b + i2) * n + j1 * b + j2] = x * rhs.matrix[i2 * b + j2];
                    }
                }
            }
        }
        UnitaryOp { dim: n, matrix }
    }

    /// Largest entry of `|self − other|`.
    pub fn max_abs_diff(&self, other: &UnitaryOp) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        self.matrix
            .iter()
            .zip(&other.matrix)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    /// `‖U†U − I‖_max`.
    pub fn unitarity_deviation(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let s: Complex64 = (0..n)
                    .map(|l| self.matrix[l * n + i].conj() * self.matrix[l * n + j])
                    .sum();
                let delta = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((s - delta).norm());
            }
        }
        worst
    }

    pub fn apply(&self, state: &PureState) -> Result<PureState> {
        apply(self, state)
    }
}

/// Which tensor factor of a two-qudit state an operation targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subsystem {
    /// The travelling qudit.
    First,
    /// Eve's ancilla.
    Second,
}

/// Path on which Eve's controlled shift is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Bob → Alice: `|v¹_{t1}>|v¹_{t2}> ↦ |v¹_{t1}>|v¹_{t2⊕t1}>`.
    Forward,
    /// Alice → Bob: `|v¹_{t1}>|v¹_{t2}> ↦ |v¹_{t1}>|v¹_{t2⊖t1}>`.
    Backward,
}

/// Generalized Pauli `Z`: diagonal with `ω^{t⊙a}` at position `t`. Shifts
/// every non-computational basis vector `|v_t^k>` to `|v_{t⊖a}^k>`.
pub fn encoding_operator(table: &MubTable, a: FieldElement) -> Result<UnitaryOp> {
    let spec = table.spec();
    spec.check(&a)?;
    Ok(encoding_operator_idx(table, a.index()))
}

fn encoding_operator_idx(table: &MubTable, a: usize) -> UnitaryOp {
    let spec = table.spec();
    let p = spec.p();
    let diag: Vec<Complex64> = (0..table.dim())
        .map(|t| {
            let e = spec.first_digit_idx(spec.mul_idx(t, a));
            Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * e as f64 / p as f64)
        })
        .collect();
    UnitaryOp::diagonal(&diag)
}

/// The control permutation `W|t> = |⊖t>`, which maps `|v_t^k>` to `|v_{⊖t}^k>`
/// in every basis.
pub fn control_operator(table: &MubTable) -> UnitaryOp {
    let spec = table.spec();
    let perm: Vec<usize> = (0..table.dim()).map(|t| spec.neg_idx(t)).collect();
    UnitaryOp::permutation(&perm)
}

/// Eve's attack gate with the travelling qudit controlling in the dual basis.
pub fn controlled_shift(table: &MubTable, direction: Direction) -> UnitaryOp {
    controlled_shift_build(table, 1, direction)
}

/// As [`controlled_shift`], but with the control read out in basis
/// `control_basis` instead of the dual basis:
/// `Σ_s |v_s^{k'}><v_s^{k'}| ⊗ V₀^{±s}`.
pub fn controlled_shift_in_basis(
    table: &MubTable,
    control_basis: usize,
    direction: Direction,
) -> Result<UnitaryOp> {
    if control_basis > table.dim() {
        return Err(Error::BasisIndex { k: control_basis, t: 0, d: table.dim() });
    }
    Ok(controlled_shift_build(table, control_basis, direction))
}

fn controlled_shift_build(table: &MubTable, control_basis: usize, direction: Direction) -> UnitaryOp {
    let spec = table.spec();
    let d = table.dim();
    let n = d * d;
    let p = spec.p();
    let roots: Vec<Complex64> = (0..p)
        .map(|e| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * e as f64 / p as f64))
        .collect();
    // projectors onto the control basis vectors
    let projectors: Vec<Vec<Complex64>> = (0..d)
        .map(|s| {
            let v = table.vector(control_basis, s);
            let mut proj = vec![zero(); d * d];
            for i in 0..d {
                for j in 0..d {
                    proj[i * d + j] = v[i] * v[j].conj();
                }
            }
            proj
        })
        .collect();
    let mut matrix = vec![zero(); n * n];
    // V₀^{±s} is diagonal, so the gate is block diagonal in Eve's index
    for eve in 0..d {
        for (s, proj) in projectors.iter().enumerate() {
            let shift = match direction {
                Direction::Backward => s,
                Direction::Forward => spec.neg_idx(s),
            };
            let phase = roots[spec.first_digit_idx(spec.mul_idx(eve, shift)) as usize];
            for i in 0..d {
                for j in 0..d {
                    matrix[(i * d + eve) * n + j * d + eve] += proj[i * d + j] * phase;
                }
            }
        }
    }
    UnitaryOp { dim: n, matrix }
}

pub fn apply(op: &UnitaryOp, state: &PureState) -> Result<PureState> {
    if op.dim != state.dim() {
        return Err(Error::DimensionMismatch { expected: op.dim, actual: state.dim() });
    }
    let n = op.dim;
    let amplitudes = (0..n)
        .map(|i| {
            op.matrix[i * n..(i + 1) * n]
                .iter()
                .zip(&state.amplitudes)
                .map(|(a, b)| a * b)
                .sum()
        })
        .collect();
    Ok(PureState { amplitudes })
}

/// `op ⊗ I` or `I ⊗ op`.
pub fn embed_on_subsystem(op: &UnitaryOp, which: Subsystem) -> UnitaryOp {
    let id = UnitaryOp::identity(op.dim);
    match which {
        Subsystem::First => op.tensor(&id),
        Subsystem::Second => id.tensor(op),
    }
}

/// Same result as applying [`embed_on_subsystem`] to `state`, without
/// materializing the `d² × d²` matrix.
pub fn apply_on_subsystem(op: &UnitaryOp, state: &PureState, which: Subsystem) -> Result<PureState> {
    let d = op.dim;
    if state.dim() != d * d {
        return Err(Error::DimensionMismatch { expected: d * d, actual: state.dim() });
    }
    let psi = &state.amplitudes;
    let mut out = vec![zero(); d * d];
    for i1 in 0..d {
        for i2 in 0..d {
            out[i1 * d + i2] = match which {
                Subsystem::First => (0..d).map(|j| op.entry(i1, j) * psi[j * d + i2]).sum(),
                Subsystem::Second => (0..d).map(|j| op.entry(i2, j) * psi[i1 * d + j]).sum(),
            };
        }
    }
    Ok(PureState { amplitudes: out })
}

/// Born probabilities `|<v_t^k|ψ>|²` for every outcome `t`.
pub fn outcome_probabilities(state: &PureState, table: &MubTable, k: usize) -> Result<Vec<f64>> {
    let d = table.dim();
    if state.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, actual: state.dim() });
    }
    if k > d {
        return Err(Error::BasisIndex { k, t: 0, d });
    }
    Ok((0..d)
        .map(|t| inner(table.vector(k, t), &state.amplitudes).norm_sqr())
        .collect())
}

fn sample<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> Result<usize> {
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > PROB_TOL {
        return Err(Error::CorruptedState(total));
    }
    let u: f64 = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = i;
        if u < acc {
            return Ok(i);
        }
    }
    Ok(last)
}

/// Projective measurement of a single qudit in basis `k`. Returns the outcome
/// and the post-measurement state `|v_t^k>`.
pub fn measure_in_basis<R: Rng + ?Sized>(
    state: &PureState,
    table: &MubTable,
    k: usize,
    rng: &mut R,
) -> Result<(usize, PureState)> {
    let probs = outcome_probabilities(state, table, k)?;
    let t = sample(&probs, rng)?;
    Ok((t, PureState::basis(table, k, t)?))
}

/// Unnormalized conditional state of the other factor given outcome `t` of
/// `which` in basis `k`.
fn conditional_other(joint: &PureState, table: &MubTable, k: usize, t: usize, which: Subsystem) -> Vec<Complex64> {
    let d = table.dim();
    let v = table.vector(k, t);
    let psi = &joint.amplitudes;
    (0..d)
        .map(|o| match which {
            Subsystem::First => (0..d).map(|i| v[i].conj() * psi[i * d + o]).sum(),
            Subsystem::Second => (0..d).map(|i| v[i].conj() * psi[o * d + i]).sum(),
        })
        .collect()
}

fn check_joint(joint: &PureState, table: &MubTable, k: usize, t: usize) -> Result<()> {
    let d = table.dim();
    if joint.dim() != d * d {
        return Err(Error::DimensionMismatch { expected: d * d, actual: joint.dim() });
    }
    if k > d || t >= d {
        return Err(Error::BasisIndex { k, t, d });
    }
    Ok(())
}

/// Exact probability that measuring subsystem `which` of a two-qudit state in
/// basis `k` yields `t`.
pub fn subsystem_outcome_probability(
    joint: &PureState,
    table: &MubTable,
    k: usize,
    t: usize,
    which: Subsystem,
) -> Result<f64> {
    check_joint(joint, table, k, t)?;
    Ok(conditional_other(joint, table, k, t, which)
        .iter()
        .map(|a| a.norm_sqr())
        .sum())
}

/// Measures one factor of a two-qudit state in basis `k`. Returns the outcome
/// and the collapsed, normalized state of the *other* factor.
pub fn measure_subsystem<R: Rng + ?Sized>(
    joint: &PureState,
    table: &MubTable,
    k: usize,
    which: Subsystem,
    rng: &mut R,
) -> Result<(usize, PureState)> {
    check_joint(joint, table, k, 0)?;
    let conditionals: Vec<Vec<Complex64>> = (0..table.dim())
        .map(|t| conditional_other(joint, table, k, t, which))
        .collect();
    let probs: Vec<f64> = conditionals
        .iter()
        .map(|c| c.iter().map(|a| a.norm_sqr()).sum())
        .collect();
    let t = sample(&probs, rng)?;
    let other = PureState::normalized(conditionals[t].clone())?;
    Ok((t, other))
}
