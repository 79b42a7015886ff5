//! Density matrices over labeled qubit slots, the Bell basis and Werner states.
//!
//! A [`DensityMatrix`] carries an ordered list of slot labels. Position 0 of the
//! label list is the most significant bit of the matrix index, so `a.tensor(&b)`
//! is the ordinary Kronecker product with `a`'s labels first. Operations that
//! need a particular layout (measurement, evolution) reorder by label instead of
//! doing index arithmetic at the call site.

use std::fmt;

use nalgebra::{Complex, ComplexField};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::num::{cr, Real};

/// Name of a qubit slot, e.g. `3` for the stationary atom of node A.
pub type Slot = u8;

/// Numerical tolerances used when validating and comparing states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerance {
    pub hermiticity: f64,
    pub trace: f64,
    pub psd: f64,
    pub equality: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            hermiticity: 1e-12,
            trace: 1e-12,
            psd: 1e-10,
            equality: 1e-9,
        }
    }
}

impl Tolerance {
    /// Tolerances appropriate for single precision.
    pub fn single_precision() -> Self {
        Self {
            hermiticity: 1e-5,
            trace: 1e-5,
            psd: 1e-4,
            equality: 1e-4,
        }
    }

    /// Default tolerances for the given scalar type.
    pub fn for_scalar<T: Real>() -> Self {
        if T::default_epsilon().to_f64_lossy() > 1e-10 {
            Self::single_precision()
        } else {
            Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.hermiticity, self.trace, self.psd, self.equality];
        if all.iter().all(|&x| x > 0.0 && x.is_finite()) {
            Ok(())
        } else {
            Err(Error::domain("tolerances must be strictly positive"))
        }
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix over labeled qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Real> {
    matrix: CMatrix<T>,
    labels: Vec<Slot>,
}

impl<T: Real> DensityMatrix<T> {
    /// Validates `matrix` against the default tolerances for `T`.
    pub fn new(matrix: CMatrix<T>, labels: Vec<Slot>) -> Result<Self> {
        Self::with_tolerance(matrix, labels, &Tolerance::for_scalar::<T>())
    }

    pub fn with_tolerance(matrix: CMatrix<T>, labels: Vec<Slot>, tol: &Tolerance) -> Result<Self> {
        check_layout(&matrix, &labels)?;
        let state = Self { matrix, labels };
        state.validate(tol)?;
        Ok(state)
    }

    /// Skips validation; callers guarantee the invariants (e.g. outputs of
    /// unitary conjugation or normalized projections).
    pub(crate) fn from_parts(matrix: CMatrix<T>, labels: Vec<Slot>) -> Self {
        debug_assert_eq!(matrix.nrows(), 1 << labels.len());
        Self { matrix, labels }
    }

    pub fn validate(&self, tol: &Tolerance) -> Result<()> {
        let herm = linalg::hermiticity_defect(&self.matrix).to_f64_lossy();
        if herm > tol.hermiticity {
            return Err(Error::InvalidState(format!(
                "hermiticity defect {herm:e} exceeds {:e}",
                tol.hermiticity
            )));
        }
        let trace = self.matrix.trace();
        let trace_err = (trace - cr(T::one())).modulus().to_f64_lossy();
        if trace_err > tol.trace {
            return Err(Error::InvalidState(format!("trace deviates from 1 by {trace_err:e}")));
        }
        let hermitian_part = (&self.matrix + self.matrix.adjoint()) * cr(T::lit(0.5));
        let min_eig = linalg::hermitian_eigenvalues(&hermitian_part)
            .first()
            .copied()
            .unwrap_or_else(T::zero)
            .to_f64_lossy();
        if min_eig < -tol.psd {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(())
    }

    /// `I / dim` over the given slots.
    pub fn maximally_mixed(labels: Vec<Slot>) -> Result<Self> {
        let dim = 1usize << labels.len();
        let m = linalg::identity::<T>(dim) * cr(T::one() / T::from_usize(dim).unwrap());
        check_layout(&m, &labels)?;
        Ok(Self::from_parts(m, labels))
    }

    /// `|ψ⟩⟨ψ|` for a normalized state vector.
    pub fn pure(vector: &CVector<T>, labels: Vec<Slot>) -> Result<Self> {
        let norm = vector.norm();
        if (norm - T::one()).abs().to_f64_lossy() > 1e-9 {
            return Err(Error::InvalidState(format!("state vector norm {norm}")));
        }
        let m = linalg::outer(vector);
        check_layout(&m, &labels)?;
        Ok(Self::from_parts(m, labels))
    }

    /// Computational basis projector `|b_1 … b_n⟩⟨b_1 … b_n|`.
    pub fn basis_state(bits: &[u8], labels: Vec<Slot>) -> Result<Self> {
        if bits.len() != labels.len() || bits.iter().any(|&b| b > 1) {
            return Err(Error::shape(
                format!("{} bits in {{0,1}}", labels.len()),
                format!("{bits:?}"),
            ));
        }
        let dim = 1usize << labels.len();
        let index = bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
        let mut m = CMatrix::zeros(dim, dim);
        m[(index, index)] = cr(T::one());
        check_layout(&m, &labels)?;
        Ok(Self::from_parts(m, labels))
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.matrix
    }

    pub fn labels(&self) -> &[Slot] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn num_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn trace(&self) -> Complex<T> {
        self.matrix.trace()
    }

    /// Same matrix, new slot names.
    pub fn relabeled(&self, labels: Vec<Slot>) -> Result<Self> {
        if labels.len() != self.labels.len() {
            return Err(Error::shape(self.labels.len(), labels.len()));
        }
        check_layout(&self.matrix, &labels)?;
        Ok(Self::from_parts(self.matrix.clone(), labels))
    }

    /// `self ⊗ other`; the label sets must be disjoint.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        if let Some(dup) = self.labels.iter().find(|l| other.labels.contains(l)) {
            return Err(Error::Label(format!("slot {dup} appears in both factors")));
        }
        let labels = self.labels.iter().chain(&other.labels).copied().collect();
        Ok(Self::from_parts(linalg::kron(&self.matrix, &other.matrix), labels))
    }

    /// Permutes qubits so that the labels read `order`.
    pub fn reorder(&self, order: &[Slot]) -> Result<Self> {
        if order == self.labels.as_slice() {
            return Ok(self.clone());
        }
        let positions = self.positions_of(order)?;
        if positions.len() != self.labels.len() {
            return Err(Error::Label(format!(
                "reorder needs every slot of {:?}, got {order:?}",
                self.labels
            )));
        }
        let n = self.labels.len();
        let map: Vec<usize> = (0..self.dim())
            .map(|new| {
                positions.iter().enumerate().fold(0usize, |acc, (p, &old_pos)| {
                    let bit = (new >> (n - 1 - p)) & 1;
                    acc | (bit << (n - 1 - old_pos))
                })
            })
            .collect();
        let m = CMatrix::from_fn(self.dim(), self.dim(), |i, j| self.matrix[(map[i], map[j])]);
        Ok(Self::from_parts(m, order.to_vec()))
    }

    /// Reduced state over `keep` (in the order given).
    pub fn partial_trace(&self, keep: &[Slot]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::domain("partial trace needs at least one kept slot"));
        }
        let kept = self.positions_of(keep)?;
        let traced: Vec<usize> = (0..self.labels.len()).filter(|p| !kept.contains(p)).collect();
        let n = self.labels.len();
        let kmask = masks(&kept, n);
        let rmask = masks(&traced, n);
        let out_dim = kmask.len();
        let m = CMatrix::from_fn(out_dim, out_dim, |i, j| {
            rmask.iter().fold(Complex::new(T::zero(), T::zero()), |acc, &r| {
                acc + self.matrix[(kmask[i] | r, kmask[j] | r)]
            })
        });
        Ok(Self::from_parts(m, keep.to_vec()))
    }

    /// Unnormalized block `⟨b|ρ|b⟩` over the unmeasured slots, after projecting
    /// `measured` slots onto the given bits. Returned labels keep their relative
    /// order from `self`.
    pub fn conditional_block(&self, measured: &[(Slot, u8)]) -> Result<(CMatrix<T>, Vec<Slot>)> {
        let slots: Vec<Slot> = measured.iter().map(|&(s, _)| s).collect();
        let positions = self.positions_of(&slots)?;
        let n = self.labels.len();
        let base = positions
            .iter()
            .zip(measured)
            .fold(0usize, |acc, (&p, &(_, bit))| acc | ((bit as usize & 1) << (n - 1 - p)));
        let rest: Vec<usize> = (0..n).filter(|p| !positions.contains(p)).collect();
        let kmask = masks(&rest, n);
        let m = CMatrix::from_fn(kmask.len(), kmask.len(), |i, j| {
            self.matrix[(base | kmask[i], base | kmask[j])]
        });
        let labels = rest.iter().map(|&p| self.labels[p]).collect();
        Ok((m, labels))
    }

    /// Probability of the computational-basis outcome on `measured`.
    pub fn outcome_probability(&self, measured: &[(Slot, u8)]) -> Result<T> {
        Ok(self.conditional_block(measured)?.0.trace().re)
    }

    /// Convex combination `p·a + (1-p)·b` on identical layouts.
    pub fn mix(p: T, a: &Self, b: &Self) -> Result<Self> {
        if a.labels != b.labels {
            return Err(Error::Label("mixture of states on different slots".into()));
        }
        if p < T::zero() || p > T::one() {
            return Err(Error::domain("mixing weight outside [0,1]"));
        }
        let m = &a.matrix * cr(p) + &b.matrix * cr(T::one() - p);
        Ok(Self::from_parts(m, a.labels.clone()))
    }

    /// `½‖a − b‖₁`, aligning `other` to this state's slot order first.
    pub fn trace_distance(&self, other: &Self) -> Result<T> {
        let other = other.reorder(&self.labels)?;
        Ok(linalg::trace_norm(&(&self.matrix - &other.matrix)) * T::lit(0.5))
    }

    /// Largest entrywise modulus of the difference, after label alignment.
    pub fn max_deviation(&self, other: &Self) -> Result<T> {
        let other = other.reorder(&self.labels)?;
        Ok(linalg::max_abs(&(&self.matrix - &other.matrix)))
    }

    pub fn purity(&self) -> T {
        (&self.matrix * &self.matrix).trace().re
    }

    fn positions_of(&self, slots: &[Slot]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(slots.len());
        for s in slots {
            let p = self
                .labels
                .iter()
                .position(|l| l == s)
                .ok_or_else(|| Error::Label(format!("slot {s} not in {:?}", self.labels)))?;
            if out.contains(&p) {
                return Err(Error::Label(format!("slot {s} listed twice")));
            }
            out.push(p);
        }
        Ok(out)
    }
}

fn check_layout<T: Real>(m: &CMatrix<T>, labels: &[Slot]) -> Result<()> {
    if !m.is_square() {
        return Err(Error::shape("square matrix", format!("{}x{}", m.nrows(), m.ncols())));
    }
    if labels.len() >= usize::BITS as usize || m.nrows() != 1usize << labels.len() {
        return Err(Error::shape(format!("dimension 2^{}", labels.len()), m.nrows()));
    }
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(Error::Label(format!("duplicate slot {l}")));
        }
    }
    Ok(())
}

/// For each value of the sub-register at `positions`, the full-index bits it sets.
fn masks(positions: &[usize], n: usize) -> Vec<usize> {
    let k = positions.len();
    (0..1usize << k)
        .map(|v| {
            positions
                .iter()
                .enumerate()
                .fold(0usize, |acc, (q, &p)| acc | (((v >> (k - 1 - q)) & 1) << (n - 1 - p)))
        })
        .collect()
}

/// The four Bell states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Bell {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl Bell {
    pub const ALL: [Bell; 4] = [Bell::PhiPlus, Bell::PhiMinus, Bell::PsiPlus, Bell::PsiMinus];

    pub fn index(self) -> usize {
        self as usize
    }

    /// `|φ±⟩ = (|00⟩ ± |11⟩)/√2`, `|ψ±⟩ = (|01⟩ ± |10⟩)/√2`.
    pub fn vector<T: Real>(self) -> CVector<T> {
        let h = T::one() / T::lit(2.0).sqrt();
        let (a, b, sign) = self.support();
        let mut v = CVector::zeros(4);
        v[a] = cr(h);
        v[b] = cr(h * sign);
        v
    }

    fn support<T: Real>(self) -> (usize, usize, T) {
        match self {
            Bell::PhiPlus => (0, 3, T::one()),
            Bell::PhiMinus => (0, 3, -T::one()),
            Bell::PsiPlus => (1, 2, T::one()),
            Bell::PsiMinus => (1, 2, -T::one()),
        }
    }

    /// Entries are exactly `±½`, so the four projectors sum to the identity exactly.
    pub fn projector<T: Real>(self) -> BellProjector<T> {
        let (a, b, sign) = self.support::<T>();
        let half = T::lit(0.5);
        let mut matrix = CMatrix::zeros(4, 4);
        matrix[(a, a)] = cr(half);
        matrix[(b, b)] = cr(half);
        matrix[(a, b)] = cr(half * sign);
        matrix[(b, a)] = cr(half * sign);
        BellProjector { which: self, matrix }
    }

    /// Projector as a two-qubit state on `(a, b)`.
    pub fn state<T: Real>(self, pair: (Slot, Slot)) -> Result<DensityMatrix<T>> {
        DensityMatrix::pure(&self.vector(), vec![pair.0, pair.1])
    }
}

impl fmt::Display for Bell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Bell::PhiPlus => "Phi+",
            Bell::PhiMinus => "Phi-",
            Bell::PsiPlus => "Psi+",
            Bell::PsiMinus => "Psi-",
        })
    }
}

/// Rank-one projector onto a Bell state.
#[derive(Debug, Clone, PartialEq)]
pub struct BellProjector<T: Real> {
    pub which: Bell,
    pub matrix: CMatrix<T>,
}

/// Unitary whose columns are the Bell vectors in [`Bell::ALL`] order.
pub fn bell_basis<T: Real>() -> CMatrix<T> {
    let cols: Vec<CVector<T>> = Bell::ALL.iter().map(|b| b.vector()).collect();
    CMatrix::from_columns(&cols)
}

/// True when `f` does not exceed the purification threshold 1/2.
pub fn is_below_threshold<T: Real>(f: T) -> bool {
    f <= T::lit(0.5)
}

/// Werner state `f Φ⁺ + (1-f)/3 (Φ⁻ + Ψ⁺ + Ψ⁻)` on the slot pair `(a, b)`.
pub fn werner<T: Real>(f: T, pair: (Slot, Slot)) -> Result<DensityMatrix<T>> {
    if !(f >= T::zero() && f <= T::one()) {
        return Err(Error::domain(format!("Werner fidelity {f} outside [0,1]")));
    }
    if is_below_threshold(f) {
        log::warn!("Werner fidelity {f} is below the purification threshold 1/2");
    }
    let rest = (T::one() - f) / T::lit(3.0);
    let weights = [f, rest, rest, rest];
    bell_diagonal(weights, pair)
}

/// Bell-diagonal state with weights in [`Bell::ALL`] order.
pub fn bell_diagonal<T: Real>(weights: [T; 4], pair: (Slot, Slot)) -> Result<DensityMatrix<T>> {
    if weights.iter().any(|&w| w < T::zero()) {
        return Err(Error::domain("negative Bell weight"));
    }
    let total = weights.iter().fold(T::zero(), |a, &w| a + w);
    if (total - T::one()).abs().to_f64_lossy() > 1e-12_f64.max(T::default_epsilon().to_f64_lossy() * 8.0) {
        return Err(Error::domain(format!("Bell weights sum to {total}")));
    }
    let mut m = CMatrix::zeros(4, 4);
    for (b, w) in Bell::ALL.iter().zip(weights) {
        m += b.projector::<T>().matrix * cr(w);
    }
    Ok(DensityMatrix::from_parts(m, vec![pair.0, pair.1]))
}

/// Overlap `Tr[Φ⁺ ρ]` with `pair.0` as the node-A qubit.
pub fn fidelity<T: Real>(rho: &DensityMatrix<T>, pair: (Slot, Slot)) -> Result<T> {
    if rho.dim() != 4 {
        return Err(Error::shape("4x4 two-qubit state", rho.dim()));
    }
    let aligned = rho.reorder(&[pair.0, pair.1])?;
    let v = Bell::PhiPlus.vector::<T>();
    Ok((v.adjoint() * aligned.matrix() * &v)[(0, 0)].re)
}

/// Fidelity of a two-qubit state in its own label order.
pub fn pair_fidelity<T: Real>(rho: &DensityMatrix<T>) -> Result<T> {
    if rho.num_qubits() != 2 {
        return Err(Error::shape("two-qubit state", rho.num_qubits()));
    }
    fidelity(rho, (rho.labels()[0], rho.labels()[1]))
}

pub fn tensor<T: Real>(a: &DensityMatrix<T>, b: &DensityMatrix<T>) -> Result<DensityMatrix<T>> {
    a.tensor(b)
}

pub fn partial_trace<T: Real>(rho: &DensityMatrix<T>, keep: &[Slot]) -> Result<DensityMatrix<T>> {
    rho.partial_trace(keep)
}

/// A two-qubit state written in the Bell basis.
#[derive(Debug, Clone, PartialEq)]
pub struct BellDecomposition<T: Real> {
    /// Diagonal weights in [`Bell::ALL`] order.
    pub weights: [T; 4],
    /// Largest off-diagonal modulus in the Bell basis.
    pub off_diagonal_norm: T,
    /// Full matrix `⟨B_i|ρ|B_j⟩`.
    pub bell_matrix: CMatrix<T>,
}

impl<T: Real> BellDecomposition<T> {
    pub fn weight(&self, b: Bell) -> T {
        self.weights[b.index()]
    }

    pub fn coherence(&self, row: Bell, col: Bell) -> Complex<T> {
        self.bell_matrix[(row.index(), col.index())]
    }

    /// Back to the computational basis.
    pub fn reconstruct(&self) -> CMatrix<T> {
        let b = bell_basis::<T>();
        &b * &self.bell_matrix * b.adjoint()
    }
}

/// Bell-basis representation of a two-qubit state (labels taken in order).
pub fn bell_decompose<T: Real>(rho: &DensityMatrix<T>) -> Result<BellDecomposition<T>> {
    if rho.dim() != 4 {
        return Err(Error::shape("4x4 two-qubit state", rho.dim()));
    }
    let b = bell_basis::<T>();
    let bell_matrix = b.adjoint() * rho.matrix() * &b;
    let weights = [0, 1, 2, 3].map(|i| bell_matrix[(i, i)].re);
    let mut off = T::zero();
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                off = off.max(bell_matrix[(i, j)].modulus());
            }
        }
    }
    Ok(BellDecomposition {
        weights,
        off_diagonal_norm: off,
        bell_matrix,
    })
}
