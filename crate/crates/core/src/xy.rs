//! Three-spin isotropic Heisenberg XY ring and its evolution operators.
//!
//! In the cavity-active basis `{|0⟩, |e⟩}` (bit 0 / bit 1) the ring Hamiltonian is
//!
//! ```text
//! H_I = J Σ_{i≠j} (σ⁺_i σ⁻_j + σ⁺_j σ⁻_i) = J Σ_{i=1..3} (σˣ_i σˣ_{i+1} + σʸ_i σʸ_{i+1}),  σ_4 ≡ σ_1
//! ```
//!
//! with the sum running over ordered pairs, so every bond carries a hopping
//! amplitude `2J`. Its spectrum is `{0, 4, −2, −2, 4, −2, −2, 0}·J` by excitation
//! sector, which makes every composite phase difference an even multiple of `J`:
//! evolution for `π/J` is the identity on states.

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::num::{cr, Real};
use crate::state::{DensityMatrix, Slot};

/// Slots of the node-A triplet: conveyed atoms 1, 2 and stationary atom 3.
pub const NODE_A: [Slot; 3] = [1, 2, 3];
/// Slots of the node-B triplet: conveyed atoms 4, 5 and stationary atom 6.
pub const NODE_B: [Slot; 3] = [4, 5, 6];
/// Canonical layout of the six-qubit state: node A triplet, then node B.
pub const COMPOSITE_SLOTS: [Slot; 6] = [1, 2, 3, 4, 5, 6];

const TRIPLET_DIM: usize = 8;

/// `H_I` for one triplet together with its eigendecomposition.
#[derive(Debug, Clone)]
pub struct XyHamiltonian<T: Real> {
    coupling: T,
    matrix: CMatrix<T>,
    energies: Vec<T>,
    eigenvectors: CMatrix<T>,
}

/// Builds the ring Hamiltonian for coupling `J` (either sign).
pub fn build_xy<T: Real>(coupling: T) -> Result<XyHamiltonian<T>> {
    if coupling == T::zero() {
        return Err(Error::DegenerateCoupling);
    }
    if !coupling.is_finite() {
        return Err(Error::domain(format!("coupling {coupling} is not finite")));
    }
    let matrix = hopping_matrix::<T>() * cr(coupling);
    let (energies, eigenvectors) = linalg::hermitian_eigen(&matrix);
    Ok(XyHamiltonian {
        coupling,
        matrix,
        energies,
        eigenvectors,
    })
}

/// `Σ_{i≠j}(σ⁺_i σ⁻_j + σ⁺_j σ⁻_i)`: every bond swaps `|e⟩` and `|0⟩` with amplitude 2.
fn hopping_matrix<T: Real>() -> CMatrix<T> {
    let mut h = CMatrix::zeros(TRIPLET_DIM, TRIPLET_DIM);
    for state in 0..TRIPLET_DIM {
        for i in 0..3 {
            for j in (i + 1)..3 {
                let (bi, bj) = (bit(state, i), bit(state, j));
                if bi != bj {
                    let flipped = state ^ (1 << (2 - i)) ^ (1 << (2 - j));
                    h[(flipped, state)] += cr(T::lit(2.0));
                }
            }
        }
    }
    h
}

fn bit(state: usize, atom: usize) -> usize {
    (state >> (2 - atom)) & 1
}

/// Number of excited atoms in a triplet basis index.
pub fn excitation_number(index: usize) -> u32 {
    (index & 0b111).count_ones()
}

/// Triplet basis indices grouped by excitation number 0..=3.
pub fn excitation_sectors() -> [Vec<usize>; 4] {
    let mut sectors: [Vec<usize>; 4] = Default::default();
    for i in 0..TRIPLET_DIM {
        sectors[excitation_number(i) as usize].push(i);
    }
    sectors
}

/// Total excitation operator `N = Σ_k |e⟩_k⟨e|` on one triplet.
pub fn number_operator<T: Real>() -> CMatrix<T> {
    CMatrix::from_fn(TRIPLET_DIM, TRIPLET_DIM, |r, c| {
        if r == c {
            cr(T::from_u32(excitation_number(r)).unwrap())
        } else {
            cr(T::zero())
        }
    })
}

impl<T: Real> XyHamiltonian<T> {
    pub fn coupling(&self) -> T {
        self.coupling
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    /// Ascending eigenvalues.
    pub fn energies(&self) -> &[T] {
        &self.energies
    }

    pub fn eigenvectors(&self) -> &CMatrix<T> {
        &self.eigenvectors
    }

    /// Restriction to one excitation sector, in ascending basis-index order.
    pub fn sector_block(&self, excitations: u32) -> CMatrix<T> {
        let idx: Vec<usize> = (0..TRIPLET_DIM)
            .filter(|&i| excitation_number(i) == excitations)
            .collect();
        CMatrix::from_fn(idx.len(), idx.len(), |r, c| self.matrix[(idx[r], idx[c])])
    }

    /// `H_M = H_I + J·N`, the mean Hamiltonian before moving to the interaction frame.
    pub fn mean_hamiltonian(&self) -> CMatrix<T> {
        &self.matrix + number_operator::<T>() * cr(self.coupling)
    }

    /// The triplet propagator `Σ_k e^{-i E_k t}|k⟩⟨k|` on the node-A slots.
    pub fn evolve(&self, t: T) -> EvolutionOperator<T> {
        evolve_triplet(self, t)
    }
}

/// Unitary propagator acting on a fixed slot layout.
#[derive(Debug, Clone)]
pub struct EvolutionOperator<T: Real> {
    time: T,
    matrix: CMatrix<T>,
    labels: Vec<Slot>,
}

impl<T: Real> EvolutionOperator<T> {
    pub fn time(&self) -> T {
        self.time
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn labels(&self) -> &[Slot] {
        &self.labels
    }

    /// Max entry of `U†U − I`.
    pub fn unitarity_defect(&self) -> T {
        linalg::unitarity_defect(&self.matrix)
    }

    pub fn adjoint(&self) -> Self {
        Self {
            time: -self.time,
            matrix: self.matrix.adjoint(),
            labels: self.labels.clone(),
        }
    }

    /// `self · other` (apply `other` first); layouts must agree.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.labels != other.labels {
            return Err(Error::Label("composing propagators on different slots".into()));
        }
        Ok(Self {
            time: self.time + other.time,
            matrix: &self.matrix * &other.matrix,
            labels: self.labels.clone(),
        })
    }

    /// `U ρ U†`, with `ρ` first reordered to this operator's layout.
    pub fn apply(&self, rho: &DensityMatrix<T>) -> Result<DensityMatrix<T>> {
        let aligned = rho.reorder(&self.labels)?;
        let m = &self.matrix * aligned.matrix() * self.matrix.adjoint();
        Ok(DensityMatrix::from_parts(m, self.labels.clone()))
    }
}

/// `U_I(t)` for one triplet, on slots (1, 2, 3).
pub fn evolve_triplet<T: Real>(h: &XyHamiltonian<T>, t: T) -> EvolutionOperator<T> {
    evolve_triplet_on(h, t, NODE_A.to_vec())
}

pub fn evolve_triplet_on<T: Real>(h: &XyHamiltonian<T>, t: T, labels: Vec<Slot>) -> EvolutionOperator<T> {
    let matrix = linalg::spectral_function(&h.energies, &h.eigenvectors, |e| {
        let phase = -e * t;
        Complex::new(phase.cos(), phase.sin())
    });
    EvolutionOperator {
        time: t,
        matrix,
        labels,
    }
}

/// `U_A(t) ⊗ U_B(t)` on the canonical six-qubit layout (1, 2, 3, 4, 5, 6).
pub fn evolve_composite<T: Real>(h: &XyHamiltonian<T>, t: T) -> EvolutionOperator<T> {
    let local = evolve_triplet(h, t);
    EvolutionOperator {
        time: t,
        matrix: linalg::kron(&local.matrix, &local.matrix),
        labels: COMPOSITE_SLOTS.to_vec(),
    }
}

/// `L(t) = exp(−i J t N)`: maps interaction-frame evolution to `H_M` evolution,
/// `U_M(t) = L(t) U_I(t)`.
pub fn frame_correction<T: Real>(coupling: T, t: T) -> CMatrix<T> {
    CMatrix::from_fn(TRIPLET_DIM, TRIPLET_DIM, |r, c| {
        if r == c {
            let phase = -coupling * t * T::from_u32(excitation_number(r)).unwrap();
            Complex::new(phase.cos(), phase.sin())
        } else {
            cr(T::zero())
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli(which: char) -> CMatrix<f64> {
        let z = cr(0.0);
        let o = cr(1.0);
        match which {
            'x' => CMatrix::from_row_slice(2, 2, &[z, o, o, z]),
            'y' => CMatrix::from_row_slice(2, 2, &[z, Complex::new(0.0, -1.0), Complex::new(0.0, 1.0), z]),
            _ => linalg::identity(2),
        }
    }

    fn on_site(op: &CMatrix<f64>, site: usize) -> CMatrix<f64> {
        let id = linalg::identity::<f64>(2);
        let factors: Vec<&CMatrix<f64>> = (0..3).map(|s| if s == site { op } else { &id }).collect();
        linalg::kron(&linalg::kron(factors[0], factors[1]), factors[2])
    }

    /// Independent route: `J Σ_i (σˣσˣ + σʸσʸ)` with periodic boundary.
    fn pauli_form(j: f64) -> CMatrix<f64> {
        let mut h = CMatrix::zeros(8, 8);
        for i in 0..3 {
            let k = (i + 1) % 3;
            for p in ['x', 'y'] {
                h += on_site(&pauli(p), i) * on_site(&pauli(p), k);
            }
        }
        h * cr(j)
    }

    #[test]
    fn matches_pauli_form() {
        for j in [1.0, -0.7, 2.5] {
            let h = build_xy(j).unwrap();
            assert!(linalg::max_abs(&(h.matrix() - pauli_form(j))) < 1e-14);
        }
    }

    #[test]
    fn zero_coupling_rejected() {
        assert!(matches!(build_xy(0.0), Err(Error::DegenerateCoupling)));
    }

    #[test]
    fn commutes_with_number_operator() {
        let h = build_xy(1.3).unwrap();
        let c = linalg::commutator(h.matrix(), &number_operator());
        assert!(linalg::max_abs(&c) < 1e-13);
    }

    #[test]
    fn trapped_states() {
        let h = build_xy(1.0).unwrap();
        for idx in [0usize, 7] {
            assert!(h.matrix().column(idx).iter().all(|z| z.norm() == 0.0));
        }
    }

    #[test]
    fn sign_flip_negates() {
        let a = build_xy(0.9).unwrap();
        let b = build_xy(-0.9).unwrap();
        assert!(linalg::max_abs(&(a.matrix() + b.matrix())) < 1e-15);
    }

    #[test]
    fn block_diagonal_by_sector() {
        let h = build_xy(1.0).unwrap();
        for r in 0..8 {
            for c in 0..8 {
                if excitation_number(r) != excitation_number(c) {
                    assert_eq!(h.matrix()[(r, c)].norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn triplet_identity_at_zero_and_group_law() {
        let h = build_xy(1.0).unwrap();
        let u0 = evolve_triplet(&h, 0.0);
        assert!(linalg::max_abs(&(u0.matrix() - linalg::identity::<f64>(8))) < 1e-14);
        let (t1, t2) = (0.37, 1.21);
        let lhs = evolve_triplet(&h, t1).compose(&evolve_triplet(&h, t2)).unwrap();
        let rhs = evolve_triplet(&h, t1 + t2);
        assert!(linalg::max_abs(&(lhs.matrix() - rhs.matrix())) < 1e-11);
        assert!(rhs.unitarity_defect() < 1e-11);
    }

    #[test]
    fn composite_adjoint_is_time_reversal() {
        let h = build_xy(0.8).unwrap();
        let u = evolve_composite(&h, 0.55);
        let v = evolve_composite(&h, -0.55);
        assert!(linalg::max_abs(&(u.adjoint().matrix() - v.matrix())) < 1e-12);
        assert!(u.unitarity_defect() < 1e-11);
        let id = evolve_composite(&h, 0.0);
        assert!(linalg::max_abs(&(id.matrix() - linalg::identity::<f64>(64))) < 1e-14);
    }

    #[test]
    fn mean_hamiltonian_frame() {
        let j = 0.6;
        let h = build_xy(j).unwrap();
        let t = 1.7;
        let um = linalg::unitary_evolution(&h.mean_hamiltonian(), t);
        let ui = evolve_triplet(&h, t);
        let corrected = frame_correction(j, t) * ui.matrix();
        assert!(linalg::max_abs(&(um - corrected)) < 1e-11);
    }
}
