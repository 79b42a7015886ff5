//! Small dense complex linear-algebra helpers on top of `nalgebra`.

use nalgebra::{Complex, ComplexField, DMatrix, DVector};

use crate::num::Real;

pub type CMatrix<T> = DMatrix<Complex<T>>;
pub type CVector<T> = DVector<Complex<T>>;

/// Kronecker product `a ⊗ b` (first factor carries the most significant index).
pub fn kron<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a.kronecker(b)
}

pub fn identity<T: Real>(dim: usize) -> CMatrix<T> {
    CMatrix::identity(dim, dim)
}

/// Largest entry modulus.
pub fn max_abs<T: Real>(m: &CMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(z.modulus()))
}

pub fn commutator<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a * b - b * a
}

/// Largest modulus of `m - m†`.
pub fn hermiticity_defect<T: Real>(m: &CMatrix<T>) -> T {
    max_abs(&(m - m.adjoint()))
}

/// Largest modulus of `u†u - I`.
pub fn unitarity_defect<T: Real>(u: &CMatrix<T>) -> T {
    max_abs(&(u.adjoint() * u - identity::<T>(u.nrows())))
}

/// Eigendecomposition of a Hermitian matrix: ascending real eigenvalues and the
/// matching orthonormal eigenvectors as columns.
pub fn hermitian_eigen<T: Real>(m: &CMatrix<T>) -> (Vec<T>, CMatrix<T>) {
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .partial_cmp(&eig.eigenvalues[j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), m.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn hermitian_eigenvalues<T: Real>(m: &CMatrix<T>) -> Vec<T> {
    hermitian_eigen(m).0
}

/// `Σ_k f(λ_k) |k⟩⟨k|` for a Hermitian spectrum.
pub fn spectral_function<T: Real>(values: &[T], vectors: &CMatrix<T>, f: impl Fn(T) -> Complex<T>) -> CMatrix<T> {
    let dim = vectors.nrows();
    let mut scaled = vectors.clone();
    for (k, &lambda) in values.iter().enumerate() {
        let w = f(lambda);
        for r in 0..dim {
            scaled[(r, k)] *= w;
        }
    }
    scaled * vectors.adjoint()
}

/// `e^{-i H t}` via Hermitian eigendecomposition.
pub fn unitary_evolution<T: Real>(h: &CMatrix<T>, t: T) -> CMatrix<T> {
    let (values, vectors) = hermitian_eigen(h);
    spectral_function(&values, &vectors, |e| {
        let phase = -e * t;
        Complex::new(phase.cos(), phase.sin())
    })
}

pub fn outer<T: Real>(v: &CVector<T>) -> CMatrix<T> {
    v * v.adjoint()
}

/// Trace norm of a Hermitian matrix (sum of absolute eigenvalues).
pub fn trace_norm<T: Real>(m: &CMatrix<T>) -> T {
    hermitian_eigenvalues(m)
        .into_iter()
        .fold(T::zero(), |acc, e| acc + e.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::cr;

    #[test]
    fn evolution_of_pauli_x_is_rotation() {
        let x = CMatrix::<f64>::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(1.0), cr(0.0)]);
        let t = 0.3;
        let u = unitary_evolution(&x, t);
        assert!((u[(0, 0)] - Complex::new(t.cos(), 0.0)).norm() < 1e-14);
        assert!((u[(0, 1)] - Complex::new(0.0, -t.sin())).norm() < 1e-14);
        assert!(unitarity_defect(&u) < 1e-14);
    }

    #[test]
    fn eigenvalues_come_back_sorted() {
        let m = CMatrix::<f64>::from_diagonal(&DVector::from_vec(vec![cr(3.0), cr(-1.0), cr(2.0)]));
        assert_eq!(hermitian_eigenvalues(&m), vec![-1.0, 2.0, 3.0]);
    }
}
