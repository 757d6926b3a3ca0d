//! Dense complex linear algebra and entropy primitives.
//!
//! Matrices are plain `nalgebra` dense matrices over `Complex64`. The
//! quantum-state types ([`DensityMatrix`], [`PureState`], [`BlochVector`])
//! are validated newtypes; once constructed they are immutable.
//!
//! All entropies are measured in bits.

use nalgebra::{DMatrix, DVector, SymmetricEigen, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Tolerance on Hermiticity, relative to the largest entry magnitude.
pub const HERMITIAN_TOL: f64 = 1e-9;
/// Eigenvalues above `-PSD_TOL` are accepted as non-negative (and clipped).
pub const PSD_TOL: f64 = 1e-9;
/// Trace / normalization tolerance.
pub const TRACE_TOL: f64 = 1e-9;
/// Eigenvalues above this count towards the rank of an operator.
pub const RANK_TOL: f64 = 1e-9;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Frobenius norm.
pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entry of `|m - m†|`.
pub fn hermiticity_residual(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `(m + m†) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

fn check_square(m: &CMatrix) -> Result<usize> {
    if m.is_square() {
        Ok(m.nrows())
    } else {
        Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        })
    }
}

fn check_hermitian(m: &CMatrix) -> Result<()> {
    check_square(m)?;
    if !is_finite(m) {
        return Err(Error::NonFinite);
    }
    let res = hermiticity_residual(m);
    if res > HERMITIAN_TOL * max_abs(m).max(1.0) {
        return Err(Error::NotHermitian(res));
    }
    Ok(())
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Spectral decomposition of a Hermitian matrix, eigenvalues in descending order.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Unitary whose columns are the eigenvectors, in the order of `values`.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// `U f(Λ) U†`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (k, &l) in self.values.iter().enumerate() {
            let s = f(l);
            for r in 0..n {
                scaled[(r, k)] *= s;
            }
        }
        &scaled * self.vectors.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.map_spectrum(|l| l)
    }

    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// Columns whose eigenvalue exceeds `threshold`.
    pub fn range_basis(&self, threshold: f64) -> CMatrix {
        let keep: Vec<usize> = (0..self.values.len())
            .filter(|&k| self.values[k] > threshold)
            .collect();
        let n = self.vectors.nrows();
        CMatrix::from_fn(n, keep.len(), |r, k| self.vectors[(r, keep[k])])
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// The input is symmetrized before decomposition; inputs whose Hermiticity
/// residual exceeds [`HERMITIAN_TOL`] (relative to the largest entry) are rejected.
pub fn eig_hermitian(h: &CMatrix) -> Result<HermitianEigen> {
    check_hermitian(h)?;
    Ok(eig_hermitian_unchecked(h))
}

pub(crate) fn eig_hermitian_unchecked(h: &CMatrix) -> HermitianEigen {
    let n = h.nrows();
    if n == 0 {
        return HermitianEigen {
            values: vec![],
            vectors: CMatrix::zeros(0, 0),
        };
    }
    let eig = SymmetricEigen::new(hermitian_part(h));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    HermitianEigen { values, vectors }
}

/// Principal square root of a PSD matrix; eigenvalues in `[-PSD_TOL, 0)` are clipped.
pub fn psd_sqrt(m: &CMatrix) -> Result<CMatrix> {
    let eig = eig_hermitian(m)?;
    if eig.min() < -PSD_TOL * eig.max().abs().max(1.0) {
        return Err(Error::NotPsd(eig.min()));
    }
    // Rounding dust on null eigenvalues would otherwise surface as O(1e-8) entries.
    let floor = 8.0 * f64::EPSILON * eig.max().abs() * m.nrows() as f64;
    Ok(eig.map_spectrum(|l| if l > floor { l.sqrt() } else { 0.0 }))
}

/// Number of eigenvalues above [`RANK_TOL`].
pub fn hermitian_rank(m: &CMatrix) -> Result<usize> {
    Ok(eig_hermitian(m)?
        .values
        .iter()
        .filter(|&&l| l > RANK_TOL)
        .count())
}

fn eta(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

/// `-Σ λ log₂ λ` with negative dust clipped to zero.
pub fn spectrum_entropy(values: &[f64]) -> f64 {
    values.iter().map(|&l| eta(l.max(0.0))).sum()
}

/// Shannon entropy in bits of a probability vector.
///
/// Entries in `[-PSD_TOL, 0)` are clipped; larger negative entries or a
/// normalization error above [`TRACE_TOL`] are rejected.
pub fn shannon_entropy(p: &[f64]) -> Result<f64> {
    if let Some(&bad) = p.iter().find(|&&x| !x.is_finite() || x < -PSD_TOL) {
        return Err(Error::invalid(format!("invalid probability {bad}")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > TRACE_TOL {
        return Err(Error::invalid(format!(
            "probabilities sum to {total}, not 1"
        )));
    }
    Ok(spectrum_entropy(p))
}

/// Positive semidefinite, unit-trace Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        check_hermitian(&matrix)?;
        let tr = trace(&matrix);
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidTrace(tr.re));
        }
        let min = eig_hermitian_unchecked(&matrix).min();
        if min < -PSD_TOL {
            return Err(Error::NotPsd(min));
        }
        Ok(Self {
            matrix: hermitian_part(&matrix),
        })
    }

    /// Wraps a matrix produced internally by a trace-preserving positive map.
    pub(crate) fn from_trusted(matrix: CMatrix) -> Self {
        Self {
            matrix: hermitian_part(&matrix),
        }
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            matrix: identity(d).unscale(d as f64),
        }
    }

    pub fn from_pure(psi: &PureState) -> Self {
        let v = psi.amplitudes();
        Self::from_trusted(v * v.adjoint())
    }

    /// `|k⟩⟨k|` in dimension `d`.
    pub fn basis(d: usize, k: usize) -> Self {
        let mut m = CMatrix::zeros(d, d);
        m[(k, k)] = ONE;
        Self { matrix: m }
    }

    /// Normalizes a PSD operator to unit trace.
    pub fn normalized(matrix: CMatrix) -> Result<Self> {
        let tr = trace(&matrix).re;
        if tr.abs() <= f64::MIN_POSITIVE {
            return Err(Error::InvalidTrace(tr));
        }
        Self::new(matrix.unscale(tr))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn spectrum(&self) -> Vec<f64> {
        eig_hermitian_unchecked(&self.matrix).values
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// `U ρ U†`; `u` is assumed unitary.
    pub fn conjugate(&self, u: &CMatrix) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.nrows(),
            });
        }
        Ok(Self::from_trusted(u * &self.matrix * u.adjoint()))
    }

    /// `λ ρ + (1 - λ) σ`.
    pub fn mix(&self, other: &Self, lambda: f64) -> Result<Self> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(Self::from_trusted(
            self.matrix.scale(lambda) + other.matrix.scale(1.0 - lambda),
        ))
    }
}

/// Unit vector in `C^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
}

impl PureState {
    pub fn new(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > TRACE_TOL {
            return Err(Error::invalid(format!("state norm is {norm}, not 1")));
        }
        Ok(Self { amplitudes })
    }

    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !norm.is_finite() || norm <= f64::MIN_POSITIVE {
            return Err(Error::invalid("cannot normalize a zero vector"));
        }
        Ok(Self {
            amplitudes: amplitudes.unscale(norm),
        })
    }

    pub fn basis(d: usize, k: usize) -> Self {
        let mut v = CVector::zeros(d);
        v[k] = ONE;
        Self { amplitudes: v }
    }

    /// `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        let amplitudes = CVector::from_vec(vec![
            c((theta / 2.0).cos(), 0.0),
            Complex64::from_polar((theta / 2.0).sin(), phi),
        ]);
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }

    pub fn apply(&self, u: &CMatrix) -> Result<Self> {
        if u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.ncols(),
            });
        }
        Self::normalized(u * &self.amplitudes)
    }
}

/// Real 3-vector in the closed unit ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector(Vector3<f64>);

impl BlochVector {
    pub const ORIGIN: BlochVector = BlochVector(Vector3::new(0.0, 0.0, 0.0));

    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let r = Vector3::new(x, y, z);
        if !r.iter().all(|v| v.is_finite()) || r.norm() > 1.0 + TRACE_TOL {
            return Err(Error::invalid(format!(
                "Bloch vector length {} exceeds 1",
                r.norm()
            )));
        }
        Ok(Self(r))
    }

    pub fn from_vector(r: Vector3<f64>) -> Result<Self> {
        Self::new(r.x, r.y, r.z)
    }

    /// Unit vector at polar angle `theta` and azimuth `phi`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        Self(Vector3::new(
            theta.sin() * phi.cos(),
            theta.sin() * phi.sin(),
            theta.cos(),
        ))
    }

    pub fn vector(&self) -> Vector3<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.0.x, self.0.y, self.0.z]
    }
}

/// `ρ(r) = ½(1 + r·σ)`.
pub fn bloch_to_density(r: &BlochVector) -> DensityMatrix {
    let v = r.vector();
    let m = (identity(2) + pauli_x().scale(v.x) + pauli_y().scale(v.y) + pauli_z().scale(v.z))
        .scale(0.5);
    DensityMatrix::from_trusted(m)
}

/// Inverse of [`bloch_to_density`]; `r_k = tr[ρ σ_k]`.
pub fn density_to_bloch(rho: &DensityMatrix) -> Result<BlochVector> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: rho.dim(),
        });
    }
    let m = rho.matrix();
    let r = Vector3::new(
        2.0 * m[(0, 1)].re,
        -2.0 * m[(0, 1)].im,
        (m[(0, 0)] - m[(1, 1)]).re,
    );
    // Clip rounding noise on pure states.
    let norm = r.norm();
    let r = if norm > 1.0 { r / norm } else { r };
    BlochVector::from_vector(r)
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    spectrum_entropy(&rho.spectrum())
}

/// Uhlmann fidelity `tr √(√ρ σ √ρ)`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    let sqrt_rho = eig_hermitian_unchecked(rho.matrix()).map_spectrum(|l| l.max(0.0).sqrt());
    let inner = &sqrt_rho * sigma.matrix() * &sqrt_rho;
    let f: f64 = eig_hermitian_unchecked(&inner)
        .values
        .iter()
        .map(|&l| l.max(0.0).sqrt())
        .sum();
    Ok(f.min(1.0))
}

/// `X ⊕ 0`: places `x` in the upper-left block of a `d_prime × d_prime` zero matrix.
pub fn direct_sum_embed(x: &CMatrix, d_prime: usize) -> Result<CMatrix> {
    let d = check_square(x)?;
    if d_prime < d {
        return Err(Error::invalid(format!(
            "cannot embed dimension {d} into smaller dimension {d_prime}"
        )));
    }
    let mut out = CMatrix::zeros(d_prime, d_prime);
    out.view_mut((0, 0), (d, d)).copy_from(x);
    Ok(out)
}

/// `‖Σ_k m_k - 1‖_F`.
pub(crate) fn identity_residual(d: usize, terms: impl Iterator<Item = CMatrix>) -> f64 {
    let mut total = CMatrix::zeros(d, d);
    for t in terms {
        total += t;
    }
    frobenius(&(total - identity(d)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn eig_identity_and_pauli_z() {
        let e = eig_hermitian(&identity(2)).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0]);
        let e = eig_hermitian(&pauli_z()).unwrap();
        assert!(close(e.values[0], 1.0, 1e-14) && close(e.values[1], -1.0, 1e-14));
    }

    #[test]
    fn eig_trine_effect() {
        // Characteristic polynomial of (1/3)[[1,1],[1,1]] is λ(λ - 2/3).
        let e1 = CMatrix::from_element(2, 2, ONE).unscale(3.0);
        let e = eig_hermitian(&e1).unwrap();
        assert!(close(e.values[0], 2.0 / 3.0, 1e-14));
        assert!(close(e.values[1], 0.0, 1e-14));
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(2, 2, &[ONE, ONE, ZERO, ONE]);
        assert!(matches!(eig_hermitian(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn entropy_examples() {
        assert!(close(von_neumann_entropy(&DensityMatrix::basis(2, 0)), 0.0, 1e-12));
        assert!(close(
            von_neumann_entropy(&DensityMatrix::maximally_mixed(2)),
            1.0,
            1e-12
        ));
        let rho = DensityMatrix::new(CMatrix::from_diagonal(&CVector::from_vec(vec![
            c(0.75, 0.0),
            c(0.25, 0.0),
        ])))
        .unwrap();
        // −¾log₂¾ − ¼log₂¼ = 2 − ¾log₂3
        assert!(close(von_neumann_entropy(&rho), 0.811_278_124_459_132_8, 1e-12));
    }

    #[test]
    fn shannon_examples() {
        assert_eq!(shannon_entropy(&[1.0, 0.0, 0.0]).unwrap(), 0.0);
        let third = 1.0 / 3.0;
        assert!(close(
            shannon_entropy(&[third, third, third]).unwrap(),
            3f64.log2(),
            1e-12
        ));
        assert!(close(shannon_entropy(&[0.0, 0.5, 0.5]).unwrap(), 1.0, 1e-12));
        assert!(shannon_entropy(&[0.5, 0.6]).is_err());
        assert!(shannon_entropy(&[1.0 + 1e-12, -1e-12]).is_ok());
    }

    #[test]
    fn fidelity_examples() {
        let zero = DensityMatrix::basis(2, 0);
        let one = DensityMatrix::basis(2, 1);
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!(close(fidelity(&zero, &zero).unwrap(), 1.0, 1e-12));
        assert!(close(fidelity(&zero, &one).unwrap(), 0.0, 1e-12));
        assert!(close(
            fidelity(&zero, &mixed).unwrap(),
            std::f64::consts::FRAC_1_SQRT_2,
            1e-12
        ));
        assert!(fidelity(&zero, &DensityMatrix::maximally_mixed(3)).is_err());
    }

    #[test]
    fn direct_sum_examples() {
        let out = direct_sum_embed(&identity(2), 3).unwrap();
        let expected = CMatrix::from_diagonal(&CVector::from_vec(vec![ONE, ONE, ZERO]));
        assert_eq!(out, expected);
        let rho = DensityMatrix::maximally_mixed(2);
        assert_eq!(&direct_sum_embed(rho.matrix(), 2).unwrap(), rho.matrix());
        assert!(direct_sum_embed(&identity(3), 2).is_err());
    }

    #[test]
    fn bloch_examples() {
        let r = bloch_to_density(&BlochVector::ORIGIN);
        assert!(frobenius(&(r.matrix() - DensityMatrix::maximally_mixed(2).matrix())) < 1e-15);
        let r = bloch_to_density(&BlochVector::new(0.0, 0.0, 1.0).unwrap());
        assert!(frobenius(&(r.matrix() - DensityMatrix::basis(2, 0).matrix())) < 1e-15);
        // ½(1 + σ_x) = |+⟩⟨+|
        let r = bloch_to_density(&BlochVector::new(1.0, 0.0, 0.0).unwrap());
        let plus = CMatrix::from_element(2, 2, c(0.5, 0.0));
        assert!(frobenius(&(r.matrix() - plus)) < 1e-15);
        assert!(BlochVector::new(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn density_validation() {
        assert!(matches!(
            DensityMatrix::new(identity(2)),
            Err(Error::InvalidTrace(_))
        ));
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.5, 0.0), c(-0.5, 0.0)]));
        assert!(matches!(DensityMatrix::new(m), Err(Error::NotPsd(_))));
    }
}
