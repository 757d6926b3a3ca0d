//! Superoperator calculus.
//!
//! Operators are vectorized row-major, `vec(X)[i·d + j] = X_ij`, so that
//! `vec(A X B) = (A ⊗ Bᵀ) vec(X)` and a Kraus map has process matrix
//! `Σ K ⊗ K̄`. The Choi matrix is `J = (1/d) Σ_ij Λ[|i⟩⟨j|] ⊗ |i⟩⟨j|`, output
//! factor first, and the two are related by `Λ̂ = d·J^R`.

use crate::error::{Error, Result};
use crate::linalg::{
    eig_hermitian_unchecked, frobenius, hermitian_part, identity, kron, CMatrix, CVector,
    DensityMatrix,
};
use crate::naimark::{NaimarkExtension, ProjectiveMeasurement};
use crate::povm::check_dim;

pub fn vec_op(x: &CMatrix) -> CVector {
    let (r, c) = x.shape();
    CVector::from_fn(r * c, |k, _| x[(k / c, k % c)])
}

pub fn unvec_op(v: &CVector, d: usize) -> Result<CMatrix> {
    check_dim(d * d, v.len())?;
    Ok(CMatrix::from_fn(d, d, |i, j| v[i * d + j]))
}

fn square_root_dim(n: usize) -> Result<usize> {
    let d = (n as f64).sqrt().round() as usize;
    if d * d == n {
        Ok(d)
    } else {
        Err(Error::invalid(format!("dimension {n} is not a perfect square")))
    }
}

/// Transfer matrix of a linear map in the matrix-unit basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessMatrix {
    dim: usize,
    matrix: CMatrix,
}

impl ProcessMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare { rows: matrix.nrows(), cols: matrix.ncols() });
        }
        let dim = square_root_dim(matrix.nrows())?;
        Ok(Self { dim, matrix })
    }

    pub fn identity(d: usize) -> Self {
        Self { dim: d, matrix: identity(d * d) }
    }

    /// `X ↦ Xᵀ`, positive but not completely positive.
    pub fn transpose_map(d: usize) -> Self {
        let mut m = CMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                m[(j * d + i, i * d + j)] = crate::linalg::ONE;
            }
        }
        Self { dim: d, matrix: m }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// `Λ[X]`.
    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        check_dim(self.dim, x.nrows())?;
        unvec_op(&(&self.matrix * vec_op(x)), self.dim)
    }

    pub fn apply_state(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        Ok(DensityMatrix::from_trusted(self.apply(rho.matrix())?))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &ProcessMatrix) -> Result<ProcessMatrix> {
        check_dim(self.dim, other.dim)?;
        Ok(Self { dim: self.dim, matrix: &self.matrix * &other.matrix })
    }
}

/// Choi matrix `J = (1/d) Σ_ij Λ[|i⟩⟨j|] ⊗ |i⟩⟨j|`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    dim: usize,
    matrix: CMatrix,
}

impl ChoiMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare { rows: matrix.nrows(), cols: matrix.ncols() });
        }
        let dim = square_root_dim(matrix.nrows())?;
        Ok(Self { dim, matrix })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        eig_hermitian_unchecked(&hermitian_part(&self.matrix)).min()
    }

    /// `‖tr_1 J − 1/d‖_F`; zero iff the map is trace preserving.
    pub fn trace_preservation_residual(&self) -> f64 {
        let t = partial_trace_first(&self.matrix, self.dim).expect("square-of-square shape");
        frobenius(&(t - identity(self.dim).unscale(self.dim as f64)))
    }

    pub fn is_cptp(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol && self.trace_preservation_residual() <= tol
    }
}

/// `X^R_{(a,b),(i,j)} = X_{(a,i),(b,j)}`; an involution.
pub fn reshuffle(x: &CMatrix) -> Result<CMatrix> {
    if !x.is_square() {
        return Err(Error::NotSquare { rows: x.nrows(), cols: x.ncols() });
    }
    let d = square_root_dim(x.nrows())?;
    Ok(CMatrix::from_fn(d * d, d * d, |r, c| {
        let (a, b) = (r / d, r % d);
        let (i, j) = (c / d, c % d);
        x[(a * d + i, b * d + j)]
    }))
}

pub fn choi_from_process(p: &ProcessMatrix) -> ChoiMatrix {
    let m = reshuffle(&p.matrix).expect("process matrices are square of square");
    ChoiMatrix { dim: p.dim, matrix: m.unscale(p.dim as f64) }
}

pub fn process_from_choi(j: &ChoiMatrix) -> ProcessMatrix {
    let m = reshuffle(&j.matrix).expect("Choi matrices are square of square");
    ProcessMatrix { dim: j.dim, matrix: m.scale(j.dim as f64) }
}

/// Trace over the first factor of `C^d ⊗ C^d`.
pub fn partial_trace_first(x: &CMatrix, d: usize) -> Result<CMatrix> {
    check_dim(d * d, x.nrows())?;
    check_dim(d * d, x.ncols())?;
    Ok(CMatrix::from_fn(d, d, |i, j| (0..d).map(|a| x[(a * d + i, a * d + j)]).sum()))
}

/// `Σ K ⊗ K̄`.
pub fn process_from_kraus(kraus: &[CMatrix]) -> Result<ProcessMatrix> {
    let d = kraus.first().map(CMatrix::nrows).ok_or_else(|| Error::invalid("empty Kraus list"))?;
    let mut m = CMatrix::zeros(d * d, d * d);
    for k in kraus {
        if k.nrows() != d || k.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: k.nrows() });
        }
        m += kron(k, &k.map(|z| z.conj()));
    }
    Ok(ProcessMatrix { dim: d, matrix: m })
}

/// Completely positive trace-preserving map given by Kraus operators.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    kraus: Vec<CMatrix>,
}

impl Channel {
    /// Checks `Σ K† K = 1` within `1e-9`.
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        let d = kraus.first().map(CMatrix::nrows).ok_or_else(|| Error::invalid("empty Kraus list"))?;
        for k in &kraus {
            if k.nrows() != d || k.ncols() != d {
                return Err(Error::DimensionMismatch { expected: d, found: k.nrows() });
            }
        }
        let res = crate::linalg::identity_residual(d, kraus.iter().map(|k| k.adjoint() * k));
        if res > 1e-9 {
            return Err(Error::Invalid(format!("channel is not trace preserving (residual {res:.3e})")));
        }
        Ok(Self { kraus })
    }

    pub fn unitary(u: CMatrix) -> Result<Self> {
        Self::new(vec![u])
    }

    pub fn dim(&self) -> usize {
        self.kraus[0].nrows()
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn process(&self) -> ProcessMatrix {
        process_from_kraus(&self.kraus).expect("validated Kraus list")
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        check_dim(self.dim(), rho.dim())?;
        let d = self.dim();
        let out = self
            .kraus
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, k| acc + k * rho.matrix() * k.adjoint());
        Ok(DensityMatrix::from_trusted(out))
    }
}

/// `Δ̂ = Σ P ⊗ P̄`.
pub fn dephasing_superop(pm: impl AsRef<ProjectiveMeasurement>) -> ProcessMatrix {
    let pm = pm.as_ref();
    process_from_kraus(pm.projectors()).expect("non-empty projector list")
}

/// Transfer matrices of the embedding `X ↦ X ⊕ 0` and of `Ω[X] = Π_E X Π_E`.
#[derive(Debug, Clone)]
pub struct EmbeddingSuperops {
    /// `d'² × d²`.
    pub embed: CMatrix,
    /// `d'² × d'²`.
    pub omega: CMatrix,
}

pub fn embedding_superops(x: &NaimarkExtension) -> EmbeddingSuperops {
    let (d, dp) = (x.d(), x.d_prime());
    let mut pi = CMatrix::zeros(dp, d);
    for k in 0..d {
        pi[(k, k)] = crate::linalg::ONE;
    }
    let embed = kron(&pi, &pi);
    let pie = x.subspace_projector();
    let omega = kron(&pie, &pie);
    EmbeddingSuperops { embed, omega }
}

/// `Λ̂ Δ̂ = Δ̂ Λ̂ Δ̂` residual in Frobenius norm.
pub fn mio_residual(process: &ProcessMatrix, dephasing: &ProcessMatrix) -> f64 {
    let ld = process.matrix() * dephasing.matrix();
    frobenius(&(&ld - dephasing.matrix() * &ld))
}
