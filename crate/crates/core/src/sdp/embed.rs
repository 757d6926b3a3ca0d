//! Complex Hermitian SDPs, their real embedding, and affine constraint reduction.
//!
//! A Hermitian `n×n` matrix `X` has real coordinates `x ∈ R^{n²}`: first the
//! diagonal `X_kk`, then for each pair `i < j` in lexicographic order
//! `√2·Re X_ij` and `√2·Im X_ij`. The coordinates are orthonormal for the
//! Hilbert–Schmidt inner product.

use nalgebra::DVector;
use num_complex::Complex64;

use super::solver::{self, Constraint, RMatrix, Sense, SdpOptions, SdpProblem, SdpSolution, SdpStatus};
use crate::error::{Error, Result};
use crate::linalg::{hermiticity_residual, max_abs, CMatrix, HERMITIAN_TOL};

/// `[[Re H, −Im H], [Im H, Re H]]`; `⟨emb A, emb B⟩ = 2 Re tr(A B)` for Hermitian `A`, `B`.
pub fn complex_to_real_embed(h: &CMatrix) -> RMatrix {
    let n = h.nrows();
    RMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let v = h[(r % n, c % n)];
        match (r < n, c < n) {
            (true, true) | (false, false) => v.re,
            (true, false) => -v.im,
            (false, true) => v.im,
        }
    })
}

/// Inverse of the embedding on its range; `½ C† Y C` with `C = [1; −i·1]`, so PSD in gives PSD out.
pub fn real_to_complex(y: &RMatrix) -> CMatrix {
    let n = y.nrows() / 2;
    CMatrix::from_fn(n, n, |i, j| {
        Complex64::new(
            0.5 * (y[(i, j)] + y[(n + i, n + j)]),
            0.5 * (y[(n + i, j)] - y[(i, n + j)]),
        )
    })
}

fn pair_index(n: usize, i: usize, j: usize) -> usize {
    // Pairs (i, j), i < j, in lexicographic order.
    n + 2 * (i * (2 * n - i - 1) / 2 + (j - i - 1))
}

pub fn hermitian_coords(x: &CMatrix) -> Vec<f64> {
    let n = x.nrows();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i] = x[(i, i)].re;
        for j in i + 1..n {
            let p = pair_index(n, i, j);
            v[p] = std::f64::consts::SQRT_2 * x[(i, j)].re;
            v[p + 1] = std::f64::consts::SQRT_2 * x[(i, j)].im;
        }
    }
    v
}

pub fn from_hermitian_coords(n: usize, v: &[f64]) -> CMatrix {
    let mut x = CMatrix::zeros(n, n);
    for i in 0..n {
        x[(i, i)] = Complex64::new(v[i], 0.0);
        for j in i + 1..n {
            let p = pair_index(n, i, j);
            let z = Complex64::new(v[p], v[p + 1]) / std::f64::consts::SQRT_2;
            x[(i, j)] = z;
            x[(j, i)] = z.conj();
        }
    }
    x
}

/// Rows `(r, s)` with `tr(F X) = r·x + i s·x` for every Hermitian `X`.
pub fn functional_rows(f: &CMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = f.nrows();
    let mut re = vec![0.0; n * n];
    let mut im = vec![0.0; n * n];
    let r2 = std::f64::consts::SQRT_2;
    for i in 0..n {
        re[i] = f[(i, i)].re;
        im[i] = f[(i, i)].im;
        for j in i + 1..n {
            let p = pair_index(n, i, j);
            let plus = f[(j, i)] + f[(i, j)];
            let minus = f[(j, i)] - f[(i, j)];
            re[p] = plus.re / r2;
            re[p + 1] = -minus.im / r2;
            im[p] = plus.im / r2;
            im[p + 1] = minus.re / r2;
        }
    }
    (re, im)
}

/// The Hermitian `H` with `tr(H X) = g·x`.
pub fn hermitian_from_row(n: usize, g: &[f64]) -> CMatrix {
    let mut h = CMatrix::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = Complex64::new(g[i], 0.0);
        for j in i + 1..n {
            let p = pair_index(n, i, j);
            let z = Complex64::new(g[p], g[p + 1]) / std::f64::consts::SQRT_2;
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h
}

/// Relative size below which a projected row is treated as projection noise.
pub const PROJECTION_TOL: f64 = 1e-6;

/// Greedy orthonormalization of constraint rows `a_k·x = b_k`.
///
/// Rows are normalized, then orthogonalized twice against the accepted set; a
/// row whose residual norm falls below `rank_tol` is dependent and its
/// right-hand side residual measures inconsistency.
#[derive(Debug, Clone)]
pub struct RowReducer {
    dim: usize,
    rank_tol: f64,
    basis: Vec<DVector<f64>>,
    rhs: Vec<f64>,
    inconsistency: f64,
    seen: usize,
}

impl RowReducer {
    pub fn new(dim: usize) -> Self {
        Self { dim, rank_tol: 1e-9, basis: Vec::new(), rhs: Vec::new(), inconsistency: 0.0, seen: 0 }
    }

    pub fn push(&mut self, row: &[f64], rhs: f64) {
        self.push_scaled(row, rhs, 0.0);
    }

    /// As [`push`](Self::push), for a row obtained by projecting one of norm `reference`.
    ///
    /// The projection is only accurate to a small multiple of `reference`, so any part of
    /// the row below `PROJECTION_TOL·reference`, before or after orthogonalization, is zero.
    pub fn push_scaled(&mut self, row: &[f64], rhs: f64, reference: f64) {
        debug_assert_eq!(row.len(), self.dim);
        self.seen += 1;
        let mut v = DVector::from_column_slice(row);
        let scale = v.norm();
        let floor = if reference > 0.0 { PROJECTION_TOL * reference } else { 0.0 };
        if scale == 0.0 || scale <= floor {
            let reference = if reference > 0.0 { reference } else { 1.0 };
            self.inconsistency = self.inconsistency.max(rhs.abs() / reference);
            return;
        }
        v /= scale;
        let mut beta = rhs / scale;
        for _ in 0..2 {
            for (q, &bq) in self.basis.iter().zip(&self.rhs) {
                let c = q.dot(&v);
                v.axpy(-c, q, 1.0);
                beta -= c * bq;
            }
        }
        let nu = v.norm();
        if nu > self.rank_tol && nu * scale > floor {
            self.basis.push(v / nu);
            self.rhs.push(beta / nu);
        } else if reference > 0.0 {
            self.inconsistency = self.inconsistency.max(beta.abs() * scale / reference);
        } else {
            self.inconsistency = self.inconsistency.max(beta.abs());
        }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn rows_seen(&self) -> usize {
        self.seen
    }

    /// Largest right-hand side residual among dependent (normalized) rows.
    pub fn inconsistency(&self) -> f64 {
        self.inconsistency
    }

    pub fn rows(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.basis.iter().map(|q| q.as_slice()).zip(self.rhs.iter().copied())
    }

    /// Minimum-norm solution of the reduced system.
    pub fn min_norm_solution(&self) -> DVector<f64> {
        let mut x = DVector::zeros(self.dim);
        for (q, &b) in self.basis.iter().zip(&self.rhs) {
            x.axpy(b, q, 1.0);
        }
        x
    }
}

/// `Σ_b tr(H_b X_b) = rhs` with Hermitian `H_b`.
#[derive(Debug, Clone)]
pub struct ComplexConstraint {
    pub blocks: Vec<Option<CMatrix>>,
    pub rhs: f64,
}

/// Optimization of `Σ_b tr(C_b X_b)` over Hermitian PSD blocks `X_b`.
#[derive(Debug, Clone)]
pub struct ComplexSdp {
    pub block_dims: Vec<usize>,
    pub objective: Vec<Option<CMatrix>>,
    pub constraints: Vec<ComplexConstraint>,
    pub sense: Sense,
}

#[derive(Debug, Clone)]
pub struct ComplexSolution {
    pub status: SdpStatus,
    pub x: Vec<CMatrix>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub real: SdpSolution,
}

impl ComplexSdp {
    /// Real problem with blocks `emb X_b`; constraint right-hand sides are doubled and the
    /// objective halved, so objective values carry over unchanged.
    pub fn to_real(&self) -> Result<SdpProblem> {
        let check = |h: &CMatrix, b: usize| -> Result<()> {
            let n = self.block_dims[b];
            if h.nrows() != n || h.ncols() != n {
                return Err(Error::DimensionMismatch { expected: n, found: h.nrows() });
            }
            let r = hermiticity_residual(h);
            if r > HERMITIAN_TOL * (1.0 + max_abs(h)) {
                return Err(Error::NotHermitian(r));
            }
            Ok(())
        };
        if self.objective.len() != self.block_dims.len() {
            return Err(Error::invalid("objective block count mismatch"));
        }
        let objective = self
            .objective
            .iter()
            .enumerate()
            .map(|(b, c)| {
                c.as_ref()
                    .map(|c| check(c, b).map(|_| complex_to_real_embed(c) * 0.5))
                    .transpose()
            })
            .collect::<Result<Vec<_>>>()?;
        let constraints = self
            .constraints
            .iter()
            .map(|con| {
                if con.blocks.len() != self.block_dims.len() {
                    return Err(Error::invalid("constraint block count mismatch"));
                }
                let blocks = con
                    .blocks
                    .iter()
                    .enumerate()
                    .map(|(b, h)| h.as_ref().map(|h| check(h, b).map(|_| complex_to_real_embed(h))).transpose())
                    .collect::<Result<Vec<_>>>()?;
                Ok(Constraint { blocks, rhs: 2.0 * con.rhs })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SdpProblem {
            block_dims: self.block_dims.iter().map(|n| 2 * n).collect(),
            objective,
            constraints,
            sense: self.sense,
        })
    }

    pub fn solve(&self, opts: &SdpOptions) -> Result<ComplexSolution> {
        let real = solver::solve(&self.to_real()?, opts)?;
        Ok(ComplexSolution {
            status: real.status,
            x: real.x.iter().map(real_to_complex).collect(),
            primal_objective: real.primal_objective,
            dual_objective: real.dual_objective,
            real,
        })
    }
}
