//! Channels on a Naimark extension space that never create coherence, and
//! the state conversions they allow.
//!
//! A channel `Λ'` on the `d'`-dimensional extension space, with Choi matrix
//! `J`, is admissible when it is CPTP, maps block-diagonal operators to
//! block-diagonal operators (`Λ̂' Δ̂ = Δ̂ Λ̂' Δ̂`) and maps operators supported on
//! the embedded system to operators supported there (`Λ̂' Ω̂ = Ω̂ Λ̂' Ω̂`).
//! A system channel `Λ` is realizable when some admissible `Λ'` compresses to
//! it: `d'·Ê† J^R Ê = Λ̂`.
//!
//! The two invariance conditions are imposed as `w† J^R u = 0` for orthonormal
//! bases `u` of the range of the projector and `w` of its complement.

use num_complex::Complex64;
use serde::Serialize;

use super::embed::{
    functional_rows, hermitian_coords, hermitian_from_row, ComplexConstraint, ComplexSdp, RowReducer,
};
use super::solver::{SdpOptions, SdpStatus, Sense};
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, eig_hermitian_unchecked, hermitian_part, identity, CMatrix, DensityMatrix};
use crate::naimark::NaimarkExtension;
use crate::superop::{choi_from_process, dephasing_superop, embedding_superops, ChoiMatrix, ProcessMatrix};

/// Rows of the reduced affine system whose normalized right-hand side residual
/// exceeds this make the constraints inconsistent.
const AFFINE_TOL: f64 = 1e-8;

/// Relative eigenvalue cut defining the minimal face in facial reduction.
const FACE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy)]
pub struct PicOptions {
    pub sdp: SdpOptions,
    /// Feasible iff the optimal slack is at least `−feas_threshold`.
    pub feas_threshold: f64,
    /// Slacks in `[−marginal_band, −feas_threshold)` are flagged as marginal.
    pub marginal_band: f64,
}

impl Default for PicOptions {
    fn default() -> Self {
        Self { sdp: SdpOptions::default(), feas_threshold: 1e-7, marginal_band: 1e-6 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PicVerdict {
    pub feasible: bool,
    pub marginal: bool,
    /// Largest `t` with `J − t·1 ⪰ 0` over the affine constraint set; `None` when that set is empty.
    pub slack: Option<f64>,
    /// Normalized residual of the dependent affine rows.
    pub affine_residual: f64,
    pub constraint_rank: usize,
    pub status: Option<SdpStatus>,
    pub iterations: usize,
    #[serde(skip)]
    pub choi: Option<ChoiMatrix>,
}

/// `tr(F J) = rhs` on the `N×N` Choi matrix, `N = d'²`.
struct Functional {
    f: CMatrix,
    rhs: Complex64,
}

fn trace_functionals(dp: usize) -> Vec<Functional> {
    let n = dp * dp;
    let mut out = Vec::new();
    for i in 0..dp {
        for j in i..dp {
            let mut f = CMatrix::zeros(n, n);
            for a in 0..dp {
                f[(a * dp + j, a * dp + i)] = Complex64::ONE;
            }
            let rhs = if i == j { Complex64::new(1.0 / dp as f64, 0.0) } else { Complex64::ZERO };
            out.push(Functional { f, rhs });
        }
    }
    out
}

/// `w† J^R u = 0` for `u` spanning the range of `proj` and `w` its complement.
fn invariance_functionals(proj: &CMatrix, dp: usize, out: &mut Vec<Functional>) {
    let n = dp * dp;
    let eig = eig_hermitian_unchecked(&hermitian_part(proj));
    let inside: Vec<usize> = (0..n).filter(|&k| eig.values[k] > 0.5).collect();
    let outside: Vec<usize> = (0..n).filter(|&k| eig.values[k] <= 0.5).collect();
    for &ku in &inside {
        let u = eig.vectors.column(ku);
        for &kw in &outside {
            let w = eig.vectors.column(kw);
            // Coefficient of J_{(a,i),(b,j)} is conj(w_{ab})·u_{ij}; F is its transpose.
            let mut f = CMatrix::zeros(n, n);
            for a in 0..dp {
                for b in 0..dp {
                    let wc = w[a * dp + b].conj();
                    if wc == Complex64::ZERO {
                        continue;
                    }
                    for i in 0..dp {
                        for j in 0..dp {
                            f[(b * dp + j, a * dp + i)] += wc * u[i * dp + j];
                        }
                    }
                }
            }
            out.push(Functional { f, rhs: Complex64::ZERO });
        }
    }
}

fn admissibility_functionals(x: &NaimarkExtension) -> Vec<Functional> {
    let dp = x.d_prime();
    let mut out = trace_functionals(dp);
    invariance_functionals(dephasing_superop(x).matrix(), dp, &mut out);
    invariance_functionals(&embedding_superops(x).omega, dp, &mut out);
    out
}

/// `d'·J_{(p,r),(q,s)} = Λ̂_{(p,q),(r,s)}` for system indices.
fn target_functionals(target: &ProcessMatrix, d: usize, dp: usize) -> Vec<Functional> {
    let n = dp * dp;
    let lam = target.matrix();
    let mut out = Vec::with_capacity(d * d * d * d);
    for p in 0..d {
        for q in 0..d {
            for r in 0..d {
                for s in 0..d {
                    let mut f = CMatrix::zeros(n, n);
                    f[(q * dp + s, p * dp + r)] = Complex64::new(dp as f64, 0.0);
                    out.push(Functional { f, rhs: lam[(p * d + q, r * d + s)] });
                }
            }
        }
    }
    out
}

/// Reduces functionals on `J`, or on `K` with `J = V K V†`, to orthonormal real rows.
fn reduce(functionals: &[Functional], v: Option<&CMatrix>) -> RowReducer {
    let nk = v.map_or_else(|| functionals[0].f.nrows(), |v| v.ncols());
    let mut reducer = RowReducer::new(nk * nk);
    for func in functionals {
        match v {
            Some(v) => {
                let (re0, im0) = functional_rows(&func.f);
                let norm = |r: &[f64]| r.iter().map(|t| t * t).sum::<f64>().sqrt();
                let (re, im) = functional_rows(&(v.adjoint() * &func.f * v));
                reducer.push_scaled(&re, func.rhs.re, norm(&re0));
                reducer.push_scaled(&im, func.rhs.im, norm(&im0));
            }
            None => {
                let (re, im) = functional_rows(&func.f);
                reducer.push(&re, func.rhs.re);
                reducer.push(&im, func.rhs.im);
            }
        }
    }
    reducer
}

/// Largest `t` with `J − t·1 ⪰ 0` on `{J : rows·x = rhs}`, where `tr J = 1` is implied by the rows.
///
/// Substituting `J = Z + t·1`, `t = (1 − tr Z)/N` turns this into `min tr Z`, which is strictly
/// feasible on both sides.
fn max_slack(reducer: &RowReducer, n: usize, opts: &SdpOptions) -> Result<(f64, CMatrix, SdpStatus, usize)> {
    let inv_n = 1.0 / n as f64;
    let mut shifted = RowReducer::new(n * n);
    for (row, rhs) in reducer.rows() {
        let tr: f64 = row[..n].iter().sum();
        let mut g = row.to_vec();
        for v in g.iter_mut().take(n) {
            *v -= tr * inv_n;
        }
        shifted.push(&g, rhs - tr * inv_n);
    }
    if shifted.inconsistency() > AFFINE_TOL {
        return Err(Error::Numerical("trace is not fixed by the constraints".into()));
    }
    let problem = ComplexSdp {
        block_dims: vec![n],
        objective: vec![Some(identity(n))],
        constraints: shifted
            .rows()
            .map(|(g, b)| ComplexConstraint { blocks: vec![Some(hermitian_from_row(n, g))], rhs: b })
            .collect(),
        sense: Sense::Minimize,
    };
    let sol = problem.solve(opts)?;
    let z = &sol.x[0];
    let t = (1.0 - crate::linalg::trace(z).re) * inv_n;
    let j = z + identity(n).scale(t);
    Ok((t, j, sol.status, sol.real.iterations))
}

fn check_target(target: &ProcessMatrix, x: &NaimarkExtension) -> Result<()> {
    crate::povm::check_dim(x.d(), target.dim())?;
    let choi = choi_from_process(target);
    let scale = 1e-9 * (1.0 + crate::linalg::max_abs(target.matrix()));
    let tp = choi.trace_preservation_residual();
    let min = choi.min_eigenvalue();
    if tp > scale || min < -scale {
        return Err(Error::Invalid(format!(
            "target is not CPTP (trace residual {tp:.3e}, min Choi eigenvalue {min:.3e})"
        )));
    }
    Ok(())
}

/// Decides whether `target` is realizable by an admissible channel on the extension `x`.
pub fn pic_feasibility(target: &ProcessMatrix, x: &NaimarkExtension, opts: &PicOptions) -> Result<PicVerdict> {
    check_target(target, x)?;
    let (d, dp) = (x.d(), x.d_prime());
    let mut functionals = admissibility_functionals(x);
    functionals.extend(target_functionals(target, d, dp));
    let reducer = reduce(&functionals, None);
    let affine_residual = reducer.inconsistency();
    if affine_residual > AFFINE_TOL {
        return Ok(PicVerdict {
            feasible: false,
            marginal: false,
            slack: None,
            affine_residual,
            constraint_rank: reducer.rank(),
            status: None,
            iterations: 0,
            choi: None,
        });
    }
    let (t, j, status, iterations) = max_slack(&reducer, dp * dp, &opts.sdp)?;
    let feasible = t >= -opts.feas_threshold;
    Ok(PicVerdict {
        feasible,
        marginal: !feasible && t >= -opts.marginal_band,
        slack: Some(t),
        affine_residual,
        constraint_rank: reducer.rank(),
        status: Some(status),
        iterations,
        choi: Some(ChoiMatrix::new(j)?),
    })
}

/// System channel `Λ̂_{(p,q),(r,s)} = d'·J_{(p,r),(q,s)}` compressed from an extension-space Choi matrix.
pub fn compress_choi(j: &ChoiMatrix, d: usize) -> Result<ProcessMatrix> {
    let dp = j.dim();
    if d > dp {
        return Err(Error::DimensionMismatch { expected: dp, found: d });
    }
    let m = j.matrix();
    ProcessMatrix::new(CMatrix::from_fn(d * d, d * d, |row, col| {
        let (p, q) = (row / d, row % d);
        let (r, s) = (col / d, col % d);
        m[(p * dp + r, q * dp + s)] * dp as f64
    }))
}

#[derive(Debug, Clone, Copy)]
pub struct FmaxOptions {
    pub sdp: SdpOptions,
    /// Drop the block-diagonal and subspace conditions: optimize over all system channels.
    pub unconstrained: bool,
}

impl Default for FmaxOptions {
    fn default() -> Self {
        Self { sdp: SdpOptions::default(), unconstrained: false }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FmaxResult {
    pub value: f64,
    pub status: SdpStatus,
    pub iterations: usize,
}

/// Admissible Choi matrices `J = V K V†` of one extension, reduced once and reused across state pairs.
#[derive(Debug, Clone)]
pub struct FmaxContext {
    d: usize,
    dp: usize,
    /// Columns span the minimal face of the PSD cone containing every admissible `J`.
    face: CMatrix,
    /// Orthonormal rows in the coordinates of `K`.
    rows: Vec<(Vec<f64>, f64)>,
    sdp: SdpOptions,
}

impl FmaxContext {
    pub fn new(x: &NaimarkExtension, opts: &FmaxOptions) -> Result<Self> {
        if opts.unconstrained {
            return Ok(Self::unconstrained(x.d(), &opts.sdp));
        }
        let dp = x.d_prime();
        let n = dp * dp;
        let functionals = admissibility_functionals(x);
        let full = reduce(&functionals, None);
        let (t, j, status, _) = max_slack(&full, n, &opts.sdp)?;
        if status != SdpStatus::Optimal {
            return Err(Error::Solver(format!("facial reduction solve ended with {status:?}")));
        }
        let face = if t > FACE_TOL {
            identity(n)
        } else {
            // The interior-point limit lies in the relative interior of the admissible set.
            let eig = eig_hermitian(&hermitian_part(&j))?;
            eig.range_basis(FACE_TOL * eig.max())
        };
        let reduced = reduce(&functionals, Some(&face));
        if reduced.inconsistency() > AFFINE_TOL {
            return Err(Error::Numerical("face restriction broke the affine constraints".into()));
        }
        Ok(Self {
            d: x.d(),
            dp,
            rows: reduced.rows().map(|(g, b)| (g.to_vec(), b)).collect(),
            face,
            sdp: opts.sdp,
        })
    }

    /// All CPTP maps on the system.
    pub fn unconstrained(d: usize, sdp: &SdpOptions) -> Self {
        let reduced = reduce(&trace_functionals(d), None);
        Self {
            d,
            dp: d,
            rows: reduced.rows().map(|(g, b)| (g.to_vec(), b)).collect(),
            face: identity(d * d),
            sdp: *sdp,
        }
    }

    pub fn face_rank(&self) -> usize {
        self.face.ncols()
    }

    /// `max F(Λ[ρ], σ)` over admissible channels, with `F(ρ, σ) = ‖√ρ √σ‖₁`.
    pub fn fmax(&self, rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<FmaxResult> {
        crate::povm::check_dim(self.d, rho.dim())?;
        crate::povm::check_dim(self.d, sigma.dim())?;
        let (d, dp) = (self.d, self.dp);
        let nk = self.face.ncols();

        // Restricting σ to its support keeps the fidelity block strictly feasible.
        let se = eig_hermitian(sigma.matrix())?;
        let vs = se.range_basis(1e-12);
        let r = vs.ncols();
        let sigma_s = vs.adjoint() * sigma.matrix() * &vs;

        let mut constraints: Vec<ComplexConstraint> = self
            .rows
            .iter()
            .map(|(g, b)| ComplexConstraint { blocks: vec![Some(hermitian_from_row(nk, g)), None], rhs: *b })
            .collect();
        let place = |h: &CMatrix, lower: bool| {
            let mut m = CMatrix::zeros(2 * r, 2 * r);
            let o = if lower { r } else { 0 };
            m.view_mut((o, o), (r, r)).copy_from(h);
            m
        };
        let sigma_coords = hermitian_coords(&sigma_s);
        let mut unit = vec![0.0; r * r];
        for k in 0..r * r {
            unit[k] = 1.0;
            let h = hermitian_from_row(r, &unit);
            unit[k] = 0.0;
            constraints.push(ComplexConstraint { blocks: vec![None, Some(place(&h, false))], rhs: sigma_coords[k] });

            // tr(h·V_σ† Λ[ρ] V_σ) with Λ[ρ]_{pq} = d' Σ_{rs} J_{(p,r),(q,s)} ρ_rs.
            let g = &vs * &h * vs.adjoint();
            let n = dp * dp;
            let mut f = CMatrix::zeros(n, n);
            for p in 0..d {
                for q in 0..d {
                    for a in 0..d {
                        for b in 0..d {
                            f[(q * dp + b, p * dp + a)] = g[(q, p)] * rho.matrix()[(a, b)] * dp as f64;
                        }
                    }
                }
            }
            let fk = hermitian_part(&(self.face.adjoint() * f * &self.face));
            constraints.push(ComplexConstraint {
                blocks: vec![Some(-fk), Some(place(&h, true))],
                rhs: 0.0,
            });
        }
        let mut objective = CMatrix::zeros(2 * r, 2 * r);
        for k in 0..r {
            objective[(k, r + k)] = Complex64::new(0.5, 0.0);
            objective[(r + k, k)] = Complex64::new(0.5, 0.0);
        }
        let problem = ComplexSdp {
            block_dims: vec![nk, 2 * r],
            objective: vec![None, Some(objective)],
            constraints,
            sense: Sense::Maximize,
        };
        let sol = problem.solve(&self.sdp)?;
        Ok(FmaxResult { value: sol.primal_objective, status: sol.status, iterations: sol.real.iterations })
    }
}

/// One-shot `fmax`; build an [`FmaxContext`] when sweeping many state pairs.
pub fn fmax(rho: &DensityMatrix, sigma: &DensityMatrix, x: &NaimarkExtension, opts: &FmaxOptions) -> Result<FmaxResult> {
    FmaxContext::new(x, opts)?.fmax(rho, sigma)
}

/// `max Re tr X` subject to `[[ρ, X], [X†, σ]] ⪰ 0`; equals `‖√ρ √σ‖₁`.
///
/// Any feasible `X` is `V_ρ Y V_σ†` for support bases `V`, so the solve runs on the
/// supports, where the block constraint is strictly feasible even for pure states.
pub fn fidelity_sdp(rho: &DensityMatrix, sigma: &DensityMatrix, opts: &SdpOptions) -> Result<f64> {
    crate::povm::check_dim(rho.dim(), sigma.dim())?;
    let vr = eig_hermitian(rho.matrix())?.range_basis(1e-12);
    let vs = eig_hermitian(sigma.matrix())?.range_basis(1e-12);
    let (a, b) = (vr.ncols(), vs.ncols());
    let n = a + b;
    let mut constraints = Vec::new();
    for (offset, v, target) in [(0, &vr, rho.matrix()), (a, &vs, sigma.matrix())] {
        let k = v.ncols();
        let coords = hermitian_coords(&(v.adjoint() * target * v));
        let mut unit = vec![0.0; k * k];
        for idx in 0..k * k {
            unit[idx] = 1.0;
            let h = hermitian_from_row(k, &unit);
            unit[idx] = 0.0;
            let mut m = CMatrix::zeros(n, n);
            m.view_mut((offset, offset), (k, k)).copy_from(&h);
            constraints.push(ComplexConstraint { blocks: vec![Some(m)], rhs: coords[idx] });
        }
    }
    // Re tr(Y M) with M = V_σ† V_ρ.
    let m = vs.adjoint() * &vr;
    let mut objective = CMatrix::zeros(n, n);
    objective.view_mut((0, a), (a, b)).copy_from(&m.adjoint().scale(0.5));
    objective.view_mut((a, 0), (b, a)).copy_from(&m.scale(0.5));
    let sol = ComplexSdp { block_dims: vec![n], objective: vec![Some(objective)], constraints, sense: Sense::Maximize }
        .solve(opts)?;
    if sol.status != SdpStatus::Optimal {
        return Err(Error::Solver(format!("fidelity solve ended with {:?}", sol.status)));
    }
    Ok(sol.primal_objective)
}

/// `max tr(H X)` over density matrices; equals `λ_max(H)`.
pub fn lambda_max_sdp(h: &CMatrix, opts: &SdpOptions) -> Result<f64> {
    let n = h.nrows();
    let sol = ComplexSdp {
        block_dims: vec![n],
        objective: vec![Some(h.clone())],
        constraints: vec![ComplexConstraint { blocks: vec![Some(identity(n))], rhs: 1.0 }],
        sense: Sense::Maximize,
    }
    .solve(opts)?;
    if sol.status != SdpStatus::Optimal {
        return Err(Error::Solver(format!("eigenvalue solve ended with {:?}", sol.status)));
    }
    Ok(sol.primal_objective)
}
