//! Dense primal-dual interior-point solver for block-diagonal real SDPs.
//!
//! Standard form (for `Sense::Minimize`):
//!
//! ```text
//! minimize ⟨C, X⟩  subject to  ⟨A_k, X⟩ = b_k,  X ⪰ 0
//! maximize bᵀy     subject to  S = C − Σ y_k A_k ⪰ 0
//! ```
//!
//! Infeasible-start path following with the Nesterov–Todd direction and
//! Mehrotra's predictor-corrector; the Schur complement is formed densely and
//! factored by Cholesky. `Sense::Maximize` negates `C` internally; the
//! reported dual `y` then satisfies `Σ y_k A_k − C ⪰ 0`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};

pub type RMatrix = DMatrix<f64>;
pub type RVector = DVector<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Minimize,
    Maximize,
}

/// `Σ_b ⟨A_b, X_b⟩ = rhs`; `None` blocks are zero.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub blocks: Vec<Option<RMatrix>>,
    pub rhs: f64,
}

#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub block_dims: Vec<usize>,
    pub objective: Vec<Option<RMatrix>>,
    pub constraints: Vec<Constraint>,
    pub sense: Sense,
}

impl SdpProblem {
    pub fn validate(&self) -> Result<()> {
        let nb = self.block_dims.len();
        if self.objective.len() != nb {
            return Err(Error::invalid("objective block count mismatch"));
        }
        let check = |m: &Option<RMatrix>, b: usize| -> Result<()> {
            if let Some(m) = m {
                let n = self.block_dims[b];
                if m.nrows() != n || m.ncols() != n {
                    return Err(Error::DimensionMismatch { expected: n, found: m.nrows() });
                }
                if m.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite);
                }
                let scale = m.amax().max(1.0);
                if (m - m.transpose()).amax() > 1e-12 * scale {
                    return Err(Error::invalid(format!("coefficient block {b} is not symmetric")));
                }
            }
            Ok(())
        };
        for (b, m) in self.objective.iter().enumerate() {
            check(m, b)?;
        }
        for c in &self.constraints {
            if c.blocks.len() != nb {
                return Err(Error::invalid("constraint block count mismatch"));
            }
            if !c.rhs.is_finite() {
                return Err(Error::NonFinite);
            }
            for (b, m) in c.blocks.iter().enumerate() {
                check(m, b)?;
            }
        }
        let nvar: usize = self.block_dims.iter().map(|n| n * (n + 1) / 2).sum();
        if self.constraints.len() > nvar {
            return Err(Error::invalid(format!(
                "{} constraints exceed {nvar} free variables",
                self.constraints.len()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SdpStatus {
    /// Relative residuals below `tol`, or below `100·tol` once progress stops.
    Optimal,
    /// Primal infeasible: a dual improving ray was found.
    Infeasible,
    /// Dual infeasible: a primal improving ray was found.
    Unbounded,
    MaxIterations,
    /// Progress stopped with residuals above `100·tol`.
    Stalled,
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct Residuals {
    /// `‖A(X) − b‖₂`, original scaling.
    pub primal: f64,
    /// `‖C − Σ y A − S‖_F`, original scaling.
    pub dual: f64,
    /// `|⟨C, X⟩ − bᵀy|`, original scaling.
    pub gap: f64,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SdpStatus,
    pub x: Vec<RMatrix>,
    pub s: Vec<RMatrix>,
    pub y: RVector,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub residuals: Residuals,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct SdpOptions {
    /// Relative primal, dual and gap tolerance.
    pub tol: f64,
    pub max_iters: usize,
    /// Print one line per iteration to stderr.
    pub verbose: bool,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self { tol: 1e-9, max_iters: 200, verbose: false }
    }
}

/// Fraction of the distance to the cone boundary taken per step.
const STEP_FRACTION: f64 = 0.98;

/// Block-diagonal symmetric matrices.
type Blocks = Vec<RMatrix>;

fn inner(a: &Blocks, b: &Blocks) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn norm(a: &Blocks) -> f64 {
    inner(a, a).sqrt()
}

fn sym(m: &RMatrix) -> RMatrix {
    (m + m.transpose()) * 0.5
}

/// Flattened problem data in a scaled, row-normalized form.
struct Data {
    dims: Vec<usize>,
    offsets: Vec<usize>,
    /// Row k is the concatenated column-major `vec` of every block of `A_k`.
    a: RMatrix,
    b: RVector,
    c: Blocks,
    /// Per-constraint, per-block: whether the block is nonzero.
    nonzero: Vec<Vec<bool>>,
}

impl Data {
    fn op(&self, x: &Blocks) -> RVector {
        let mut flat = RVector::zeros(self.a.ncols());
        for (b, m) in x.iter().enumerate() {
            flat.rows_mut(self.offsets[b], m.len()).copy_from_slice(m.as_slice());
        }
        &self.a * flat
    }

    fn adjoint(&self, y: &RVector) -> Blocks {
        let flat = self.a.transpose() * y;
        self.dims
            .iter()
            .enumerate()
            .map(|(b, &n)| RMatrix::from_column_slice(n, n, &flat.as_slice()[self.offsets[b]..self.offsets[b] + n * n]))
            .collect()
    }
}

/// `X = F Fᵀ` with `F = Q Λ^{1/2}`, from a symmetric eigendecomposition.
struct Factor {
    f: RMatrix,
    f_inv: RMatrix,
}

fn factor(x: &RMatrix) -> Result<Factor> {
    let eig = SymmetricEigen::new(x.clone());
    let mut f = eig.eigenvectors.clone();
    let mut f_inv = eig.eigenvectors.transpose();
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        if !(l > 0.0) {
            return Err(Error::Numerical(format!("iterate lost positive definiteness ({l:.3e})")));
        }
        let s = l.sqrt();
        f.column_mut(k).scale_mut(s);
        f_inv.row_mut(k).scale_mut(1.0 / s);
    }
    Ok(Factor { f, f_inv })
}

/// Largest `α` with `X + α ΔX ⪰ 0`, given a factor of `X`.
fn max_step(fx: &Factor, dx: &RMatrix) -> f64 {
    let scaled = sym(&(&fx.f_inv * dx * fx.f_inv.transpose()));
    let min = SymmetricEigen::new(scaled).eigenvalues.min();
    if min >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / min
    }
}

/// Nesterov–Todd scaling of one block: `W = G Gᵀ`, `W S W = X`, `GᵀSG = G⁻¹XG⁻ᵀ = diag(d)`.
struct NtScaling {
    g: RMatrix,
    g_inv: RMatrix,
    w: RMatrix,
    d: RVector,
}

fn nt_scaling(x: &RMatrix, s: &RMatrix) -> Result<NtScaling> {
    let fx = factor(x)?;
    let fs = factor(s)?;
    let svd = (fs.f.transpose() * &fx.f).svd(true, true);
    let v = svd.v_t.ok_or_else(|| Error::Numerical("SVD failed".into()))?.transpose();
    let d = svd.singular_values.clone();
    if d.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Numerical("degenerate NT scaling".into()));
    }
    let mut g = &fx.f * &v;
    for (k, &dk) in d.iter().enumerate() {
        g.column_mut(k).scale_mut(1.0 / dk.sqrt());
    }
    // Gᵀ S G = D  ⇒  G⁻ᵀ = S G D⁻¹
    let mut g_inv_t = s * &g;
    for (k, &dk) in d.iter().enumerate() {
        g_inv_t.column_mut(k).scale_mut(1.0 / dk);
    }
    let w = sym(&(&g * g.transpose()));
    Ok(NtScaling { g_inv: g_inv_t.transpose(), g, w, d })
}

pub fn solve(problem: &SdpProblem, opts: &SdpOptions) -> Result<SdpSolution> {
    problem.validate()?;
    let dims = problem.block_dims.clone();
    let mut offsets = Vec::with_capacity(dims.len());
    let mut total = 0;
    for &n in &dims {
        offsets.push(total);
        total += n * n;
    }
    let m = problem.constraints.len();
    let sign = if problem.sense == Sense::Maximize { -1.0 } else { 1.0 };

    // Row-normalize constraints.
    let mut a = RMatrix::zeros(m, total);
    let mut b = RVector::zeros(m);
    let mut row_scale = RVector::zeros(m);
    let mut nonzero = vec![vec![false; dims.len()]; m];
    for (k, con) in problem.constraints.iter().enumerate() {
        for (blk, coeff) in con.blocks.iter().enumerate() {
            if let Some(coeff) = coeff {
                let s = sym(coeff);
                for (idx, v) in s.iter().enumerate() {
                    a[(k, offsets[blk] + idx)] = *v;
                }
                nonzero[k][blk] = s.amax() > 0.0;
            }
        }
        let rn = a.row(k).norm();
        if rn == 0.0 {
            return Err(Error::invalid(format!("constraint {k} has no coefficients")));
        }
        row_scale[k] = rn;
        a.row_mut(k).scale_mut(1.0 / rn);
        b[k] = con.rhs / rn;
    }
    let c_raw: Blocks = problem
        .objective
        .iter()
        .zip(&dims)
        .map(|(c, &n)| c.as_ref().map_or_else(|| RMatrix::zeros(n, n), |c| sym(c) * sign))
        .collect();
    let b_scale = b.amax().max(1.0);
    let c_scale = c_raw.iter().map(|c| c.amax()).fold(0.0, f64::max).max(1.0);
    let data = Data {
        dims: dims.clone(),
        offsets,
        a,
        b: &b / b_scale,
        c: c_raw.iter().map(|c| c / c_scale).collect(),
        nonzero,
    };
    let n_total: f64 = dims.iter().sum::<usize>() as f64;

    let raw = ipm(&data, n_total, opts)?;

    // Undo scaling: X = b_scale·X̂, S = c_scale·Ŝ, y_k = c_scale·ŷ_k / row_scale_k.
    let x: Blocks = raw.x.iter().map(|m| m * b_scale).collect();
    let s: Blocks = raw.s.iter().map(|m| m * c_scale).collect();
    let y_min = RVector::from_fn(m, |k, _| raw.y[k] * c_scale / row_scale[k]);
    let residuals = original_residuals(problem, &x, &s, &y_min, &c_raw);
    let primal_min: f64 = inner(&c_raw, &x);
    let dual_min: f64 = problem.constraints.iter().zip(y_min.iter()).map(|(c, y)| c.rhs * y).sum();
    Ok(SdpSolution {
        status: raw.status,
        x,
        s,
        y: y_min * sign,
        primal_objective: primal_min * sign,
        dual_objective: dual_min * sign,
        residuals,
        iterations: raw.iterations,
    })
}

fn original_residuals(problem: &SdpProblem, x: &Blocks, s: &Blocks, y: &RVector, c: &Blocks) -> Residuals {
    let mut rp2 = 0.0;
    let mut aty: Blocks = x.iter().map(|m| RMatrix::zeros(m.nrows(), m.ncols())).collect();
    for (k, con) in problem.constraints.iter().enumerate() {
        let mut v = -con.rhs;
        for (blk, coeff) in con.blocks.iter().enumerate() {
            if let Some(coeff) = coeff {
                v += coeff.dot(&x[blk]);
                aty[blk] += coeff * y[k];
            }
        }
        rp2 += v * v;
    }
    let rd: Blocks = c.iter().zip(&aty).zip(s).map(|((c, a), s)| c - a - s).collect();
    let pobj = inner(c, x);
    let dobj: f64 = problem.constraints.iter().zip(y.iter()).map(|(c, y)| c.rhs * y).sum();
    Residuals { primal: rp2.sqrt(), dual: norm(&rd), gap: (pobj - dobj).abs() }
}

struct RawSolution {
    status: SdpStatus,
    x: Blocks,
    s: Blocks,
    y: RVector,
    iterations: usize,
}

const REFINE_STEPS: usize = 2;

/// Once the Schur system is too ill-conditioned to reach `tol`, the best iterate is
/// accepted as optimal if every relative residual is within this multiple of `tol`.
const NEAR_OPTIMAL_FACTOR: f64 = 100.0;

/// Iterations without halving the best residual before declaring no progress.
const NO_PROGRESS_ITERS: usize = 6;

struct Best {
    merit: f64,
    x: Blocks,
    s: Blocks,
    y: RVector,
    iteration: usize,
}

fn ipm(data: &Data, n_total: f64, opts: &SdpOptions) -> Result<RawSolution> {
    let m = data.b.len();
    let nb = data.dims.len();
    // Starting point after the usual SDPT3 heuristic on normalized data.
    let b_max = data.b.amax();
    let c_norm = norm(&data.c);
    let xi = (10.0f64).max(n_total.sqrt()).max(n_total * (1.0 + b_max));
    let eta = (10.0f64).max(n_total.sqrt()).max(1.0 + c_norm);
    let mut x: Blocks = data.dims.iter().map(|&n| RMatrix::identity(n, n) * xi).collect();
    let mut s: Blocks = data.dims.iter().map(|&n| RMatrix::identity(n, n) * eta).collect();
    let mut y = RVector::zeros(m);

    let b_norm = data.b.norm();
    let mut status = SdpStatus::MaxIterations;
    let mut iterations = 0;
    let mut tiny_steps = 0;
    let mut best: Option<Best> = None;
    let mut last_progress = 0;
    let mut progress_mark = f64::INFINITY;

    for it in 0..=opts.max_iters {
        iterations = it;
        let rp = &data.b - data.op(&x);
        let aty = data.adjoint(&y);
        let rd: Blocks = (0..nb).map(|k| &data.c[k] - &aty[k] - &s[k]).collect();
        let pobj = inner(&data.c, &x);
        let dobj = data.b.dot(&y);
        let mu = inner(&x, &s) / n_total;

        let pinf = rp.norm() / (1.0 + b_norm);
        let dinf = norm(&rd) / (1.0 + c_norm);
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        if opts.verbose {
            eprintln!("{it:4} pobj {pobj:+.10e} dobj {dobj:+.10e} pinf {pinf:.2e} dinf {dinf:.2e} gap {gap:.2e} mu {mu:.2e}");
        }
        if pinf < opts.tol && dinf < opts.tol && gap < opts.tol {
            status = SdpStatus::Optimal;
            best = None;
            break;
        }
        let merit = pinf.max(dinf).max(gap);
        if best.as_ref().is_none_or(|b| merit < b.merit) {
            best = Some(Best { merit, x: x.clone(), s: s.clone(), y: y.clone(), iteration: it });
        }
        if merit < 0.5 * progress_mark {
            progress_mark = merit;
            last_progress = it;
        }
        if it - last_progress >= NO_PROGRESS_ITERS && progress_mark < NEAR_OPTIMAL_FACTOR * opts.tol {
            status = SdpStatus::Stalled;
            break;
        }
        if dobj > 0.0 && (norm(&rd) + c_norm) / dobj < 1e-8 {
            status = SdpStatus::Infeasible;
            break;
        }
        if pobj < 0.0 && (b_norm + rp.norm()) / (-pobj) < 1e-8 {
            status = SdpStatus::Unbounded;
            break;
        }
        if it == opts.max_iters {
            break;
        }

        let scalings: Vec<NtScaling> = match (0..nb).map(|k| nt_scaling(&x[k], &s[k])).collect() {
            Ok(v) => v,
            Err(_) => {
                status = SdpStatus::Stalled;
                break;
            }
        };
        let schur = schur_complement(data, &scalings);
        let chol = match factor_schur(schur) {
            Some(c) => c,
            None => {
                status = SdpStatus::Stalled;
                break;
            }
        };
        let w_rd_w: Blocks = (0..nb).map(|k| sym(&(&scalings[k].w * &rd[k] * &scalings[k].w))).collect();
        let a_wrdw = data.op(&w_rd_w);

        let direction = |rc: &Blocks| -> (Blocks, RVector, Blocks) {
            let rhs = &rp - data.op(rc) + &a_wrdw;
            let mut dy = chol.solve(&rhs);
            let build = |dy: &RVector| -> (Blocks, Blocks) {
                let atdy = data.adjoint(dy);
                let ds: Blocks = (0..nb).map(|k| &rd[k] - &atdy[k]).collect();
                let dx: Blocks = (0..nb)
                    .map(|k| sym(&(&rc[k] - &scalings[k].w * &ds[k] * &scalings[k].w)))
                    .collect();
                (dx, ds)
            };
            let (mut dx, mut ds) = build(&dy);
            // Refinement against the exact operator keeps A(dx) = rp as M loses conditioning.
            for _ in 0..REFINE_STEPS {
                let res = &rp - data.op(&dx);
                if res.norm() <= 1e-15 * (1.0 + rp.norm()) {
                    break;
                }
                dy += chol.solve(&res);
                (dx, ds) = build(&dy);
            }
            (dx, dy, ds)
        };
        let steps = |dx: &Blocks, ds: &Blocks| -> Result<(f64, f64)> {
            let mut ap = f64::INFINITY;
            let mut ad = f64::INFINITY;
            for k in 0..nb {
                ap = ap.min(max_step(&factor(&x[k])?, &dx[k]));
                ad = ad.min(max_step(&factor(&s[k])?, &ds[k]));
            }
            Ok((ap, ad))
        };

        // Predictor.
        let rc_aff: Blocks = x.iter().map(|m| -m).collect();
        let (dx_a, _dy_a, ds_a) = direction(&rc_aff);
        let Ok((ap_a, ad_a)) = steps(&dx_a, &ds_a) else {
            status = SdpStatus::Stalled;
            break;
        };
        let (ap_a, ad_a) = (ap_a.min(1.0), ad_a.min(1.0));
        let mu_aff = (0..nb)
            .map(|k| (&x[k] + &dx_a[k] * ap_a).dot(&(&s[k] + &ds_a[k] * ad_a)))
            .sum::<f64>()
            / n_total;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // Corrector.
        let rc: Blocks = (0..nb)
            .map(|k| {
                let sc = &scalings[k];
                let dxt = &sc.g_inv * &dx_a[k] * sc.g_inv.transpose();
                let dst = sc.g.transpose() * &ds_a[k] * &sc.g;
                let cross = sym(&(dxt * dst));
                let n = sc.d.len();
                let r = RMatrix::from_fn(n, n, |i, j| {
                    let target = if i == j { sigma * mu - sc.d[i] * sc.d[i] } else { 0.0 };
                    2.0 * (target - cross[(i, j)]) / (sc.d[i] + sc.d[j])
                });
                sym(&(&sc.g * r * sc.g.transpose()))
            })
            .collect();
        let (dx, dy, ds) = direction(&rc);
        let Ok((ap, ad)) = steps(&dx, &ds) else {
            status = SdpStatus::Stalled;
            break;
        };
        let tau = STEP_FRACTION;
        let ap = (tau * ap).min(1.0);
        let ad = (tau * ad).min(1.0);
        if opts.verbose {
            eprintln!("     sigma {sigma:.2e} aff ({ap_a:.2e}, {ad_a:.2e}) step ({ap:.2e}, {ad:.2e})");
        }
        if ap < 1e-10 && ad < 1e-10 {
            tiny_steps += 1;
            if tiny_steps >= 3 {
                status = SdpStatus::Stalled;
                break;
            }
        } else {
            tiny_steps = 0;
        }
        for k in 0..nb {
            x[k] = sym(&(&x[k] + &dx[k] * ap));
            s[k] = sym(&(&s[k] + &ds[k] * ad));
        }
        y += dy * ad;
    }
    if matches!(status, SdpStatus::Stalled | SdpStatus::MaxIterations) {
        if let Some(b) = best {
            if b.merit < NEAR_OPTIMAL_FACTOR * opts.tol {
                status = SdpStatus::Optimal;
            }
            if opts.verbose {
                eprintln!("     returning iterate {} with residual {:.2e} as {status:?}", b.iteration, b.merit);
            }
            (x, s, y) = (b.x, b.s, b.y);
        }
    }
    Ok(RawSolution { status, x, s, y, iterations })
}

/// `M_ij = ⟨A_i, W A_j W⟩`.
fn schur_complement(data: &Data, scalings: &[NtScaling]) -> RMatrix {
    let m = data.b.len();
    let total = data.a.ncols();
    let mut t = RMatrix::zeros(m, total);
    for j in 0..m {
        for (blk, sc) in scalings.iter().enumerate() {
            if !data.nonzero[j][blk] {
                continue;
            }
            let n = data.dims[blk];
            let off = data.offsets[blk];
            let aj = RMatrix::from_iterator(n, n, data.a.row(j).columns(off, n * n).iter().copied());
            let waw = &sc.w * aj * &sc.w;
            for (idx, v) in waw.iter().enumerate() {
                t[(j, off + idx)] = *v;
            }
        }
    }
    let mut schur = &data.a * t.transpose();
    schur = (&schur + schur.transpose()) * 0.5;
    schur
}

fn factor_schur(mut schur: RMatrix) -> Option<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    let scale = schur.diagonal().amax().max(f64::MIN_POSITIVE);
    for reg in [0.0, 1e-14, 1e-12, 1e-10] {
        if reg > 0.0 {
            for i in 0..schur.nrows() {
                schur[(i, i)] += reg * scale;
            }
        }
        if let Some(c) = nalgebra::Cholesky::new(schur.clone()) {
            return Some(c);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd(n: usize, seed: u64) -> RMatrix {
        use rand::Rng;
        let mut rng = crate::random::seeded(seed);
        let g = RMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
        &g * g.transpose() + RMatrix::identity(n, n) * 0.1
    }

    #[test]
    fn nt_scaling_identities() {
        let x = spd(5, 1);
        let s = spd(5, 2);
        let sc = nt_scaling(&x, &s).unwrap();
        let d = RMatrix::from_diagonal(&sc.d);
        assert!((&sc.w * &s * &sc.w - &x).amax() < 1e-10);
        assert!((&sc.g_inv * &x * sc.g_inv.transpose() - &d).amax() < 1e-10);
        assert!((sc.g.transpose() * &s * &sc.g - &d).amax() < 1e-10);
        assert!((&sc.g_inv * &sc.g - RMatrix::identity(5, 5)).amax() < 1e-10);
    }

    fn sym_unit(n: usize, i: usize, j: usize) -> RMatrix {
        let mut e = RMatrix::zeros(n, n);
        e[(i, j)] = 0.5;
        e[(j, i)] += 0.5;
        e
    }

    #[test]
    fn trace_below_identity() {
        // max tr X subject to X + S = 1, X, S ⪰ 0.
        let constraints = (0..2)
            .flat_map(|i| (i..2).map(move |j| (i, j)))
            .map(|(i, j)| Constraint {
                blocks: vec![Some(sym_unit(2, i, j)), Some(sym_unit(2, i, j))],
                rhs: if i == j { 1.0 } else { 0.0 },
            })
            .collect();
        let p = SdpProblem {
            block_dims: vec![2, 2],
            objective: vec![Some(RMatrix::identity(2, 2)), None],
            constraints,
            sense: Sense::Maximize,
        };
        let sol = solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.primal_objective - 2.0).abs() < 1e-8);
    }

    #[test]
    fn random_instance_meets_kkt_bounds() {
        use rand::Rng;
        let mut rng = crate::random::seeded(9);
        let n = 6;
        let x0 = spd(n, 21);
        let s0 = spd(n, 22);
        let mut cmat = s0.clone();
        let mut constraints = Vec::new();
        for _ in 0..10 {
            let g = RMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
            let a = sym(&g);
            cmat += &a * (rng.random::<f64>() - 0.5);
            constraints.push(Constraint { rhs: a.dot(&x0), blocks: vec![Some(a)] });
        }
        let p = SdpProblem { block_dims: vec![n], objective: vec![Some(cmat)], constraints, sense: Sense::Minimize };
        let sol = solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!(sol.residuals.primal < 1e-7);
        assert!(sol.residuals.dual < 1e-7);
        assert!(sol.residuals.gap < 1e-6);
        assert!(SymmetricEigen::new(sol.x[0].clone()).eigenvalues.min() > -1e-8);
        assert!(SymmetricEigen::new(sol.s[0].clone()).eigenvalues.min() > -1e-8);
    }

    #[test]
    fn negative_trace_is_infeasible() {
        let p = SdpProblem {
            block_dims: vec![2],
            objective: vec![Some(RMatrix::identity(2, 2))],
            constraints: vec![Constraint { blocks: vec![Some(RMatrix::identity(2, 2))], rhs: -1.0 }],
            sense: Sense::Minimize,
        };
        assert_eq!(solve(&p, &SdpOptions::default()).unwrap().status, SdpStatus::Infeasible);
    }

    #[test]
    fn unbounded_ray_is_detected() {
        // min x₁₁ − x₂₂ subject to x₁₂ = 0.
        let c = RMatrix::from_diagonal(&RVector::from_vec(vec![1.0, -1.0]));
        let p = SdpProblem {
            block_dims: vec![2],
            objective: vec![Some(c)],
            constraints: vec![Constraint { blocks: vec![Some(sym_unit(2, 0, 1))], rhs: 0.0 }],
            sense: Sense::Minimize,
        };
        assert_eq!(solve(&p, &SdpOptions::default()).unwrap().status, SdpStatus::Unbounded);
    }

    #[test]
    fn asymmetric_data_is_rejected() {
        let mut a = RMatrix::identity(2, 2);
        a[(0, 1)] = 1.0;
        let p = SdpProblem {
            block_dims: vec![2],
            objective: vec![None],
            constraints: vec![Constraint { blocks: vec![Some(a)], rhs: 1.0 }],
            sense: Sense::Minimize,
        };
        assert!(solve(&p, &SdpOptions::default()).is_err());
    }
}
