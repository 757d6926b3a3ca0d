//! POVMs, measurement operators and outcome statistics.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    c, eig_hermitian_unchecked, frobenius, hermiticity_residual, identity, identity_residual,
    is_finite, max_abs, psd_sqrt, CMatrix, DensityMatrix, PSD_TOL, RANK_TOL, TRACE_TOL,
};

/// Outcomes with probability at or below this are treated as not occurring.
pub const PROB_TOL: f64 = 1e-12;

/// Per-effect and completeness diagnostics for a candidate POVM.
#[derive(Debug, Clone, Serialize)]
pub struct PovmDiagnostics {
    pub dim: usize,
    pub min_eigenvalues: Vec<f64>,
    pub hermiticity_residuals: Vec<f64>,
    /// `‖Σ E_i − 1‖_F`.
    pub completeness_residual: f64,
    pub problems: Vec<String>,
}

impl PovmDiagnostics {
    pub fn is_ok(&self) -> bool {
        self.problems.is_empty()
    }
}

/// Checks every POVM condition on raw effects. Never fails; problems are listed.
pub fn validate_effects(effects: &[CMatrix]) -> PovmDiagnostics {
    let dim = effects.first().map_or(0, CMatrix::nrows);
    let mut diag = PovmDiagnostics {
        dim,
        min_eigenvalues: Vec::with_capacity(effects.len()),
        hermiticity_residuals: Vec::with_capacity(effects.len()),
        completeness_residual: f64::NAN,
        problems: Vec::new(),
    };
    if effects.is_empty() {
        diag.problems.push("no effects".into());
        return diag;
    }
    let mut shapes_ok = true;
    for (i, e) in effects.iter().enumerate() {
        if e.nrows() != dim || e.ncols() != dim {
            diag.problems
                .push(format!("effect {i} has shape {}x{}, expected {dim}x{dim}", e.nrows(), e.ncols()));
            shapes_ok = false;
            diag.min_eigenvalues.push(f64::NAN);
            diag.hermiticity_residuals.push(f64::NAN);
            continue;
        }
        if !is_finite(e) {
            diag.problems.push(format!("effect {i} has non-finite entries"));
            shapes_ok = false;
            diag.min_eigenvalues.push(f64::NAN);
            diag.hermiticity_residuals.push(f64::NAN);
            continue;
        }
        let herm = hermiticity_residual(e);
        diag.hermiticity_residuals.push(herm);
        if herm > PSD_TOL * max_abs(e).max(1.0) {
            diag.problems.push(format!("effect {i} is not Hermitian (residual {herm:.3e})"));
        }
        let min = eig_hermitian_unchecked(e).min();
        diag.min_eigenvalues.push(min);
        if min < -PSD_TOL {
            diag.problems.push(format!("effect {i} is not PSD (min eigenvalue {min:.3e})"));
        }
    }
    if shapes_ok {
        diag.completeness_residual = identity_residual(dim, effects.iter().cloned());
        if diag.completeness_residual > TRACE_TOL {
            diag.problems.push(format!(
                "completeness failure: ‖Σ E_i − 1‖_F = {:.3e}",
                diag.completeness_residual
            ));
        }
    }
    diag
}

/// Ordered list of PSD effects summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    effects: Vec<CMatrix>,
}

impl Povm {
    pub fn new(effects: Vec<CMatrix>) -> Result<Self> {
        let diag = validate_effects(&effects);
        if !diag.is_ok() {
            return Err(Error::Invalid(format!("invalid POVM: {}", diag.problems.join("; "))));
        }
        let effects = effects.iter().map(crate::linalg::hermitian_part).collect();
        Ok(Self { effects })
    }

    pub fn dim(&self) -> usize {
        self.effects[0].nrows()
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn effects(&self) -> &[CMatrix] {
        &self.effects
    }

    pub fn validate(&self) -> PovmDiagnostics {
        validate_effects(&self.effects)
    }

    /// Number of eigenvalues above [`RANK_TOL`] per effect.
    pub fn ranks(&self) -> Vec<usize> {
        self.effects
            .iter()
            .map(|e| eig_hermitian_unchecked(e).values.iter().filter(|&&l| l > RANK_TOL).count())
            .collect()
    }

    /// Every effect is a projector.
    pub fn is_projective(&self) -> bool {
        self.effects
            .iter()
            .all(|e| frobenius(&(e * e - e)) < 1e-9)
    }

    /// `p_i = tr[E_i ρ]`, with values in `[-1e-10, 0)` clipped to zero.
    pub fn outcome_probs(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        check_dim(self.dim(), rho.dim())?;
        let m = rho.matrix();
        let probs: Vec<f64> = self
            .effects
            .iter()
            .map(|e| trace_product(e, m).re)
            .collect();
        if let Some(&bad) = probs.iter().find(|&&p| p < -1e-10) {
            return Err(Error::Numerical(format!("negative outcome probability {bad}")));
        }
        Ok(probs.into_iter().map(|p| p.max(0.0)).collect())
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// `tr[A B]` without forming the product.
pub(crate) fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut t = c(0.0, 0.0);
    for i in 0..n {
        for k in 0..a.ncols() {
            t += a[(i, k)] * b[(k, i)];
        }
    }
    t
}

/// Measurement operators `A_i` with `Σ A_i† A_i = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOperators {
    ops: Vec<CMatrix>,
}

impl MeasurementOperators {
    pub fn new(ops: Vec<CMatrix>) -> Result<Self> {
        let d = ops.first().map(CMatrix::nrows).ok_or_else(|| Error::invalid("no operators"))?;
        for a in &ops {
            if a.nrows() != d || a.ncols() != d {
                return Err(Error::DimensionMismatch { expected: d, found: a.nrows() });
            }
        }
        let res = identity_residual(d, ops.iter().map(|a| a.adjoint() * a));
        if res > TRACE_TOL {
            return Err(Error::Invalid(format!("measurement operators incomplete: residual {res:.3e}")));
        }
        Ok(Self { ops })
    }

    pub fn dim(&self) -> usize {
        self.ops[0].nrows()
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }

    /// `E_i = A_i† A_i`.
    pub fn povm(&self) -> Result<Povm> {
        Povm::new(self.ops.iter().map(|a| a.adjoint() * a).collect())
    }

    /// `A_i → U_i A_i`.
    pub fn rotated(&self, unitaries: &[CMatrix]) -> Result<Self> {
        if unitaries.len() != self.ops.len() {
            return Err(Error::DimensionMismatch { expected: self.ops.len(), found: unitaries.len() });
        }
        Self::new(self.ops.iter().zip(unitaries).map(|(a, u)| u * a).collect())
    }

    /// Outcome probabilities and conditional states `A_i ρ A_i† / p_i`.
    pub fn post_measurement_states(&self, rho: &DensityMatrix) -> Result<Vec<Branch>> {
        check_dim(self.dim(), rho.dim())?;
        Ok(self
            .ops
            .iter()
            .map(|a| {
                let unnorm = a * rho.matrix() * a.adjoint();
                let prob = unnorm.trace().re.max(0.0);
                let state = (prob > PROB_TOL)
                    .then(|| DensityMatrix::from_trusted(unnorm.unscale(prob)));
                Branch { prob, state }
            })
            .collect())
    }

    /// `Σ_i A_i ρ A_i†`.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        check_dim(self.dim(), rho.dim())?;
        let d = self.dim();
        let out = self
            .ops
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, a| acc + a * rho.matrix() * a.adjoint());
        Ok(DensityMatrix::from_trusted(out))
    }
}

/// One measurement outcome; `state` is `None` when `prob ≤ PROB_TOL`.
#[derive(Debug, Clone)]
pub struct Branch {
    pub prob: f64,
    pub state: Option<DensityMatrix>,
}

/// `A_i = √E_i`.
pub fn canonical_kraus(p: &Povm) -> MeasurementOperators {
    let ops = p
        .effects()
        .iter()
        .map(|e| psd_sqrt(e).expect("validated effects are PSD"))
        .collect();
    MeasurementOperators { ops }
}

/// Qubit trine: `E_i = ⅔|φ_i⟩⟨φ_i|`, `|φ_i⟩ = (|0⟩ + ω^{i-1}|1⟩)/√2`, `ω = e^{2πi/3}`.
pub fn trine_povm() -> Povm {
    let effects = (0..3)
        .map(|k| {
            let w = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 3.0);
            CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), w.conj(), w, c(1.0, 0.0)]).unscale(3.0)
        })
        .collect();
    Povm { effects }
}

/// Projective measurement in the computational basis of dimension `d`.
pub fn computational_povm(d: usize) -> Povm {
    let effects = (0..d)
        .map(|k| {
            let mut e = CMatrix::zeros(d, d);
            e[(k, k)] = c(1.0, 0.0);
            e
        })
        .collect();
    Povm { effects }
}

/// `{p_i 1_d}`.
pub fn mixed_unitary_povm(probs: &[f64], d: usize) -> Result<Povm> {
    Povm::new(probs.iter().map(|&p| identity(d).scale(p)).collect())
}
