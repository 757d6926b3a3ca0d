//! Block coherence, POVM-based coherence and its extremal values.
//!
//! The POVM-based relative entropy of coherence is evaluated from measurement
//! operators as `H({p_i}) + Σ p_i S(ρ_i) − S(ρ)`; the Naimark-space form
//! `S(Δ[ρ ⊕ 0]) − S(ρ)` is available for cross-checks.

use nalgebra::Vector3;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    bloch_to_density, frobenius, shannon_entropy, von_neumann_entropy, BlochVector, CVector,
    DensityMatrix, PureState,
};
use crate::naimark::{embed_state, NaimarkExtension, ProjectiveMeasurement};
use crate::povm::{canonical_kraus, check_dim, MeasurementOperators, Povm};
use crate::random::{random_pure, seeded};
use crate::search::{central_gradient, fibonacci_sphere, nelder_mead};

/// Default Frobenius tolerance of [`is_povm_incoherent`].
pub const INCOHERENCE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct CoherenceReport {
    /// Coherence in bits.
    pub value: f64,
    pub probs: Vec<f64>,
    /// `S(ρ_i)`; zero for outcomes that do not occur.
    pub branch_entropies: Vec<f64>,
    pub state_entropy: f64,
}

impl AsRef<ProjectiveMeasurement> for NaimarkExtension {
    fn as_ref(&self) -> &ProjectiveMeasurement {
        self.measurement()
    }
}

impl AsRef<ProjectiveMeasurement> for ProjectiveMeasurement {
    fn as_ref(&self) -> &ProjectiveMeasurement {
        self
    }
}

/// `Δ[ρ'] = Σ P_i ρ' P_i`.
pub fn block_dephase(rho: &DensityMatrix, pm: impl AsRef<ProjectiveMeasurement>) -> Result<DensityMatrix> {
    let pm = pm.as_ref();
    check_dim(pm.dim(), rho.dim())?;
    Ok(DensityMatrix::from_trusted(pm.dephase(rho.matrix())))
}

/// `S(Δ[ρ']) − S(ρ')`.
pub fn c_rel_block(rho: &DensityMatrix, pm: impl AsRef<ProjectiveMeasurement>) -> Result<f64> {
    let dephased = block_dephase(rho, pm)?;
    Ok(von_neumann_entropy(&dephased) - von_neumann_entropy(rho))
}

/// POVM-based coherence from explicit measurement operators.
pub fn c_rel_with_operators(rho: &DensityMatrix, m: &MeasurementOperators) -> Result<CoherenceReport> {
    let branches = m.post_measurement_states(rho)?;
    let total: f64 = branches.iter().map(|b| b.prob).sum();
    let probs: Vec<f64> = branches.iter().map(|b| b.prob / total).collect();
    let branch_entropies: Vec<f64> = branches
        .iter()
        .map(|b| b.state.as_ref().map_or(0.0, von_neumann_entropy))
        .collect();
    let state_entropy = von_neumann_entropy(rho);
    let mixing: f64 = probs.iter().zip(&branch_entropies).map(|(p, s)| p * s).sum();
    let value = shannon_entropy(&probs)? + mixing - state_entropy;
    Ok(CoherenceReport { value, probs, branch_entropies, state_entropy })
}

/// POVM-based coherence using `A_i = √E_i`.
pub fn c_rel_povm(rho: &DensityMatrix, p: &Povm) -> Result<CoherenceReport> {
    c_rel_with_operators(rho, &canonical_kraus(p))
}

/// `S(Δ[ρ ⊕ 0]) − S(ρ)` on a given extension.
pub fn c_rel_via_extension(rho: &DensityMatrix, x: &NaimarkExtension) -> Result<f64> {
    let embedded = embed_state(rho, x)?;
    Ok(von_neumann_entropy(&block_dephase(&embedded, x)?) - von_neumann_entropy(rho))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct IncoherenceCheck {
    pub incoherent: bool,
    /// `max_{i≠j} ‖E_i ρ E_j‖_F`.
    pub max_residual: f64,
}

/// `E_i ρ E_j = 0` for all `i ≠ j`, within `tol` in Frobenius norm.
pub fn is_povm_incoherent(rho: &DensityMatrix, p: &Povm, tol: f64) -> Result<IncoherenceCheck> {
    check_dim(p.dim(), rho.dim())?;
    let e = p.effects();
    let mut worst = 0.0f64;
    for i in 0..e.len() {
        let left = &e[i] * rho.matrix();
        for (j, ej) in e.iter().enumerate() {
            if i != j {
                worst = worst.max(frobenius(&(&left * ej)));
            }
        }
    }
    Ok(IncoherenceCheck { incoherent: worst <= tol, max_residual: worst })
}

fn qubit_coherence(m: &MeasurementOperators, r: &[f64]) -> f64 {
    let v = Vector3::new(r[0], r[1], r[2]);
    let norm = v.norm();
    let v = if norm > 1.0 { v / norm } else { v };
    let rho = bloch_to_density(&BlochVector::from_vector(v).expect("projected into the ball"));
    c_rel_with_operators(&rho, m).map_or(f64::NAN, |rep| rep.value)
}

#[derive(Debug, Clone)]
pub struct MinCoherenceOptions {
    pub max_iters: usize,
    /// Finite-difference step.
    pub h: f64,
    pub grad_tol: f64,
    pub start: [f64; 3],
}

impl Default for MinCoherenceOptions {
    fn default() -> Self {
        Self { max_iters: 5000, h: 1e-6, grad_tol: 1e-6, start: [0.1, 0.2, 0.3] }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MinCoherence {
    pub bloch: [f64; 3],
    pub value: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub boundary_active: bool,
}

/// Minimizes the (convex) coherence over the Bloch ball by projected gradient
/// descent with Armijo backtracking and central-difference gradients.
pub fn min_coherence_qubit(p: &Povm, opts: &MinCoherenceOptions) -> Result<MinCoherence> {
    check_dim(2, p.dim())?;
    let m = canonical_kraus(p);
    let f = |r: &[f64]| qubit_coherence(&m, r);
    let project = |r: Vector3<f64>| if r.norm() > 1.0 { r / r.norm() } else { r };

    let mut r = project(Vector3::from(opts.start));
    let mut fr = f(r.as_slice());
    let mut report = MinCoherence {
        bloch: [r.x, r.y, r.z],
        value: fr,
        gradient_norm: f64::INFINITY,
        iterations: 0,
        converged: false,
        boundary_active: false,
    };
    for it in 0..opts.max_iters {
        report.iterations = it;
        let g = Vector3::from_vec(central_gradient(f, r.as_slice(), opts.h));
        let on_boundary = r.norm() > 1.0 - 1e-12;
        let radial = if on_boundary { r / r.norm() } else { Vector3::zeros() };
        let tangential = g - radial * g.dot(&radial);
        report.gradient_norm = g.norm();
        report.boundary_active = on_boundary;
        if g.norm() < opts.grad_tol
            || (on_boundary && tangential.norm() < opts.grad_tol && g.dot(&radial) < 0.0)
        {
            report.converged = true;
            break;
        }
        let mut alpha = 1.0;
        let mut accepted = None;
        while alpha > 1e-16 {
            let cand = project(r - g * alpha);
            let fc = f(cand.as_slice());
            if fc <= fr + 1e-4 * g.dot(&(cand - r)) {
                accepted = Some((cand, fc));
                break;
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((cand, fc)) if (cand - r).norm() > 0.0 => {
                r = cand;
                fr = fc;
            }
            _ => break,
        }
    }
    report.bloch = [r.x, r.y, r.z];
    report.value = fr;
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct MaxCoherenceOptions {
    /// Sphere grid size for qubits.
    pub grid_points: usize,
    /// Random starts for `d > 2`.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for MaxCoherenceOptions {
    fn default() -> Self {
        Self { grid_points: 2000, restarts: 200, seed: 0 }
    }
}

fn amplitudes_from_params(x: &[f64]) -> Option<PureState> {
    let d = x.len() / 2;
    let v = CVector::from_fn(d, |k, _| crate::linalg::c(x[2 * k], x[2 * k + 1]));
    PureState::normalized(v).ok()
}

/// Largest coherence over pure states: sphere grid plus Nelder–Mead for
/// qubits, random restarts plus Nelder–Mead otherwise.
pub fn max_coherence_pure(p: &Povm, opts: &MaxCoherenceOptions) -> Result<(PureState, f64)> {
    let m = canonical_kraus(p);
    let coherence = |psi: &PureState| c_rel_with_operators(&psi.density(), &m).map_or(f64::NAN, |r| r.value);
    if p.dim() == 2 {
        let neg = |x: &[f64]| -coherence(&PureState::from_angles(x[0], x[1]));
        let (theta, phi) = fibonacci_sphere(opts.grid_points.max(1))
            .into_iter()
            .map(|(t, ph)| (t, ph, neg(&[t, ph])))
            .min_by(|a, b| a.2.total_cmp(&b.2))
            .map(|(t, ph, _)| (t, ph))
            .ok_or_else(|| Error::invalid("empty grid"))?;
        let best = nelder_mead(neg, &[theta, phi], 0.05, 1e-15, 2000);
        let psi = PureState::from_angles(best.x[0], best.x[1]);
        let value = coherence(&psi);
        return Ok((psi, value));
    }
    let neg = |x: &[f64]| amplitudes_from_params(x).map_or(f64::INFINITY, |psi| -coherence(&psi));
    let mut rng = seeded(opts.seed);
    let mut best: Option<(Vec<f64>, f64)> = None;
    for _ in 0..opts.restarts.max(1) {
        let psi = random_pure(&mut rng, p.dim());
        let x: Vec<f64> = psi.amplitudes().iter().flat_map(|z| [z.re, z.im]).collect();
        let v = neg(&x);
        if best.as_ref().is_none_or(|b| v < b.1) {
            best = Some((x, v));
        }
    }
    let (x0, _) = best.expect("at least one restart");
    let refined = nelder_mead(neg, &x0, 0.1, 1e-14, 20_000);
    let psi = amplitudes_from_params(&refined.x).ok_or_else(|| Error::Numerical("degenerate optimum".into()))?;
    let value = coherence(&psi);
    Ok((psi, value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, CMatrix, ONE};
    use crate::naimark::{canonical_extension, minimal_extension, ExtensionKind};
    use crate::povm::{computational_povm, mixed_unitary_povm, trine_povm};
    use crate::random::{haar_unitary, random_density, random_povm_effects, random_probabilities};
    use num_complex::Complex64;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const LOG3: f64 = 1.584_962_500_721_156;

    fn dft_extension() -> NaimarkExtension {
        let w = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        let projectors = (0..3)
            .map(|i| {
                let v = CVector::from_fn(3, |k, _| w.powu((i * k) as u32).unscale(3f64.sqrt()));
                &v * v.adjoint()
            })
            .collect();
        NaimarkExtension::from_projectors(2, ExtensionKind::Minimal, projectors).unwrap()
    }

    /// Pure state with Bloch vector at polar angle π/2 and azimuth `phi`.
    fn equator(phi: f64) -> DensityMatrix {
        PureState::from_angles(PI / 2.0, phi).density()
    }

    #[test]
    fn trine_dephased_embedding_matches_closed_form() {
        let rho = DensityMatrix::new(CMatrix::from_row_slice(
            2,
            2,
            &[c(0.6, 0.0), c(0.2, 0.1), c(0.2, -0.1), c(0.4, 0.0)],
        ))
        .unwrap();
        let x = dft_extension();
        let out = block_dephase(&embed_state(&rho, &x).unwrap(), &x).unwrap();
        let (r12, r21) = (rho.matrix()[(0, 1)], rho.matrix()[(1, 0)]);
        let expected = CMatrix::from_row_slice(3, 3, &[ONE, r12, r21, r21, ONE, r12, r12, r21, ONE]).unscale(3.0);
        assert!(frobenius(&(out.matrix() - expected)) < 1e-14);
    }

    #[test]
    fn dephasing_fixed_points() {
        let pm = ProjectiveMeasurement::computational(3);
        let mut rng = seeded(8);
        let rho = random_density(&mut rng, 3);
        let once = block_dephase(&rho, &pm).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { rho.matrix()[(i, i)] } else { c(0.0, 0.0) };
                assert!((once.matrix()[(i, j)] - want).norm() < 1e-15);
            }
        }
        let twice = block_dephase(&once, &pm).unwrap();
        assert!(frobenius(&(twice.matrix() - once.matrix())) < 1e-15);
    }

    #[test]
    fn block_coherence_examples() {
        let pm = ProjectiveMeasurement::computational(2);
        assert!(c_rel_block(&DensityMatrix::basis(2, 1), &pm).unwrap().abs() < 1e-12);
        let plus = equator(0.0);
        assert!((c_rel_block(&plus, &pm).unwrap() - 1.0).abs() < 1e-12);
        let x = minimal_extension(&trine_povm()).unwrap();
        assert!(c_rel_block(&DensityMatrix::maximally_mixed(3), &x).unwrap().abs() < 1e-12);
    }

    #[test]
    fn trine_extremes() {
        let t = trine_povm();
        for k in 0..2 {
            let v = c_rel_povm(&DensityMatrix::basis(2, k), &t).unwrap().value;
            assert!((v - LOG3).abs() < 1e-12);
        }
        let v = c_rel_povm(&DensityMatrix::maximally_mixed(2), &t).unwrap().value;
        assert!((v - (LOG3 - 1.0)).abs() < 1e-12);
        // −m_i sits at azimuth 2π(i−1)/3 + π.
        for i in 0..3 {
            let phi = 2.0 * PI * i as f64 / 3.0;
            let anti = c_rel_povm(&equator(phi + PI), &t).unwrap().value;
            assert!((anti - 1.0).abs() < 1e-12);
            let aligned = c_rel_povm(&equator(phi), &t).unwrap().value;
            let h = shannon_entropy(&[2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0]).unwrap();
            assert!((aligned - h).abs() < 1e-12);
            assert!((h - 1.251_629_167_387_823).abs() < 1e-12);
        }
    }

    #[test]
    fn report_is_consistent() {
        let mut rng = seeded(9);
        let rho = random_density(&mut rng, 2);
        let r = c_rel_povm(&rho, &trine_povm()).unwrap();
        let recomposed = shannon_entropy(&r.probs).unwrap()
            + r.probs.iter().zip(&r.branch_entropies).map(|(p, s)| p * s).sum::<f64>()
            - r.state_entropy;
        assert!((recomposed - r.value).abs() < 1e-12);
        let json = serde_json::to_value(&r).unwrap();
        for key in ["value", "probs", "branch_entropies", "state_entropy"] {
            assert!(json.get(key).is_some());
        }
    }

    #[test]
    fn incoherence_examples() {
        let comp = computational_povm(2);
        let diag = DensityMatrix::new(CMatrix::from_diagonal(&CVector::from_vec(vec![c(0.3, 0.0), c(0.7, 0.0)]))).unwrap();
        assert!(is_povm_incoherent(&diag, &comp, INCOHERENCE_TOL).unwrap().incoherent);
        assert!(!is_povm_incoherent(&equator(0.0), &comp, INCOHERENCE_TOL).unwrap().incoherent);
        let mut rng = seeded(10);
        for _ in 0..50 {
            let rho = random_density(&mut rng, 2);
            assert!(!is_povm_incoherent(&rho, &trine_povm(), INCOHERENCE_TOL).unwrap().incoherent);
        }
    }

    #[test]
    fn min_coherence_trine() {
        let m = min_coherence_qubit(&trine_povm(), &MinCoherenceOptions::default()).unwrap();
        assert!(m.converged, "{m:?}");
        assert!(Vector3::from(m.bloch).norm() < 1e-5, "{m:?}");
        assert!((m.value - (LOG3 - 1.0)).abs() < 1e-10);
    }

    #[test]
    fn min_coherence_projective_and_constant() {
        let m = min_coherence_qubit(&computational_povm(2), &MinCoherenceOptions::default()).unwrap();
        assert!(m.value < 1e-8, "{m:?}");
        let p = mixed_unitary_povm(&[0.3, 0.7], 2).unwrap();
        let m = min_coherence_qubit(&p, &MinCoherenceOptions::default()).unwrap();
        assert!((m.value - shannon_entropy(&[0.3, 0.7]).unwrap()).abs() < 1e-12);
        assert!(m.converged);
    }

    #[test]
    fn gradient_step_sizes_agree() {
        // h = 1e-5 against Richardson extrapolation of h = 1e-6 and h = 2e-6.
        let m = canonical_kraus(&trine_povm());
        let f = |r: &[f64]| qubit_coherence(&m, r);
        let mut rng = seeded(11);
        for _ in 0..20 {
            let r = crate::random::random_bloch(&mut rng).vector() * 0.9;
            let coarse = central_gradient(f, r.as_slice(), 1e-5);
            let g1 = central_gradient(f, r.as_slice(), 1e-6);
            let g2 = central_gradient(f, r.as_slice(), 2e-6);
            for k in 0..3 {
                let extrap = (4.0 * g1[k] - g2[k]) / 3.0;
                assert!((coarse[k] - extrap).abs() <= 1e-4 * extrap.abs().max(1e-2));
            }
        }
    }

    #[test]
    fn max_coherence_examples() {
        let opts = MaxCoherenceOptions::default();
        let (psi, v) = max_coherence_pure(&trine_povm(), &opts).unwrap();
        assert!((v - LOG3).abs() < 1e-9);
        let pop0 = psi.amplitudes()[0].norm_sqr();
        assert!(pop0 < 1e-4 || pop0 > 1.0 - 1e-4);
        let (psi, v) = max_coherence_pure(&computational_povm(2), &opts).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
        assert!((psi.amplitudes()[0].norm_sqr() - 0.5).abs() < 1e-4);
        let p = mixed_unitary_povm(&[0.1, 0.2, 0.7], 2).unwrap();
        let (_, v) = max_coherence_pure(&p, &opts).unwrap();
        assert!((v - shannon_entropy(&[0.1, 0.2, 0.7]).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn max_coherence_qutrit() {
        let opts = MaxCoherenceOptions { restarts: 50, ..Default::default() };
        let (_, v) = max_coherence_pure(&computational_povm(3), &opts).unwrap();
        assert!((v - LOG3).abs() < 1e-6);
    }

    #[test]
    fn reduces_to_standard_coherence() {
        let mut rng = seeded(12);
        for d in 2..5 {
            let u = haar_unitary(&mut rng, d);
            let p = Povm::new((0..d).map(|k| {
                let v = u.column(k).into_owned();
                &v * v.adjoint()
            }).collect()).unwrap();
            let pm = ProjectiveMeasurement::new(p.effects().to_vec()).unwrap();
            let rho = random_density(&mut rng, d);
            let a = c_rel_povm(&rho, &p).unwrap().value;
            let b = c_rel_block(&rho, &pm).unwrap();
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn coherence_increasing_unitary_exists() {
        // R_z(π/5) moves |0⟩-adjacent states off the triangle symmetry.
        let t = trine_povm();
        let u = CMatrix::from_diagonal(&CVector::from_vec(vec![
            Complex64::from_polar(1.0, -PI / 10.0),
            Complex64::from_polar(1.0, PI / 10.0),
        ]));
        let rho = equator(PI);
        let rotated = rho.conjugate(&u).unwrap();
        assert!(c_rel_povm(&rotated, &t).unwrap().value > c_rel_povm(&rho, &t).unwrap().value + 1e-3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn naimark_independence(seed in any::<u64>(), n in 2usize..5) {
            let mut rng = seeded(seed);
            let p = Povm::new(random_povm_effects(&mut rng, 2, n)).unwrap();
            let min = minimal_extension(&p).unwrap();
            let can = canonical_extension(&canonical_kraus(&p)).unwrap();
            for _ in 0..5 {
                let rho = random_density(&mut rng, 2);
                let v = c_rel_povm(&rho, &p).unwrap().value;
                prop_assert!((c_rel_via_extension(&rho, &min).unwrap() - v).abs() < 1e-8);
                prop_assert!((c_rel_via_extension(&rho, &can).unwrap() - v).abs() < 1e-8);
                prop_assert!(v > -1e-9 && v < (n as f64).log2() + 1e-9);
            }
        }

        #[test]
        fn kraus_choice_invariance(seed in any::<u64>()) {
            let mut rng = seeded(seed);
            let p = Povm::new(random_povm_effects(&mut rng, 3, 3)).unwrap();
            let m = canonical_kraus(&p);
            let us: Vec<_> = (0..3).map(|_| haar_unitary(&mut rng, 3)).collect();
            let rotated = m.rotated(&us).unwrap();
            let rho = random_density(&mut rng, 3);
            let a = c_rel_with_operators(&rho, &m).unwrap().value;
            let b = c_rel_with_operators(&rho, &rotated).unwrap().value;
            prop_assert!((a - b).abs() < 1e-8);
        }

        #[test]
        fn convexity(seed in any::<u64>()) {
            let mut rng = seeded(seed);
            let p = Povm::new(random_povm_effects(&mut rng, 2, 3)).unwrap();
            let rho = random_density(&mut rng, 2);
            let sigma = random_pure(&mut rng, 2).density();
            let (cr, cs) = (c_rel_povm(&rho, &p).unwrap().value, c_rel_povm(&sigma, &p).unwrap().value);
            for k in 0..=10 {
                let l = k as f64 / 10.0;
                let mix = rho.mix(&sigma, l).unwrap();
                prop_assert!(c_rel_povm(&mix, &p).unwrap().value <= l * cr + (1.0 - l) * cs + 1e-9);
            }
        }

        #[test]
        fn mixed_unitary_constant(seed in any::<u64>(), n in 2usize..5) {
            let mut rng = seeded(seed);
            let probs = random_probabilities(&mut rng, n);
            let p = mixed_unitary_povm(&probs, 2).unwrap();
            let rho = random_density(&mut rng, 2);
            let v = c_rel_povm(&rho, &p).unwrap().value;
            prop_assert!((v - shannon_entropy(&probs).unwrap()).abs() < 1e-9);
        }
    }
}
