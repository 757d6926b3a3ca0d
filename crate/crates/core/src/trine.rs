//! The qubit trine: its symmetry unitaries, coherence and conversion
//! landscapes over the Bloch sphere, and a self-check suite.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::Vector3;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::coherence::{c_rel_povm, c_rel_via_extension, c_rel_with_operators, min_coherence_qubit, MinCoherenceOptions};
use crate::error::{Error, Result};
use crate::linalg::{
    c, eig_hermitian, identity, shannon_entropy, BlochVector, CMatrix, DensityMatrix, PureState, ZERO,
};
use crate::naimark::{canonical_extension, minimal_extension, NaimarkExtension};
use crate::povm::{canonical_kraus, mixed_unitary_povm, trine_povm, validate_effects, Povm};
use crate::random::{random_density, random_probabilities, seeded};
use crate::sdp::{pic_feasibility, FmaxContext, FmaxOptions, PicOptions, SdpStatus};
use crate::superop::{process_from_kraus, Channel, ProcessMatrix};

/// A symmetry of the trine, labelled by the permutation `π` (one-line notation)
/// with `U m_i U† = m_{π(i)}` on the measurement Bloch directions.
#[derive(Debug, Clone, PartialEq)]
pub struct TrineSymmetry {
    pub label: &'static str,
    /// Zero-based images `π(i)`.
    pub permutation: [usize; 3],
    pub unitary: CMatrix,
}

const PERMUTATIONS: [(&str, [usize; 3]); 6] = [
    ("123", [0, 1, 2]),
    ("231", [1, 2, 0]),
    ("312", [2, 0, 1]),
    ("132", [0, 2, 1]),
    ("321", [2, 1, 0]),
    ("213", [1, 0, 2]),
];

/// `ω^x` with `ω = e^{2πi/3}`.
fn omega_pow(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * x / 3.0)
}

/// The six trine-incoherent unitaries, each with unit determinant.
pub fn trine_incoherent_unitaries() -> Vec<TrineSymmetry> {
    let m = |a: Complex64, b: Complex64, cc: Complex64, d: Complex64| CMatrix::from_row_slice(2, 2, &[a, b, cc, d]);
    let mats = [
        identity(2),
        m(Complex64::from_polar(1.0, -PI / 3.0), ZERO, ZERO, Complex64::from_polar(1.0, PI / 3.0)),
        m(omega_pow(1.0).conj(), ZERO, ZERO, omega_pow(1.0)),
        m(ZERO, c(0.0, -1.0), c(0.0, -1.0), ZERO),
        m(ZERO, omega_pow(1.25), omega_pow(0.25), ZERO),
        m(ZERO, omega_pow(0.25), omega_pow(1.25), ZERO),
    ];
    PERMUTATIONS
        .iter()
        .zip(mats)
        .map(|(&(label, permutation), unitary)| TrineSymmetry { label, permutation, unitary })
        .collect()
}

/// Solves, for each permutation `π`, for phases with `U' = Σ e^{iα_i}|φ_{π(i)}⟩⟨φ_i|`
/// leaving the embedded system invariant, and returns the system block scaled to unit determinant.
pub fn derive_incoherent_unitaries(x: &NaimarkExtension) -> Result<Vec<TrineSymmetry>> {
    if x.d() != 2 || x.d_prime() != 3 || x.len() != 3 {
        return Err(Error::invalid("expected the minimal trine extension (d = 2, d' = 3, three outcomes)"));
    }
    let phis: Vec<_> = x
        .projectors()
        .iter()
        .map(|p| eig_hermitian(p).map(|e| e.vectors.column(0).into_owned()))
        .collect::<Result<_>>()?;
    PERMUTATIONS
        .iter()
        .map(|&(label, perm)| {
            // Rows k < d of the out-of-system row of U' must vanish: M c = 0.
            let mut m = CMatrix::zeros(3, 3);
            for k in 0..2 {
                for i in 0..3 {
                    m[(k, i)] = phis[perm[i]][2] * phis[i][k].conj();
                }
            }
            let svd = m.svd(false, true);
            let v_t = svd.v_t.ok_or_else(|| Error::Numerical("SVD failed".into()))?;
            let mut order: Vec<usize> = (0..3).collect();
            order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
            if svd.singular_values[order[1]] < 1e-6 {
                return Err(Error::Numerical(format!("phases for π = {label} are not unique")));
            }
            let null: Vec<Complex64> = v_t.row(order[0]).iter().map(|z| z.conj()).collect();
            if null.iter().any(|z| z.norm() < 1e-6) {
                return Err(Error::Numerical(format!("phase system for π = {label} has no unimodular solution")));
            }
            let mut full = CMatrix::zeros(3, 3);
            for i in 0..3 {
                full += (&phis[perm[i]] * phis[i].adjoint()) * (null[i] / null[i].norm());
            }
            let block = full.view((0, 0), (2, 2)).into_owned();
            let det = block[(0, 0)] * block[(1, 1)] - block[(0, 1)] * block[(1, 0)];
            let unitary = block * det.sqrt().inv();
            let residual = crate::linalg::max_abs(&(unitary.adjoint() * &unitary - identity(2)));
            if residual > 1e-9 {
                return Err(Error::Numerical(format!("system block for π = {label} is not unitary ({residual:.3e})")));
            }
            Ok(TrineSymmetry { label, permutation: perm, unitary })
        })
        .collect()
}

/// Whether `u` equals `v` up to a global phase.
pub fn equal_up_to_phase(u: &CMatrix, v: &CMatrix, tol: f64) -> bool {
    let overlap = (u.adjoint() * v).trace();
    if overlap.norm() < 1e-12 {
        return false;
    }
    let phase = overlap / overlap.norm();
    crate::linalg::max_abs(&(u * phase - v)) <= tol
}

/// Bloch directions `m_i` of the trine measurement.
pub fn measurement_directions() -> [Vector3<f64>; 3] {
    std::array::from_fn(|k| {
        let a = 2.0 * PI * k as f64 / 3.0;
        Vector3::new(a.cos(), a.sin(), 0.0)
    })
}

/// `cos(π/8)|0⟩ + sin(π/8)|1⟩`.
pub fn psi_pi8() -> PureState {
    PureState::from_angles(PI / 4.0, 0.0)
}

/// `{U ψ}` over the six symmetries, in list order.
pub fn orbit(psi: &PureState) -> Vec<PureState> {
    trine_incoherent_unitaries()
        .iter()
        .map(|s| psi.apply(&s.unitary).expect("qubit unitary"))
        .collect()
}

/// Equiangular sphere grid: `n_phi` azimuths over `[0, 2π]` by `n_theta` polar angles over `[0, π]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SphereGrid {
    pub n_phi: usize,
    pub n_theta: usize,
}

impl Default for SphereGrid {
    fn default() -> Self {
        Self { n_phi: 181, n_theta: 91 }
    }
}

impl SphereGrid {
    pub fn new(n_phi: usize, n_theta: usize) -> Result<Self> {
        if n_phi < 2 || n_theta < 2 {
            return Err(Error::invalid(format!("grid {n_phi}x{n_theta} needs at least two points per axis")));
        }
        Ok(Self { n_phi, n_theta })
    }

    pub fn len(&self) -> usize {
        self.n_phi * self.n_theta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(θ, φ)` with `θ` outer and `φ` inner.
    pub fn points(&self) -> Vec<(f64, f64)> {
        (0..self.n_theta)
            .flat_map(|it| {
                let theta = PI * it as f64 / (self.n_theta - 1) as f64;
                (0..self.n_phi).map(move |ip| (theta, 2.0 * PI * ip as f64 / (self.n_phi - 1) as f64))
            })
            .collect()
    }
}

impl FromStr for SphereGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| Error::invalid(format!("grid '{s}' is not of the form NxM")))?;
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| Error::invalid(format!("bad grid size '{t}'")));
        Self::new(parse(a)?, parse(b)?)
    }
}

impl fmt::Display for SphereGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.n_phi, self.n_theta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandscapeSample {
    pub theta: f64,
    pub phi: f64,
    pub bloch: BlochVector,
    pub value: f64,
}

#[derive(Serialize)]
struct Row {
    theta: f64,
    phi: f64,
    bx: f64,
    by: f64,
    bz: f64,
    value: f64,
}

impl From<&LandscapeSample> for Row {
    fn from(s: &LandscapeSample) -> Self {
        let [bx, by, bz] = s.bloch.as_array();
        Row { theta: s.theta, phi: s.phi, bx, by, bz, value: s.value }
    }
}

impl Serialize for LandscapeSample {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        Row::from(self).serialize(serializer)
    }
}

fn sample_at(theta: f64, phi: f64, value: f64) -> LandscapeSample {
    LandscapeSample { theta, phi, bloch: BlochVector::from_angles(theta, phi), value }
}

/// Coherence of `|ψ(θ, φ)⟩` at every grid point, in grid order.
pub fn coherence_landscape(p: &Povm, grid: &SphereGrid) -> Result<Vec<LandscapeSample>> {
    crate::povm::check_dim(2, p.dim())?;
    let m = canonical_kraus(p);
    grid.points()
        .into_par_iter()
        .map(|(theta, phi)| {
            let rho = PureState::from_angles(theta, phi).density();
            Ok(sample_at(theta, phi, c_rel_with_operators(&rho, &m)?.value))
        })
        .collect()
}

/// `F_max(ρ, |ψ(θ, φ)⟩)` at every grid point, in grid order.
pub fn conversion_landscape(rho: &DensityMatrix, ctx: &FmaxContext, grid: &SphereGrid) -> Result<Vec<LandscapeSample>> {
    crate::povm::check_dim(2, rho.dim())?;
    grid.points()
        .into_par_iter()
        .map(|(theta, phi)| {
            let sigma = PureState::from_angles(theta, phi).density();
            let r = ctx.fmax(rho, &sigma)?;
            if r.status != SdpStatus::Optimal {
                return Err(Error::Solver(format!("fmax at θ = {theta:.4}, φ = {phi:.4} ended with {:?}", r.status)));
            }
            Ok(sample_at(theta, phi, r.value))
        })
        .collect()
}

pub fn write_landscape_csv(samples: &[LandscapeSample], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in samples {
        w.serialize(Row::from(s))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_landscape_json(samples: &[LandscapeSample], out: impl Write) -> Result<()> {
    serde_json::to_writer_pretty(out, samples)?;
    Ok(())
}

/// Polar angle between two Bloch directions.
fn angle_between(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    (a.dot(b) / (a.norm() * b.norm())).clamp(-1.0, 1.0).acos()
}

/// The first `count` points of a 400-point golden-spiral sphere whose Bloch
/// direction is at least `min_angle` from every orbit point of `psi`.
pub fn far_from_orbit_probes(psi: &PureState, count: usize, min_angle: f64) -> Vec<(f64, f64)> {
    let orbit: Vec<Vector3<f64>> = orbit(psi)
        .iter()
        .map(|s| crate::linalg::density_to_bloch(&s.density()).expect("qubit").vector())
        .collect();
    crate::search::fibonacci_sphere(400)
        .into_iter()
        .filter(|&(t, p)| {
            let v = BlochVector::from_angles(t, p).vector();
            orbit.iter().all(|o| angle_between(&v, o) >= min_angle)
        })
        .take(count)
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub passed: bool,
    pub elapsed_seconds: f64,
    pub checks: Vec<SuiteCheck>,
}

#[derive(Debug, Clone, Copy)]
pub struct SuiteOptions {
    pub pic: PicOptions,
    pub fmax: FmaxOptions,
    pub seed: u64,
    pub runtime_budget_seconds: f64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { pic: PicOptions::default(), fmax: FmaxOptions::default(), seed: 0, runtime_budget_seconds: 300.0 }
    }
}

struct Checks(Vec<SuiteCheck>);

impl Checks {
    fn push(&mut self, name: &str, passed: bool, detail: String) {
        self.0.push(SuiteCheck { name: name.into(), passed, detail });
    }

    fn run(&mut self, name: &str, f: impl FnOnce() -> Result<(bool, String)>) {
        match f() {
            Ok((passed, detail)) => self.push(name, passed, detail),
            Err(e) => self.push(name, false, format!("error: {e}")),
        }
    }
}

/// Checks every published trine number on `effects` (the trine itself when `None`).
///
/// An invalid POVM yields a single failing validation check.
pub fn run_suite(effects: Option<Vec<CMatrix>>, opts: &SuiteOptions) -> SuiteReport {
    let start = Instant::now();
    let mut checks = Checks(Vec::new());
    let effects = effects.unwrap_or_else(|| trine_povm().effects().to_vec());
    let diag = validate_effects(&effects);
    checks.push(
        "povm validation",
        diag.is_ok(),
        if diag.is_ok() { "valid POVM".into() } else { diag.problems.join("; ") },
    );
    if diag.is_ok() {
        match Povm::new(effects) {
            Ok(p) => suite_checks(&p, opts, &mut checks),
            Err(e) => checks.push("povm construction", false, e.to_string()),
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    checks.push(
        "runtime budget",
        elapsed <= opts.runtime_budget_seconds,
        format!("{elapsed:.1} s of {:.0} s", opts.runtime_budget_seconds),
    );
    SuiteReport { passed: checks.0.iter().all(|c| c.passed), elapsed_seconds: elapsed, checks: checks.0 }
}

fn within(value: f64, want: f64, tol: f64) -> (bool, String) {
    ((value - want).abs() <= tol, format!("{value:.12} (expected {want:.12} ± {tol:.0e})"))
}

fn suite_checks(p: &Povm, opts: &SuiteOptions, checks: &mut Checks) {
    let log3 = 3f64.log2();
    for k in 0..2 {
        checks.run(&format!("maximal coherence |{k}⟩"), || {
            Ok(within(c_rel_povm(&DensityMatrix::basis(2, k), p)?.value, log3, 1e-8))
        });
    }
    checks.run("minimal coherence 1/2", || {
        Ok(within(c_rel_povm(&DensityMatrix::maximally_mixed(2), p)?.value, log3 - 1.0, 1e-8))
    });
    checks.run("minimizer at the origin", || {
        let m = min_coherence_qubit(p, &MinCoherenceOptions::default())?;
        let r = Vector3::from(m.bloch).norm();
        Ok((r < 1e-5, format!("|r*| = {r:.3e}, C = {:.12}", m.value)))
    });
    for (i, m) in measurement_directions().iter().enumerate() {
        checks.run(&format!("antipodal state -m{}", i + 1), || {
            let rho = crate::linalg::bloch_to_density(&BlochVector::from_vector(-m)?);
            Ok(within(c_rel_povm(&rho, p)?.value, 1.0, 1e-8))
        });
    }
    checks.run("state along +m1", || {
        let rho = crate::linalg::bloch_to_density(&BlochVector::from_vector(measurement_directions()[0])?);
        Ok(within(c_rel_povm(&rho, p)?.value, shannon_entropy(&[2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0])?, 1e-8))
    });

    let x = match minimal_extension(p) {
        Ok(x) => x,
        Err(e) => return checks.push("minimal extension", false, e.to_string()),
    };
    checks.run("extension independence", || {
        let xc = canonical_extension(&canonical_kraus(p))?;
        let mut rng = seeded(opts.seed);
        let worst = (0..20)
            .map(|_| {
                let rho = random_density(&mut rng, 2);
                Ok((c_rel_via_extension(&rho, &x)? - c_rel_via_extension(&rho, &xc)?).abs())
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        Ok((worst < 1e-8, format!("max deviation {worst:.3e} over 20 states")))
    });

    let symmetries = trine_incoherent_unitaries();
    checks.run("derived symmetries match list", || {
        let derived = derive_incoherent_unitaries(&x)?;
        let ok = derived
            .iter()
            .zip(&symmetries)
            .all(|(a, b)| a.label == b.label && equal_up_to_phase(&a.unitary, &b.unitary, 1e-9));
        Ok((ok, format!("{} permutations solved", derived.len())))
    });
    for s in &symmetries {
        checks.run(&format!("U_({}) incoherent", s.label), || {
            let v = pic_feasibility(&Channel::unitary(s.unitary.clone())?.process(), &x, &opts.pic)?;
            Ok((v.feasible, slack_detail(v.slack)))
        });
    }
    let measurement = match process_from_kraus(canonical_kraus(p).ops()) {
        Ok(m) => m,
        Err(e) => return checks.push("measurement map", false, e.to_string()),
    };
    checks.run("measurement map incoherent", || {
        let v = pic_feasibility(&measurement, &x, &opts.pic)?;
        Ok((v.feasible, slack_detail(v.slack)))
    });
    checks.run("R_z(π/5) not incoherent", || {
        let v = pic_feasibility(&rz_channel(PI / 5.0)?, &x, &opts.pic)?;
        Ok((!v.feasible, slack_detail(v.slack)))
    });
    checks.run("monotonicity under free channels", || {
        let mut channels: Vec<ProcessMatrix> =
            symmetries.iter().map(|s| Channel::unitary(s.unitary.clone()).map(|c| c.process())).collect::<Result<_>>()?;
        channels.push(measurement.clone());
        let mut rng = seeded(opts.seed.wrapping_add(1));
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..50 {
            let rho = random_density(&mut rng, 2);
            let before = c_rel_povm(&rho, p)?.value;
            for ch in &channels {
                worst = worst.max(c_rel_povm(&ch.apply_state(&rho)?, p)?.value - before);
            }
        }
        Ok((worst <= 1e-8, format!("max increase {worst:.3e}")))
    });

    let ctx = match FmaxContext::new(&x, &opts.fmax) {
        Ok(c) => c,
        Err(e) => return checks.push("conversion context", false, e.to_string()),
    };
    checks.run("conversion from |0⟩", || {
        let mut rng = seeded(opts.seed.wrapping_add(2));
        let zero = DensityMatrix::basis(2, 0);
        let mut worst = f64::INFINITY;
        for _ in 0..10 {
            worst = worst.min(ctx.fmax(&zero, &random_density(&mut rng, 2))?.value);
        }
        Ok((worst >= 1.0 - 1e-5, format!("min fidelity {worst:.9} over 10 targets")))
    });
    let psi = psi_pi8();
    checks.run("orbit conversion", || {
        let mut worst = f64::INFINITY;
        for target in orbit(&psi) {
            worst = worst.min(ctx.fmax(&psi.density(), &target.density())?.value);
        }
        Ok((worst >= 1.0 - 1e-5, format!("min fidelity {worst:.9} over the orbit")))
    });
    checks.run("no exact conversion to |0⟩", || {
        let v = ctx.fmax(&psi.density(), &DensityMatrix::basis(2, 0))?.value;
        Ok((v <= 1.0 - 1e-3, format!("fidelity {v:.9}")))
    });
    checks.run("mixed-unitary POVM", || {
        let mut rng = seeded(opts.seed.wrapping_add(3));
        let mut worst: f64 = 0.0;
        for _ in 0..10 {
            let probs = random_probabilities(&mut rng, 3);
            let rho = random_density(&mut rng, 2);
            let c = c_rel_povm(&rho, &mixed_unitary_povm(&probs, 2)?)?.value;
            worst = worst.max((c - shannon_entropy(&probs)?).abs());
        }
        Ok((worst < 1e-9, format!("max deviation {worst:.3e}")))
    });
}

/// `R_z(α) = diag(e^{−iα/2}, e^{iα/2})` as a channel.
pub fn rz_channel(alpha: f64) -> Result<ProcessMatrix> {
    let u = CMatrix::from_row_slice(
        2,
        2,
        &[Complex64::from_polar(1.0, -alpha / 2.0), ZERO, ZERO, Complex64::from_polar(1.0, alpha / 2.0)],
    );
    Ok(Channel::unitary(u)?.process())
}

fn slack_detail(slack: Option<f64>) -> String {
    match slack {
        Some(t) => format!("slack {t:.3e}"),
        None => "constraints inconsistent".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;

    fn bloch_of(u: &CMatrix, v: &Vector3<f64>) -> Vector3<f64> {
        let rho = crate::linalg::bloch_to_density(&BlochVector::from_vector(*v).unwrap());
        crate::linalg::density_to_bloch(&rho.conjugate(u).unwrap()).unwrap().vector()
    }

    #[test]
    fn listed_unitaries_permute_measurement_directions() {
        let m = measurement_directions();
        for s in trine_incoherent_unitaries() {
            let u = &s.unitary;
            assert!(crate::linalg::max_abs(&(u.adjoint() * u - identity(2))) < 1e-12);
            let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
            assert!((det - ONE).norm() < 1e-12, "{}", s.label);
            for i in 0..3 {
                assert!((bloch_of(u, &m[i]) - m[s.permutation[i]]).norm() < 1e-9, "{} m{i}", s.label);
            }
        }
    }

    #[test]
    fn listed_unitaries_match_named_rotations() {
        let list = trine_incoherent_unitaries();
        assert_eq!(list[0].unitary, identity(2));
        let rz = |a: f64| {
            CMatrix::from_row_slice(2, 2, &[Complex64::from_polar(1.0, -a / 2.0), ZERO, ZERO, Complex64::from_polar(1.0, a / 2.0)])
        };
        assert!(crate::linalg::max_abs(&(&list[1].unitary - rz(2.0 * PI / 3.0))) < 1e-12);
        // R_m1(π) = −i σ_x.
        assert!(crate::linalg::max_abs(&(&list[3].unitary - crate::linalg::pauli_x() * c(0.0, -1.0))) < 1e-12);
    }

    #[test]
    fn symmetries_close_under_products() {
        let list = trine_incoherent_unitaries();
        for a in &list {
            for b in &list {
                let prod = &a.unitary * &b.unitary;
                assert!(list.iter().any(|s| equal_up_to_phase(&prod, &s.unitary, 1e-9)), "{}·{}", a.label, b.label);
            }
        }
    }

    #[test]
    fn derived_unitaries_reproduce_the_list() {
        let x = minimal_extension(&trine_povm()).unwrap();
        let derived = derive_incoherent_unitaries(&x).unwrap();
        assert_eq!(derived.len(), 6);
        assert!(equal_up_to_phase(&derived[0].unitary, &identity(2), 1e-9));
        for (a, b) in derived.iter().zip(trine_incoherent_unitaries()) {
            assert!(equal_up_to_phase(&a.unitary, &b.unitary, 1e-9), "{}", a.label);
        }
    }

    #[test]
    fn derivation_rejects_other_extensions() {
        let xc = canonical_extension(&canonical_kraus(&trine_povm())).unwrap();
        assert!(derive_incoherent_unitaries(&xc).is_err());
    }

    #[test]
    fn grid_parsing_and_order() {
        let g: SphereGrid = "5x3".parse().unwrap();
        assert_eq!((g.n_phi, g.n_theta), (5, 3));
        let pts = g.points();
        assert_eq!(pts.len(), 15);
        assert_eq!(pts[0], (0.0, 0.0));
        assert!((pts[14].0 - PI).abs() < 1e-15 && (pts[14].1 - 2.0 * PI).abs() < 1e-15);
        assert!("5".parse::<SphereGrid>().is_err());
        assert!("1x4".parse::<SphereGrid>().is_err());
        assert_eq!(SphereGrid::default().to_string(), "181x91");
    }

    #[test]
    fn coherence_landscape_poles_and_symmetry() {
        let grid = SphereGrid::new(13, 7).unwrap();
        let samples = coherence_landscape(&trine_povm(), &grid).unwrap();
        let log3 = 3f64.log2();
        assert!((samples[0].value - log3).abs() < 1e-9);
        assert!((samples.last().unwrap().value - log3).abs() < 1e-9);
        let max = samples.iter().map(|s| s.value).fold(f64::MIN, f64::max);
        assert!(max <= log3 + 1e-9);
        let p = trine_povm();
        let m = canonical_kraus(&p);
        for s in trine_incoherent_unitaries() {
            for sample in &samples {
                let psi = PureState::from_angles(sample.theta, sample.phi).apply(&s.unitary).unwrap();
                let v = c_rel_with_operators(&psi.density(), &m).unwrap().value;
                assert!((v - sample.value).abs() < 1e-9);
            }
        }
        for s in &samples {
            assert!((s.bloch.norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn landscape_writers_emit_flat_rows() {
        let grid = SphereGrid::new(3, 2).unwrap();
        let samples = coherence_landscape(&trine_povm(), &grid).unwrap();
        let mut csv_out = Vec::new();
        write_landscape_csv(&samples, &mut csv_out).unwrap();
        let text = String::from_utf8(csv_out).unwrap();
        assert!(text.starts_with("theta,phi,bx,by,bz,value\n"));
        assert_eq!(text.lines().count(), 7);
        let mut json_out = Vec::new();
        write_landscape_json(&samples, &mut json_out).unwrap();
        let parsed: serde_json::Value = serde_json::from_slice(&json_out).unwrap();
        assert_eq!(parsed.as_array().unwrap().len(), 6);
        assert!(parsed[0].get("bz").is_some());
    }

    #[test]
    fn probes_keep_their_distance() {
        let psi = psi_pi8();
        let probes = far_from_orbit_probes(&psi, 20, 0.5);
        assert_eq!(probes.len(), 20);
    }

    #[test]
    fn perturbed_povm_fails_validation() {
        let mut effects = trine_povm().effects().to_vec();
        effects[0] *= c(1.01, 0.0);
        let report = run_suite(Some(effects), &SuiteOptions::default());
        assert!(!report.passed);
        assert!(report.checks[0].detail.contains("completeness failure"));
    }
}

