//! Naimark extensions: projective measurements on a larger space whose
//! compression to the embedded system reproduces a POVM.
//!
//! The system always occupies the first `d` coordinates of the extension
//! space, so the embedding is `X ↦ X ⊕ 0` for both constructions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{ExtensionFile, MatrixJson};
use crate::linalg::{
    direct_sum_embed, eig_hermitian_unchecked, frobenius, hermiticity_residual, identity,
    CMatrix, CVector, DensityMatrix, RANK_TOL,
};
use crate::povm::{check_dim, MeasurementOperators, Povm};

/// Tolerance for every projector identity and block match.
pub const EXTENSION_TOL: f64 = 1e-9;

/// Completion candidates with a smaller residual norm are skipped.
const COMPLETION_ACCEPT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtensionKind {
    Canonical,
    Minimal,
}

impl fmt::Display for ExtensionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExtensionKind::Canonical => "canonical",
            ExtensionKind::Minimal => "minimal",
        })
    }
}

impl FromStr for ExtensionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "canonical" => Ok(ExtensionKind::Canonical),
            "minimal" => Ok(ExtensionKind::Minimal),
            other => Err(Error::invalid(format!("unknown extension kind '{other}'"))),
        }
    }
}

/// Complete orthogonal family of orthogonal projectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveMeasurement {
    projectors: Vec<CMatrix>,
}

impl ProjectiveMeasurement {
    pub fn new(projectors: Vec<CMatrix>) -> Result<Self> {
        let pm = Self { projectors };
        let diag = pm.diagnostics();
        if diag.is_ok() {
            Ok(pm)
        } else {
            Err(Error::Invalid(format!("invalid projective measurement: {}", diag.problems.join("; "))))
        }
    }

    /// Rank-1 projectors onto the computational basis.
    pub fn computational(d: usize) -> Self {
        let projectors = (0..d)
            .map(|k| {
                let mut p = CMatrix::zeros(d, d);
                p[(k, k)] = crate::linalg::ONE;
                p
            })
            .collect();
        Self { projectors }
    }

    pub fn dim(&self) -> usize {
        self.projectors.first().map_or(0, CMatrix::nrows)
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }

    /// Projector identities only; no POVM comparison.
    pub fn diagnostics(&self) -> ExtensionDiagnostics {
        let mut diag = ExtensionDiagnostics::default();
        let dim = self.dim();
        if self.projectors.is_empty() {
            diag.problems.push("no projectors".into());
            return diag;
        }
        if self.projectors.iter().any(|p| p.nrows() != dim || p.ncols() != dim) {
            diag.problems.push("projectors have inconsistent shapes".into());
            return diag;
        }
        for (i, p) in self.projectors.iter().enumerate() {
            diag.hermiticity = diag.hermiticity.max(hermiticity_residual(p));
            diag.idempotency = diag.idempotency.max(frobenius(&(p * p - p)));
            for q in &self.projectors[i + 1..] {
                diag.orthogonality = diag.orthogonality.max(frobenius(&(p * q)));
            }
        }
        diag.completeness = frobenius(
            &(self.projectors.iter().fold(CMatrix::zeros(dim, dim), |a, p| a + p) - identity(dim)),
        );
        for (name, value) in [
            ("Hermiticity", diag.hermiticity),
            ("idempotency", diag.idempotency),
            ("orthogonality", diag.orthogonality),
            ("completeness", diag.completeness),
        ] {
            if !(value <= EXTENSION_TOL) {
                diag.problems.push(format!("{name} failure (residual {value:.3e})"));
            }
        }
        diag
    }

    /// `Σ_i P_i X P_i`.
    pub fn dephase(&self, x: &CMatrix) -> CMatrix {
        self.projectors
            .iter()
            .fold(CMatrix::zeros(x.nrows(), x.ncols()), |acc, p| acc + p * x * p)
    }
}

/// Residuals of every extension identity, with human-readable problems.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ExtensionDiagnostics {
    pub hermiticity: f64,
    pub idempotency: f64,
    pub orthogonality: f64,
    pub completeness: f64,
    /// `max_i ‖Π_E P_i Π_E − E_i ⊕ 0‖_F`.
    pub block_match: f64,
    pub problems: Vec<String>,
}

impl ExtensionDiagnostics {
    pub fn is_ok(&self) -> bool {
        self.problems.is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        [self.hermiticity, self.idempotency, self.orthogonality, self.completeness, self.block_match]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// Projective measurement on `d' ≥ d` dimensions extending a POVM on `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct NaimarkExtension {
    d: usize,
    kind: ExtensionKind,
    measurement: ProjectiveMeasurement,
    /// Canonical only: tensor index `t·n + a` of each stored coordinate.
    tensor_index: Option<Vec<usize>>,
}

impl NaimarkExtension {
    /// Wraps externally supplied projectors after checking the projector identities.
    pub fn from_projectors(d: usize, kind: ExtensionKind, projectors: Vec<CMatrix>) -> Result<Self> {
        let measurement = ProjectiveMeasurement::new(projectors)?;
        if measurement.dim() < d {
            return Err(Error::invalid(format!(
                "extension dimension {} is smaller than system dimension {d}",
                measurement.dim()
            )));
        }
        Ok(Self { d, kind, measurement, tensor_index: None })
    }

    pub fn from_file(file: &ExtensionFile) -> Result<Self> {
        let ext = Self::from_projectors(file.d, file.kind.parse()?, file.projectors()?)?;
        check_dim(file.d_prime, ext.d_prime())?;
        Ok(ext)
    }

    pub fn to_file(&self) -> ExtensionFile {
        ExtensionFile {
            d: self.d,
            d_prime: self.d_prime(),
            kind: self.kind.to_string(),
            projectors: self.projectors().iter().map(MatrixJson::from).collect(),
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn d_prime(&self) -> usize {
        self.measurement.dim()
    }

    pub fn kind(&self) -> ExtensionKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.measurement.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measurement.is_empty()
    }

    pub fn projectors(&self) -> &[CMatrix] {
        self.measurement.projectors()
    }

    pub fn measurement(&self) -> &ProjectiveMeasurement {
        &self.measurement
    }

    /// For canonical extensions, maps stored coordinate `k` to the tensor
    /// coordinate `t·n + a` of system index `t` and probe index `a`.
    pub fn tensor_index(&self) -> Option<&[usize]> {
        self.tensor_index.as_deref()
    }

    /// Reorders a stored-coordinate operator into system ⊗ probe order.
    pub fn to_tensor_order(&self, x: &CMatrix) -> Option<CMatrix> {
        let idx = self.tensor_index.as_ref()?;
        let mut out = CMatrix::zeros(x.nrows(), x.ncols());
        for (r, &tr) in idx.iter().enumerate() {
            for (k, &tk) in idx.iter().enumerate() {
                out[(tr, tk)] = x[(r, k)];
            }
        }
        Some(out)
    }

    /// `Π_E = 1_d ⊕ 0`.
    pub fn subspace_projector(&self) -> CMatrix {
        direct_sum_embed(&identity(self.d), self.d_prime()).expect("d' ≥ d")
    }
}

/// Extends the orthonormal columns of `w` to a unitary whose leading columns are `w`.
///
/// Candidates are the standard basis vectors in order, orthogonalized twice;
/// the result is deterministic.
pub fn complete_to_unitary(w: &CMatrix) -> Result<CMatrix> {
    let (n, k) = w.shape();
    if k > n {
        return Err(Error::invalid("more columns than rows"));
    }
    if frobenius(&(w.adjoint() * w - identity(k))) > 1e-8 {
        return Err(Error::Numerical("columns are not orthonormal".into()));
    }
    let mut cols: Vec<CVector> = (0..k).map(|j| w.column(j).into_owned()).collect();
    for e in 0..n {
        if cols.len() == n {
            break;
        }
        let mut v = CVector::zeros(n);
        v[e] = crate::linalg::ONE;
        for _ in 0..2 {
            for q in &cols {
                let overlap = q.dotc(&v);
                v -= q * overlap;
            }
        }
        let norm = v.norm();
        if norm > COMPLETION_ACCEPT {
            cols.push(v.unscale(norm));
        }
    }
    if cols.len() != n {
        return Err(Error::Numerical("unitary completion failed".into()));
    }
    Ok(CMatrix::from_columns(&cols))
}

/// Tensor-product extension of dimension `n·d` built from measurement operators `A_i`.
///
/// The isometry `|t⟩ ↦ Σ_i A_i|t⟩ ⊗ |i⟩` is completed to a unitary `V` and
/// `P_i = V†(1 ⊗ |i⟩⟨i|)V`; coordinates are reordered so that the system
/// (probe index 0) comes first.
pub fn canonical_extension(m: &MeasurementOperators) -> Result<NaimarkExtension> {
    let d = m.dim();
    let n = m.len();
    let dp = n * d;
    let mut w = CMatrix::zeros(dp, d);
    for (i, a) in m.ops().iter().enumerate() {
        for s in 0..d {
            for t in 0..d {
                w[(s * n + i, t)] = a[(s, t)];
            }
        }
    }
    let v = complete_to_unitary(&w)?;
    let projectors = (0..n)
        .map(|i| {
            // V†(1 ⊗ |i⟩⟨i|)V = Σ_s row_{s,i}† row_{s,i}
            let rows = CMatrix::from_fn(d, dp, |s, c| v[(s * n + i, c)]);
            rows.adjoint() * rows
        })
        .collect::<Vec<_>>();
    // Completion columns arrive grouped by system index (each candidate e_(t,a)
    // stays in the t-th sector), so the stored order is (t,0) for all t, then
    // (t,a≥1) t-major.
    let mut tensor_index: Vec<usize> = (0..d).map(|t| t * n).collect();
    for t in 0..d {
        tensor_index.extend((1..n).map(|a| t * n + a));
    }
    Ok(NaimarkExtension {
        d,
        kind: ExtensionKind::Canonical,
        measurement: ProjectiveMeasurement { projectors },
        tensor_index: Some(tensor_index),
    })
}

/// Direct-sum extension of dimension `Σ rank E_i`.
///
/// Each effect contributes rows `√λ_k v_k†` over its nonzero eigenpairs; the
/// stacked isometry `W` is completed to a unitary `Q` and
/// `P_i = Q† D_i Q` with `D_i` the coordinate projector onto the rows of effect `i`.
pub fn minimal_extension(p: &Povm) -> Result<NaimarkExtension> {
    let d = p.dim();
    let mut rows: Vec<nalgebra::RowDVector<num_complex::Complex64>> = Vec::new();
    let mut blocks = Vec::with_capacity(p.len());
    for e in p.effects() {
        let eig = eig_hermitian_unchecked(e);
        let start = rows.len();
        for (k, &l) in eig.values.iter().enumerate() {
            if l > RANK_TOL {
                rows.push(eig.vectors.column(k).adjoint().scale(l.sqrt()));
            }
        }
        blocks.push(start..rows.len());
    }
    let w = CMatrix::from_rows(&rows);
    let q = complete_to_unitary(&w)?;
    let projectors = blocks
        .into_iter()
        .map(|b| {
            let r = q.rows(b.start, b.len()).into_owned();
            r.adjoint() * r
        })
        .collect();
    Ok(NaimarkExtension {
        d,
        kind: ExtensionKind::Minimal,
        measurement: ProjectiveMeasurement { projectors },
        tensor_index: None,
    })
}

/// Checks the projector identities and `Π_E P_i Π_E = E_i ⊕ 0` in POVM order.
pub fn validate_extension(x: &NaimarkExtension, p: &Povm) -> ExtensionDiagnostics {
    let mut diag = x.measurement.diagnostics();
    if x.len() != p.len() {
        diag.problems.push(format!("{} projectors for {} effects", x.len(), p.len()));
        return diag;
    }
    if x.d != p.dim() {
        diag.problems.push(format!("system dimension {} differs from POVM dimension {}", x.d, p.dim()));
        return diag;
    }
    let d = x.d;
    for (proj, e) in x.projectors().iter().zip(p.effects()) {
        let block = proj.view((0, 0), (d, d));
        diag.block_match = diag.block_match.max(frobenius(&(block - e)));
    }
    if !(diag.block_match <= EXTENSION_TOL) {
        diag.problems.push(format!("block-match failure (residual {:.3e})", diag.block_match));
    }
    diag
}

/// `ρ ⊕ 0` on the extension space.
pub fn embed_state(rho: &DensityMatrix, x: &NaimarkExtension) -> Result<DensityMatrix> {
    check_dim(x.d, rho.dim())?;
    Ok(DensityMatrix::from_trusted(direct_sum_embed(rho.matrix(), x.d_prime())?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, eig_hermitian, ONE, ZERO};
    use crate::povm::{canonical_kraus, computational_povm, mixed_unitary_povm, trine_povm};
    use crate::random::{random_density, random_povm_effects, seeded};
    use proptest::prelude::*;

    fn assert_valid(x: &NaimarkExtension, p: &Povm) {
        let diag = validate_extension(x, p);
        assert!(diag.is_ok(), "{:?}", diag);
    }

    #[test]
    fn canonical_projective_qubit() {
        let p = computational_povm(2);
        let x = canonical_extension(&canonical_kraus(&p)).unwrap();
        assert_eq!(x.d_prime(), 4);
        assert_valid(&x, &p);
    }

    #[test]
    fn canonical_trine() {
        let p = trine_povm();
        let x = canonical_extension(&canonical_kraus(&p)).unwrap();
        assert_eq!(x.d_prime(), 6);
        assert_valid(&x, &p);
        for proj in x.projectors() {
            assert_eq!(eig_hermitian(proj).unwrap().values.iter().filter(|&&l| l > 0.5).count(), 2);
        }
    }

    #[test]
    fn canonical_mixed_unitary_structure() {
        let probs = [0.2, 0.3, 0.5];
        let p = mixed_unitary_povm(&probs, 2).unwrap();
        let x = canonical_extension(&canonical_kraus(&p)).unwrap();
        assert_valid(&x, &p);
        for (i, proj) in x.projectors().iter().enumerate() {
            let t = x.to_tensor_order(proj).unwrap();
            // 1 ⊗ |ϕ_i⟩⟨ϕ_i| on C² ⊗ C³
            let probe = t.view((0, 0), (3, 3)).into_owned();
            assert!(frobenius(&(t.view((3, 3), (3, 3)) - &probe)) < 1e-12);
            assert!(frobenius(&t.view((0, 3), (3, 3)).into_owned()) < 1e-12);
            assert!((probe.trace().re - 1.0).abs() < 1e-12);
            assert!(frobenius(&(&probe * &probe - &probe)) < 1e-12);
            assert!((probe[(0, 0)].re - probs[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn minimal_trine() {
        let p = trine_povm();
        let x = minimal_extension(&p).unwrap();
        assert_eq!(x.d_prime(), 3);
        assert_valid(&x, &p);
        // Rank-1 projectors whose vectors have equal-modulus entries on the
        // system block, like the symmetric DFT vectors.
        for proj in x.projectors() {
            let eig = eig_hermitian(proj).unwrap();
            assert!((eig.values[0] - 1.0).abs() < 1e-12 && eig.values[1].abs() < 1e-12);
            for k in 0..2 {
                assert!((eig.vectors[(k, 0)].norm_sqr() - 1.0 / 3.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dft_vectors_form_a_minimal_extension() {
        let w = num_complex::Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        let projectors = (0..3)
            .map(|i| {
                let v = CVector::from_fn(3, |k, _| w.powu((i * k) as u32).unscale(3f64.sqrt()));
                &v * v.adjoint()
            })
            .collect();
        let x = NaimarkExtension::from_projectors(2, ExtensionKind::Minimal, projectors).unwrap();
        assert_valid(&x, &trine_povm());
    }

    #[test]
    fn minimal_projective_is_trivial() {
        let p = computational_povm(3);
        let x = minimal_extension(&p).unwrap();
        assert_eq!(x.d_prime(), 3);
        for (a, b) in x.projectors().iter().zip(p.effects()) {
            assert!(frobenius(&(a - b)) < 1e-12);
        }
    }

    #[test]
    fn minimal_random_full_rank() {
        let mut rng = seeded(7);
        let p = Povm::new(random_povm_effects(&mut rng, 2, 2)).unwrap();
        let x = minimal_extension(&p).unwrap();
        assert_eq!(x.d_prime(), 4);
        assert_valid(&x, &p);
    }

    #[test]
    fn validation_failures() {
        let p = trine_povm();
        let x = minimal_extension(&p).unwrap();
        let mut swapped = x.projectors().to_vec();
        swapped.swap(0, 1);
        let bad = NaimarkExtension::from_projectors(2, ExtensionKind::Minimal, swapped).unwrap();
        let diag = validate_extension(&bad, &p);
        assert!(diag.problems.iter().any(|s| s.contains("block-match")));

        let incomplete = vec![x.projectors()[0].clone(), x.projectors()[1].clone()];
        let pm = ProjectiveMeasurement { projectors: incomplete };
        assert!(pm.diagnostics().problems.iter().any(|s| s.contains("completeness")));
    }

    #[test]
    fn embed_examples() {
        let x = minimal_extension(&trine_povm()).unwrap();
        let rho = DensityMatrix::new(CMatrix::from_row_slice(
            2,
            2,
            &[c(0.7, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.3, 0.0)],
        ))
        .unwrap();
        let e = embed_state(&rho, &x).unwrap();
        assert_eq!(e.matrix().view((0, 0), (2, 2)), rho.matrix().view((0, 0), (2, 2)));
        assert!(e.matrix().row(2).iter().chain(e.matrix().column(2).iter()).all(|z| *z == ZERO));
        assert!((e.matrix().trace() - ONE).norm() < 1e-15);
        let trivial = minimal_extension(&computational_povm(2)).unwrap();
        assert_eq!(embed_state(&rho, &trivial).unwrap(), rho);
    }

    fn padded_spectrum(x: &NaimarkExtension, rho: &DensityMatrix, len: usize) -> Vec<f64> {
        let e = embed_state(rho, x).unwrap();
        let mut s = eig_hermitian_unchecked(&x.measurement().dephase(e.matrix())).values;
        s.resize(len, 0.0);
        s
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn extensions_reproduce_statistics(seed in any::<u64>(), n in 2usize..4) {
            let mut rng = seeded(seed);
            let p = Povm::new(random_povm_effects(&mut rng, 2, n)).unwrap();
            let xs = [minimal_extension(&p).unwrap(), canonical_extension(&canonical_kraus(&p)).unwrap()];
            for x in &xs {
                prop_assert!(validate_extension(x, &p).is_ok());
            }
            for _ in 0..10 {
                let rho = random_density(&mut rng, 2);
                let probs = p.outcome_probs(&rho).unwrap();
                for x in &xs {
                    let e = embed_state(&rho, x).unwrap();
                    for (proj, q) in x.projectors().iter().zip(&probs) {
                        prop_assert!(((proj * e.matrix()).trace().re - q).abs() < 1e-9);
                    }
                }
                let len = xs[1].d_prime();
                let a = padded_spectrum(&xs[0], &rho, len);
                let b = padded_spectrum(&xs[1], &rho, len);
                for (u, v) in a.iter().zip(&b) {
                    prop_assert!((u - v).abs() < 1e-8);
                }
            }
        }

        #[test]
        fn completion_is_unitary(seed in any::<u64>(), n in 1usize..7, k in 0usize..4) {
            let mut rng = seeded(seed);
            let k = k.min(n);
            let u = crate::random::haar_unitary(&mut rng, n);
            let w = u.columns(0, k).into_owned();
            let q = complete_to_unitary(&w).unwrap();
            prop_assert!(frobenius(&(q.adjoint() * &q - identity(n))) < 1e-10);
            prop_assert!(frobenius(&(q.columns(0, k) - &w)) < 1e-14);
        }
    }
}
