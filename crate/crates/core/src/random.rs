//! Random states, unitaries, POVMs and channels for tests and restarts.
//!
//! Every sampler takes an explicit RNG; use [`seeded`] for reproducible streams.

use nalgebra::Vector3;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::StandardNormal;

use crate::linalg::{c, eig_hermitian_unchecked, BlochVector, CMatrix, CVector, DensityMatrix, PureState};

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| c(normal(rng), normal(rng)))
}

/// Haar-distributed unitary (QR of a Ginibre matrix with phase correction).
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    let qr = ginibre(rng, d, d).qr();
    let (mut q, r) = qr.unpack();
    for k in 0..d {
        let rkk = r[(k, k)];
        let phase = if rkk.norm() > 0.0 { rkk / rkk.norm() } else { c(1.0, 0.0) };
        for i in 0..d {
            q[(i, k)] *= phase;
        }
    }
    q
}

pub fn random_pure<R: Rng + ?Sized>(rng: &mut R, d: usize) -> PureState {
    let v = CVector::from_fn(d, |_, _| c(normal(rng), normal(rng)));
    PureState::normalized(v).expect("Gaussian vector is nonzero almost surely")
}

/// Hilbert–Schmidt random density matrix of full rank.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DensityMatrix {
    let g = ginibre(rng, d, d);
    DensityMatrix::normalized(&g * g.adjoint()).expect("Wishart matrix is PSD")
}

/// Uniform point in the closed unit ball.
pub fn random_bloch<R: Rng + ?Sized>(rng: &mut R) -> BlochVector {
    let dir = Vector3::new(normal(rng), normal(rng), normal(rng)).normalize();
    let radius = rng.random::<f64>().cbrt();
    BlochVector::from_vector(dir * radius).expect("radius is at most one")
}

/// Point on the probability simplex (flat Dirichlet).
pub fn random_probabilities<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| -rng.random::<f64>().max(f64::MIN_POSITIVE).ln()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// `n` generic full-rank effects: `E_i = S^{-1/2} G_i G_i† S^{-1/2}`, `S = Σ G_i G_i†`.
pub fn random_povm_effects<R: Rng + ?Sized>(rng: &mut R, d: usize, n: usize) -> Vec<CMatrix> {
    let raw: Vec<CMatrix> = (0..n)
        .map(|_| {
            let g = ginibre(rng, d, d);
            &g * g.adjoint()
        })
        .collect();
    let total = raw.iter().fold(CMatrix::zeros(d, d), |acc, m| acc + m);
    let inv_sqrt = eig_hermitian_unchecked(&total).map_spectrum(|l| 1.0 / l.sqrt());
    raw.iter()
        .map(|m| {
            let e = &inv_sqrt * m * &inv_sqrt;
            (&e + e.adjoint()).scale(0.5)
        })
        .collect()
}

/// `k` Kraus operators of a random CPTP map: blocks of a Haar isometry.
pub fn random_kraus<R: Rng + ?Sized>(rng: &mut R, d: usize, k: usize) -> Vec<CMatrix> {
    let u = haar_unitary(rng, d * k);
    (0..k)
        .map(|j| u.view((j * d, 0), (d, d)).into_owned())
        .collect()
}
