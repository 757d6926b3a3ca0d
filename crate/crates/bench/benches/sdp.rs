use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, Criterion};

use povmcoh::random::{random_density, seeded};
use povmcoh::sdp::{fidelity_sdp, pic_feasibility, FmaxContext, FmaxOptions, PicOptions, SdpOptions};
use povmcoh::trine::{psi_pi8, rz_channel, trine_incoherent_unitaries};
use povmcoh::{canonical_extension, canonical_kraus, minimal_extension, trine_povm, Channel, DensityMatrix};

fn pic(c: &mut Criterion) {
    let p = trine_povm();
    let x = minimal_extension(&p).unwrap();
    let opts = PicOptions::default();
    let free = Channel::unitary(trine_incoherent_unitaries()[1].unitary.clone()).unwrap().process();
    let not_free = rz_channel(std::f64::consts::PI / 5.0).unwrap();
    let mut group = c.benchmark_group("pic_feasibility");
    group.bench_function("trine_minimal/symmetry", |b| b.iter(|| pic_feasibility(black_box(&free), &x, &opts).unwrap()));
    group.bench_function("trine_minimal/rz_pi_5", |b| b.iter(|| pic_feasibility(black_box(&not_free), &x, &opts).unwrap()));
    group.sample_size(10).measurement_time(Duration::from_secs(40));
    let xc = canonical_extension(&canonical_kraus(&p)).unwrap();
    group.bench_function("trine_canonical/symmetry", |b| b.iter(|| pic_feasibility(black_box(&free), &xc, &opts).unwrap()));
    group.finish();
}

fn fmax(c: &mut Criterion) {
    let x = minimal_extension(&trine_povm()).unwrap();
    let opts = FmaxOptions::default();
    c.bench_function("fmax/context_trine_minimal", |b| b.iter(|| FmaxContext::new(black_box(&x), &opts).unwrap()));
    let ctx = FmaxContext::new(&x, &opts).unwrap();
    let psi = psi_pi8().density();
    let zero = DensityMatrix::basis(2, 0);
    c.bench_function("fmax/solve_trine_minimal", |b| b.iter(|| ctx.fmax(black_box(&psi), &zero).unwrap()));

    let mut rng = seeded(3);
    let (rho, sigma) = (random_density(&mut rng, 2), random_density(&mut rng, 2));
    let sdp = SdpOptions::default();
    c.bench_function("fidelity_sdp/qubit", |b| b.iter(|| fidelity_sdp(black_box(&rho), &sigma, &sdp).unwrap()));
}

criterion_group!(benches, pic, fmax);
criterion_main!(benches);
