//! Seeded random objects for tests, benchmarks and verification sweeps.
//!
//! All randomness flows from ChaCha8 streams: `rng(seed)` for a single
//! stream, `rng_stream(seed, k)` for the k-th independent stream of a seed.
//! Complex Gaussian entries have independent real and imaginary parts of
//! variance 1/2.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channels::Channel;
use crate::linalg::{self, c, CMat, CVec, C64};

pub type Rng64 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rng_stream(seed: u64, stream: u64) -> Rng64 {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| gaussian_complex(rng))
}

/// Haar-random unit vector.
pub fn random_pure_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVec {
    let v = CVec::from_fn(d, |_, _| gaussian_complex(rng));
    let n = v.norm();
    v / c(n, 0.0)
}

/// Full-rank random state `G G^dagger / Tr(G G^dagger)`.
pub fn random_density<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let g = ginibre(d, d, rng);
    let m = &g * g.adjoint();
    let tr = linalg::trace(&m);
    m / tr
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let qr = ginibre(d, d, rng).qr();
    let q = qr.q();
    let r = qr.r();
    let mut u = q;
    for k in 0..d {
        let rk = r[(k, k)];
        let phase = if rk.norm() > 0.0 { rk / rk.norm() } else { linalg::ONE };
        for row in 0..d {
            u[(row, k)] *= phase;
        }
    }
    u
}

/// Random channel with `kraus_count` operators, `K_j = G_j (G^dagger G)^{-1/2}`.
/// Needs `kraus_count * d_out >= d_in`, otherwise no trace-preserving set exists.
pub fn random_channel<R: Rng + ?Sized>(d_in: usize, d_out: usize, kraus_count: usize, rng: &mut R) -> Channel {
    assert!(kraus_count * d_out >= d_in, "{kraus_count} Kraus operators of shape {d_out}x{d_in} cannot be trace preserving");
    let blocks: Vec<CMat> = (0..kraus_count).map(|_| ginibre(d_out, d_in, rng)).collect();
    let mut s = CMat::zeros(d_in, d_in);
    for g in &blocks {
        s += g.adjoint() * g;
    }
    let inv_sqrt = linalg::hermitian_map(&s, |x| c(1.0 / x.sqrt(), 0.0));
    let kraus = blocks.into_iter().map(|g| g * &inv_sqrt).collect();
    Channel::new(kraus).expect("normalized Kraus set")
}
