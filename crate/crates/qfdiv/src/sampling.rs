//! Seeded random operators, states and channels.
//!
//! Every generator takes an explicit RNG so falsifiers and experiment
//! sweeps are reproducible from a recorded seed.

use crate::matcore::{creal, CMatrix};
use crate::scalar::{r, Real};
use nalgebra::DVector;
use num_complex::Complex;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The crate's reproducible RNG.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard normal via Box-Muller on the RNG's uniforms.
pub fn randn<G: Rng>(rng: &mut G) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn randn_c<R: Real, G: Rng>(rng: &mut G) -> Complex<R> {
    Complex::new(r(randn(rng)), r(randn(rng)))
}

/// Matrix with independent complex Gaussian entries.
pub fn gaussian_matrix<R: Real, G: Rng>(rng: &mut G, rows: usize, cols: usize) -> CMatrix<R> {
    CMatrix::<R>::from_fn(rows, cols, |_, _| randn_c(rng))
}

/// Gaussian vector, normalized to a unit state vector.
pub fn random_pure<R: Real, G: Rng>(rng: &mut G, dim: usize) -> DVector<Complex<R>> {
    loop {
        let v = DVector::<Complex<R>>::from_fn(dim, |_, _| randn_c::<R, _>(rng));
        let n = v.norm();
        if n > r(1e-6) {
            return v.map(|z| z * creal(R::one() / n));
        }
    }
}

/// Random Hermitian matrix `(G + G*)/2`.
pub fn random_hermitian<R: Real, G: Rng>(rng: &mut G, dim: usize) -> CMatrix<R> {
    let g = gaussian_matrix::<R, _>(rng, dim, dim);
    (&g + g.adjoint()).map(|z| z * creal(r(0.5)))
}

/// Random PSD matrix `G G*` with `G` of shape `dim x rank`.
pub fn random_psd<R: Real, G: Rng>(rng: &mut G, dim: usize, rank: usize) -> CMatrix<R> {
    let g = gaussian_matrix::<R, _>(rng, dim, rank.max(1).min(dim));
    &g * g.adjoint()
}

/// Random density matrix of the given rank (trace one).
pub fn random_density<R: Real, G: Rng>(rng: &mut G, dim: usize, rank: usize) -> CMatrix<R> {
    let m = random_psd::<R, _>(rng, dim, rank);
    let t = crate::matcore::trace_re(&m);
    m.map(|z| z * creal(R::one() / t))
}

/// Full-rank density with a small isotropic floor, so eigenvalue ratios
/// stay well conditioned in divergence tests.
pub fn random_full_rank_density<R: Real, G: Rng>(rng: &mut G, dim: usize) -> CMatrix<R> {
    let m = random_psd::<R, _>(rng, dim, dim)
        + CMatrix::<R>::identity(dim, dim).map(|z| z * creal(r(0.05 * dim as f64)));
    let t = crate::matcore::trace_re(&m);
    m.map(|z| z * creal(R::one() / t))
}

/// Haar-like random unitary from the QR of a Gaussian matrix, with the
/// R-diagonal phases absorbed.
pub fn random_unitary<R: Real, G: Rng>(rng: &mut G, dim: usize) -> CMatrix<R> {
    let g = gaussian_matrix::<R, _>(rng, dim, dim);
    let qr = g.qr();
    let rm = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let d = rm[(j, j)];
        let m = d.norm_sqr().sqrt();
        if m > R::zero() {
            let phase = Complex::new(d.re / m, d.im / m);
            for i in 0..dim {
                q[(i, j)] *= phase.conj();
            }
        }
    }
    q
}

/// Random isometry `V: C^d -> C^D`, `V* V = I_d`.
pub fn random_isometry<R: Real, G: Rng>(rng: &mut G, d: usize, big_d: usize) -> CMatrix<R> {
    assert!(big_d >= d, "isometry needs target dimension >= source");
    let u = random_unitary::<R, _>(rng, big_d);
    u.columns(0, d).into_owned()
}

/// Random CPTP Kraus family `d_in -> d_out` with `k` operators.
pub fn random_cptp_kraus<R: Real, G: Rng>(
    rng: &mut G,
    d_in: usize,
    d_out: usize,
    k: usize,
) -> Vec<CMatrix<R>> {
    let raw: Vec<CMatrix<R>> = (0..k.max(1))
        .map(|_| gaussian_matrix::<R, _>(rng, d_out, d_in))
        .collect();
    let mut m = CMatrix::<R>::zeros(d_in, d_in);
    for kop in &raw {
        m += kop.adjoint() * kop;
    }
    let psd = crate::matcore::PsdOperator::new(m).expect("Gram matrix is PSD");
    let w = psd.power_real(r(-0.5));
    raw.into_iter().map(|kop| kop * &w).collect()
}

/// Random probability vector of the given length.
pub fn random_probability<G: Rng>(rng: &mut G, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = v.iter().sum();
    for x in &mut v {
        *x /= s;
    }
    v
}

/// The three-level merge channel: sends the first two levels onto the
/// first one and fixes the third. CPTP with Kraus
/// `{|e1><e1|, |e1><e2|, |e3><e3|}`; it collapses the distinguishability
/// data of states differing on the first two levels.
pub fn three_level_merge_channel<R: Real>() -> crate::channels::Channel<R> {
    let mut k1 = CMatrix::<R>::zeros(3, 3);
    k1[(0, 0)] = creal(R::one());
    let mut k2 = CMatrix::<R>::zeros(3, 3);
    k2[(0, 1)] = creal(R::one());
    let mut k3 = CMatrix::<R>::zeros(3, 3);
    k3[(2, 2)] = creal(R::one());
    crate::channels::Channel::from_kraus(vec![k1, k2, k3], 3, 3).expect("static dims")
}
