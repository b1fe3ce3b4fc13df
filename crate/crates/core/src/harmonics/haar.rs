use super::U2;
use crate::rng;
use rand::Rng;

/// Gram-Schmidt on a complex Gaussian matrix, i.e. QR with the triangular
/// diagonal made positive.
pub fn haar_from_rng<R: Rng + ?Sized>(rng: &mut R) -> U2 {
    let a = [rng::complex_normal(rng, 1.0), rng::complex_normal(rng, 1.0)];
    let b = [rng::complex_normal(rng, 1.0), rng::complex_normal(rng, 1.0)];
    let na = (a[0].norm_sqr() + a[1].norm_sqr()).sqrt();
    let q1 = [a[0] / na, a[1] / na];
    let proj = q1[0].conj() * b[0] + q1[1].conj() * b[1];
    let c = [b[0] - proj * q1[0], b[1] - proj * q1[1]];
    let nc = (c[0].norm_sqr() + c[1].norm_sqr()).sqrt();
    U2::new(q1[0], c[0] / nc, q1[1], c[1] / nc)
}

pub fn haar_sample(seed: u64) -> U2 {
    haar_from_rng(&mut rng::stream(seed, 0))
}

/// `i`-th member of a keyed family of Haar samples.
pub fn haar_indexed(seed: u64, index: u64) -> U2 {
    haar_from_rng(&mut rng::stream(seed, index))
}
