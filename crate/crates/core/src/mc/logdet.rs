//! `log |det(M - s)|^2` by LU with partial pivoting.

use crate::error::{Error, Result};
use num_complex::Complex64;

pub fn log_abs_det2(m: &[Complex64], n: usize, shift: Complex64) -> Result<f64> {
    let mut a = m.to_vec();
    for i in 0..n {
        a[i * n + i] -= shift;
    }
    log_abs_det2_in_place(&mut a, n)
}

/// Destroys `a` (row-major `n x n`).
pub fn log_abs_det2_in_place(a: &mut [Complex64], n: usize) -> Result<f64> {
    assert_eq!(a.len(), n * n);
    let mut acc = 0.0;
    for k in 0..n {
        let mut p = k;
        let mut best = a[k * n + k].norm_sqr();
        for r in k + 1..n {
            let v = a[r * n + k].norm_sqr();
            if v > best {
                best = v;
                p = r;
            }
        }
        if best == 0.0 || !best.is_finite() {
            return Err(Error::Singular);
        }
        if p != k {
            for c in 0..n {
                a.swap(k * n + c, p * n + c);
            }
        }
        let pivot = a[k * n + k];
        acc += best.ln();
        let inv = pivot.inv();
        let (top, rest) = a.split_at_mut((k + 1) * n);
        let prow = &top[k * n + k + 1..(k + 1) * n];
        for row in rest.chunks_exact_mut(n) {
            let l = row[k] * inv;
            if l == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (x, &y) in row[k + 1..].iter_mut().zip(prow) {
                *x -= l * y;
            }
        }
    }
    Ok(acc)
}
