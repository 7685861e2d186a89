//! Dense vector kernels shared by the solvers.
//!
//! Every reduction uses a fixed accumulation order, so the sequential and the
//! rayon-backed matrix-vector products return bitwise identical results.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Rows below this dimension are never split across threads.
#[cfg(feature = "parallel")]
const PAR_MIN_DIM: usize = 256;

const LANES: usize = 8;

/// Inner product with eight independent accumulators.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; LANES];
    let ca = a.chunks_exact(LANES);
    let cb = b.chunks_exact(LANES);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (xa, xb) in ca.zip(cb) {
        for l in 0..LANES {
            acc[l] += xa[l] * xb[l];
        }
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail
}

#[inline]
pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// `a - b` into a fresh vector.
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `‖a − b‖`, reduced in the same order as [`norm`].
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    norm(&sub(a, b))
}

/// Row-major dense `out = M x` for an `n`-column matrix.
pub fn matvec_seq(n: usize, data: &[f64], x: &[f64], out: &mut [f64]) {
    debug_assert_eq!(data.len(), out.len() * n);
    for (row, o) in data.chunks_exact(n).zip(out.iter_mut()) {
        *o = dot(row, x);
    }
}

/// Same contract as [`matvec_seq`], rows distributed over the rayon pool.
#[cfg(feature = "parallel")]
pub fn matvec_par(n: usize, data: &[f64], x: &[f64], out: &mut [f64]) {
    data.par_chunks_exact(n)
        .zip(out.par_iter_mut())
        .for_each(|(row, o)| *o = dot(row, x));
}

/// Dispatches to the parallel kernel for large matrices when the `parallel`
/// feature is on.
pub fn matvec(n: usize, data: &[f64], x: &[f64], out: &mut [f64]) {
    #[cfg(feature = "parallel")]
    {
        if n >= PAR_MIN_DIM && rayon::current_num_threads() > 1 {
            return matvec_par(n, data, x, out);
        }
    }
    matvec_seq(n, data, x, out)
}
