//! Discrete Fourier transform over the additive group `(Z_p)^n`, used by the
//! character decoder on prime fields. Data is indexed by packed base-`p`
//! tuples; the transform applies a `p`-point DFT along each axis.

use alloc::vec;
use alloc::vec::Vec;

use crate::flt;

/// In-place DFT of `data` (length `p^n`) over `(Z_p)^n`:
/// `out[w] = sum_v data[v] * zeta^{-<w,v>}`, `zeta = e^{2 pi i / p}`.
pub fn dft_zp(p: usize, n: usize, data: &mut [(f64, f64)]) {
    let size = data.len();
    debug_assert_eq!(size, p.pow(n as u32) as usize);
    // p-point twiddles for the forward (negative-exponent) kernel
    let mut tw = Vec::with_capacity(p);
    for k in 0..p {
        let theta = -2.0 * core::f64::consts::PI * k as f64 / p as f64;
        tw.push((flt::cos(theta), flt::sin(theta)));
    }
    let mut scratch = vec![(0.0f64, 0.0f64); p];
    let mut stride = 1usize;
    for _axis in 0..n {
        let block = stride * p;
        let mut base = 0usize;
        while base < size {
            for off in 0..stride {
                // gather the line
                for j in 0..p {
                    scratch[j] = data[base + off + j * stride];
                }
                for (k, out) in (0..p).map(|k| {
                    let mut re = 0.0;
                    let mut im = 0.0;
                    for (j, &(sr, si)) in scratch.iter().enumerate() {
                        let (tr, ti) = tw[(j * k) % p];
                        re += sr * tr - si * ti;
                        im += sr * ti + si * tr;
                    }
                    (k, (re, im))
                }) {
                    data[base + off + k * stride] = out;
                }
            }
            base += block;
        }
        stride = block;
    }
}
