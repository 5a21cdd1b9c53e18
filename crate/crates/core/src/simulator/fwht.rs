//! In-place fast Walsh–Hadamard transform with unitary scaling.

use std::ops::{Add, Mul, Sub};

/// Stages with stride below this many elements run block by block so the
/// working set stays in cache.
const BLOCK: usize = 1 << 15;

/// Element types the transform can act on (real and complex doubles).
pub trait FwhtScalar: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {}

impl<T> FwhtScalar for T where T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T> {}

/// Applies `H^{⊗n}` to `a` in place, where `a.len() = 2^n`. The transform is
/// orthogonal and its own inverse.
///
/// # Panics
/// If the length is not a power of two.
pub fn fwht_in_place<T: FwhtScalar>(a: &mut [T]) {
    let len = a.len();
    assert!(len.is_power_of_two(), "FWHT length {len} is not a power of two");
    if len == 1 {
        return;
    }
    let scale = 1.0 / (len as f64).sqrt();
    let block = len.min(BLOCK);
    for chunk in a.chunks_exact_mut(block) {
        // First stage carries the normalization.
        for pair in chunk.chunks_exact_mut(2) {
            let (x, y) = (pair[0], pair[1]);
            pair[0] = (x + y) * scale;
            pair[1] = (x - y) * scale;
        }
        let mut h = 2;
        while h < block {
            if 4 * h <= block {
                double_stage(chunk, h);
                h *= 4;
            } else {
                stage(chunk, h);
                h *= 2;
            }
        }
    }
    let mut h = block;
    while h < len {
        if 4 * h <= len {
            double_stage(a, h);
            h *= 4;
        } else {
            stage(a, h);
            h *= 2;
        }
    }
}

#[inline]
fn stage<T: FwhtScalar>(a: &mut [T], h: usize) {
    for chunk in a.chunks_exact_mut(2 * h) {
        let (lo, hi) = chunk.split_at_mut(h);
        for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
            let (u, v) = (*x, *y);
            *x = u + v;
            *y = u - v;
        }
    }
}

/// Strides `h` and `2h` fused into one pass over memory.
#[inline]
fn double_stage<T: FwhtScalar>(a: &mut [T], h: usize) {
    for chunk in a.chunks_exact_mut(4 * h) {
        let (q01, q23) = chunk.split_at_mut(2 * h);
        let (q0, q1) = q01.split_at_mut(h);
        let (q2, q3) = q23.split_at_mut(h);
        for i in 0..h {
            let (a0, a1, a2, a3) = (q0[i], q1[i], q2[i], q3[i]);
            let (b0, b1, b2, b3) = (a0 + a1, a0 - a1, a2 + a3, a2 - a3);
            q0[i] = b0 + b2;
            q1[i] = b1 + b3;
            q2[i] = b0 - b2;
            q3[i] = b1 - b3;
        }
    }
}
