//! Dense truncated power series over any numeric ring.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Neg;
use num_traits::Num;

pub trait Coef: Num + Clone + Neg<Output = Self> {}
impl<T: Num + Clone + Neg<Output = T>> Coef for T {}

pub fn int<T: Coef>(k: u32) -> T {
    let mut out = T::zero();
    for _ in 0..k {
        out = out + T::one();
    }
    out
}

/// a * b keeping terms up to x^order.
pub fn mul<T: Coef>(a: &[T], b: &[T], order: usize) -> Vec<T> {
    let mut out = vec![T::zero(); order + 1];
    for (i, ai) in a.iter().enumerate().take(order + 1) {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate().take(order + 1 - i) {
            out[i + j] = out[i + j].clone() + ai.clone() * bj.clone();
        }
    }
    out
}

pub fn pow<T: Coef>(a: &[T], k: u32, order: usize) -> Vec<T> {
    let mut out = vec![T::zero(); order + 1];
    out[0] = T::one();
    for _ in 0..k {
        out = mul(&out, a, order);
    }
    out
}

/// 1/a for a with a nonzero constant term.
pub fn inverse<T: Coef>(a: &[T], order: usize) -> Vec<T> {
    let mut out = vec![T::zero(); order + 1];
    out[0] = T::one() / a[0].clone();
    for m in 1..=order {
        let mut s = T::zero();
        for k in 1..=m.min(a.len() - 1) {
            s = s + a[k].clone() * out[m - k].clone();
        }
        out[m] = -(s * out[0].clone());
    }
    out
}

/// exp(a) for a with zero constant term.
pub fn exp<T: Coef>(a: &[T], order: usize) -> Vec<T> {
    let mut out = vec![T::zero(); order + 1];
    out[0] = T::one();
    for m in 1..=order {
        let mut s = T::zero();
        for k in 1..=m.min(a.len() - 1) {
            s = s + int::<T>(k as u32) * a[k].clone() * out[m - k].clone();
        }
        out[m] = s / int(m as u32);
    }
    out
}

/// f(g(x)) for g with zero constant term.
pub fn compose<T: Coef>(f: &[T], g: &[T], order: usize) -> Vec<T> {
    let mut out = vec![T::zero(); order + 1];
    for k in (0..f.len().min(order + 1)).rev() {
        out = mul(&out, g, order);
        out[0] = out[0].clone() + f[k].clone();
    }
    out
}

pub fn eval(a: &[f64], x: f64) -> f64 {
    a.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}
