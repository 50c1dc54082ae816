//! Independent reference implementations used as test oracles.

#![allow(dead_code)]

use hkcircle::{Rational, Scalar};

pub type Q = Rational;

pub fn q(n: i64, d: i64) -> Q {
    Q::from_ratio(n, d)
}

/// Canonical representative in `[0, p)` by repeated shifting.
pub fn wrap(x: Q, p: &Q) -> Q {
    let mut y = x;
    while y < q(0, 1) {
        y += p.clone();
    }
    while y >= *p {
        y -= p.clone();
    }
    y
}

/// One synchronous update on the circle: every other opinion is tried at
/// its three nearest lifts, and whichever lands within `r` of the updating
/// agent is averaged.
pub fn circle_step(xs: &[Q], p: &Q, r: &Q) -> Vec<Q> {
    xs.iter()
        .map(|x| {
            let mut sum = q(0, 1);
            let mut count = 0i64;
            for y in xs {
                for shift in [-1i64, 0, 1] {
                    let lifted = y.clone() + p.clone() * q(shift, 1);
                    let d = lifted.clone() - x.clone();
                    if d >= -r.clone() && d <= *r {
                        sum += lifted;
                        count += 1;
                    }
                }
            }
            wrap(sum / q(count, 1), p)
        })
        .collect()
}

/// The classical update on the real line.
pub fn line_step(xs: &[Q], r: &Q) -> Vec<Q> {
    xs.iter()
        .map(|x| {
            let close: Vec<&Q> = xs
                .iter()
                .filter(|y| {
                    let d = (*y).clone() - x.clone();
                    d >= -r.clone() && d <= *r
                })
                .collect();
            let total = close.iter().fold(q(0, 1), |a, y| a + (*y).clone());
            total / q(close.len() as i64, 1)
        })
        .collect()
}
