//! Arithmetic on a circle of perimeter `p`, identified with `[0, p)` by an
//! anti-clockwise coordinate.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Circle<S> {
    perimeter: S,
}

impl<S: Scalar> Circle<S> {
    pub fn new(perimeter: S) -> Result<Self> {
        if perimeter <= S::zero() {
            return Err(Error::NonPositivePerimeter);
        }
        Ok(Self { perimeter })
    }

    pub fn perimeter(&self) -> &S {
        &self.perimeter
    }

    pub fn half(&self) -> S {
        self.perimeter.clone() / S::from_usize(2)
    }

    /// Canonical representative of `x` in `[0, p)`.
    pub fn reduce(&self, x: &S) -> S {
        let p = &self.perimeter;
        let k = (x.clone() / p.clone()).floor();
        let mut y = x.clone() - k * p.clone();
        // Float rounding can land exactly on p or just below zero.
        if y >= *p {
            y = y - p.clone();
        }
        if y < S::zero() {
            y = y + p.clone();
            if y >= *p {
                y = S::zero();
            }
        }
        y
    }

    /// Shortest-path (geodesic) distance, in `[0, p/2]`.
    pub fn distance(&self, a: &S, b: &S) -> S {
        let forward = self.reduce(&(b.clone() - a.clone()));
        let backward = self.perimeter.clone() - forward.clone();
        S::min_of(forward, backward)
    }

    /// Signed displacement from `a` to `b` along the shortest path: positive
    /// when that path is anti-clockwise. Lies in `(-p/2, p/2]`; an antipodal
    /// pair resolves to `+p/2`.
    pub fn displacement(&self, a: &S, b: &S) -> S {
        let forward = self.reduce(&(b.clone() - a.clone()));
        if forward <= self.half() {
            forward
        } else {
            forward - self.perimeter.clone()
        }
    }

    /// Anti-clockwise arc length from `a` to `b`, in `[0, p)`.
    pub fn forward_arc(&self, a: &S, b: &S) -> S {
        self.reduce(&(b.clone() - a.clone()))
    }

    /// Average of `points` after lifting each one into the window
    /// `[center - r, center + r]`, reduced back onto the circle.
    pub fn circular_mean<'a, I>(&self, center: &S, points: I, radius: &S) -> Result<S>
    where
        I: IntoIterator<Item = &'a S>,
    {
        if radius.clone() * S::from_usize(2) >= self.perimeter {
            return Err(Error::RadiusTooLarge);
        }
        let mut sum = S::zero();
        let mut count = 0usize;
        for point in points {
            let offset = self.displacement(center, point);
            if offset.abs() > *radius {
                return Err(Error::OutOfRadius(point.to_literal()));
            }
            sum = sum + offset;
            count += 1;
        }
        if count == 0 {
            return Err(Error::Empty);
        }
        Ok(self.reduce(&(center.clone() + sum / S::from_usize(count))))
    }
}
