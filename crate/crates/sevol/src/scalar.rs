//! Generic scalar abstraction: the volume of the Reeb polytope and its
//! derivatives are rational functions of the Reeb vector, so they evaluate
//! identically over floating point (optimization) and exact rationals
//! (certificates). `f32` rides along for completeness.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, ToPrimitive, Zero};

use crate::{Int, Rat};

pub trait Scalar:
    Clone
    + PartialOrd
    + PartialEq
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    fn from_int(i: &Int) -> Self;
    fn from_rat(r: &Rat) -> Self;
    fn approx(&self) -> f64;
    /// Positive pairings below this threshold count as numerically degenerate
    /// (floating paths only; exact scalars return `None`).
    fn boundary_epsilon() -> Option<Self>;
}

impl Scalar for f64 {
    fn from_int(i: &Int) -> Self {
        i.to_f64().unwrap_or(f64::INFINITY)
    }
    fn from_rat(r: &Rat) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }
    fn approx(&self) -> f64 {
        *self
    }
    fn boundary_epsilon() -> Option<Self> {
        Some(1e-12)
    }
}

impl Scalar for f32 {
    fn from_int(i: &Int) -> Self {
        i.to_f32().unwrap_or(f32::INFINITY)
    }
    fn from_rat(r: &Rat) -> Self {
        r.to_f64().map(|x| x as f32).unwrap_or(f32::NAN)
    }
    fn approx(&self) -> f64 {
        f64::from(*self)
    }
    fn boundary_epsilon() -> Option<Self> {
        Some(1e-5)
    }
}

impl Scalar for Rat {
    fn from_int(i: &Int) -> Self {
        Rat::from_integer(i.clone())
    }
    fn from_rat(r: &Rat) -> Self {
        r.clone()
    }
    fn approx(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
    fn boundary_epsilon() -> Option<Self> {
        None
    }
}

/// Lift an integer vector into the scalar type.
pub fn lift<S: Scalar>(v: &[Int]) -> Vec<S> {
    v.iter().map(S::from_int).collect()
}
