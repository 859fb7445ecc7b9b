//! Scalar traits the generic containers are written against.
//!
//! `Ring` covers what polynomial and jet arithmetic needs; `Field` adds exact
//! division. `BigRational` is the workhorse; `f64`/`f32` are supported for
//! quick numeric experiments.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub trait Ring:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn from_i64(v: i64) -> Self;
}

pub trait Field: Ring + Div<Output = Self> {
    fn inv(&self) -> Self {
        Self::one() / self.clone()
    }
}

impl Ring for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
}
impl Field for BigRational {}

impl Ring for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }
}
impl Field for f64 {}

impl Ring for f32 {
    fn from_i64(v: i64) -> Self {
        v as f32
    }
}
impl Field for f32 {}

impl Ring for BigInt {
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
}
