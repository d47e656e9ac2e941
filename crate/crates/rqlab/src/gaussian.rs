//! Gaussian integers Z[i]: exact ring arithmetic, Euclidean gcd, primary
//! primes, and the quadratic residue symbol in Z[i].
//!
//! "Primary" means = 1 mod (1+i)^3; every element of odd norm has exactly one
//! primary associate, which pins the normalization the residue symbols need.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::arith::{is_prime, jacobi};
use crate::{invalid, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GaussianInt {
    pub re: BigInt,
    pub im: BigInt,
}

impl fmt::Display for GaussianInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_negative() {
            write!(f, "{}{}i", self.re, self.im)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

impl GaussianInt {
    pub fn new(re: impl Into<BigInt>, im: impl Into<BigInt>) -> Self {
        Self { re: re.into(), im: im.into() }
    }

    pub fn zero() -> Self {
        Self::new(0, 0)
    }

    pub fn one() -> Self {
        Self::new(1, 0)
    }

    pub fn i() -> Self {
        Self::new(0, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self { re: self.re.clone(), im: -&self.im }
    }

    pub fn norm(&self) -> BigInt {
        &self.re * &self.re + &self.im * &self.im
    }

    /// Euclidean division: q with N(self - q*rhs) < N(rhs), via rounded
    /// quotient coordinates.
    pub fn div_rem(&self, rhs: &Self) -> (Self, Self) {
        assert!(!rhs.is_zero(), "division by zero in Z[i]");
        let n = rhs.norm();
        let num = self * &rhs.conj();
        let q = Self { re: round_div(&num.re, &n), im: round_div(&num.im, &n) };
        let r = self - &(&q * rhs);
        (q, r)
    }

    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a
    }

    /// = 1 mod (1+i)^3, i.e. re odd, im even, re + im = 1 mod 4.
    pub fn is_primary(&self) -> bool {
        self.re.is_odd()
            && self.im.is_even()
            && (&self.re + &self.im).mod_floor(&BigInt::from(4)).to_u8() == Some(1)
    }

    /// The unique primary associate of an element of odd norm.
    pub fn primary_associate(&self) -> Result<Self> {
        if self.norm().is_even() {
            return Err(invalid(format!("{self} has even norm, no primary associate")));
        }
        let mut z = self.clone();
        for _ in 0..4 {
            if z.is_primary() {
                return Ok(z);
            }
            z = &z * &GaussianInt::i();
        }
        Err(invalid(format!("{self}: no primary associate found")))
    }
}

fn round_div(a: &BigInt, b: &BigInt) -> BigInt {
    // nearest integer to a/b, b > 0
    let (q, r) = a.div_mod_floor(b);
    if &(&r * 2) >= b {
        q + 1
    } else {
        q
    }
}

impl Add for &GaussianInt {
    type Output = GaussianInt;
    fn add(self, rhs: Self) -> GaussianInt {
        GaussianInt { re: &self.re + &rhs.re, im: &self.im + &rhs.im }
    }
}

impl Sub for &GaussianInt {
    type Output = GaussianInt;
    fn sub(self, rhs: Self) -> GaussianInt {
        GaussianInt { re: &self.re - &rhs.re, im: &self.im - &rhs.im }
    }
}

impl Mul for &GaussianInt {
    type Output = GaussianInt;
    fn mul(self, rhs: Self) -> GaussianInt {
        GaussianInt {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl Neg for &GaussianInt {
    type Output = GaussianInt;
    fn neg(self) -> GaussianInt {
        GaussianInt { re: -&self.re, im: -&self.im }
    }
}

/// Quadratic residue symbol (a/pi)_2 for a Gaussian prime pi of odd prime
/// norm p: a^((p-1)/2) in Z[i]/(pi) = F_p, mapped to {-1, 0, +1}.
pub fn quadratic_symbol(a: &GaussianInt, pi: &GaussianInt) -> Result<i8> {
    let p = pi.norm();
    if p.is_even() {
        return Err(invalid(format!("symbol modulus {pi} has even norm")));
    }
    if !is_prime(&p) {
        return Err(invalid(format!(
            "symbol modulus {pi} has non-prime norm {p}; residue field is not F_p"
        )));
    }
    // Z[i]/(pi) = F_p via i -> t, where t = -re * im^(-1) mod p.
    // im is invertible: p = re^2 + im^2 with p prime excludes p | im.
    let t = if pi.im.is_zero() {
        return Err(invalid(format!("{pi} is not a split Gaussian prime")));
    } else {
        let inv = mod_inverse(&pi.im, &p)
            .ok_or_else(|| invalid(format!("norm of {pi} not coprime to im part")))?;
        ((-&pi.re) * inv).mod_floor(&p)
    };
    let m = (&a.re + &a.im * t).mod_floor(&p);
    jacobi(&m, &p)
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let a = a.mod_floor(m);
    let e = a.extended_gcd(m);
    if e.gcd.to_u8() == Some(1) {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

/// The primary Gaussian prime above p = 1 mod 4 dividing x + i.
///
/// Requires p | x^2 + 1; computed as gcd(p, x+i) followed by the unit
/// adjustment over the four associates.
pub fn primary_prime_over(p: &BigInt, x: &BigInt) -> Result<GaussianInt> {
    if p.mod_floor(&BigInt::from(4)).to_u8() != Some(1) || !is_prime(p) {
        return Err(invalid(format!("{p} is not a prime = 1 mod 4")));
    }
    if !(x * x + 1u8).mod_floor(p).is_zero() {
        return Err(invalid(format!("{p} does not divide {x}^2 + 1")));
    }
    let g = GaussianInt::new(p.clone(), BigInt::zero())
        .gcd(&GaussianInt::new(x.clone(), BigInt::from(1)));
    debug_assert_eq!(g.norm(), p.clone());
    g.primary_associate()
}
