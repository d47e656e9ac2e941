//! Continued fractions and fundamental units of real quadratic orders.
//!
//! The unit of Z[sqrt d] comes from the continued fraction of sqrt(d) in the
//! usual way. For d = 1 mod 4 the maximal order can be strictly larger; its
//! fundamental unit is then an exact cube root of the Z[sqrt d] unit with
//! half-integral coordinates (the unit-group index at conductor 2 divides 3),
//! so we look for that root instead of expanding (1+sqrt d)/2.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{factorize, is_perfect_square, is_squarefree};
use crate::{invalid, Error, Result};

/// Fundamental unit x + y*sqrt(d) of the maximal order of Q(sqrt d).
///
/// Coordinates are exact rationals: both integers, or both half-odd-integers
/// (only possible for d = 1 mod 4). The unit is the smallest one > 1 and
/// x^2 - d*y^2 = norm holds exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FundamentalUnit {
    pub d: BigInt,
    pub x: BigRational,
    pub y: BigRational,
    pub norm: i8,
}

impl FundamentalUnit {
    pub fn is_integral(&self) -> bool {
        self.x.is_integer() && self.y.is_integer()
    }

    /// Integer coordinates, only valid when `is_integral`.
    pub fn integer_coords(&self) -> (BigInt, BigInt) {
        assert!(self.is_integral());
        (self.x.to_integer(), self.y.to_integer())
    }

    pub fn pell_identity_holds(&self) -> bool {
        let lhs = &self.x * &self.x - BigRational::from(self.d.clone()) * &self.y * &self.y;
        lhs == BigRational::from(BigInt::from(self.norm))
    }
}

impl std::fmt::Display for FundamentalUnit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} + {}*sqrt({})", self.x, self.y, self.d)
    }
}

/// Continued fraction of sqrt(n): (a0, minimal period).
pub fn continued_fraction_sqrt(n: &BigInt) -> Result<(BigInt, Vec<BigInt>)> {
    if n <= &BigInt::one() {
        return Err(invalid(format!("continued fraction needs n > 1, got {n}")));
    }
    let a0 = n.sqrt();
    if &(&a0 * &a0) == n {
        return Err(invalid(format!("{n} is a perfect square")));
    }
    let mut m = BigInt::zero();
    let mut d = BigInt::one();
    let mut a = a0.clone();
    let mut period = Vec::new();
    loop {
        m = &d * &a - &m;
        d = (n - &m * &m) / &d;
        a = (&a0 + &m).div_floor(&d);
        period.push(a.clone());
        if d.is_one() {
            return Ok((a0, period));
        }
    }
}

/// Smallest solution of x^2 - n y^2 = +-1 over Z (unit of the order Z[sqrt n]).
fn pell_minimal(n: &BigInt) -> Result<(BigInt, BigInt, i8)> {
    let (a0, period) = continued_fraction_sqrt(n)?;
    let ell = period.len();
    // convergent h_{l-1}/k_{l-1} over a0, period[0..l-1]
    let (mut hp, mut h) = (BigInt::one(), a0.clone());
    let (mut kp, mut k) = (BigInt::zero(), BigInt::one());
    for a in period.iter().take(ell - 1) {
        let hn = a * &h + &hp;
        let kn = a * &k + &kp;
        hp = std::mem::replace(&mut h, hn);
        kp = std::mem::replace(&mut k, kn);
    }
    let norm = if ell % 2 == 1 { -1 } else { 1 };
    debug_assert_eq!(&h * &h - n * &k * &k, BigInt::from(norm));
    Ok((h, k, norm))
}

/// Fundamental unit of the maximal order of Q(sqrt d), d squarefree > 1.
pub fn fundamental_unit(d: &BigInt) -> Result<FundamentalUnit> {
    if d <= &BigInt::one() || !is_squarefree(d)? {
        return Err(invalid(format!("fundamental unit needs squarefree d > 1, got {d}")));
    }
    let (x0, y0, norm) = pell_minimal(d)?;
    if d.mod_floor(&BigInt::from(4)).to_u8() == Some(1) {
        // Maximal-order unit may be the cube root (a + b sqrt d)/2 of x0 + y0 sqrt d,
        // with a, b odd: a solves a^3 - 3na = 2 x0.
        let n = BigInt::from(norm);
        let target = BigInt::from(2) * &x0;
        let guess = target.cbrt();
        for off in -2i64..=2 {
            let a = &guess + BigInt::from(off);
            if !a.is_positive() || a.is_even() {
                continue;
            }
            if &a * &a * &a - BigInt::from(3) * &n * &a != target {
                continue;
            }
            let num = &a * &a - BigInt::from(4) * &n;
            if (&num % d).is_zero() {
                let bsq = &num / d;
                if is_perfect_square(&bsq) {
                    let b = bsq.sqrt();
                    if b.is_odd() {
                        let two = BigInt::from(2);
                        let unit = FundamentalUnit {
                            d: d.clone(),
                            x: BigRational::new(a.clone(), two.clone()),
                            y: BigRational::new(b, two),
                            norm,
                        };
                        debug_assert!(unit.pell_identity_holds());
                        return Ok(unit);
                    }
                }
            }
        }
    }
    let unit = FundamentalUnit {
        d: d.clone(),
        x: BigRational::from(x0),
        y: BigRational::from(y0),
        norm,
    };
    debug_assert!(unit.pell_identity_holds());
    Ok(unit)
}

/// The unit itself when integral, else its cube (always integral).
pub fn canonical_integral_unit(u: &FundamentalUnit) -> FundamentalUnit {
    if u.is_integral() {
        return u.clone();
    }
    // (x + y w)^3 = x(x^2 + 3dy^2) + y(3x^2 + dy^2) w
    let d = BigRational::from(u.d.clone());
    let x2 = &u.x * &u.x;
    let y2 = &u.y * &u.y;
    let x3 = &u.x * (&x2 + BigRational::from(BigInt::from(3)) * &d * &y2);
    let y3 = &u.y * (BigRational::from(BigInt::from(3)) * &x2 + &d * &y2);
    let out = FundamentalUnit { d: u.d.clone(), x: x3, y: y3, norm: u.norm };
    debug_assert!(out.is_integral() && out.pell_identity_holds());
    out
}

/// Factorization of (x-1)(x+1) = d y^2 for an integral norm-one unit.
///
/// `d1`/`y1` always belong to the x+1 side and `d2`/`y2` to the x-1 side;
/// no normalization reorders them, callers read the side assignment off the
/// struct directly. With x odd both sides carry the factor 2 (`halved`),
/// with x even neither does.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitDecomposition {
    pub d1: BigInt,
    pub y1: BigInt,
    pub d2: BigInt,
    pub y2: BigInt,
    pub halved: bool,
}

pub fn decompose_norm_one(u: &FundamentalUnit) -> Result<UnitDecomposition> {
    if u.norm != 1 {
        return Err(invalid(
            "decomposition needs a norm +1 unit; norm -1 has none (use norm criteria instead)",
        ));
    }
    if !u.is_integral() {
        return Err(invalid("decomposition needs integral coordinates; cube the unit first"));
    }
    let (x, y) = u.integer_coords();
    let d = &u.d;
    let halved = x.is_odd();
    let (plus, minus) = if halved {
        ((&x + 1u8) / 2u8, (&x - 1u8) / 2u8)
    } else {
        (&x + 1u8, &x - 1u8)
    };
    // each prime of d divides exactly one side; the cofactors are squares
    let mut d1 = BigInt::one();
    let mut d2 = BigInt::one();
    for (p, _) in factorize(d)? {
        let p = BigInt::from(p);
        if (&plus % &p).is_zero() {
            d1 *= &p;
        } else {
            d2 *= &p;
        }
    }
    if &d1 * &d2 != *d {
        return Err(Error::Inconsistency(format!(
            "decompose: prime assignment failed for d = {d}, x = {x}"
        )));
    }
    let y1sq = &plus / &d1;
    let y2sq = &minus / &d2;
    if !is_perfect_square(&y1sq) || !is_perfect_square(&y2sq) {
        return Err(Error::Inconsistency(format!(
            "decompose: cofactors not squares for d = {d}, x = {x}"
        )));
    }
    let out = UnitDecomposition { d1, y1: y1sq.sqrt(), d2, y2: y2sq.sqrt(), halved };
    // recombination checks: product shape and middle coefficient
    let rebuilt_plus = &out.d1 * &out.y1 * &out.y1 * if halved { 2 } else { 1 };
    let rebuilt_minus = &out.d2 * &out.y2 * &out.y2 * if halved { 2 } else { 1 };
    debug_assert_eq!(rebuilt_plus, &x + 1u8);
    debug_assert_eq!(rebuilt_minus, &x - 1u8);
    let y_rebuilt = &out.y1 * &out.y2 * if halved { 2 } else { 1 };
    if y_rebuilt != y {
        return Err(Error::Inconsistency(format!(
            "decompose: y mismatch for d = {d}: got {y_rebuilt}, expected {y}"
        )));
    }
    Ok(out)
}

/// Whether sqrt(e_D * e_2D) lies in Q(sqrt2, sqrt D), decided through the
/// coefficient criterion: with e_2D = r + s*sqrt(2D), membership is
/// equivalent to p*(r+1) being a perfect square. A norm -1 unit of
/// Q(sqrt 2D) rules membership out immediately.
pub fn sqrt_product_in_k1_test(d: &BigInt, p: &BigInt) -> Result<bool> {
    if d.is_even() || !is_squarefree(d)? {
        return Err(invalid(format!("test needs odd squarefree D, got {d}")));
    }
    if !(d % p).is_zero() {
        return Err(invalid(format!("designated prime {p} does not divide {d}")));
    }
    let u = fundamental_unit(&(d * 2u8))?;
    if u.norm == -1 {
        return Ok(false);
    }
    let (r, _) = u.integer_coords(); // 2D = 2 mod 4 forces integrality
    Ok(is_perfect_square(&(p * (r + 1u8))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bi;

    fn unit(d: i64) -> FundamentalUnit {
        fundamental_unit(&bi(d)).unwrap()
    }

    fn rat(n: i64, den: i64) -> BigRational {
        BigRational::new(bi(n), bi(den))
    }

    #[test]
    fn cf_examples() {
        assert_eq!(continued_fraction_sqrt(&bi(2)).unwrap(), (bi(1), vec![bi(2)]));
        assert_eq!(continued_fraction_sqrt(&bi(15)).unwrap(), (bi(3), vec![bi(1), bi(6)]));
        assert_eq!(
            continued_fraction_sqrt(&bi(13)).unwrap(),
            (bi(3), vec![bi(1), bi(1), bi(1), bi(1), bi(6)])
        );
        assert!(continued_fraction_sqrt(&bi(16)).is_err());
    }

    #[test]
    fn unit_fixtures() {
        let e2 = unit(2);
        assert_eq!((e2.x, e2.y, e2.norm), (rat(1, 1), rat(1, 1), -1));
        let e5 = unit(5);
        assert_eq!((e5.x, e5.y, e5.norm), (rat(1, 2), rat(1, 2), -1));
        let e65 = unit(65);
        assert_eq!((e65.x, e65.y, e65.norm), (rat(8, 1), rat(1, 1), -1));
        let e442 = unit(442);
        assert_eq!((e442.x, e442.y, e442.norm), (rat(21, 1), rat(1, 1), -1));
        let e15 = unit(15);
        assert_eq!((e15.x, e15.y, e15.norm), (rat(4, 1), rat(1, 1), 1));
        let e221 = unit(221);
        assert_eq!((e221.x, e221.y, e221.norm), (rat(15, 2), rat(1, 2), 1));
        assert!(fundamental_unit(&bi(45)).is_err());
    }

    #[test]
    fn unit_minimality_brute_force() {
        // no unit 1 < u < fundamental over integer and half-integer coords
        for d in 2i64..=500 {
            if !crate::arith::is_squarefree_u64(d as u64) {
                continue;
            }
            let u = unit(d);
            assert!(u.pell_identity_holds(), "pell identity d={d}");
            let ux = u.x.clone() * rat(2, 1);
            let uy = u.y.clone() * rat(2, 1);
            let (tx, ty) = (ux.to_integer(), uy.to_integer());
            // search (a + b sqrt d)/2 with a,b >= 1, b < ty or (b == ty, a < tx)
            let ymax = ty.to_i64().unwrap_or(10_000).min(10_000);
            for b in 1..=ymax {
                for (asq, nrm) in [(d * b * b + 4, 1i64), (d * b * b - 4, -1)] {
                    if asq <= 0 {
                        continue;
                    }
                    let a = (asq as f64).sqrt().round() as i64;
                    if a * a != asq {
                        continue;
                    }
                    if a % 2 != b % 2 {
                        continue;
                    }
                    if a % 2 == 1 && d % 4 != 1 {
                        continue; // half-integers only live over d = 1 mod 4
                    }
                    let smaller = bi(b) < ty || (bi(b) == ty && bi(a) < tx);
                    assert!(
                        !smaller,
                        "smaller unit ({a}+{b}sqrt{d})/2 norm {nrm} beats {u}"
                    );
                }
            }
        }
    }

    #[test]
    fn canonicalization() {
        let e5 = canonical_integral_unit(&unit(5));
        assert_eq!((e5.x, e5.y), (rat(2, 1), rat(1, 1)));
        let e2 = canonical_integral_unit(&unit(2));
        assert_eq!((e2.x, e2.y), (rat(1, 1), rat(1, 1)));
        let e15 = canonical_integral_unit(&unit(15));
        assert_eq!((e15.x, e15.y), (rat(4, 1), rat(1, 1)));
    }

    #[test]
    fn decomposition_examples() {
        // x=4, y=1, d=15: unhalved, 5*3 split
        let u = unit(15);
        let dec = decompose_norm_one(&u).unwrap();
        assert_eq!(
            dec,
            UnitDecomposition { d1: bi(5), y1: bi(1), d2: bi(3), y2: bi(1), halved: false }
        );
        // x=11, y=2, d=30: halved, 6*5 split
        let u30 = unit(30);
        assert_eq!((u30.x.clone(), u30.y.clone()), (rat(11, 1), rat(2, 1)));
        let dec30 = decompose_norm_one(&u30).unwrap();
        assert_eq!(
            dec30,
            UnitDecomposition { d1: bi(6), y1: bi(1), d2: bi(5), y2: bi(1), halved: true }
        );
        // norm -1 rejected
        assert!(decompose_norm_one(&unit(2)).is_err());
    }

    #[test]
    fn decomposition_recombines() {
        for d in [15i64, 30, 35, 70, 110, 210, 221, 330, 645] {
            let u = canonical_integral_unit(&unit(d));
            if u.norm != 1 {
                continue;
            }
            let dec = decompose_norm_one(&u).unwrap();
            let (x, y) = u.integer_coords();
            let c = if dec.halved { bi(2) } else { bi(1) };
            assert_eq!(&c * &dec.d1 * &dec.y1 * &dec.y1, &x + 1u8);
            assert_eq!(&c * &dec.d2 * &dec.y2 * &dec.y2, &x - 1u8);
            assert_eq!(&dec.d1 * &dec.d2, bi(d));
            let yfac = if dec.halved { bi(2) } else { bi(1) };
            assert_eq!(yfac * &dec.y1 * &dec.y2, y);
        }
    }

    #[test]
    fn sqrt_product_fixtures() {
        // D = 9645 = 5*3*643: r + 1 branch carries p, membership holds
        assert!(sqrt_product_in_k1_test(&bi(9645), &bi(5)).unwrap());
        // D = 645 = 5*3*43: frozen pre-computed value
        assert!(!sqrt_product_in_k1_test(&bi(645), &bi(5)).unwrap());
        // D = 2445 = 5*3*163
        assert!(sqrt_product_in_k1_test(&bi(2445), &bi(5)).unwrap());
        // precondition violations
        assert!(sqrt_product_in_k1_test(&bi(45), &bi(5)).is_err());
        assert!(sqrt_product_in_k1_test(&bi(645), &bi(7)).is_err());
    }

    #[test]
    fn big_unit_exactness() {
        // the 2D = 19290 unit is large; identity must hold exactly
        let u = unit(19290);
        assert_eq!(u.x, rat(312499, 1));
        assert_eq!(u.y, rat(2250, 1));
        assert_eq!(u.norm, 1);
    }
}
