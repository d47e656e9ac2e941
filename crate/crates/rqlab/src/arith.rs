//! Integer utilities and residue symbols.
//!
//! Primality is deterministic below 2^64 (fixed Miller-Rabin witness set);
//! larger inputs fall back to 40 rounds against a fixed witness schedule, so
//! results are still reproducible run to run. Factorization is plain trial
//! division: every input the scanners produce is built from known primes and
//! stays at desk scale.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{invalid, Error, Result};

/// Jacobi symbol (a/n) for odd positive n.
pub fn jacobi(a: &BigInt, n: &BigInt) -> Result<i8> {
    if !n.is_positive() || n.is_even() {
        return Err(invalid(format!("jacobi: modulus {n} must be odd and positive")));
    }
    let mut a = a.mod_floor(n);
    let mut n = n.clone();
    let mut sign = 1i8;
    while !a.is_zero() {
        while a.is_even() {
            a /= 2;
            let r = n.mod_floor(&BigInt::from(8)).to_u8().unwrap();
            if r == 3 || r == 5 {
                sign = -sign;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a.mod_floor(&BigInt::from(4)).to_u8().unwrap() == 3
            && n.mod_floor(&BigInt::from(4)).to_u8().unwrap() == 3
        {
            sign = -sign;
        }
        a = a.mod_floor(&n);
    }
    if n.is_one() {
        Ok(sign)
    } else {
        Ok(0)
    }
}

/// Rational quartic residue symbol (a/q)_4 for a prime q = 1 mod 4.
///
/// Only defined when a is a quadratic residue mod q; asking for the symbol of
/// a non-residue is an error rather than a convention.
pub fn quartic_symbol(a: &BigInt, q: &BigInt) -> Result<i8> {
    if q.mod_floor(&BigInt::from(4)).to_u8() != Some(1) || !is_prime(q) {
        return Err(Error::UndefinedSymbol(format!(
            "quartic symbol needs a prime q = 1 mod 4, got {q}"
        )));
    }
    if jacobi(a, q)? != 1 {
        return Err(Error::UndefinedSymbol(format!(
            "quartic symbol ({a}/{q})_4 undefined: ({a}/{q}) != 1"
        )));
    }
    let e = (q - 1u8) / 4u8;
    let r = a.mod_floor(q).modpow(&e, q);
    if r.is_one() {
        Ok(1)
    } else if r == q - 1u8 {
        Ok(-1)
    } else {
        Err(Error::UndefinedSymbol(format!(
            "quartic symbol ({a}/{q})_4: modulus not prime"
        )))
    }
}

/// The symbol (m/2)_4 = (-1)^((m-1)/8) for m = 1 mod 8.
pub fn quartic_symbol_mod2(m: &BigInt) -> Result<i8> {
    if m.mod_floor(&BigInt::from(8)).to_u8() != Some(1) {
        return Err(Error::UndefinedSymbol(format!(
            "(m/2)_4 needs m = 1 mod 8, got {m}"
        )));
    }
    let e = (m - 1u8) / 8u8;
    Ok(if e.is_even() { 1 } else { -1 })
}

const SMALL_PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn mr_witness(n: u64, a: u64) -> bool {
    // returns true if n passes the Miller-Rabin round for witness a
    if a % n == 0 {
        return true;
    }
    let d = n - 1;
    let s = d.trailing_zeros();
    let d = d >> s;
    let mut x = pow_mod_u64(a % n, d, n);
    if x == 1 || x == n - 1 {
        return true;
    }
    for _ in 1..s {
        x = mul_mod_u64(x, x, n);
        if x == n - 1 {
            return true;
        }
    }
    false
}

fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod_u64(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod_u64(r, b, m);
        }
        b = mul_mod_u64(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic primality for u64 (the 12-witness Miller-Rabin set is
/// proven exact below 2^64).
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in SMALL_PRIMES {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    SMALL_PRIMES.iter().all(|&a| mr_witness(n, a))
}

/// Primality test: deterministic below 2^64, 40 fixed Miller-Rabin rounds above.
pub fn is_prime(n: &BigInt) -> bool {
    if !n.is_positive() {
        return false;
    }
    if let Some(v) = n.to_u64() {
        return is_prime_u64(v);
    }
    for p in SMALL_PRIMES {
        if (n % p).is_zero() {
            return false;
        }
    }
    let nm1 = n - 1u8;
    let s = nm1.trailing_zeros().unwrap();
    let d = &nm1 >> s;
    // fixed witness schedule: deterministic reruns
    let mut a = BigInt::from(2u8);
    for round in 0..40u64 {
        a = (&a * BigInt::from(6364136223846793005u64) + BigInt::from(round)).mod_floor(&(n - 3u8))
            + 2u8;
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == nm1 {
            continue;
        }
        let mut composite = true;
        for _ in 1..s {
            x = x.modpow(&BigInt::from(2u8), n);
            if x == nm1 {
                composite = false;
                break;
            }
        }
        if composite {
            return false;
        }
    }
    true
}

/// Ascending primes p = residue mod modulus with p <= limit.
pub fn primes_in_class(residue: u64, modulus: u64, limit: u64) -> Vec<u64> {
    let mut out = Vec::new();
    if limit < 2 {
        return out;
    }
    let mut sieve = vec![true; (limit + 1) as usize];
    sieve[0] = false;
    if limit >= 1 {
        sieve[1] = false;
    }
    let mut i = 2u64;
    while i * i <= limit {
        if sieve[i as usize] {
            let mut j = i * i;
            while j <= limit {
                sieve[j as usize] = false;
                j += i;
            }
        }
        i += 1;
    }
    for p in 2..=limit {
        if sieve[p as usize] && p % modulus == residue % modulus {
            out.push(p);
        }
    }
    out
}

/// Trial-division factorization; inputs are desk scale by construction.
pub fn factorize_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_squarefree_u64(n: u64) -> bool {
    factorize_u64(n).iter().all(|&(_, e)| e == 1)
}

pub fn factorize(n: &BigInt) -> Result<Vec<(u64, u32)>> {
    let v = n
        .to_u64()
        .ok_or_else(|| Error::ResourceGuard(format!("factorize: {n} beyond desk scale")))?;
    Ok(factorize_u64(v))
}

pub fn is_squarefree(n: &BigInt) -> Result<bool> {
    Ok(factorize(n)?.iter().all(|&(_, e)| e == 1))
}

/// Floor square root; exactness helper for perfect-square checks.
pub fn is_perfect_square(n: &BigInt) -> bool {
    if n.is_negative() {
        return false;
    }
    let r = n.sqrt();
    &(&r * &r) == n
}
