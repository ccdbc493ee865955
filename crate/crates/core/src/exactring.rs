//! Exact coefficient arithmetic.
//!
//! Rationals are backed by `num-rational`; prime fields use word-sized
//! moduli with a Montgomery kernel for the elimination hot loops.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Constants that appear as denominators or scalars somewhere in the G31
/// construction. A prime dividing any of them is unusable.
pub const PIPELINE_CONSTANTS: [u64; 5] = [486, 265_531_392, 1620, 5, 60];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("denominator {denominator} vanishes modulo {modulus}")]
    BadPrime { denominator: String, modulus: u64 },
    #[error("prime size of {0} bits is outside [31, 62]")]
    BitsOutOfRange(u32),
    #[error("{0} is not an admissible prime")]
    NotAdmissible(u64),
    #[error("cannot parse rational `{0}`")]
    Parse(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RationalOp {
    Add,
    Sub,
    Mul,
    Div,
}

pub fn rational_arith(
    a: &BigRational,
    b: &BigRational,
    op: RationalOp,
) -> Result<BigRational, ArithError> {
    Ok(match op {
        RationalOp::Add => a + b,
        RationalOp::Sub => a - b,
        RationalOp::Mul => a * b,
        RationalOp::Div => {
            if b.is_zero() {
                return Err(ArithError::DivisionByZero);
            }
            a / b
        }
    })
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `num/den` with a positive denominator, always printed even when it is 1.
pub fn format_rational(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

pub fn parse_rational(s: &str) -> Result<BigRational, ArithError> {
    let bad = || ArithError::Parse(s.to_string());
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n = BigInt::from_str(n).map_err(|_| bad())?;
    let d = BigInt::from_str(d).map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

/// Least common multiple of all denominators.
pub fn common_denominator<'a>(it: impl IntoIterator<Item = &'a BigRational>) -> BigInt {
    it.into_iter()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
}

pub fn reduce_int(x: &BigInt, p: u64) -> u64 {
    let r = x.mod_floor(&BigInt::from(p));
    r.to_u64().expect("residue fits in a word")
}

/// Ring-homomorphic image of `x` in F_p.
pub fn reduce_mod(x: &BigRational, p: u64) -> Result<PrimeFieldElement, ArithError> {
    let num = reduce_int(x.numer(), p);
    if x.denom().is_one() {
        return Ok(PrimeFieldElement::new(num, p));
    }
    let den = reduce_int(x.denom(), p);
    if den == 0 {
        return Err(ArithError::BadPrime {
            denominator: x.denom().to_string(),
            modulus: p,
        });
    }
    Ok(PrimeFieldElement::new(num, p) * PrimeFieldElement::new(den, p).inv())
}

#[inline]
pub fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    r
}

/// Inverse of a nonzero residue modulo a prime.
pub fn inv_mod(a: u64, p: u64) -> u64 {
    assert!(!a.is_multiple_of(p), "inverse of zero");
    pow_mod(a, p - 2, p)
}

/// An element of F_p with its modulus attached.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrimeFieldElement {
    residue: u64,
    modulus: u64,
}

impl PrimeFieldElement {
    pub fn new(value: u64, modulus: u64) -> Self {
        Self {
            residue: value % modulus,
            modulus,
        }
    }

    pub fn residue(&self) -> u64 {
        self.residue
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn is_zero(&self) -> bool {
        self.residue == 0
    }

    pub fn inv(&self) -> Self {
        Self::new(inv_mod(self.residue, self.modulus), self.modulus)
    }
}

impl std::ops::Add for PrimeFieldElement {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        debug_assert_eq!(self.modulus, o.modulus);
        let s = self.residue as u128 + o.residue as u128;
        Self::new((s % self.modulus as u128) as u64, self.modulus)
    }
}

impl std::ops::Sub for PrimeFieldElement {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        debug_assert_eq!(self.modulus, o.modulus);
        Self::new(
            (self.residue + (self.modulus - o.residue)) % self.modulus,
            self.modulus,
        )
    }
}

impl std::ops::Mul for PrimeFieldElement {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        debug_assert_eq!(self.modulus, o.modulus);
        Self::new(mul_mod(self.residue, o.residue, self.modulus), self.modulus)
    }
}

impl std::ops::Neg for PrimeFieldElement {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(self.modulus - self.residue, self.modulus)
    }
}

impl fmt::Display for PrimeFieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.residue, self.modulus)
    }
}

/// Montgomery arithmetic modulo an odd prime below 2^62.
///
/// Values handled by [`Modulus::mul`] are in Montgomery form `a·2^64 mod p`.
/// Addition and subtraction are form-agnostic.
#[derive(Clone, Copy, Debug)]
pub struct Modulus {
    p: u64,
    /// -p^{-1} mod 2^64
    neg_inv: u64,
    /// 2^128 mod p
    r2: u64,
}

impl Modulus {
    pub fn new(p: u64) -> Self {
        assert!(p % 2 == 1 && p < (1 << 62), "Montgomery modulus must be odd and < 2^62");
        let mut inv: u64 = 1;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(p.wrapping_mul(inv)));
        }
        let r = ((1u128 << 64) % p as u128) as u64;
        let r2 = mul_mod(r, r, p);
        Self {
            p,
            neg_inv: inv.wrapping_neg(),
            r2,
        }
    }

    #[inline]
    pub fn prime(&self) -> u64 {
        self.p
    }

    #[inline]
    fn redc(&self, t: u128) -> u64 {
        let m = (t as u64).wrapping_mul(self.neg_inv);
        let u = ((t + m as u128 * self.p as u128) >> 64) as u64;
        if u >= self.p {
            u - self.p
        } else {
            u
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        self.redc(a as u128 * b as u128)
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn to_mont(&self, a: u64) -> u64 {
        self.mul(a % self.p, self.r2)
    }

    #[inline]
    pub fn from_mont(&self, a: u64) -> u64 {
        self.redc(a as u128)
    }

    /// Inverse of a Montgomery-form value, returned in Montgomery form.
    pub fn inv(&self, a: u64) -> u64 {
        self.to_mont(inv_mod(self.from_mont(a), self.p))
    }
}

/// Deterministic Miller–Rabin, exact for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// True when `p` is a prime that keeps every pipeline constant invertible
/// and fits the Montgomery kernel.
pub fn is_admissible_prime(p: u64) -> bool {
    p > 2 && p < (1 << 62) && is_prime(p) && PIPELINE_CONSTANTS.iter().all(|c| c % p != 0)
}

/// `count` distinct primes with exactly `bits` bits, drawn from a ChaCha
/// stream seeded by `seed`.
pub fn gen_primes(count: usize, bits: u32, seed: u64) -> Result<Vec<u64>, ArithError> {
    if !(31..=62).contains(&bits) {
        return Err(ArithError::BitsOutOfRange(bits));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ ((bits as u64) << 56));
    let lo = 1u64 << (bits - 1);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let candidate = rng.gen_range(lo..(lo << 1)) | 1;
        if is_admissible_prime(candidate) && !out.contains(&candidate) {
            out.push(candidate);
        }
    }
    Ok(out)
}

/// Chinese remaindering of `(residue, prime)` pairs into a symmetric
/// representative together with the product modulus.
pub fn crt(residues: &[(u64, u64)]) -> (BigInt, BigInt) {
    let mut value = BigInt::zero();
    let mut modulus = BigInt::one();
    for &(r, p) in residues {
        let cur = reduce_int(&value, p);
        let m_mod_p = reduce_int(&modulus, p);
        let delta = mul_mod((r + p - cur) % p, inv_mod(m_mod_p, p), p);
        value += &modulus * BigInt::from(delta);
        modulus *= BigInt::from(p);
    }
    (value, modulus)
}

/// Rational reconstruction: finds `n/d` with |n|, d ≤ sqrt(m/2) and
/// `n ≡ a·d (mod m)`, when it exists.
pub fn rational_reconstruct(a: &BigInt, m: &BigInt) -> Option<BigRational> {
    let bound = (m / BigInt::from(2)).sqrt();
    let (mut r0, mut r1) = (m.clone(), a.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let t2 = &t0 - &q * &t1;
        r0 = std::mem::replace(&mut r1, r2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() || t1.abs() > bound {
        return None;
    }
    let q = BigRational::new(r1, t1.clone());
    if q.denom().gcd(m).is_one() {
        Some(q)
    } else {
        None
    }
}
