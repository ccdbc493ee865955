//! Sparse polynomials in `x, y, z, t` over ℚ and small polynomial matrices.
//!
//! Terms are kept sorted in descending graded-lex order (x > y > z > t).
//! A monomial packs its total degree above the four exponents, so the
//! derived integer order *is* graded-lex and monomial multiplication is a
//! single addition.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::exactring::{common_denominator, format_rational, parse_rational};

pub const NVARS: usize = 4;
pub const VAR_NAMES: [char; NVARS] = ['x', 'y', 'z', 't'];

const EXP_BITS: u32 = 12;
const EXP_MASK: u64 = (1 << EXP_BITS) - 1;
const DEG_SHIFT: u32 = 4 * EXP_BITS;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("not divisible: obstructed at term {term}")]
    NotDivisible { term: String },
    #[error("malformed POLY4 data: {0}")]
    Parse(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
}

/// Exponent vector of a monomial in `x, y, z, t`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(u64);

/// Alias matching the vocabulary used in the CLI and cache docs.
pub type ExponentVector = Monomial;

impl Monomial {
    pub const ONE: Monomial = Monomial(0);

    pub fn new(exps: [u32; NVARS]) -> Self {
        let deg: u32 = exps.iter().sum();
        assert!(exps.iter().all(|&e| (e as u64) <= EXP_MASK), "exponent too large");
        assert!(deg < (1 << 16), "total degree too large");
        let mut packed = (deg as u64) << DEG_SHIFT;
        for (i, &e) in exps.iter().enumerate() {
            packed |= (e as u64) << (EXP_BITS * (3 - i as u32));
        }
        Monomial(packed)
    }

    pub fn var(i: usize) -> Self {
        let mut e = [0; NVARS];
        e[i] = 1;
        Self::new(e)
    }

    #[inline]
    pub fn degree(self) -> u32 {
        (self.0 >> DEG_SHIFT) as u32
    }

    #[inline]
    pub fn exp(self, i: usize) -> u32 {
        ((self.0 >> (EXP_BITS * (3 - i as u32))) & EXP_MASK) as u32
    }

    pub fn exps(self) -> [u32; NVARS] {
        [self.exp(0), self.exp(1), self.exp(2), self.exp(3)]
    }

    #[inline]
    pub fn mul(self, o: Monomial) -> Monomial {
        Monomial(self.0 + o.0)
    }

    pub fn divides(self, o: Monomial) -> bool {
        (0..NVARS).all(|i| self.exp(i) <= o.exp(i))
    }

    pub fn div(self, o: Monomial) -> Option<Monomial> {
        if o.divides(self) {
            Some(Monomial(self.0 - o.0))
        } else {
            None
        }
    }

    /// Position in `mono_basis(self.degree())`.
    #[inline]
    pub fn rank(self) -> usize {
        let d = self.degree() as usize;
        let (a, b, c) = (self.exp(0) as usize, self.exp(1) as usize, self.exp(2) as usize);
        binom3(d - a + 2) + binom2(d - a - b + 1) + (d - a - b - c)
    }

    /// Position in `mono_basis3(self.degree())`; requires no `t`.
    #[inline]
    pub fn rank3(self) -> usize {
        debug_assert_eq!(self.exp(3), 0);
        let d = self.degree() as usize;
        let (a, b) = (self.exp(0) as usize, self.exp(1) as usize);
        binom2(d - a + 1) + (d - a - b)
    }
}

#[inline]
fn binom2(n: usize) -> usize {
    if n < 2 {
        0
    } else {
        n * (n - 1) / 2
    }
}

#[inline]
fn binom3(n: usize) -> usize {
    if n < 3 {
        0
    } else {
        n * (n - 1) * (n - 2) / 6
    }
}

/// dim S_d = C(d+3, 3); zero for negative `d`.
pub fn dim_s(d: i64) -> usize {
    if d < 0 {
        0
    } else {
        binom3(d as usize + 3)
    }
}

/// Dimension of degree-`d` forms in three variables.
pub fn dim_s3(d: i64) -> usize {
    if d < 0 {
        0
    } else {
        binom2(d as usize + 2)
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for i in 0..NVARS {
            let e = self.exp(i);
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "{}", VAR_NAMES[i])?;
            } else {
                write!(f, "{}^{}", VAR_NAMES[i], e)?;
            }
        }
        if first {
            write!(f, "1")?;
        }
        Ok(())
    }
}

/// All monomials of total degree `d`, descending graded-lex.
pub fn mono_basis(d: u32) -> Vec<Monomial> {
    let mut out = Vec::with_capacity(dim_s(d as i64));
    for a in (0..=d).rev() {
        for b in (0..=d - a).rev() {
            for c in (0..=d - a - b).rev() {
                out.push(Monomial::new([a, b, c, d - a - b - c]));
            }
        }
    }
    out
}

/// Degree-`d` monomials in `x, y, z` only (the restricted three-variable mode).
pub fn mono_basis3(d: u32) -> Vec<Monomial> {
    let mut out = Vec::with_capacity(dim_s3(d as i64));
    for a in (0..=d).rev() {
        for b in (0..=d - a).rev() {
            out.push(Monomial::new([a, b, d - a - b, 0]));
        }
    }
    out
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    terms: Vec<(Monomial, BigRational)>,
    degree: Option<u32>,
    homogeneous: bool,
    integral: bool,
}

impl Default for Polynomial {
    fn default() -> Self {
        Self::zero()
    }
}

impl Polynomial {
    pub fn zero() -> Self {
        Self {
            terms: Vec::new(),
            degree: None,
            homogeneous: true,
            integral: true,
        }
    }

    pub fn constant(c: BigRational) -> Self {
        Self::from_terms([(Monomial::ONE, c)])
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn var(i: usize) -> Self {
        Self::from_terms([(Monomial::var(i), BigRational::one())])
    }

    pub fn x() -> Self {
        Self::var(0)
    }
    pub fn y() -> Self {
        Self::var(1)
    }
    pub fn z() -> Self {
        Self::var(2)
    }
    pub fn t() -> Self {
        Self::var(3)
    }

    pub fn monomial(m: Monomial, c: BigRational) -> Self {
        Self::from_terms([(m, c)])
    }

    /// Convenience constructor from integer coefficients.
    pub fn from_int_terms(terms: &[(i64, [u32; NVARS])]) -> Self {
        Self::from_terms(
            terms
                .iter()
                .map(|&(c, e)| (Monomial::new(e), BigRational::from_integer(c.into()))),
        )
    }

    /// Canonicalizes arbitrary terms: sorts, merges duplicates, drops zeros.
    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, BigRational)>) -> Self {
        let mut v: Vec<(Monomial, BigRational)> = terms.into_iter().collect();
        v.sort_by(|a, b| b.0.cmp(&a.0));
        let mut merged: Vec<(Monomial, BigRational)> = Vec::with_capacity(v.len());
        for (m, c) in v {
            match merged.last_mut() {
                Some((lm, lc)) if *lm == m => *lc += c,
                _ => merged.push((m, c)),
            }
        }
        merged.retain(|(_, c)| !c.is_zero());
        Self::from_sorted(merged)
    }

    /// `terms` must already be strictly descending with nonzero coefficients.
    fn from_sorted(terms: Vec<(Monomial, BigRational)>) -> Self {
        debug_assert!(terms.windows(2).all(|w| w[0].0 > w[1].0));
        debug_assert!(terms.iter().all(|(_, c)| !c.is_zero()));
        let degree = terms.first().map(|(m, _)| m.degree());
        let homogeneous = match (terms.first(), terms.last()) {
            (Some(a), Some(b)) => a.0.degree() == b.0.degree(),
            _ => true,
        };
        let integral = terms.iter().all(|(_, c)| c.is_integer());
        Self {
            terms,
            degree,
            homogeneous,
            integral,
        }
    }

    pub fn terms(&self) -> &[(Monomial, BigRational)] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.degree
    }

    pub fn is_homogeneous(&self) -> bool {
        self.homogeneous
    }

    /// True when every coefficient is an integer.
    pub fn is_integral(&self) -> bool {
        self.integral
    }

    pub fn is_homogeneous_of_degree(&self, d: u32) -> bool {
        self.is_zero() || (self.homogeneous && self.degree == Some(d))
    }

    pub fn leading_term(&self) -> Option<&(Monomial, BigRational)> {
        self.terms.first()
    }

    pub fn coeff(&self, m: Monomial) -> BigRational {
        match self.terms.binary_search_by(|(tm, _)| m.cmp(tm)) {
            Ok(i) => self.terms[i].1.clone(),
            Err(_) => BigRational::zero(),
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self::from_sorted(self.terms.iter().map(|(m, a)| (*m, a * c)).collect())
    }

    pub fn mul_monomial(&self, m: Monomial) -> Self {
        Self::from_sorted(self.terms.iter().map(|(tm, c)| (tm.mul(m), c.clone())).collect())
    }

    /// Formal partial derivative with respect to variable `var` (0-based).
    pub fn diff(&self, var: usize) -> Self {
        let v = Monomial::var(var);
        Self::from_sorted(
            self.terms
                .iter()
                .filter_map(|(m, c)| {
                    let e = m.exp(var);
                    (e > 0).then(|| (m.div(v).unwrap(), c * BigInt::from(e)))
                })
                .collect(),
        )
    }

    pub fn gradient(&self) -> [Polynomial; NVARS] {
        [self.diff(0), self.diff(1), self.diff(2), self.diff(3)]
    }

    /// Splits into `(1/L, L·self)` with `L` the common denominator.
    fn clear_denominators(&self) -> (BigInt, Vec<(Monomial, BigInt)>) {
        if self.integral {
            return (
                BigInt::one(),
                self.terms.iter().map(|(m, c)| (*m, c.numer().clone())).collect(),
            );
        }
        let l = common_denominator(self.terms.iter().map(|(_, c)| c));
        let ints = self
            .terms
            .iter()
            .map(|(m, c)| (*m, c.numer() * (&l / c.denom())))
            .collect();
        (l, ints)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut result = Self::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Returns `r` with `divisor · r = self`, or the first obstructed term.
    pub fn exact_div(&self, divisor: &Polynomial) -> Result<Polynomial, PolyError> {
        let (lm, lc) = divisor
            .leading_term()
            .cloned()
            .ok_or_else(|| PolyError::Shape("division by the zero polynomial".into()))?;
        let mut rem: BTreeMap<std::cmp::Reverse<Monomial>, BigRational> = self
            .terms
            .iter()
            .map(|(m, c)| (std::cmp::Reverse(*m), c.clone()))
            .collect();
        let mut quotient = Vec::new();
        while let Some((std::cmp::Reverse(m), c)) = rem.pop_first() {
            let qm = m.div(lm).ok_or_else(|| PolyError::NotDivisible {
                term: format!("{} {}", format_rational(&c), m),
            })?;
            let qc = &c / &lc;
            for (dm, dc) in &divisor.terms[1..] {
                let key = std::cmp::Reverse(dm.mul(qm));
                let delta = &qc * dc;
                match rem.entry(key) {
                    std::collections::btree_map::Entry::Occupied(mut o) => {
                        *o.get_mut() -= delta;
                        if o.get().is_zero() {
                            o.remove();
                        }
                    }
                    std::collections::btree_map::Entry::Vacant(v) => {
                        v.insert(-delta);
                    }
                }
            }
            quotient.push((qm, qc));
        }
        Ok(Self::from_sorted(quotient))
    }

    pub fn divides(&self, other: &Polynomial) -> bool {
        other.exact_div(self).is_ok()
    }

    pub fn eval(&self, point: &[BigRational; NVARS]) -> BigRational {
        let mut powers: [Vec<BigRational>; NVARS] = Default::default();
        let max_e = |i: usize| self.terms.iter().map(|(m, _)| m.exp(i)).max().unwrap_or(0);
        for (i, pw) in powers.iter_mut().enumerate() {
            pw.push(BigRational::one());
            for k in 1..=max_e(i) as usize {
                let next = &pw[k - 1] * &point[i];
                pw.push(next);
            }
        }
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for (i, pw) in powers.iter().enumerate() {
                v *= &pw[m.exp(i) as usize];
            }
            acc += v;
        }
        acc
    }

    /// Replaces variable `var` by `replacement`.
    pub fn substitute(&self, var: usize, replacement: &Polynomial) -> Polynomial {
        let max_e = self.terms.iter().map(|(m, _)| m.exp(var)).max().unwrap_or(0);
        let mut powers = vec![Polynomial::one()];
        for k in 1..=max_e as usize {
            let next = &powers[k - 1] * replacement;
            powers.push(next);
        }
        let mut groups: BTreeMap<u32, Vec<(Monomial, BigRational)>> = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.exp(var);
            let mut exps = m.exps();
            exps[var] = 0;
            groups.entry(e).or_default().push((Monomial::new(exps), c.clone()));
        }
        let mut acc = Polynomial::zero();
        for (e, ts) in groups {
            let rest = Polynomial::from_terms(ts);
            acc = &acc + &(&rest * &powers[e as usize]);
        }
        acc
    }

    /// Largest coefficient bit length, numerators and denominators alike.
    pub fn max_coeff_bits(&self) -> u64 {
        self.terms
            .iter()
            .map(|(_, c)| c.numer().bits().max(c.denom().bits()))
            .max()
            .unwrap_or(0)
    }

    /// Canonical POLY4 v1 text.
    pub fn to_poly4(&self) -> String {
        let deg = self.degree.map(|d| d as i64).unwrap_or(-1);
        let mut s = format!("POLY4 v1 degree={} terms={}\n", deg, self.terms.len());
        for (m, c) in &self.terms {
            let e = m.exps();
            s.push_str(&format!(
                "{} {} {} {} {}\n",
                format_rational(c),
                e[0],
                e[1],
                e[2],
                e[3]
            ));
        }
        s
    }

    pub fn from_poly4(text: &str) -> Result<Polynomial, PolyError> {
        let bad = |msg: &str| PolyError::Parse(msg.to_string());
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty input"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 || fields[0] != "POLY4" || fields[1] != "v1" {
            return Err(bad("bad header"));
        }
        let degree: i64 = fields[2]
            .strip_prefix("degree=")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad("bad degree field"))?;
        let nterms: usize = fields[3]
            .strip_prefix("terms=")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad("bad terms field"))?;
        let mut terms = Vec::with_capacity(nterms);
        for line in lines {
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 5 {
                return Err(bad(&format!("bad term line `{line}`")));
            }
            let c = parse_rational(parts[0]).map_err(|e| PolyError::Parse(e.to_string()))?;
            let mut e = [0u32; NVARS];
            for i in 0..NVARS {
                e[i] = parts[i + 1]
                    .parse()
                    .map_err(|_| bad(&format!("bad exponent in `{line}`")))?;
                if e[i] as u64 > EXP_MASK {
                    return Err(bad("exponent out of range"));
                }
            }
            terms.push((Monomial::new(e), c));
        }
        if terms.len() != nterms {
            return Err(bad("term count does not match header"));
        }
        let p = Polynomial::from_terms(terms);
        if p.len() != nterms || p.degree.map(|d| d as i64).unwrap_or(-1) != degree {
            return Err(bad("terms not canonical or degree mismatch"));
        }
        Ok(p)
    }
}

/// Product of integer term lists, accumulated in `i128` when the
/// coefficient bound allows it and in `BigInt` otherwise.
fn int_mul(a: &[(Monomial, BigInt)], b: &[(Monomial, BigInt)]) -> Vec<(Monomial, BigInt)> {
    let bits = |v: &[(Monomial, BigInt)]| v.iter().map(|(_, c)| c.bits()).max().unwrap_or(0);
    let len_bits = 64 - (a.len().min(b.len()) as u64).leading_zeros() as u64;
    let fast = bits(a) <= 62 && bits(b) <= 62 && bits(a) + bits(b) + len_bits <= 125;
    let homogeneous = a.first().map(|t| t.0.degree()) == a.last().map(|t| t.0.degree())
        && b.first().map(|t| t.0.degree()) == b.last().map(|t| t.0.degree());
    let degree = a[0].0.degree() + b[0].0.degree();
    let dense_ok = homogeneous && dim_s(degree as i64) <= 8 * a.len() * b.len() + 64;

    if fast {
        let a64: Vec<(Monomial, i128)> = a.iter().map(|(m, c)| (*m, c.to_i128().unwrap())).collect();
        let b64: Vec<(Monomial, i128)> = b.iter().map(|(m, c)| (*m, c.to_i128().unwrap())).collect();
        if dense_ok {
            let mut acc = vec![0i128; dim_s(degree as i64)];
            for (ma, ca) in &a64 {
                for (mb, cb) in &b64 {
                    acc[ma.mul(*mb).rank()] += ca * cb;
                }
            }
            return mono_basis(degree)
                .into_iter()
                .zip(acc)
                .filter(|(_, c)| *c != 0)
                .map(|(m, c)| (m, BigInt::from(c)))
                .collect();
        }
        let mut acc: HashMap<Monomial, i128> = HashMap::with_capacity(a.len() * b.len() / 2 + 1);
        for (ma, ca) in &a64 {
            for (mb, cb) in &b64 {
                *acc.entry(ma.mul(*mb)).or_insert(0) += ca * cb;
            }
        }
        let mut out: Vec<(Monomial, BigInt)> = acc
            .into_iter()
            .filter(|(_, c)| *c != 0)
            .map(|(m, c)| (m, BigInt::from(c)))
            .collect();
        out.sort_by(|x, y| y.0.cmp(&x.0));
        return out;
    }

    if dense_ok {
        let mut acc = vec![BigInt::zero(); dim_s(degree as i64)];
        for (ma, ca) in a {
            for (mb, cb) in b {
                acc[ma.mul(*mb).rank()] += ca * cb;
            }
        }
        return mono_basis(degree)
            .into_iter()
            .zip(acc)
            .filter(|(_, c)| !c.is_zero())
            .collect();
    }
    let mut acc: HashMap<Monomial, BigInt> = HashMap::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            *acc.entry(ma.mul(*mb)).or_insert_with(BigInt::zero) += ca * cb;
        }
    }
    let mut out: Vec<(Monomial, BigInt)> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
    out.sort_by(|x, y| y.0.cmp(&x.0));
    out
}

fn merge(a: &Polynomial, b: &Polynomial, negate_b: bool) -> Polynomial {
    let mut out = Vec::with_capacity(a.terms.len() + b.terms.len());
    let (mut i, mut j) = (0, 0);
    let signed = |c: &BigRational| if negate_b { -c } else { c.clone() };
    while i < a.terms.len() && j < b.terms.len() {
        let (ma, ca) = &a.terms[i];
        let (mb, cb) = &b.terms[j];
        match ma.cmp(mb) {
            std::cmp::Ordering::Greater => {
                out.push((*ma, ca.clone()));
                i += 1;
            }
            std::cmp::Ordering::Less => {
                out.push((*mb, signed(cb)));
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                let s = if negate_b { ca - cb } else { ca + cb };
                if !s.is_zero() {
                    out.push((*ma, s));
                }
                i += 1;
                j += 1;
            }
        }
    }
    out.extend(a.terms[i..].iter().cloned());
    out.extend(b.terms[j..].iter().map(|(m, c)| (*m, signed(c))));
    Polynomial::from_sorted(out)
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, o: &Polynomial) -> Polynomial {
        merge(self, o, false)
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, o: &Polynomial) -> Polynomial {
        merge(self, o, true)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial::from_sorted(self.terms.iter().map(|(m, c)| (*m, -c)).collect())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, o: &Polynomial) -> Polynomial {
        if self.is_zero() || o.is_zero() {
            return Polynomial::zero();
        }
        let (la, ia) = self.clear_denominators();
        let (lb, ib) = o.clear_denominators();
        let prod = int_mul(&ia, &ib);
        let den = la * lb;
        if den.is_one() {
            return Polynomial::from_sorted(
                prod.into_iter().map(|(m, c)| (m, BigRational::from_integer(c))).collect(),
            );
        }
        Polynomial::from_sorted(
            prod.into_iter()
                .map(|(m, c)| (m, BigRational::new(c, den.clone())))
                .collect(),
        )
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $f(self, o: Polynomial) -> Polynomial {
                (&self).$f(&o)
            }
        }
        impl $tr<&Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $f(self, o: &Polynomial) -> Polynomial {
                (&self).$f(o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            if *m == Monomial::ONE {
                write!(f, "{}", a)?;
            } else if a.is_one() {
                write!(f, "{}", m)?;
            } else {
                write!(f, "{}*{}", a, m)?;
            }
        }
        Ok(())
    }
}

/// Dense matrix of polynomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Polynomial>,
}

impl PolyMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![Polynomial::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Polynomial::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Polynomial>>) -> Result<Self, PolyError> {
        let r = rows.len();
        let c = rows.first().map(|row| row.len()).unwrap_or(0);
        if rows.iter().any(|row| row.len() != c) {
            return Err(PolyError::Shape("ragged rows".into()));
        }
        Ok(Self {
            rows: r,
            cols: c,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    /// Builds a matrix whose `j`-th column is `columns[j]`.
    pub fn from_columns(columns: Vec<Vec<Polynomial>>) -> Result<Self, PolyError> {
        let c = columns.len();
        let r = columns.first().map(|col| col.len()).unwrap_or(0);
        if columns.iter().any(|col| col.len() != r) {
            return Err(PolyError::Shape("ragged columns".into()));
        }
        let mut m = Self::zeros(r, c);
        for (j, col) in columns.into_iter().enumerate() {
            for (i, p) in col.into_iter().enumerate() {
                m.set(i, j, p);
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Polynomial {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: Polynomial) {
        self.entries[i * self.cols + j] = p;
    }

    pub fn column(&self, j: usize) -> Vec<Polynomial> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn mul(&self, o: &PolyMatrix) -> Result<PolyMatrix, PolyError> {
        if self.cols != o.rows {
            return Err(PolyError::Shape(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, o.rows, o.cols
            )));
        }
        let mut out = Self::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for j in 0..o.cols {
                let mut acc = Polynomial::zero();
                for k in 0..self.cols {
                    let (a, b) = (self.get(i, k), o.get(k, j));
                    if !a.is_zero() && !b.is_zero() {
                        acc = &acc + &(a * b);
                    }
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Polynomial) -> PolyMatrix {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| e * c).collect(),
        }
    }

    /// Submatrix with row `r` and column `c` deleted.
    pub fn minor(&self, r: usize, c: usize) -> PolyMatrix {
        let mut entries = Vec::with_capacity((self.rows - 1) * (self.cols - 1));
        for i in (0..self.rows).filter(|&i| i != r) {
            for j in (0..self.cols).filter(|&j| j != c) {
                entries.push(self.get(i, j).clone());
            }
        }
        Self {
            rows: self.rows - 1,
            cols: self.cols - 1,
            entries,
        }
    }

    /// Determinant by cofactor expansion along the sparsest column.
    pub fn det(&self) -> Result<Polynomial, PolyError> {
        if !self.is_square() {
            return Err(PolyError::Shape("determinant of a non-square matrix".into()));
        }
        Ok(self.det_unchecked())
    }

    fn det_unchecked(&self) -> Polynomial {
        match self.rows {
            0 => Polynomial::one(),
            1 => self.get(0, 0).clone(),
            2 => &(self.get(0, 0) * self.get(1, 1)) - &(self.get(0, 1) * self.get(1, 0)),
            n => {
                let col = (0..n)
                    .min_by_key(|&j| (0..n).map(|i| self.get(i, j).len()).sum::<usize>())
                    .unwrap();
                let mut acc = Polynomial::zero();
                for i in 0..n {
                    let a = self.get(i, col);
                    if a.is_zero() {
                        continue;
                    }
                    let term = a * &self.minor(i, col).det_unchecked();
                    acc = if (i + col) % 2 == 0 { &acc + &term } else { &acc - &term };
                }
                acc
            }
        }
    }

    /// Classical adjoint: `M · adj(M) = adj(M) · M = det(M) · I`.
    pub fn adjugate(&self) -> Result<PolyMatrix, PolyError> {
        if !self.is_square() {
            return Err(PolyError::Shape("adjugate of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut out = Self::zeros(n, n);
        if n == 1 {
            out.set(0, 0, Polynomial::one());
            return Ok(out);
        }
        for i in 0..n {
            for j in 0..n {
                let c = self.minor(j, i).det_unchecked();
                out.set(i, j, if (i + j) % 2 == 0 { c } else { -c });
            }
        }
        Ok(out)
    }
}

/// Matrix of second partials of `p`.
pub fn hessian(p: &Polynomial) -> PolyMatrix {
    let grad = p.gradient();
    let mut m = PolyMatrix::zeros(NVARS, NVARS);
    for i in 0..NVARS {
        for j in i..NVARS {
            let h = grad[i].diff(j);
            m.set(i, j, h.clone());
            m.set(j, i, h);
        }
    }
    m
}

/// Column `j` holds the gradient of `ps[j]`.
pub fn jacobian(ps: &[Polynomial]) -> PolyMatrix {
    let cols = ps.iter().map(|p| p.gradient().to_vec()).collect();
    PolyMatrix::from_columns(cols).expect("gradients have equal length")
}

/// `Σ v_i w_i`.
pub fn dot(v: &[Polynomial], w: &[Polynomial]) -> Polynomial {
    let pairs: Vec<(&Polynomial, &Polynomial)> = v.iter().zip(w).collect();
    sum_of_products(&pairs)
}

/// `Σ a_i b_i` over a single common denominator. Equal to folding `+` over
/// the products, without normalizing every intermediate coefficient.
pub fn sum_of_products(pairs: &[(&Polynomial, &Polynomial)]) -> Polynomial {
    let mut cleared = Vec::new();
    for (a, b) in pairs.iter().filter(|(a, b)| !a.is_zero() && !b.is_zero()) {
        let (la, ia) = a.clear_denominators();
        let (lb, ib) = b.clear_denominators();
        cleared.push((la * lb, ia, ib));
    }
    if cleared.is_empty() {
        return Polynomial::zero();
    }
    let l = cleared
        .iter()
        .fold(BigInt::one(), |acc, (d, _, _)| acc.lcm(d));
    for (d, ia, _) in cleared.iter_mut() {
        let f = &l / &*d;
        if !f.is_one() {
            for (_, c) in ia.iter_mut() {
                *c *= &f;
            }
        }
    }
    let bits = |v: &[(Monomial, BigInt)]| v.iter().map(|(_, c)| c.bits()).max().unwrap_or(0);
    let degree = cleared[0].1[0].0.degree() + cleared[0].2[0].0.degree();
    let homogeneous = |v: &[(Monomial, BigInt)], d: u32| v.iter().all(|t| t.0.degree() == d);
    let same_degree = cleared.iter().all(|(_, ia, ib)| {
        let (da, db) = (ia[0].0.degree(), ib[0].0.degree());
        da + db == degree && homogeneous(ia, da) && homogeneous(ib, db)
    });
    let count_bits = 64 - (cleared.len() as u64).leading_zeros() as u64;
    let fast = cleared.iter().all(|(_, ia, ib)| {
        let len_bits = 64 - (ia.len().min(ib.len()) as u64).leading_zeros() as u64;
        bits(ia) <= 62 && bits(ib) <= 62 && bits(ia) + bits(ib) + len_bits + count_bits <= 125
    });
    let work: usize = cleared.iter().map(|(_, ia, ib)| ia.len() * ib.len()).sum();
    let ints: Vec<(Monomial, BigInt)> = if fast && same_degree && dim_s(degree as i64) <= 8 * work + 64 {
        let mut acc = vec![0i128; dim_s(degree as i64)];
        for (_, ia, ib) in &cleared {
            let a64: Vec<(usize, i128)> = ia.iter().map(|(m, c)| (m.0 as usize, c.to_i128().unwrap())).collect();
            for (mb, cb) in ib {
                let cb = cb.to_i128().unwrap();
                for &(ma, ca) in &a64 {
                    acc[Monomial(ma as u64).mul(*mb).rank()] += ca * cb;
                }
            }
        }
        mono_basis(degree)
            .into_iter()
            .zip(acc)
            .filter(|(_, c)| *c != 0)
            .map(|(m, c)| (m, BigInt::from(c)))
            .collect()
    } else {
        let mut acc: HashMap<Monomial, BigInt> = HashMap::new();
        for (_, ia, ib) in &cleared {
            for (m, c) in int_mul(ia, ib) {
                *acc.entry(m).or_insert_with(BigInt::zero) += c;
            }
        }
        let mut out: Vec<(Monomial, BigInt)> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        out.sort_by(|x, y| y.0.cmp(&x.0));
        out
    };
    let one = l.is_one();
    Polynomial::from_sorted(
        ints.into_iter()
            .map(|(m, c)| {
                let c = if one {
                    BigRational::from_integer(c)
                } else {
                    BigRational::new(c, l.clone())
                };
                (m, c)
            })
            .collect(),
    )
}
