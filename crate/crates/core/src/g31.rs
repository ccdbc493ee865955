//! The G31 arrangement: defining polynomial, basic invariants, the free
//! basis of Jacobian syzygies and the primed column data.

use std::time::Instant;

use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::exactring::{int, rat};
use crate::poly::{dot, hessian, jacobian, PolyError, PolyMatrix, Polynomial, NVARS};

/// Degree of the defining polynomial (number of hyperplanes).
pub const ARRANGEMENT_DEGREE: u32 = 60;
/// Normalizing constant for the degree-24 invariant.
pub const HESSIAN_NORMALIZER: i64 = 265_531_392;
/// `det E = SAITO_CONSTANT · f`.
pub const SAITO_CONSTANT: i64 = -486;
/// Degrees of the columns of `E`; the first is the Euler derivation.
pub const BASIS_DEGREES: [u32; 4] = [1, 29, 13, 17];
/// Degrees of the primed polynomials `(m'_1, m'_2, m'_3)` (same for n', p', q').
pub const PRIMED_DEGREES: [u32; 3] = [28, 12, 16];

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("exact division failed at step `{step}`: {source}")]
    NotDivisible {
        step: String,
        #[source]
        source: PolyError,
    },
    #[error("identity check failed: {0}")]
    IdentityFailed(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

fn div_step(p: &Polynomial, q: &Polynomial, step: &str) -> Result<Polynomial, BuildError> {
    p.exact_div(q).map_err(|source| BuildError::NotDivisible {
        step: step.to_string(),
        source,
    })
}

fn ensure(cond: bool, what: &str) -> Result<(), BuildError> {
    if cond {
        Ok(())
    } else {
        Err(BuildError::IdentityFailed(what.to_string()))
    }
}

fn v(i: usize) -> Polynomial {
    Polynomial::var(i)
}

fn lin(coeffs: [i64; NVARS]) -> Polynomial {
    let mut p = Polynomial::zero();
    for (i, &c) in coeffs.iter().enumerate() {
        if c != 0 {
            p = &p + &v(i).scale(&int(c));
        }
    }
    p
}

/// The rational factors of f: the four coordinates, the six binomials
/// `x_i^4 - x_j^4` and sixteen quadrics, each quadric being a product of two
/// (real or complex-conjugate) linear forms.
pub fn arrangement_factors() -> Vec<Polynomial> {
    let mut factors: Vec<Polynomial> = (0..NVARS).map(v).collect();
    for i in 0..NVARS {
        for j in i + 1..NVARS {
            factors.push(&v(i).pow(4) - &v(j).pow(4));
        }
    }
    let pairings = [(0, 1, 2, 3), (0, 2, 1, 3), (0, 3, 1, 2)];
    for (k, &(i, j, a, b)) in pairings.iter().enumerate() {
        for s1 in [-1, 1] {
            for s2 in [1, -1] {
                let mut u = [0; NVARS];
                u[i] = 1;
                u[j] = s1;
                let mut w = [0; NVARS];
                w[a] = 1;
                w[b] = s2;
                let (u2, w2) = (lin(u).pow(2), lin(w).pow(2));
                if k == 0 {
                    factors.push(&u2 - &w2);
                }
                factors.push(&u2 + &w2);
            }
        }
    }
    factors
}

/// Expanded defining polynomial of the 60 reflecting hyperplanes.
pub fn build_f() -> Polynomial {
    arrangement_factors()
        .iter()
        .fold(Polynomial::one(), |acc, p| &acc * p)
}

#[derive(Clone, Debug)]
pub struct InvariantSet {
    pub a: Polynomial,
    pub b: Polynomial,
    pub c: Polynomial,
    pub d: Polynomial,
    pub e: Polynomial,
    /// `A_1 .. A_6`.
    pub quartics: [Polynomial; 6],
    /// Elementary symmetric functions `s_0 .. s_6` of the quartics.
    pub s: [Polynomial; 7],
    pub f8: Polynomial,
    pub f12: Polynomial,
    pub f20: Polynomial,
    pub f1: Polynomial,
    pub f2: Polynomial,
    pub f3: Polynomial,
    pub f4: Polynomial,
}

impl InvariantSet {
    pub fn basic(&self) -> [&Polynomial; 4] {
        [&self.f1, &self.f2, &self.f3, &self.f4]
    }
}

pub fn build_invariants() -> Result<InvariantSet, BuildError> {
    let (x, y, z, t) = (v(0), v(1), v(2), v(3));
    let sq = |p: &Polynomial| p.pow(2);
    let a = &(&(&x.pow(4) + &y.pow(4)) + &z.pow(4)) + &t.pow(4);
    let b = &(&sq(&x) * &sq(&y)) + &(&sq(&z) * &sq(&t));
    let c = &(&sq(&x) * &sq(&z)) + &(&sq(&y) * &sq(&t));
    let d = &(&sq(&x) * &sq(&t)) + &(&sq(&y) * &sq(&z));
    let e = &(&(&x * &y) * &z) * &t;

    let six = |p: &Polynomial| p.scale(&int(6));
    let signed = |sb: i64, sc: i64, sd: i64| {
        &a + &six(&(&(&b.scale(&int(sb)) + &c.scale(&int(sc))) + &d.scale(&int(sd))))
    };
    let two_a = a.scale(&int(-2));
    let e24 = e.scale(&int(24));
    let quartics = [
        signed(-1, -1, -1),
        signed(-1, 1, 1),
        signed(1, -1, 1),
        signed(1, 1, -1),
        &two_a - &e24,
        &two_a + &e24,
    ];

    // prod (u + A_i) = sum s_j u^(6-j)
    let mut s: Vec<Polynomial> = vec![Polynomial::one()];
    for q in &quartics {
        let mut next = s.clone();
        next.push(Polynomial::zero());
        for j in 1..next.len() {
            next[j] = &next[j] + &(&s[j - 1] * q);
        }
        s = next;
    }
    let s: [Polynomial; 7] = s.try_into().expect("seven symmetric functions");

    let f8 = s[2].scale(&rat(-1, 6));
    let f12 = s[3].scale(&rat(-1, 4));
    let f20 = s[5].scale(&rat(1, 12));
    ensure(
        s[4] == f8.pow(2).scale(&int(9)),
        "s_4 = 9 F_8^2",
    )?;

    let f1 = f8.clone();
    let f2 = f12.clone();
    let f3 = f20.clone();
    let hess = hessian(&f1).det()?;
    let f4 = hess.scale(&rat(1, HESSIAN_NORMALIZER));
    for (p, deg, name) in [(&f1, 8, "f1"), (&f2, 12, "f2"), (&f3, 20, "f3"), (&f4, 24, "f4")] {
        ensure(
            !p.is_zero() && p.is_homogeneous_of_degree(deg),
            &format!("{name} homogeneous of degree {deg}"),
        )?;
    }
    Ok(InvariantSet {
        a,
        b,
        c,
        d,
        e,
        quartics,
        s,
        f8,
        f12,
        f20,
        f1,
        f2,
        f3,
        f4,
    })
}

/// The free basis `E` of derivations; `E[1]` is the Euler derivation and
/// `E[2..4]` generate the Jacobian syzygies of f.
#[derive(Clone, Debug)]
pub struct SyzygyBasis {
    pub e: PolyMatrix,
    /// `g_2, g_3, g_4` with `D[j] f = g_j f`.
    pub g: [Polynomial; 3],
    pub column_degrees: [u32; 4],
}

impl SyzygyBasis {
    /// Column `j` (0-based; column 0 is Euler).
    pub fn column(&self, j: usize) -> Vec<Polynomial> {
        self.e.column(j)
    }
}

/// Named timings of the construction steps, in milliseconds.
pub type StepTimings = Vec<(String, u128)>;

pub(crate) fn column_degree(col: &[Polynomial]) -> Option<u32> {
    let mut deg = None;
    for p in col.iter().filter(|p| !p.is_zero()) {
        if !p.is_homogeneous() || (deg.is_some() && deg != p.degree()) {
            return None;
        }
        deg = p.degree();
    }
    deg
}

pub fn build_syzygy_basis(
    inv: &InvariantSet,
    f: &Polynomial,
) -> Result<(SyzygyBasis, StepTimings), BuildError> {
    let mut timings = StepTimings::new();
    let mut clock = Instant::now();
    let mut lap = |name: &str, timings: &mut StepTimings| {
        timings.push((name.to_string(), clock.elapsed().as_millis()));
        clock = Instant::now();
    };

    let h = hessian(&inv.f1);
    let adj = h.adjugate()?;
    lap("adjugate", &mut timings);

    let jac = jacobian(&[inv.f1.clone(), inv.f2.clone(), inv.f3.clone(), inv.f4.clone()]);
    let mut cmat = PolyMatrix::identity(4);
    cmat.set(1, 1, inv.f4.clone());
    cmat.set(1, 2, inv.f1.scale(&rat(-1, 5)));
    cmat.set(1, 3, inv.f2.scale(&rat(-1, 1620)));
    let b = adj.mul(&jac.mul(&cmat)?)?;
    lap("B = A(f1) J C", &mut timings);

    let g = div_step(b.get(0, 0), &v(0), "g = b11 / x")?;
    let mut dmat = PolyMatrix::zeros(4, 4);
    for i in 0..4 {
        for j in 0..4 {
            dmat.set(i, j, div_step(b.get(i, j), &g, &format!("D[{}][{}] = B / g", i + 1, j + 1))?);
        }
    }
    lap("D = B / g", &mut timings);

    let euler: Vec<Polynomial> = (0..NVARS).map(v).collect();
    ensure(dmat.column(0) == euler, "D[1] = (x, y, z, t)")?;
    let grad = f.gradient();
    ensure(
        dot(&euler, &grad) == f.scale(&int(ARRANGEMENT_DEGREE as i64)),
        "D[1] f = 60 f",
    )?;

    let mut gj = Vec::with_capacity(3);
    let mut emat = PolyMatrix::zeros(4, 4);
    for i in 0..4 {
        emat.set(i, 0, euler[i].clone());
    }
    for j in 1..4 {
        let col = dmat.column(j);
        let gjf = dot(&col, &grad);
        let g_j = div_step(&gjf, f, &format!("g_{} = D[{}] f / f", j + 1, j + 1))?;
        let coef = g_j.scale(&rat(1, ARRANGEMENT_DEGREE as i64));
        for i in 0..4 {
            emat.set(i, j, &col[i] - &(&coef * &euler[i]));
        }
        gj.push(g_j);
    }
    lap("g_j and E", &mut timings);

    for j in 1..4 {
        ensure(
            dot(&emat.column(j), &grad).is_zero(),
            &format!("E[{}] annihilates grad f", j + 1),
        )?;
    }
    lap("syzygy check", &mut timings);

    let mut column_degrees = [0u32; 4];
    for j in 0..4 {
        column_degrees[j] = column_degree(&emat.column(j))
            .ok_or_else(|| BuildError::IdentityFailed(format!("column {} not homogeneous", j + 1)))?;
    }
    ensure(column_degrees == BASIS_DEGREES, "column degrees (1, 29, 13, 17)")?;

    let det = emat.det()?;
    ensure(det == f.scale(&int(SAITO_CONSTANT)), "det E = -486 f")?;
    lap("det E", &mut timings);

    Ok((
        SyzygyBasis {
            e: emat,
            g: gj.try_into().expect("three g_j"),
            column_degrees,
        },
        timings,
    ))
}

/// `m'_i = E_{1,i+1} / x`, `n'_i = E_{2,i+1} / y`, `p'_i = E_{3,i+1} / z`,
/// `q'_i = E_{4,i+1} / t`.
#[derive(Clone, Debug, PartialEq)]
pub struct PrimedColumns {
    pub m: [Polynomial; 3],
    pub n: [Polynomial; 3],
    pub p: [Polynomial; 3],
    pub q: [Polynomial; 3],
}

/// The four letters of the primed rows, in coordinate order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    M,
    N,
    P,
    Q,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::M, Letter::N, Letter::P, Letter::Q];

    pub fn coordinate(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        ["m", "n", "p", "q"][self as usize]
    }
}

impl PrimedColumns {
    pub fn letter(&self, l: Letter) -> &[Polynomial; 3] {
        match l {
            Letter::M => &self.m,
            Letter::N => &self.n,
            Letter::P => &self.p,
            Letter::Q => &self.q,
        }
    }

    pub fn all(&self) -> impl Iterator<Item = (Letter, usize, &Polynomial)> {
        Letter::ALL
            .into_iter()
            .flat_map(move |l| self.letter(l).iter().enumerate().map(move |(i, p)| (l, i, p)))
    }
}

pub fn primed_columns(basis: &SyzygyBasis) -> Result<PrimedColumns, BuildError> {
    let mut rows: Vec<[Polynomial; 3]> = Vec::with_capacity(4);
    for r in 0..NVARS {
        let mut row: [Polynomial; 3] = Default::default();
        for i in 0..3 {
            let q = div_step(
                basis.e.get(r, i + 1),
                &v(r),
                &format!("E[{}][{}] / {}", r + 1, i + 2, crate::poly::VAR_NAMES[r]),
            )?;
            ensure(
                q.is_homogeneous_of_degree(PRIMED_DEGREES[i]),
                &format!("{}'_{} has degree {}", Letter::ALL[r].name(), i + 1, PRIMED_DEGREES[i]),
            )?;
            row[i] = q;
        }
        rows.push(row);
    }
    let mut it = rows.into_iter();
    Ok(PrimedColumns {
        m: it.next().unwrap(),
        n: it.next().unwrap(),
        p: it.next().unwrap(),
        q: it.next().unwrap(),
    })
}

/// Everything downstream verification needs.
#[derive(Clone, Debug)]
pub struct ArrangementData {
    pub f: Polynomial,
    pub invariants: InvariantSet,
    pub basis: SyzygyBasis,
    pub primed: PrimedColumns,
}

impl ArrangementData {
    pub fn build() -> Result<(Self, StepTimings), BuildError> {
        let start = Instant::now();
        let f = build_f();
        let invariants = build_invariants()?;
        let mut timings = vec![("f and invariants".to_string(), start.elapsed().as_millis())];
        let (basis, t) = build_syzygy_basis(&invariants, &f)?;
        timings.extend(t);
        let primed = primed_columns(&basis)?;
        Ok((
            Self {
                f,
                invariants,
                basis,
                primed,
            },
            timings,
        ))
    }

    pub fn gradient(&self) -> [Polynomial; NVARS] {
        self.f.gradient()
    }
}

/// `Σ r_i ∂_i f` for a 4-vector `r`.
pub fn apply_to_gradient(r: &[Polynomial], grad: &[Polynomial; NVARS]) -> Polynomial {
    dot(r, grad)
}

/// Exact Saito check: `det E` is a constant multiple of `f`; returns the constant.
pub fn saito_constant(basis: &SyzygyBasis, f: &Polynomial) -> Result<BigRational, BuildError> {
    let det = basis.e.det()?;
    let (lm, lc) = f
        .leading_term()
        .cloned()
        .ok_or_else(|| BuildError::IdentityFailed("f is zero".into()))?;
    let c = det.coeff(lm) / lc;
    if c.is_zero() || det != f.scale(&c) {
        return Err(BuildError::IdentityFailed("det E is not a multiple of f".into()));
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_degrees_sum_to_sixty() {
        let total: u32 = arrangement_factors().iter().map(|p| p.degree().unwrap()).sum();
        assert_eq!(total, 60);
    }

    #[test]
    fn f_vanishes_on_coordinate_axis() {
        let f = build_f();
        assert_eq!(f.degree(), Some(60));
        assert!(f.is_homogeneous() && f.is_integral());
        let pt = [int(1), int(0), int(0), int(0)];
        assert!(f.eval(&pt).is_zero());
    }

    #[test]
    fn invariants_identities() {
        let inv = build_invariants().unwrap();
        assert_eq!(inv.s[0], Polynomial::one());
        assert!((&inv.s[4] - &inv.f8.pow(2).scale(&int(9))).is_zero());
        let degs: Vec<u32> = inv.basic().iter().map(|p| p.degree().unwrap()).collect();
        assert_eq!(degs, vec![8, 12, 20, 24]);
        assert!(inv.f4.is_integral());
    }
}
