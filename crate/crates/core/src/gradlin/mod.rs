//! Graded linear algebra: explicit matrices of maps between graded pieces
//! of `S = ℚ[x, y, z, t]`, ranks and kernels over prime fields, and the
//! certificates built on top of them.

mod certify;
pub mod echelon;
pub mod rational;

use std::fmt::Write as _;

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

pub use crate::certificate::{soundness, Certificate, Verdict};
use crate::exactring::{mul_mod, reduce_int, reduce_mod, ArithError};
use crate::poly::{dim_s, dim_s3, mono_basis, mono_basis3, Monomial, Polynomial};

pub use certify::{
    full_rank_certificate, kernel_trivial_certificate, koszul_excess, lift_relation,
    min_syzygy_scan, regular_sequence_certificate, slice_mod, slice_polynomial, SyzygyScan,
    EXACT_FALLBACK_LIMIT,
};

/// Number of variables of a graded piece: the full ring or the
/// three-variable ring left after slicing away `t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Vars {
    Four,
    Three,
}

impl Vars {
    pub fn dim(self, d: i64) -> usize {
        match self {
            Vars::Four => dim_s(d),
            Vars::Three => dim_s3(d),
        }
    }

    #[inline]
    pub fn rank(self, m: Monomial) -> usize {
        match self {
            Vars::Four => m.rank(),
            Vars::Three => m.rank3(),
        }
    }

    pub fn basis(self, d: i64) -> Vec<Monomial> {
        if d < 0 {
            return Vec::new();
        }
        match self {
            Vars::Four => mono_basis(d as u32),
            Vars::Three => mono_basis3(d as u32),
        }
    }
}

/// Polynomial with residue coefficients modulo a fixed prime.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModPoly {
    modulus: u64,
    terms: Vec<(Monomial, u64)>,
}

impl ModPoly {
    pub fn zero(modulus: u64) -> Self {
        Self {
            modulus,
            terms: Vec::new(),
        }
    }

    pub fn reduce(p: &Polynomial, modulus: u64) -> Result<Self, ArithError> {
        let mut terms = Vec::with_capacity(p.len());
        for (m, c) in p.terms() {
            let r = if p.is_integral() {
                reduce_int(c.numer(), modulus)
            } else {
                reduce_mod(c, modulus)?.residue()
            };
            if r != 0 {
                terms.push((*m, r));
            }
        }
        Ok(Self { modulus, terms })
    }

    /// From terms sorted in descending monomial order with residues in `[1, p)`.
    pub fn from_sorted_terms(modulus: u64, terms: Vec<(Monomial, u64)>) -> Self {
        debug_assert!(terms.windows(2).all(|w| w[0].0 > w[1].0));
        Self { modulus, terms }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn terms(&self) -> &[(Monomial, u64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn mul_monomial(&self, m: Monomial) -> Self {
        Self {
            modulus: self.modulus,
            terms: self.terms.iter().map(|(tm, c)| (tm.mul(m), *c)).collect(),
        }
    }

    pub fn scale(&self, c: u64) -> Self {
        let c = c % self.modulus;
        if c == 0 {
            return Self::zero(self.modulus);
        }
        Self {
            modulus: self.modulus,
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (*m, mul_mod(*v, c, self.modulus)))
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(self.modulus - 1)
    }

    pub fn diff(&self, var: usize) -> Self {
        let v = Monomial::var(var);
        let p = self.modulus;
        Self {
            modulus: p,
            terms: self
                .terms
                .iter()
                .filter_map(|(m, c)| {
                    let e = m.exp(var) as u64 % p;
                    (e != 0).then(|| (m.div(v).unwrap(), mul_mod(*c, e, p)))
                })
                .collect(),
        }
    }

    fn merge(&self, o: &ModPoly, negate: bool) -> ModPoly {
        let p = self.modulus;
        let sgn = |c: u64| if negate && c != 0 { p - c } else { c };
        let mut out = Vec::with_capacity(self.terms.len() + o.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < o.terms.len() {
            let (a, b) = (self.terms[i], o.terms[j]);
            match a.0.cmp(&b.0) {
                std::cmp::Ordering::Greater => {
                    out.push(a);
                    i += 1;
                }
                std::cmp::Ordering::Less => {
                    out.push((b.0, sgn(b.1)));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let s = (a.1 + sgn(b.1)) % p;
                    if s != 0 {
                        out.push((a.0, s));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.terms[i..]);
        out.extend(o.terms[j..].iter().map(|&(m, c)| (m, sgn(c))));
        ModPoly {
            modulus: p,
            terms: out,
        }
    }

    pub fn add(&self, o: &ModPoly) -> ModPoly {
        self.merge(o, false)
    }

    pub fn sub(&self, o: &ModPoly) -> ModPoly {
        self.merge(o, true)
    }

    pub fn mul(&self, o: &ModPoly) -> ModPoly {
        let p = self.modulus;
        let mut acc: std::collections::HashMap<Monomial, u64> = std::collections::HashMap::new();
        for (a, ca) in &self.terms {
            for (b, cb) in &o.terms {
                let e = acc.entry(a.mul(*b)).or_insert(0);
                *e = (*e + mul_mod(*ca, *cb, p)) % p;
            }
        }
        let mut terms: Vec<(Monomial, u64)> = acc.into_iter().filter(|e| e.1 != 0).collect();
        terms.sort_by(|a, b| b.0.cmp(&a.0));
        ModPoly { modulus: p, terms }
    }

    /// Appends the coefficient vector of `μ · self` at row `offset`.
    pub fn push_shifted(&self, mu: Monomial, offset: usize, vars: Vars, out: &mut Vec<(u32, u64)>) {
        out.extend(
            self.terms
                .iter()
                .map(|(m, c)| ((offset + vars.rank(m.mul(mu))) as u32, *c)),
        );
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DomainBlock {
    pub generator: String,
    /// Degree of the coefficient polynomial; negative blocks are empty.
    pub degree: i64,
    pub dim: usize,
    pub vars: Vars,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CodomainBlock {
    pub name: String,
    pub degree: i64,
    pub dim: usize,
    pub vars: Vars,
}

/// Sparse column-major matrix of a map between direct sums of graded
/// pieces. Rows and columns follow the graded-lex monomial bases of the
/// blocks, block after block.
#[derive(Clone, Debug)]
pub struct GradedMap<T> {
    pub domain: Vec<DomainBlock>,
    pub codomain: Vec<CodomainBlock>,
    pub columns: Vec<Vec<(u32, T)>>,
    /// `0` for exact rational entries.
    pub modulus: u64,
    pub provenance: String,
}

pub type RationalMap = GradedMap<BigRational>;
pub type ModMap = GradedMap<u64>;

impl<T> GradedMap<T> {
    pub fn nrows(&self) -> usize {
        self.codomain.iter().map(|b| b.dim).sum()
    }

    pub fn ncols(&self) -> usize {
        self.columns.len()
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(|c| c.len()).sum()
    }

    /// Maps a column index to `(block, monomial of the coefficient)`.
    pub fn domain_monomials(&self) -> Vec<(usize, Monomial)> {
        self.domain
            .iter()
            .enumerate()
            .flat_map(|(b, blk)| blk.vars.basis(blk.degree).into_iter().map(move |m| (b, m)))
            .collect()
    }
}

impl<T: std::fmt::Display> GradedMap<T> {
    /// Coordinate dump: header `GMAP v1 rows=<r> cols=<c> modulus=<p|0>`
    /// then one `i j value` line per stored entry (0-based, column-major).
    pub fn to_gmap(&self) -> String {
        let mut s = format!(
            "GMAP v1 rows={} cols={} modulus={}\n",
            self.nrows(),
            self.ncols(),
            self.modulus
        );
        for (j, col) in self.columns.iter().enumerate() {
            for (i, v) in col {
                let _ = writeln!(s, "{i} {j} {v}");
            }
        }
        s
    }
}

impl ModMap {
    pub fn rank(&self) -> usize {
        echelon::rank_of_columns(self.modulus, self.nrows(), &self.columns)
    }

    pub fn kernel(&self) -> Vec<Vec<(u32, u64)>> {
        echelon::kernel_of_columns(self.modulus, self.nrows(), &self.columns)
    }

    pub fn kernel_dim(&self) -> usize {
        self.ncols() - self.rank()
    }
}

impl RationalMap {
    /// Plain matrix given by its columns, without a graded structure: the
    /// domain and codomain are single coordinate blocks.
    pub fn from_dense_columns(nrows: usize, columns: &[Vec<BigRational>]) -> Self {
        let columns = columns
            .iter()
            .map(|col| {
                assert_eq!(col.len(), nrows, "column length");
                col.iter()
                    .enumerate()
                    .filter(|(_, v)| !v.is_zero())
                    .map(|(i, v)| (i as u32, v.clone()))
                    .collect()
            })
            .collect::<Vec<_>>();
        GradedMap {
            domain: vec![DomainBlock {
                generator: "coordinates".into(),
                degree: 0,
                dim: columns.len(),
                vars: Vars::Four,
            }],
            codomain: vec![CodomainBlock {
                name: "coordinates".into(),
                degree: 0,
                dim: nrows,
                vars: Vars::Four,
            }],
            columns,
            modulus: 0,
            provenance: format!("dense matrix with {nrows} rows"),
        }
    }

    pub fn reduce_mod(&self, p: u64) -> Result<ModMap, ArithError> {
        let mut columns = Vec::with_capacity(self.columns.len());
        for col in &self.columns {
            let mut c = Vec::with_capacity(col.len());
            for (i, v) in col {
                let r = reduce_mod(v, p)?.residue();
                if r != 0 {
                    c.push((*i, r));
                }
            }
            columns.push(c);
        }
        Ok(GradedMap {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            columns,
            modulus: p,
            provenance: format!("{} (mod {p})", self.provenance),
        })
    }

    fn dense_columns(&self) -> Vec<Vec<BigRational>> {
        let n = self.nrows();
        self.columns
            .iter()
            .map(|col| {
                let mut d = vec![BigRational::zero(); n];
                for (i, v) in col {
                    d[*i as usize] = v.clone();
                }
                d
            })
            .collect()
    }

    pub fn rank_exact(&self) -> usize {
        rational::rational_echelon(self.nrows(), &self.dense_columns()).rank
    }

    pub fn kernel_exact(&self) -> Vec<Vec<BigRational>> {
        rational::rational_echelon(self.nrows(), &self.dense_columns()).kernel
    }
}

/// Exact rank modulo `p` of a rational map.
pub fn rank_mod_p(m: &RationalMap, p: u64) -> Result<usize, ArithError> {
    Ok(m.reduce_mod(p)?.rank())
}

/// Kernel basis modulo `p` of a rational map.
pub fn kernel_mod_p(m: &RationalMap, p: u64) -> Result<Vec<Vec<(u32, u64)>>, ArithError> {
    Ok(m.reduce_mod(p)?.kernel())
}

fn gen_blocks(gens: &[Polynomial], d: u32, vars: Vars) -> Vec<DomainBlock> {
    let degs: Vec<u32> = gens
        .iter()
        .map(|g| {
            assert!(g.is_homogeneous(), "generators must be homogeneous");
            g.degree().unwrap_or(0)
        })
        .collect();
    blocks_of_degrees(&degs, d, vars)
}

fn blocks_of_degrees(degs: &[u32], d: u32, vars: Vars) -> Vec<DomainBlock> {
    degs.iter()
        .enumerate()
        .map(|(i, &gd)| {
            let deg = d as i64 - gd as i64;
            DomainBlock {
                generator: format!("g{}", i + 1),
                degree: deg,
                dim: vars.dim(deg),
                vars,
            }
        })
        .collect()
}

fn target_block(d: u32, vars: Vars) -> Vec<CodomainBlock> {
    vec![CodomainBlock {
        name: "S".into(),
        degree: d as i64,
        dim: vars.dim(d as i64),
        vars,
    }]
}

/// `⊕ S_{D - deg g_i} → S_D`, `(r_i) ↦ Σ r_i g_i`, with exact entries.
pub fn mult_map(gens: &[Polynomial], d: u32) -> RationalMap {
    mult_map_vars(gens, d, Vars::Four)
}

pub fn mult_map_vars(gens: &[Polynomial], d: u32, vars: Vars) -> RationalMap {
    let domain = gen_blocks(gens, d, vars);
    let mut columns = Vec::new();
    for (g, blk) in gens.iter().zip(&domain) {
        for mu in vars.basis(blk.degree) {
            columns.push(
                g.terms()
                    .iter()
                    .map(|(m, c)| (vars.rank(m.mul(mu)) as u32, c.clone()))
                    .collect(),
            );
        }
    }
    GradedMap {
        domain,
        codomain: target_block(d, vars),
        columns,
        modulus: 0,
        provenance: format!("mult_map of {} generators into degree {d}", gens.len()),
    }
}

/// Same map built directly over F_p from reduced generators.
pub fn mult_map_mod(gens: &[Polynomial], d: u32, p: u64) -> Result<ModMap, ArithError> {
    mult_map_mod_vars(gens, d, p, Vars::Four)
}

pub fn mult_map_mod_vars(gens: &[Polynomial], d: u32, p: u64, vars: Vars) -> Result<ModMap, ArithError> {
    let reduced: Vec<ModPoly> = gens
        .iter()
        .map(|g| ModPoly::reduce(g, p))
        .collect::<Result<_, _>>()?;
    let degs: Vec<u32> = gens.iter().map(|g| g.degree().unwrap_or(0)).collect();
    Ok(mult_map_modpoly(&reduced, &degs, d, vars))
}

/// Multiplication map over F_p from generators already reduced; `degs` gives
/// their degrees (a generator may vanish mod p).
pub fn mult_map_modpoly(gens: &[ModPoly], degs: &[u32], d: u32, vars: Vars) -> ModMap {
    let p = gens.first().map(|g| g.modulus()).unwrap_or(0);
    let domain = blocks_of_degrees(degs, d, vars);
    let mut columns = Vec::new();
    for (g, blk) in gens.iter().zip(&domain) {
        for mu in vars.basis(blk.degree) {
            let mut col = Vec::with_capacity(g.len());
            g.push_shifted(mu, 0, vars, &mut col);
            columns.push(col);
        }
    }
    GradedMap {
        domain,
        codomain: target_block(d, vars),
        columns,
        modulus: p,
        provenance: format!("mult_map of {} generators into degree {d} mod {p}", gens.len()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactring::int;

    #[test]
    fn two_coordinates_have_no_linear_syzygy() {
        let m = mult_map(&[Polynomial::x(), Polynomial::y()], 1);
        assert_eq!(m.ncols(), 2);
        assert_eq!(m.nrows(), 4);
        assert_eq!(rank_mod_p(&m, 101).unwrap(), 2);
        // in degree 2 the Koszul relation (y, -x) appears
        let m2 = mult_map(&[Polynomial::x(), Polynomial::y()], 2);
        assert_eq!(m2.ncols() - rank_mod_p(&m2, 101).unwrap(), 1);
    }

    #[test]
    fn column_counts_of_blocks() {
        let g = |d: u32| Polynomial::x().pow(d);
        let m = mult_map_mod(&[g(28), g(12), g(16)], 48, 1_000_000_007).unwrap();
        assert_eq!(m.ncols(), 1771 + 9139 + 6545);
    }

    #[test]
    fn modpoly_matches_rational_arithmetic() {
        let p = 1_000_000_007;
        let a = &Polynomial::x().pow(3) - &Polynomial::y().scale(&crate::exactring::rat(2, 3)).mul_monomial(Monomial::var(2).mul(Monomial::var(3)));
        let b = &Polynomial::z() + &Polynomial::t().scale(&int(5));
        let ra = ModPoly::reduce(&a, p).unwrap();
        let rb = ModPoly::reduce(&b, p).unwrap();
        assert_eq!(ra.mul(&rb), ModPoly::reduce(&(&a * &b), p).unwrap());
        assert_eq!(ra.sub(&rb), ModPoly::reduce(&(&a - &b), p).unwrap());
        assert_eq!(ra.diff(0), ModPoly::reduce(&a.diff(0), p).unwrap());
    }

    #[test]
    fn gmap_dump_header() {
        let m = mult_map(&[Polynomial::x()], 1);
        let s = m.to_gmap();
        assert!(s.starts_with("GMAP v1 rows=4 cols=1 modulus=0\n"));
        assert!(s.contains("0 0 1"));
    }
}
