//! Graded pieces of the Koszul complex of f: two-forms, the relations
//! imposed by `df ∧ ω = 0` and `dω = 0`, the minor parametrization of the
//! degree-50 (and degree-40) kernels, and the monodromy conclusion drawn
//! from the resulting vanishing statements.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certificate::{soundness, Certificate, Verdict};
use crate::exactring::{int, ArithError};
use crate::g31::{ArrangementData, Letter, PrimedColumns, SyzygyBasis, ARRANGEMENT_DEGREE};
use crate::gradlin::{
    full_rank_certificate, mult_map_mod, CodomainBlock, DomainBlock, GradedMap, ModMap, ModPoly,
    Vars,
};
use crate::poly::{dim_s, mono_basis, sum_of_products, Monomial, Polynomial};

#[derive(Debug, Error)]
pub enum KoszulError {
    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),
    #[error("inconsistent reconstruction of {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// Index pairs `(i, j)`, `i < j`, in the storage order of [`TwoForm`].
pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// `ω = Σ a_ij dx_i ∧ dx_j` with every `a_ij` in `S_{k-2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoForm {
    pub k: u32,
    pub a12: Polynomial,
    pub a13: Polynomial,
    pub a14: Polynomial,
    pub a23: Polynomial,
    pub a24: Polynomial,
    pub a34: Polynomial,
}

impl TwoForm {
    pub fn zero(k: u32) -> Self {
        Self::from_coeffs(k, Default::default()).expect("zero form")
    }

    /// Coefficients in [`PAIRS`] order; each must be zero or of degree `k - 2`.
    pub fn from_coeffs(k: u32, c: [Polynomial; 6]) -> Result<Self, KoszulError> {
        for (p, (i, j)) in c.iter().zip(PAIRS) {
            if !p.is_zero() && (k < 2 || !p.is_homogeneous_of_degree(k - 2)) {
                return Err(KoszulError::DegreeMismatch(format!(
                    "a{}{} is not homogeneous of degree {}",
                    i + 1,
                    j + 1,
                    k as i64 - 2
                )));
            }
        }
        let [a12, a13, a14, a23, a24, a34] = c;
        Ok(Self {
            k,
            a12,
            a13,
            a14,
            a23,
            a24,
            a34,
        })
    }

    pub fn coeffs(&self) -> [&Polynomial; 6] {
        [&self.a12, &self.a13, &self.a14, &self.a23, &self.a24, &self.a34]
    }

    /// `a_ij` for 0-based `i != j`, with `a_ji = -a_ij`.
    pub fn get(&self, i: usize, j: usize) -> Polynomial {
        let (lo, hi, neg) = if i < j { (i, j, false) } else { (j, i, true) };
        let idx = PAIRS.iter().position(|&p| p == (lo, hi)).expect("i != j");
        let a = self.coeffs()[idx].clone();
        if neg {
            -a
        } else {
            a
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs().iter().all(|p| p.is_zero())
    }

    /// The relation vectors `R_1..R_4`: `R_i` has zero `i`-th coordinate and
    /// `df ∧ ω = 0` reads `R_i · ∇f = 0` for every `i`.
    pub fn relations(&self) -> [[Polynomial; 4]; 4] {
        let z = Polynomial::zero;
        [
            [z(), self.a34.clone(), -&self.a24, self.a23.clone()],
            [self.a34.clone(), z(), -&self.a14, self.a13.clone()],
            [self.a24.clone(), -&self.a14, z(), self.a12.clone()],
            [self.a23.clone(), -&self.a13, self.a12.clone(), z()],
        ]
    }
}

fn dot4(r: &[Polynomial; 4], g: &[Polynomial; 4]) -> Polynomial {
    let pairs: Vec<(&Polynomial, &Polynomial)> = r.iter().zip(g).collect();
    sum_of_products(&pairs)
}

/// Coefficients of `df ∧ ω` on `dy dz dt, dx dz dt, dx dy dt, dx dy dz`.
pub fn wedge_residuals(w: &TwoForm, grad: &[Polynomial; 4]) -> [Polynomial; 4] {
    w.relations().map(|r| dot4(&r, grad))
}

/// Coefficients of `dω`, in the same order as [`wedge_residuals`].
pub fn d_residuals(w: &TwoForm) -> [Polynomial; 4] {
    let d = |p: &Polynomial, v: usize| p.diff(v);
    [
        &(&d(&w.a23, 3) - &d(&w.a24, 2)) + &d(&w.a34, 1),
        &(&d(&w.a13, 3) - &d(&w.a14, 2)) + &d(&w.a34, 0),
        &(&d(&w.a12, 3) - &d(&w.a14, 1)) + &d(&w.a24, 0),
        &(&d(&w.a12, 2) - &d(&w.a13, 1)) + &d(&w.a23, 0),
    ]
}

/// `dη` for a one-form `η = Σ η_i dx_i` with coefficients of degree `k - 2`.
pub fn exterior_derivative(eta: &[Polynomial; 4], k: u32) -> Result<TwoForm, KoszulError> {
    let c = PAIRS.map(|(i, j)| &eta[j].diff(i) - &eta[i].diff(j));
    TwoForm::from_coeffs(k, c)
}

/// Minor index `0, 1, 2` ↔ column pair `23, 13, 12` (1-based primed indices).
pub const MINOR_COLUMNS: [(usize, usize); 3] = [(1, 2), (0, 2), (0, 1)];
pub const MINOR_NAMES: [&str; 3] = ["23", "13", "12"];

/// Ordered letter pairs in the order MN, MP, MQ, NP, NQ, PQ.
pub const LETTER_PAIRS: [(Letter, Letter); 6] = [
    (Letter::M, Letter::N),
    (Letter::M, Letter::P),
    (Letter::M, Letter::Q),
    (Letter::N, Letter::P),
    (Letter::N, Letter::Q),
    (Letter::P, Letter::Q),
];

pub fn pair_name(a: Letter, b: Letter) -> String {
    format!("{}{}", a.name(), b.name()).to_uppercase()
}

/// The eighteen 2×2 minors of the primed rows and the quartic-reduced
/// minors of the three pairs containing M.
#[derive(Clone, Debug)]
pub struct MinorTable {
    minors: BTreeMap<(Letter, Letter), [Polynomial; 3]>,
    /// Keyed by the partner of M.
    reduced: BTreeMap<Letter, [Polynomial; 3]>,
}

impl MinorTable {
    /// `L_ij` for the ordered pair; swapping the letters negates.
    pub fn minor(&self, a: Letter, b: Letter, idx: usize) -> Polynomial {
        if a < b {
            self.minors[&(a, b)][idx].clone()
        } else {
            -&self.minors[&(b, a)][idx]
        }
    }

    pub fn minors(&self, a: Letter, b: Letter) -> &[Polynomial; 3] {
        &self.minors[&(a, b)]
    }

    /// `MN'`, `MP'` or `MQ'` (by partner letter).
    pub fn reduced(&self, partner: Letter) -> Option<&[Polynomial; 3]> {
        self.reduced.get(&partner)
    }
}

/// `x^4 - v^4` for the coordinate of `partner`.
pub fn quartic_divisor(partner: Letter) -> Polynomial {
    &Polynomial::x().pow(4) - &Polynomial::var(partner.coordinate()).pow(4)
}

/// Builds every minor and divides the M-families by their quartics; each
/// family yields one certificate.
pub fn build_minor_table(pc: &PrimedColumns) -> (MinorTable, Vec<Certificate>) {
    let mut minors = BTreeMap::new();
    for (a, b) in LETTER_PAIRS {
        let (la, lb) = (pc.letter(a), pc.letter(b));
        let m = MINOR_COLUMNS.map(|(i, j)| &(&la[i] * &lb[j]) - &(&la[j] * &lb[i]));
        minors.insert((a, b), m);
    }
    let mut reduced = BTreeMap::new();
    let mut certs = Vec::new();
    for partner in [Letter::N, Letter::P, Letter::Q] {
        let start = Instant::now();
        let name = pair_name(Letter::M, partner);
        let div = quartic_divisor(partner);
        let v = crate::poly::VAR_NAMES[partner.coordinate()];
        let fam: &[Polynomial; 3] = &minors[&(Letter::M, partner)];
        let quotients: Vec<Option<Polynomial>> = fam.iter().map(|m| m.exact_div(&div).ok()).collect();
        let id = format!("divisibility.{}", name.to_lowercase());
        let claim = format!("x^4 - {v}^4 divides {name}_23, {name}_13 and {name}_12");
        let mut cert = Certificate::new(id, claim, Verdict::Refuted)
            .with_soundness(soundness::EXACT)
            .with_value("minor_degrees", fam.iter().map(|m| m.degree()).collect::<Vec<_>>())
            .with_value("minor_terms", fam.iter().map(|m| m.len()).collect::<Vec<_>>());
        if quotients.iter().all(|q| q.is_some()) {
            let q: [Polynomial; 3] = quotients
                .into_iter()
                .map(|q| q.unwrap())
                .collect::<Vec<_>>()
                .try_into()
                .expect("three quotients");
            cert = cert
                .with_value("reduced_degrees", q.iter().map(|m| m.degree()).collect::<Vec<_>>())
                .with_value("reduced_terms", q.iter().map(|m| m.len()).collect::<Vec<_>>());
            cert.verdict = Verdict::Proved;
            reduced.insert(partner, q);
        } else {
            let failing: Vec<&str> = quotients
                .iter()
                .zip(MINOR_NAMES)
                .filter(|(q, _)| q.is_none())
                .map(|(_, n)| n)
                .collect();
            cert = cert.with_value("not_divisible", failing);
        }
        certs.push(cert.timed(start));
    }
    (MinorTable { minors, reduced }, certs)
}

/// The three syzygies `l'_a E[b] - l'_b E[a]` built from one primed letter.
#[derive(Clone, Debug)]
pub struct SyzygyTriple {
    pub letter: Letter,
    pub members: [[Polynomial; 4]; 3],
}

pub const TRIPLE_NAMES: [&str; 4] = ["T", "U", "V", "W"];
pub const TRIPLE_DEGREES: [u32; 3] = [29, 45, 41];

impl SyzygyTriple {
    pub fn build(letter: Letter, pc: &PrimedColumns, basis: &SyzygyBasis) -> Self {
        let l = pc.letter(letter);
        let members = MINOR_COLUMNS.map(|(a, b)| {
            std::array::from_fn(|r| {
                &(&l[a] * basis.e.get(r, b + 1)) - &(&l[b] * basis.e.get(r, a + 1))
            })
        });
        Self { letter, members }
    }

    pub fn name(&self) -> &'static str {
        TRIPLE_NAMES[self.letter.coordinate()]
    }

    pub fn degrees(&self) -> [Option<u32>; 3] {
        self.members.each_ref().map(|v| {
            let mut d = None;
            for p in v.iter().filter(|p| !p.is_zero()) {
                if !p.is_homogeneous() || (d.is_some() && d != p.degree()) {
                    return None;
                }
                d = p.degree();
            }
            d
        })
    }

    /// Checks membership in AR(f), the vanishing coordinate, the degrees and
    /// the minor form `member_i[r] = x_r · (L R)_i`.
    pub fn certify(&self, grad: &[Polynomial; 4], table: &MinorTable) -> Certificate {
        let start = Instant::now();
        let c = self.letter.coordinate();
        let mut failures = Vec::new();
        for (i, v) in self.members.iter().enumerate() {
            let tag = format!("{}{}", self.name(), i + 1);
            if !dot4(v, grad).is_zero() {
                failures.push(format!("{tag} does not annihilate grad f"));
            }
            if !v[c].is_zero() {
                failures.push(format!("{tag} coordinate {} is nonzero", c + 1));
            }
            for (r, other) in Letter::ALL.into_iter().enumerate() {
                if r != c {
                    let want = &Polynomial::var(r) * &table.minor(self.letter, other, i);
                    if v[r] != want {
                        failures.push(format!("{tag} coordinate {} differs from the minor formula", r + 1));
                    }
                }
            }
        }
        let degs = self.degrees();
        if degs != TRIPLE_DEGREES.map(Some) {
            failures.push(format!("degrees {degs:?}"));
        }
        let verdict = if failures.is_empty() {
            Verdict::Proved
        } else {
            Verdict::Refuted
        };
        let mut cert = Certificate::new(
            format!("syzygy_triple.{}", self.name().to_lowercase()),
            format!(
                "{0}1, {0}2, {0}3 lie in AR(f) with vanishing coordinate {1} and degrees (29, 45, 41)",
                self.name(),
                c + 1
            ),
            verdict,
        )
        .with_soundness(soundness::EXACT)
        .with_value("degrees", degs);
        if !failures.is_empty() {
            cert = cert.with_value("failures", failures);
        }
        cert.timed(start)
    }
}

pub fn syzygy_triples(pc: &PrimedColumns, basis: &SyzygyBasis) -> [SyzygyTriple; 4] {
    Letter::ALL.map(|l| SyzygyTriple::build(l, pc, basis))
}

/// Degrees of `A'_1, A'_2, A'_3` for form degree `k`.
pub fn param_degrees(k: u32) -> [i64; 3] {
    let k = k as i64;
    [k - 32, k - 48, k - 44]
}

pub fn param_dim(k: u32) -> usize {
    param_degrees(k).iter().map(|&d| dim_s(d)).sum()
}

/// `A' = (A'_1, A'_2, A'_3)`; a slot of negative degree is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamVector {
    pub k: u32,
    pub a: [Polynomial; 3],
}

impl ParamVector {
    pub fn new(k: u32, a: [Polynomial; 3]) -> Result<Self, KoszulError> {
        for (i, (p, d)) in a.iter().zip(param_degrees(k)).enumerate() {
            if !p.is_zero() && (d < 0 || !p.is_homogeneous_of_degree(d as u32)) {
                return Err(KoszulError::DegreeMismatch(format!(
                    "A'_{} must have degree {d}",
                    i + 1
                )));
            }
        }
        Ok(Self { k, a })
    }

    pub fn zero(k: u32) -> Self {
        Self {
            k,
            a: Default::default(),
        }
    }

    /// Dense random coefficients in `[-bound, bound]`.
    pub fn random(k: u32, rng: &mut impl Rng, bound: i64) -> Self {
        let a = param_degrees(k).map(|d| {
            if d < 0 {
                return Polynomial::zero();
            }
            let terms: Vec<_> = mono_basis(d as u32)
                .into_iter()
                .map(|m| (m, int(rng.gen_range(-bound..=bound))))
                .collect();
            Polynomial::from_terms(terms)
        });
        Self { k, a }
    }
}

/// `R_c = s_c x_c Σ_i A'_i F_{c,i}` with `s = (+, -, +, -)` and `F` the
/// syzygy triple of letter `c`.
pub fn reconstructed_relations(a: &ParamVector, triples: &[SyzygyTriple; 4]) -> [[Polynomial; 4]; 4] {
    std::array::from_fn(|c| {
        let factor = {
            let v = Polynomial::var(c);
            if c % 2 == 1 {
                -v
            } else {
                v
            }
        };
        std::array::from_fn(|r| {
            let scaled: Vec<Polynomial> = a.a.iter().map(|ai| &factor * ai).collect();
            let pairs: Vec<(&Polynomial, &Polynomial)> = scaled
                .iter()
                .zip(&triples[c].members)
                .map(|(ai, m)| (ai, &m[r]))
                .collect();
            sum_of_products(&pairs)
        })
    })
}

/// The two-form attached to `A'`. Each `a_ij` is read from one host
/// relation and compared with its other host; the designated coordinates
/// must vanish.
pub fn param_omega(a: &ParamVector, triples: &[SyzygyTriple; 4]) -> Result<TwoForm, KoszulError> {
    let r = reconstructed_relations(a, triples);
    let omega = TwoForm::from_coeffs(
        a.k,
        [
            r[2][3].clone(),
            r[1][3].clone(),
            -&r[1][2],
            r[0][3].clone(),
            -&r[0][2],
            r[0][1].clone(),
        ],
    )?;
    let expected = omega.relations();
    for c in 0..4 {
        for j in 0..4 {
            if r[c][j] != expected[c][j] {
                let what = if c == j {
                    format!("vanishing coordinate {} of R{}", j + 1, c + 1)
                } else {
                    format!("R{}[{}]", c + 1, j + 1)
                };
                return Err(KoszulError::Inconsistent(what));
            }
        }
    }
    Ok(omega)
}

/// `h_ij = ±x_k x_l · (L_k L_l)` with `{k, l}` complementary to `{i, j}`,
/// for each pair in [`PAIRS`] order: the coefficient of `A'`-slot `idx` in
/// `a_ij`. The signs are those of `a13` and `a24` being negative.
pub fn param_coefficients(table: &MinorTable, idx: usize) -> [Polynomial; 6] {
    PAIRS.map(|(i, j)| {
        let mut rest = (0..4).filter(|&c| c != i && c != j);
        let (k, l) = (rest.next().unwrap(), rest.next().unwrap());
        let minor = table.minor(Letter::ALL[k], Letter::ALL[l], idx);
        let mono = Polynomial::monomial(Monomial::var(k).mul(Monomial::var(l)), int(1));
        let p = &mono * &minor;
        if (i, j) == (0, 2) || (i, j) == (1, 3) {
            -p
        } else {
            p
        }
    })
}

/// The minor formula for `ω` directly: `a_ij = ±x_i x_j Σ A'_l (L_i L_j)_l`.
pub fn param_omega_minors(a: &ParamVector, table: &MinorTable) -> Result<TwoForm, KoszulError> {
    let h: Vec<[Polynomial; 6]> = (0..3).map(|idx| param_coefficients(table, idx)).collect();
    let c = std::array::from_fn(|slot| {
        let pairs: Vec<(&Polynomial, &Polynomial)> = a.a.iter().zip(&h).map(|(ai, hs)| (ai, &hs[slot])).collect();
        sum_of_products(&pairs)
    });
    TwoForm::from_coeffs(a.k, c)
}

fn s_blocks(names: &[&str], degree: i64) -> Vec<CodomainBlock> {
    names
        .iter()
        .map(|n| CodomainBlock {
            name: n.to_string(),
            degree,
            dim: dim_s(degree),
            vars: Vars::Four,
        })
        .collect()
}

fn param_domain(k: u32) -> Vec<DomainBlock> {
    param_degrees(k)
        .iter()
        .enumerate()
        .map(|(i, &d)| DomainBlock {
            generator: format!("A'_{}", i + 1),
            degree: d,
            dim: dim_s(d),
            vars: Vars::Four,
        })
        .collect()
}

fn reduced_param_coefficients(table: &MinorTable, p: u64) -> Result<Vec<[ModPoly; 6]>, ArithError> {
    (0..3)
        .map(|idx| {
            let h = param_coefficients(table, idx);
            let v: Vec<ModPoly> = h.iter().map(|q| ModPoly::reduce(q, p)).collect::<Result<_, _>>()?;
            Ok(v.try_into().expect("six coefficients"))
        })
        .collect()
}

pub const COEFF_NAMES: [&str; 6] = ["a12", "a13", "a14", "a23", "a24", "a34"];

/// `A' ↦ (a_12, ..., a_34)` over F_p, from `⊕ S_{deg A'_i}` into `S_{k-2}^6`.
pub fn param_matrix(k: u32, table: &MinorTable, p: u64) -> Result<ModMap, ArithError> {
    let h = reduced_param_coefficients(table, p)?;
    let d = k as i64 - 2;
    let block = dim_s(d);
    let domain = param_domain(k);
    let mut columns = Vec::with_capacity(param_dim(k));
    for (blk, hs) in domain.iter().zip(&h) {
        for mu in mono_basis_signed(blk.degree) {
            let mut col = Vec::new();
            for (b, hp) in hs.iter().enumerate() {
                hp.push_shifted(mu, b * block, Vars::Four, &mut col);
            }
            columns.push(col);
        }
    }
    Ok(GradedMap {
        domain,
        codomain: s_blocks(&COEFF_NAMES, d),
        columns,
        modulus: p,
        provenance: format!("parametrization A' -> omega in degree {k} mod {p}"),
    })
}

fn mono_basis_signed(d: i64) -> Vec<Monomial> {
    if d < 0 {
        Vec::new()
    } else {
        mono_basis(d as u32)
    }
}

/// The four closedness equations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Closedness {
    E1,
    E2,
    E3,
    E4,
}

impl Closedness {
    pub const ALL: [Closedness; 4] = [Closedness::E1, Closedness::E2, Closedness::E3, Closedness::E4];

    /// `(sign, pair index, variable)` triples summing to the residual.
    fn terms(self) -> [(bool, usize, usize); 3] {
        match self {
            // a23_t - a24_z + a34_y
            Closedness::E1 => [(true, 3, 3), (false, 4, 2), (true, 5, 1)],
            // a13_t - a14_z + a34_x
            Closedness::E2 => [(true, 1, 3), (false, 2, 2), (true, 5, 0)],
            // a12_t - a14_y + a24_x
            Closedness::E3 => [(true, 0, 3), (false, 2, 1), (true, 4, 0)],
            // a12_z - a13_y + a23_x
            Closedness::E4 => [(true, 0, 2), (false, 1, 1), (true, 3, 0)],
        }
    }

    pub fn name(self) -> &'static str {
        ["E1", "E2", "E3", "E4"][self as usize]
    }
}

/// `A' ↦ (selected coefficients of dω)` over F_p; rows are blocks of `S_{k-3}`.
pub fn closedness_system(
    k: u32,
    table: &MinorTable,
    which: &[Closedness],
    p: u64,
) -> Result<ModMap, ArithError> {
    let h = reduced_param_coefficients(table, p)?;
    let d = k as i64 - 3;
    let block = dim_s(d);
    let domain = param_domain(k);
    let mut columns = Vec::with_capacity(param_dim(k));
    for (blk, hs) in domain.iter().zip(&h) {
        for mu in mono_basis_signed(blk.degree) {
            let mut col = Vec::new();
            for (b, e) in which.iter().enumerate() {
                let mut acc = ModPoly::zero(p);
                for (positive, pair, var) in e.terms() {
                    let t = hs[pair].mul_monomial(mu).diff(var);
                    acc = if positive { acc.add(&t) } else { acc.sub(&t) };
                }
                acc.push_shifted(Monomial::ONE, b * block, Vars::Four, &mut col);
            }
            columns.push(col);
        }
    }
    let names: Vec<&str> = which.iter().map(|e| e.name()).collect();
    Ok(GradedMap {
        domain,
        codomain: s_blocks(&names, d),
        columns,
        modulus: p,
        provenance: format!(
            "closedness equations {} on the degree-{k} parametrization mod {p}",
            names.join(",")
        ),
    })
}

/// Row block of coordinate `r` of `R_i`, with the sign it enters with.
/// Blocks 0..4 are the vanishing coordinates, 4..10 identify shared `a_ij`.
const WEDGE_ROWS: [[(usize, bool); 4]; 4] = [
    [(0, true), (4, true), (5, true), (6, true)],
    [(4, false), (1, true), (7, true), (8, true)],
    [(5, true), (7, false), (2, true), (9, true)],
    [(6, false), (8, true), (9, false), (3, true)],
];

const WEDGE_ROW_NAMES: [&str; 10] = [
    "R1[1]",
    "R2[2]",
    "R3[3]",
    "R4[4]",
    "R1[2]-R2[1]",
    "R1[3]+R3[1]",
    "R1[4]-R4[1]",
    "R2[3]-R3[2]",
    "R2[4]+R4[2]",
    "R3[4]-R4[3]",
];

/// Every `R_i` written in the free basis `E[2..4]` of AR(f); rows impose the
/// vanishing coordinates and identify each `a_ij` across its two hosts.
/// Its kernel is `{ω ∈ Ω²_k : df ∧ ω = 0}`.
pub fn general_wedge_system(k: u32, basis: &SyzygyBasis, p: u64) -> Result<ModMap, ArithError> {
    let d = k as i64 - 2;
    let block = dim_s(d);
    let mut entries: Vec<Vec<ModPoly>> = Vec::new();
    for j in 1..4 {
        entries.push(
            (0..4)
                .map(|r| ModPoly::reduce(basis.e.get(r, j), p))
                .collect::<Result<_, _>>()?,
        );
    }
    let mut domain = Vec::new();
    let mut columns = Vec::new();
    for (i, rows) in WEDGE_ROWS.iter().enumerate() {
        for (j, col_entries) in entries.iter().enumerate() {
            let deg = d - basis.column_degrees[j + 1] as i64;
            domain.push(DomainBlock {
                generator: format!("R{} on E[{}]", i + 1, j + 2),
                degree: deg,
                dim: dim_s(deg),
                vars: Vars::Four,
            });
            for mu in mono_basis_signed(deg) {
                let mut col = Vec::new();
                for (r, &(blk, positive)) in rows.iter().enumerate() {
                    let e = &col_entries[r];
                    let e = if positive { e.clone() } else { e.neg() };
                    e.push_shifted(mu, blk * block, Vars::Four, &mut col);
                }
                columns.push(col);
            }
        }
    }
    Ok(GradedMap {
        domain,
        codomain: s_blocks(&WEDGE_ROW_NAMES, d),
        columns,
        modulus: p,
        provenance: format!("relations R1..R4 in the free basis, form degree {k}, mod {p}"),
    })
}

/// Kernel dimension of `df ∧ -` on `Ω²_k` (an upper bound over ℚ), with a
/// certificate of the claim `ker = 0` when the map has full rank.
pub fn general_wedge_kernel(k: u32, basis: &SyzygyBasis, primes: &[u64]) -> (usize, Certificate) {
    let start = Instant::now();
    let mut dims = Vec::new();
    let mut shape = (0, 0);
    for &p in primes {
        if let Ok(m) = general_wedge_system(k, basis, p) {
            shape = (m.nrows(), m.ncols());
            dims.push(m.kernel_dim());
        }
    }
    let dim = dims.iter().copied().min().unwrap_or(usize::MAX);
    let verdict = if dim == 0 {
        Verdict::Proved
    } else {
        Verdict::Inconclusive
    };
    let cert = Certificate::new(
        format!("wedge_kernel.k{k}"),
        format!("df ^ omega = 0 has no nonzero solution omega of degree {k}"),
        verdict,
    )
    .with_primes(primes)
    .with_value("k", k)
    .with_value("rows", shape.0)
    .with_value("cols", shape.1)
    .with_value("kernel_dims_mod_p", &dims)
    .with_soundness(soundness::KERNEL_UPPER_BOUND)
    .with_detail(
        "every relation R_i is written in the free basis E[2], E[3], E[4]; for k < 60 the degree-k part of H^2 of the Koszul complex is the literal kernel of df^",
    )
    .timed(start);
    (dim, cert)
}

/// Same system, for the two-sided dimension claim of the heavy oracle:
/// `lower` comes from an injective family of explicit solutions.
pub fn wedge_dimension_certificate(k: u32, basis: &SyzygyBasis, primes: &[u64], lower: usize) -> Certificate {
    let (dim, base) = general_wedge_kernel(k, basis, primes);
    let verdict = if dim == lower {
        Verdict::Proved
    } else {
        Verdict::Inconclusive
    };
    let mut cert = base
        .with_id(format!("wedge_dimension.k{k}"))
        .with_value("lower_bound", lower)
        .with_value("dimension", dim)
        .with_detail(
            "upper bound: kernel dimension mod p; lower bound: injective parametrization by A'",
        );
    cert.claim = format!("the kernel of df^ on 2-forms of degree {k} has dimension {lower}");
    cert.verdict = verdict;
    cert
}

/// `dim AR(f)_D` predicted by freeness: `Σ_j dim S_{D - e_j}`.
pub fn ar_dim_structural(basis: &SyzygyBasis, d: u32) -> usize {
    basis.column_degrees[1..]
        .iter()
        .map(|&e| dim_s(d as i64 - e as i64))
        .sum()
}

/// `dim AR(f)_D` by a direct kernel of `(r_i) ↦ Σ r_i ∂_i f`, compared with
/// the structural count. The structural syzygies give the lower bound.
pub fn ar_dim_certificate(data: &ArrangementData, d: u32, primes: &[u64]) -> Certificate {
    let start = Instant::now();
    let grad = data.gradient();
    let target = d + ARRANGEMENT_DEGREE - 1;
    let mut dims = Vec::new();
    for &p in primes {
        if let Ok(m) = mult_map_mod(&grad, target, p) {
            dims.push(m.kernel_dim());
        }
    }
    let expected = ar_dim_structural(&data.basis, d);
    let upper = dims.iter().copied().min();
    let verdict = if upper == Some(expected) {
        Verdict::Proved
    } else {
        Verdict::Inconclusive
    };
    Certificate::new(
        format!("ar_dim.d{d}"),
        format!("dim AR(f)_{d} = {expected}"),
        verdict,
    )
    .with_primes(primes)
    .with_value("degree", d)
    .with_value("kernel_dims_mod_p", &dims)
    .with_value("structural", expected)
    .with_soundness(
        "upper bound from the kernel mod p; lower bound from the free basis E[2], E[3], E[4]",
    )
    .timed(start)
}

/// Full column rank of the parametrization (uniqueness of `A'`).
pub fn param_rank_certificate(k: u32, table: &MinorTable, primes: &[u64]) -> Certificate {
    let n = param_dim(k);
    let mut cert = full_rank_certificate(
        &format!("param_rank.k{k}"),
        &format!("A' -> omega is injective in degree {k} ({n} parameters)"),
        primes,
        |p| param_matrix(k, table, p),
        None,
    )
    .with_value("k", k)
    .with_value("param_degrees", param_degrees(k));
    cert.values.insert("param_dim".into(), n.into());
    cert
}

/// Trivial kernel of the closedness equations on the parametrized family.
pub fn closedness_certificate(k: u32, table: &MinorTable, which: &[Closedness], primes: &[u64]) -> Certificate {
    let names: Vec<&str> = which.iter().map(|e| e.name()).collect();
    full_rank_certificate(
        &format!("closedness.k{k}.{}", names.join("").to_lowercase()),
        &format!(
            "no nonzero omega of the degree-{k} family satisfies {}",
            names.join(", ")
        ),
        primes,
        |p| closedness_system(k, table, which, p),
        None,
    )
    .with_value("k", k)
    .with_value("equations", &names)
}

/// Random members of the family: exact wedge residuals, host consistency,
/// and agreement of the syzygy and minor formulas.
pub fn param_family_certificate(
    k: u32,
    triples: &[SyzygyTriple; 4],
    table: &MinorTable,
    grad: &[Polynomial; 4],
    samples: usize,
    rng: &mut impl Rng,
) -> Certificate {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut terms = Vec::new();
    for s in 0..samples {
        let a = ParamVector::random(k, rng, 9);
        match param_omega(&a, triples) {
            Ok(w) => {
                if wedge_residuals(&w, grad).iter().any(|r| !r.is_zero()) {
                    failures.push(format!("sample {s}: df ^ omega != 0"));
                }
                match param_omega_minors(&a, table) {
                    Ok(w2) if w2 == w => {}
                    _ => failures.push(format!("sample {s}: minor formula disagrees")),
                }
                if w.is_zero() {
                    failures.push(format!("sample {s}: omega vanished"));
                }
                terms.push(w.coeffs().map(|c| c.len()));
            }
            Err(e) => failures.push(format!("sample {s}: {e}")),
        }
    }
    let verdict = if failures.is_empty() {
        Verdict::Proved
    } else {
        Verdict::Refuted
    };
    let mut cert = Certificate::new(
        format!("param_family.k{k}"),
        format!("random A' of degree {k} give omega with df ^ omega = 0 and consistent shared coefficients"),
        verdict,
    )
    .with_value("samples", samples)
    .with_value("coefficient_terms", terms)
    .with_soundness(soundness::EXACT);
    if !failures.is_empty() {
        cert = cert.with_value("failures", failures);
    }
    cert.timed(start)
}

/// One eigenvalue `λ = exp(-2πik/60)` and its pairing partner `60 - k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonodromyCase {
    pub d: u32,
    pub k: u32,
    pub kprime: u32,
    /// Order of `λ` as a root of unity.
    pub order: u32,
    /// `dim E_2^{1,0}(f)_k` and `_{k'}` when established.
    pub e2_dims: [Option<usize>; 2],
    pub certificates: Vec<String>,
    pub verdict: Verdict,
}

pub const CASE_PAIRS: [(u32, u32); 3] = [(10, 50), (20, 40), (30, 30)];
/// Orders of eigenvalues that can occur for this arrangement: divisors of
/// the point multiplicities 2, 3 and 6.
pub const EIGENVALUE_ORDER_MENU: [u32; 4] = [1, 2, 3, 6];

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Per `k`: the certified dimension of E2 and the ids/verdicts backing it.
pub type E2Evidence = BTreeMap<u32, (Option<usize>, Vec<(String, Verdict)>)>;

impl MonodromyCase {
    pub fn evaluate(k: u32, e2: &E2Evidence) -> Self {
        let d = ARRANGEMENT_DEGREE;
        let kprime = d - k;
        let mut certificates = Vec::new();
        let mut verdict = Verdict::Proved;
        let mut dims = [None, None];
        for (slot, kk) in [k, kprime].into_iter().enumerate() {
            match e2.get(&kk) {
                Some((dim, certs)) => {
                    dims[slot] = *dim;
                    for (id, v) in certs {
                        if !certificates.contains(id) {
                            certificates.push(id.clone());
                        }
                        verdict = verdict.combine(*v);
                    }
                    if *dim != Some(0) {
                        verdict = verdict.combine(Verdict::Inconclusive);
                    }
                }
                None => verdict = Verdict::Inconclusive,
            }
        }
        Self {
            d,
            k,
            kprime,
            order: d / gcd(k, d),
            e2_dims: dims,
            certificates,
            verdict,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonodromyConclusion {
    pub verdict: Verdict,
    pub statement: String,
    pub eigenvalue_order_menu: Vec<u32>,
    pub excluded_orders: Vec<u32>,
    pub b1: Option<u32>,
    /// First failing prerequisite or case, when not proved.
    pub failing: Vec<String>,
}

pub const B1_MILNOR_FIBER: u32 = 59;

pub const PROVED_STATEMENT: &str = "h¹ = identity on H¹(F), b₁(F) = 59";

/// Combines the pairwise criterion over `(10, 50), (20, 40), (30, 30)` with
/// the prerequisite certificates; anything short of Proved is reported.
pub fn monodromy_report(cases: &[MonodromyCase], prerequisites: &[Certificate]) -> MonodromyConclusion {
    let mut failing: Vec<String> = prerequisites
        .iter()
        .filter(|c| c.verdict != Verdict::Proved)
        .map(|c| format!("{} ({})", c.id, c.verdict))
        .collect();
    let mut excluded = Vec::new();
    for (k, _) in CASE_PAIRS {
        match cases.iter().find(|c| c.k == k) {
            Some(c) if c.verdict == Verdict::Proved => excluded.push(c.order),
            Some(c) => failing.push(format!("case k={} ({})", c.k, c.verdict)),
            None => failing.push(format!("case k={k} missing")),
        }
    }
    let mut verdict = Verdict::all(prerequisites.iter());
    for (k, _) in CASE_PAIRS {
        verdict = verdict.combine(
            cases
                .iter()
                .find(|c| c.k == k)
                .map(|c| c.verdict)
                .unwrap_or(Verdict::Inconclusive),
        );
    }
    excluded.sort_unstable();
    let proved = verdict == Verdict::Proved;
    let statement = if proved {
        PROVED_STATEMENT.to_string()
    } else {
        format!("not established: {}", failing.first().cloned().unwrap_or_default())
    };
    MonodromyConclusion {
        verdict,
        statement,
        eigenvalue_order_menu: EIGENVALUE_ORDER_MENU.to_vec(),
        excluded_orders: excluded,
        b1: proved.then_some(B1_MILNOR_FIBER),
        failing,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: usize) -> Polynomial {
        Polynomial::var(i)
    }

    #[test]
    fn residuals_of_simple_forms() {
        let grad = [v(0).pow(2), v(1).pow(2), v(2).pow(2), v(3).pow(2)];
        let w = TwoForm::zero(3);
        assert!(wedge_residuals(&w, &grad).iter().all(|r| r.is_zero()));
        assert!(d_residuals(&w).iter().all(|r| r.is_zero()));
        let mut c: [Polynomial; 6] = Default::default();
        c[0] = v(2);
        let w = TwoForm::from_coeffs(3, c).unwrap();
        assert_eq!(d_residuals(&w)[3], Polynomial::one());
    }

    #[test]
    fn koszul_antisymmetry() {
        let f = &(&v(0).pow(3) * &v(1)) + &(&v(2).pow(2) * &v(3).pow(2));
        let g = f.gradient();
        let mut c: [Polynomial; 6] = Default::default();
        c[5] = g[2].clone();
        c[4] = g[1].clone();
        let w = TwoForm::from_coeffs(5, c).unwrap();
        assert!(wedge_residuals(&w, &g)[0].is_zero());
    }

    #[test]
    fn d_squared_vanishes() {
        let eta = [
            &v(0) * &v(1).pow(2),
            &v(2).pow(3) - &v(3).pow(3),
            &v(0) * &(&v(1) * &v(3)),
            v(2).pow(3),
        ];
        let w = exterior_derivative(&eta, 4).unwrap();
        assert!(d_residuals(&w).iter().all(|r| r.is_zero()));
    }

    #[test]
    fn degree_checks() {
        let mut c: [Polynomial; 6] = Default::default();
        c[2] = v(0);
        assert!(TwoForm::from_coeffs(4, c).is_err());
        assert_eq!(param_degrees(50), [18, 2, 6]);
        assert_eq!(param_dim(50), 1424);
        assert_eq!(param_dim(40), 165);
        assert!(ParamVector::new(40, [Polynomial::zero(), v(0), Polynomial::zero()]).is_err());
    }

    #[test]
    fn case_orders_and_fail_closed_report() {
        let mut e2 = BTreeMap::new();
        for k in [10, 20, 30, 40, 50] {
            e2.insert(k, (Some(0), vec![(format!("c{k}"), Verdict::Proved)]));
        }
        let cases: Vec<MonodromyCase> = CASE_PAIRS.iter().map(|(k, _)| MonodromyCase::evaluate(*k, &e2)).collect();
        assert_eq!(cases.iter().map(|c| c.order).collect::<Vec<_>>(), vec![6, 3, 2]);
        let r = monodromy_report(&cases, &[]);
        assert_eq!(r.verdict, Verdict::Proved);
        assert_eq!(r.b1, Some(59));
        e2.insert(50, (None, vec![("c50".into(), Verdict::Inconclusive)]));
        let cases: Vec<MonodromyCase> = CASE_PAIRS.iter().map(|(k, _)| MonodromyCase::evaluate(*k, &e2)).collect();
        let r = monodromy_report(&cases, &[]);
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert!(r.failing[0].contains("k=10"));
        assert_eq!(r.b1, None);
    }

    #[test]
    fn every_shared_coefficient_has_two_hosts() {
        let mut seen = [0; 10];
        for row in WEDGE_ROWS {
            for (b, _) in row {
                seen[b] += 1;
            }
        }
        assert_eq!(&seen[..4], &[1, 1, 1, 1]);
        assert!(seen[4..].iter().all(|&c| c == 2));
    }
}
