use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::{mult_map, mult_map_mod, mult_map_modpoly, ModMap, ModPoly, RationalMap, Vars};
use crate::certificate::{soundness, Certificate, Verdict};
use crate::exactring::{int, inv_mod, mul_mod, rational_reconstruct, reduce_int, ArithError};
use crate::poly::{dim_s, Monomial, Polynomial};

/// Largest `rows × cols` for which exact rational elimination is attempted.
pub const EXACT_FALLBACK_LIMIT: usize = 40_000;

/// Full column rank over ℚ, certified modulo the supplied primes; when every
/// prime is deficient and `exact` is available, exact elimination decides.
pub fn full_rank_certificate(
    id: &str,
    claim: &str,
    primes: &[u64],
    build: impl Fn(u64) -> Result<ModMap, ArithError>,
    exact: Option<&dyn Fn() -> RationalMap>,
) -> Certificate {
    let start = Instant::now();
    let mut ranks = Vec::new();
    let mut used = Vec::new();
    let mut shape = (0, 0);
    let mut full = false;
    for &p in primes {
        let Ok(m) = build(p) else { continue };
        shape = (m.nrows(), m.ncols());
        let r = m.rank();
        full |= r == m.ncols();
        ranks.push(r);
        used.push(p);
    }
    let mut cert = Certificate::new(id, claim, Verdict::Inconclusive)
        .with_primes(&used)
        .with_value("rows", shape.0)
        .with_value("cols", shape.1)
        .with_value("ranks_mod_p", &ranks)
        .with_soundness(soundness::FULL_RANK_MOD_P);
    if full {
        cert.verdict = Verdict::Proved;
    } else if let Some(exact) = exact {
        let m = exact();
        let r = m.rank_exact();
        cert = cert
            .with_value("rank_exact", r)
            .with_detail("modular ranks deficient; decided by exact rational elimination");
        cert.verdict = if r == m.ncols() {
            Verdict::Proved
        } else {
            Verdict::Refuted
        };
    }
    cert.timed(start)
}

/// Certifies that an integer (rational) matrix has trivial kernel.
pub fn kernel_trivial_certificate(m: &RationalMap, primes: &[u64]) -> Certificate {
    let small = m.nrows() * m.ncols() <= EXACT_FALLBACK_LIMIT;
    let exact = || m.clone();
    full_rank_certificate(
        "kernel_trivial",
        &format!("kernel of {} is trivial", m.provenance),
        primes,
        |p| m.reduce_mod(p),
        if small { Some(&exact) } else { None },
    )
}

/// Canonical (reduced row echelon) basis of a kernel over F_p, as dense vectors.
fn rref_mod_p(vectors: &[Vec<(u32, u64)>], ncols: usize, p: u64) -> (Vec<Vec<u64>>, Vec<usize>) {
    let mut rows: Vec<Vec<u64>> = vectors
        .iter()
        .map(|v| {
            let mut d = vec![0u64; ncols];
            for &(j, c) in v {
                d[j as usize] = c;
            }
            d
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(pr) = (r..rows.len()).find(|&i| rows[i][col] != 0) else {
            continue;
        };
        rows.swap(r, pr);
        let inv = inv_mod(rows[r][col], p);
        for v in rows[r].iter_mut() {
            *v = mul_mod(*v, inv, p);
        }
        let piv = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && row[col] != 0 {
                let f = row[col];
                for (v, pv) in row.iter_mut().zip(&piv) {
                    if *pv != 0 {
                        *v = (*v + p - mul_mod(f, *pv, p)) % p;
                    }
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    rows.truncate(r);
    (rows, pivots)
}

/// Lifts the first vector of the canonical kernel basis to ℚ by Chinese
/// remaindering and rational reconstruction, accepting it only when
/// `verify` confirms it exactly. Returns the vector and the primes used.
pub fn lift_relation(
    primes: &[u64],
    build: impl Fn(u64) -> Result<ModMap, ArithError>,
    verify: impl Fn(&[BigRational]) -> bool,
) -> Option<(Vec<BigRational>, Vec<u64>)> {
    let mut reference: Option<(usize, Vec<usize>)> = None;
    let mut acc: Vec<(BigInt, BigInt)> = Vec::new();
    let mut used: Vec<u64> = Vec::new();
    for &p in primes {
        let Ok(m) = build(p) else { continue };
        let ker = m.kernel();
        if ker.is_empty() {
            return None;
        }
        let (basis, pivots) = rref_mod_p(&ker, m.ncols(), p);
        let dim = basis.len();
        match &reference {
            Some((d, piv)) if *d == dim && *piv == pivots => {}
            Some((d, _)) if *d < dim => continue,
            _ => {
                reference = Some((dim, pivots.clone()));
                acc = vec![(BigInt::zero(), BigInt::one()); m.ncols()];
                used.clear();
            }
        }
        for (slot, &r) in acc.iter_mut().zip(&basis[0]) {
            let (v, md) = std::mem::take(slot);
            *slot = if md.is_one() {
                (BigInt::from(r), BigInt::from(p))
            } else {
                combine(&v, &md, r, p)
            };
        }
        used.push(p);
        let candidate: Option<Vec<BigRational>> = acc
            .iter()
            .map(|(v, m)| rational_reconstruct(v, m))
            .collect();
        if let Some(c) = candidate {
            if verify(&c) {
                return Some((c, used));
            }
        }
    }
    None
}

/// CRT of `v mod m` with `r mod p`.
fn combine(v: &BigInt, m: &BigInt, r: u64, p: u64) -> (BigInt, BigInt) {
    let cur = reduce_int(v, p);
    let m_mod = reduce_int(m, p);
    let delta = mul_mod((r + p - cur) % p, inv_mod(m_mod, p), p);
    (v + m * BigInt::from(delta), m * BigInt::from(p))
}

#[derive(Clone, Debug)]
pub struct SyzygyScan {
    pub gen_degrees: [u32; 3],
    /// `(total degree D, dim ker mod p)` for every scanned degree.
    pub kernel_dims: Vec<(u32, usize)>,
    pub first_degree: Option<u32>,
    /// Coefficient degrees `(D - deg g_1, D - deg g_2, D - deg g_3)` at the first syzygy.
    pub multidegree: Option<[i64; 3]>,
    pub witness: Option<[Polynomial; 3]>,
    /// No nonzero syzygy below `first_degree` (or up to `D_max`).
    pub below: Certificate,
    /// Existence of a syzygy at `first_degree`, by an exact rational witness.
    pub at_first: Option<Certificate>,
}

/// Smallest total degree `D ≤ d_max` carrying a syzygy
/// `r_1 g_1 + r_2 g_2 + r_3 g_3 = 0`.
pub fn min_syzygy_scan(
    id: &str,
    gens: &[Polynomial; 3],
    d_max: u32,
    primes: &[u64],
    lift_primes: &[u64],
) -> SyzygyScan {
    let start = Instant::now();
    let degs: [u32; 3] = std::array::from_fn(|i| gens[i].degree().expect("nonzero generator"));
    let p0 = primes[0];
    let d_min = *degs.iter().min().unwrap();
    let mut kernel_dims = Vec::new();
    let mut first = None;
    for d in d_min..=d_max {
        let m = mult_map_mod(gens, d, p0).expect("generators reduce mod p");
        let k = m.kernel_dim();
        kernel_dims.push((d, k));
        if k > 0 {
            first = Some(d);
            break;
        }
    }
    let top_zero = first.map(|d| d - 1).unwrap_or(d_max);
    let below_claim = format!(
        "no nonzero syzygy among ({}) in total degree <= {top_zero}",
        gen_names(id)
    );
    let mut below = full_rank_certificate(
        &format!("{id}.no_syzygy_below"),
        &below_claim,
        primes,
        |p| mult_map_mod(gens, top_zero, p),
        None,
    );
    below.detail = Some(
        "multiplication by x embeds degree-D syzygies into degree D+1, so full rank at the top degree covers every lower degree"
            .into(),
    );
    below = below.with_value("kernel_dims_mod_p", &kernel_dims);
    below.wall_ms = start.elapsed().as_millis() as u64;

    let mut scan = SyzygyScan {
        gen_degrees: degs,
        kernel_dims,
        first_degree: first,
        multidegree: None,
        witness: None,
        below,
        at_first: None,
    };
    let Some(d) = first else {
        return scan;
    };
    let start = Instant::now();
    let multideg: [i64; 3] = std::array::from_fn(|i| d as i64 - degs[i] as i64);
    scan.multidegree = Some(multideg);
    let coords = mult_map(gens, d).domain_monomials();
    let to_polys = |v: &[BigRational]| -> [Polynomial; 3] {
        let mut parts: [Vec<(Monomial, BigRational)>; 3] = Default::default();
        for ((b, m), c) in coords.iter().zip(v) {
            if !c.is_zero() {
                parts[*b].push((*m, c.clone()));
            }
        }
        parts.map(Polynomial::from_terms)
    };
    let verify = |v: &[BigRational]| {
        let r = to_polys(v);
        let s = gens
            .iter()
            .zip(&r)
            .fold(Polynomial::zero(), |acc, (g, ri)| &acc + &(g * ri));
        s.is_zero() && r.iter().any(|p| !p.is_zero())
    };
    let lifted = lift_relation(lift_primes, |p| mult_map_mod(gens, d, p), verify);
    let kdim = scan.kernel_dims.last().map(|e| e.1).unwrap_or(0);
    let mut cert = Certificate::new(
        format!("{id}.syzygy_at_first"),
        format!(
            "a nonzero syzygy among ({}) exists in total degree {d}, coefficient degrees {:?}",
            gen_names(id),
            multideg
        ),
        Verdict::Inconclusive,
    )
    .with_value("total_degree", d)
    .with_value("multidegree", multideg)
    .with_value("kernel_dim_mod_p", kdim)
    .with_soundness("exact rational witness verified by polynomial arithmetic over Q");
    if let Some((v, used)) = lifted {
        let w = to_polys(&v);
        let bits = w.iter().map(|p| p.max_coeff_bits()).max().unwrap_or(0);
        cert = cert
            .with_primes(&used)
            .with_value("witness_terms", w.iter().map(|p| p.len()).collect::<Vec<_>>())
            .with_value("witness_coeff_bits", bits);
        cert.verdict = Verdict::Proved;
        scan.witness = Some(w);
    } else {
        cert = cert.with_detail("rational lift of the modular kernel vector failed");
    }
    scan.at_first = Some(cert.timed(start));
    scan
}

fn gen_names(id: &str) -> String {
    format!("{id} generators")
}

/// Replaces `t` by `-(c_1 x + c_2 y + c_3 z) / c_4`, i.e. restricts to the
/// hyperplane `c·(x, y, z, t) = 0`.
pub fn slice_polynomial(p: &Polynomial, c: [i64; 4]) -> Polynomial {
    assert!(c[3] != 0, "slice must involve t");
    let inv = BigRational::new((-1).into(), c[3].into());
    let mut repl = Polynomial::zero();
    for i in 0..3 {
        if c[i] != 0 {
            repl = &repl + &Polynomial::var(i).scale(&(&inv * int(c[i])));
        }
    }
    p.substitute(3, &repl)
}

/// The same restriction over F_p: the result lies in `F_p[x, y, z]`.
pub fn slice_mod(g: &ModPoly, c: [i64; 4]) -> Result<ModPoly, ArithError> {
    let p = g.modulus();
    let red = |v: i64| reduce_int(&BigInt::from(v), p);
    let c4 = red(c[3]);
    if c4 == 0 {
        return Err(ArithError::BadPrime {
            denominator: c[3].to_string(),
            modulus: p,
        });
    }
    let minus_inv = p - inv_mod(c4, p);
    let lin: Vec<(Monomial, u64)> = (0..3)
        .map(|i| (Monomial::var(i), mul_mod(red(c[i]), minus_inv, p)))
        .filter(|e| e.1 != 0)
        .collect();
    let lin = ModPoly::from_sorted_terms(p, lin);
    let Some(d) = g.terms().first().map(|t| t.0.degree()) else {
        return Ok(ModPoly::zero(p));
    };
    let max_t = g.terms().iter().map(|t| t.0.exp(3)).max().unwrap_or(0);
    let mut powers = vec![ModPoly::from_sorted_terms(p, vec![(Monomial::ONE, 1)])];
    for _ in 0..max_t {
        let next = powers.last().unwrap().mul(&lin);
        powers.push(next);
    }
    let mut dense = vec![0u64; Vars::Three.dim(d as i64)];
    for &(m, cm) in g.terms() {
        let [a, b, cz, e] = m.exps();
        let base = Monomial::new([a, b, cz, 0]);
        for &(lm, lc) in powers[e as usize].terms() {
            let slot = &mut dense[base.mul(lm).rank3()];
            *slot = (*slot + mul_mod(cm, lc, p)) % p;
        }
    }
    let basis = Vars::Three.basis(d as i64);
    let terms = basis
        .into_iter()
        .zip(dense)
        .filter(|e| e.1 != 0)
        .collect();
    Ok(ModPoly::from_sorted_terms(p, terms))
}

/// Kernel dimension predicted by exactness of the Koszul complex of a
/// regular sequence of the given degrees.
pub fn koszul_kernel_dim(degs: &[u32; 3], d: u32) -> usize {
    let d = d as i64;
    let s = |k: i64| dim_s(k);
    let (a, b, c) = (degs[0] as i64, degs[1] as i64, degs[2] as i64);
    s(d - a - b) + s(d - a - c) + s(d - b - c) - s(d - a - b - c)
}

/// Searches low degrees for an exact (over ℚ) syzygy count exceeding the
/// Koszul prediction; any excess refutes regularity.
pub fn koszul_excess(gens: &[Polynomial; 3]) -> Option<(u32, usize, usize)> {
    let degs: [u32; 3] = std::array::from_fn(|i| gens[i].degree().unwrap_or(0));
    let lo = *degs.iter().max().unwrap();
    for d in lo..=degs.iter().sum::<u32>() {
        let m = mult_map(gens, d);
        if m.nrows() * m.ncols() > EXACT_FALLBACK_LIMIT {
            break;
        }
        let k = m.ncols() - m.rank_exact();
        let expected = koszul_kernel_dim(&degs, d);
        if k > expected {
            return Some((d, k, expected));
        }
    }
    None
}

/// Certifies that `gens` is a regular sequence (codimension 3) by finding a
/// hyperplane slice on which the three forms generate an Artinian ideal.
pub fn regular_sequence_certificate(
    id: &str,
    gens: &[Polynomial; 3],
    seed: u64,
    primes: &[u64],
    retries: usize,
) -> Certificate {
    let start = Instant::now();
    let degs: [u32; 3] = std::array::from_fn(|i| gens[i].degree().unwrap_or(0));
    let target = degs.iter().map(|d| *d as i64 - 1).sum::<i64>() + 1;
    let target = target.max(0) as u32;
    let claim = format!("({id}) is a regular sequence in S");
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let rows = Vars::Three.dim(target as i64);
    // lowest degree first: its block is the largest and already triangular
    let mut order = [0usize, 1, 2];
    order.sort_by_key(|&i| degs[i]);
    let sorted_degs = order.map(|i| degs[i]);
    let mut attempts = Vec::new();
    for _ in 0..retries.max(1) {
        let c = loop {
            let c: [i64; 4] = std::array::from_fn(|_| rng.gen_range(-9..=9));
            if c[3] != 0 && c.iter().filter(|v| **v != 0).count() >= 2 {
                break c;
            }
        };
        let mut ranks = Vec::new();
        let mut surjective = false;
        for &p in primes {
            let sliced: Result<Vec<ModPoly>, ArithError> = order
                .iter()
                .map(|&i| ModPoly::reduce(&gens[i], p).and_then(|h| slice_mod(&h, c)))
                .collect();
            let Ok(sliced) = sliced else { continue };
            let r = mult_map_modpoly(&sliced, &sorted_degs, target, Vars::Three).rank();
            surjective |= r == rows;
            ranks.push(r);
        }
        attempts.push(serde_json::json!({ "slice": c, "ranks_mod_p": ranks }));
        if surjective {
            return Certificate::new(id, claim, Verdict::Proved)
                .with_primes(primes)
                .with_seed(seed)
                .with_value("slice", c)
                .with_value("target_degree", target)
                .with_value("target_dim", rows)
                .with_value("ranks_mod_p", ranks)
                .with_value("attempts", attempts.len())
                .with_soundness(soundness::ARTINIAN_SLICE)
                .with_detail(format!(
                    "slice ideal contains all of degree {target} (socle degree of a complete intersection of degrees {:?} plus one)",
                    degs
                ))
                .timed(start);
        }
    }
    let mut cert = Certificate::new(id, claim, Verdict::Inconclusive)
        .with_primes(primes)
        .with_seed(seed)
        .with_value("target_degree", target)
        .with_value("target_dim", rows)
        .with_value("attempt_log", &attempts)
        .with_soundness(soundness::ARTINIAN_SLICE);
    if let Some((d, k, expected)) = koszul_excess(gens) {
        cert.verdict = Verdict::Refuted;
        cert = cert
            .with_value("excess_degree", d)
            .with_value("kernel_dim_exact", k)
            .with_value("koszul_kernel_dim", expected)
            .with_soundness(
                "exact syzygy count exceeds the count forced by an exact Koszul complex, so the sequence is not regular",
            );
    }
    cert.timed(start)
}
