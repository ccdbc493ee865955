//! Acceptance suite: one PASS/FAIL/SKIP line per criterion.
//!
//! Run with `cargo test --release -p arrmono-cli --test acceptance`; add
//! `--features heavy-oracles` for criterion 10.

use std::process::ExitCode;
use std::time::Instant;

use arrmono::certificate::{Certificate, Verdict};
use arrmono::exactring::{gen_primes, int};
use arrmono::gradlin::{kernel_trivial_certificate, mult_map, rank_mod_p, RationalMap};
use arrmono::koszul::{d_residuals, exterior_derivative, PROVED_STATEMENT};
use arrmono::pipeline::{OracleStatus, Pipeline, Report, RunConfig};
use arrmono::poly::{mono_basis, Polynomial};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde_json::{json, Value};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn proved<'a>(r: &'a Report, id: &str) -> Result<&'a Certificate, String> {
    let c = r.certificate(id).ok_or_else(|| format!("{id} missing"))?;
    ensure(c.verdict == Verdict::Proved, || format!("{id} is {}", c.verdict))?;
    Ok(c)
}

fn value(c: &Certificate, key: &str, want: Value) -> Result<(), String> {
    let got = c.values.get(key).cloned().unwrap_or(Value::Null);
    ensure(got == want, || format!("{}: {key} = {got}, expected {want}", c.id))
}

fn c1(p: &Pipeline, r: &Report) -> Check {
    for id in [
        "construction.f",
        "construction.s4",
        "construction.euler",
        "construction.syzygies",
        "construction.saito",
        "construction.exponents",
    ] {
        proved(r, id)?;
    }
    value(proved(r, "construction.saito")?, "constant", json!("-486"))?;
    value(proved(r, "construction.exponents")?, "column_degrees", json!([1, 29, 13, 17]))?;

    // recomputed here from the data, not read off the certificates
    let d = &p.data;
    let inv = &d.invariants;
    ensure(inv.s[4] == &inv.f8.pow(2) * &Polynomial::constant(int(9)), || "s4 != 9 F8^2".into())?;
    let grad = d.gradient();
    let euler: Vec<Polynomial> = (0..4).map(Polynomial::var).collect();
    ensure(d.basis.e.column(0) == euler, || "first column is not Euler".into())?;
    let ef = (0..4).fold(Polynomial::zero(), |acc, i| &acc + &(&euler[i] * &grad[i]));
    ensure(ef == d.f.scale(&int(60)), || "Euler(f) != 60 f".into())?;
    for j in 1..4 {
        let col = d.basis.e.column(j);
        let s = (0..4).fold(Polynomial::zero(), |acc, i| &acc + &(&col[i] * &grad[i]));
        ensure(s.is_zero(), || format!("column {} does not annihilate grad f", j + 1))?;
    }
    let det = d.basis.e.det().map_err(|e| e.to_string())?;
    ensure(det == d.f.scale(&int(-486)), || "det E != -486 f".into())?;
    Ok("s4 = 9 F8^2, Euler, 3 syzygies, det E = -486 f, exponents (1,29,13,17)".into())
}

fn c2(p: &Pipeline, r: &Report) -> Check {
    let c = proved(r, "primed.m_shape")?;
    value(c, "degrees", json!([28, 12, 16]))?;
    value(c, "terms", json!([136, 24, 45]))?;
    proved(r, "primed.division")?;
    let m = &p.data.primed.m;
    let degs: Vec<_> = m.iter().map(|q| q.degree()).collect();
    let terms: Vec<_> = m.iter().map(|q| q.len()).collect();
    ensure(degs == [Some(28), Some(12), Some(16)], || format!("degrees {degs:?}"))?;
    ensure(terms == [136, 24, 45], || format!("terms {terms:?}"))?;
    for (i, q) in m.iter().enumerate() {
        ensure(&Polynomial::x() * q == *p.data.basis.e.get(0, i + 1), || {
            format!("x m'_{} != E[1][{}]", i + 1, i + 2)
        })?;
    }
    Ok("m' degrees (28,12,16), terms (136,24,45)".into())
}

fn c3(r: &Report) -> Check {
    for l in ["m", "n", "p", "q"] {
        let c = proved(r, &format!("regseq.{l}"))?;
        value(c, "target_degree", json!(54))?;
        value(c, "ranks_mod_p", json!([1540, 1540]))?;
    }
    Ok("m', n', p', q' regular; slice rank 1540 at degree 54 mod 2 primes".into())
}

fn c4(p: &Pipeline, r: &Report) -> Check {
    for id in ["divisibility.mn", "divisibility.mp", "divisibility.mq"] {
        proved(r, id)?;
    }
    // direct 2x2 minors of the primed columns
    let primed = &p.data.primed;
    let x4 = Polynomial::x().pow(4);
    for (other, v) in [(&primed.n, 1), (&primed.p, 2), (&primed.q, 3)] {
        let div = &x4 - &Polynomial::var(v).pow(4);
        for (a, b) in [(1, 2), (0, 2), (0, 1)] {
            let minor = &(&primed.m[a] * &other[b]) - &(&primed.m[b] * &other[a]);
            minor.exact_div(&div).map_err(|e| format!("minor ({a},{b}) with letter {v}: {e}"))?;
        }
    }
    Ok("MN, MP, MQ minors divisible by x^4 - y^4, x^4 - z^4, x^4 - t^4".into())
}

fn c5(r: &Report) -> Check {
    for l in ["mn", "mp", "mq"] {
        let below = proved(r, &format!("scan.{l}.no_syzygy_below"))?;
        let dims = below.values["kernel_dims_mod_p"].as_array().ok_or("no kernel dims")?;
        for e in dims {
            let (d, k) = (e[0].as_i64().unwrap_or(-1), e[1].as_i64().unwrap_or(-1));
            ensure((d <= 47 && k == 0) || (d == 48 && k > 0), || format!("{l}: D={d} kernel {k}"))?;
        }
        let first = proved(r, &format!("scan.{l}.syzygy_at_first"))?;
        value(first, "total_degree", json!(48))?;
        value(first, "multidegree", json!([24, 8, 12]))?;
    }
    Ok("MN', MP', MQ': no syzygy for D <= 47, exact witness at D = 48 with (24,8,12)".into())
}

fn c6(r: &Report) -> Check {
    let c = proved(r, "param_rank.k50")?;
    value(c, "cols", json!(1424))?;
    value(c, "ranks_mod_p", json!([1424, 1424]))?;
    let f = proved(r, "param_family.k50")?;
    value(f, "samples", json!(5))?;
    Ok("1424 columns, full rank mod 2 primes; 5 samples with zero wedge residuals".into())
}

fn c7(r: &Report) -> Check {
    let c = proved(r, "closedness.k50.e4")?;
    value(c, "rows", json!(19600))?;
    value(c, "cols", json!(1424))?;
    value(c, "ranks_mod_p", json!([1424, 1424]))?;
    Ok("19600 x 1424, trivial kernel mod 2 primes".into())
}

fn c8(r: &Report) -> Check {
    for k in [10, 20, 30] {
        value(proved(r, &format!("wedge_kernel.k{k}"))?, "kernel_dims_mod_p", json!([0, 0]))?;
    }
    value(proved(r, "ar_dim.d8")?, "kernel_dims_mod_p", json!([0, 0]))?;
    let c = proved(r, "param_rank.k40")?;
    value(c, "param_degrees", json!([8, -8, -4]))?;
    value(proved(r, "closedness.k40.e4")?, "cols", json!(165))?;
    Ok("wedge kernels 0 at k = 10, 20, 30; AR(f)_8 = 0; k = 40 closedness trivial with A'_1 in S_8".into())
}

fn c9(r: &Report) -> Check {
    ensure(r.verdict() == Verdict::Proved, || format!("verdict {}", r.verdict()))?;
    ensure(r.conclusion.statement == PROVED_STATEMENT, || r.conclusion.statement.clone())?;
    ensure(r.exit_code() == 0, || format!("exit {}", r.exit_code()))?;
    let ids: Vec<String> = r.certificates().map(|c| c.id.clone()).collect();
    for id in &ids {
        for (fault, code) in [(Verdict::Refuted, 1), (Verdict::Inconclusive, 2)] {
            let mut broken = r.clone();
            for c in broken.certificates_mut().filter(|c| &c.id == id) {
                c.verdict = fault;
            }
            broken.reevaluate();
            ensure(broken.verdict() != Verdict::Proved && broken.exit_code() == code, || {
                format!("corrupting {id} to {fault} left exit {}", broken.exit_code())
            })?;
        }
    }
    Ok(format!("exit 0; each of {} certificates flips the exit code when corrupted", ids.len()))
}

fn c10(cache: &std::path::Path, r: &Report) -> Option<Check> {
    if !cfg!(feature = "heavy-oracles") {
        return match r.heavy_oracle.status {
            OracleStatus::Skipped => None,
            _ => Some(Err("heavy oracle ran without being requested".into())),
        };
    }
    let config = RunConfig {
        cache_dir: Some(cache.to_path_buf()),
        heavy_oracles: true,
        ..RunConfig::default()
    };
    let run = || -> Check {
        let p = Pipeline::new(config).map_err(|e| e.to_string())?;
        let c = p.heavy_oracle().ok_or("heavy oracle not run")?;
        ensure(c.verdict == Verdict::Proved, || format!("{} is {}", c.id, c.verdict))?;
        value(&c, "dimension", json!(1424))?;
        Ok("dim ker(df^) in degree 50 = 1424".into())
    };
    Some(run())
}

fn random_poly(rng: &mut ChaCha20Rng, d: u32, density: f64) -> Polynomial {
    Polynomial::from_terms(
        mono_basis(d)
            .into_iter()
            .filter(|_| rng.gen_bool(density))
            .collect::<Vec<_>>()
            .into_iter()
            .map(|m| (m, int(rng.gen_range(-3..=3)))),
    )
}

fn c11(r: &Report) -> Check {
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    let big = gen_primes(1, 62, 11).map_err(|e| e.to_string())?[0];
    // soundness direction on small dense matrices; tiny primes make modular
    // rank drops likely
    for n in 0..20 {
        let rows = rng.gen_range(3..8);
        let cols = rng.gen_range(2..7);
        let mut columns: Vec<Vec<_>> = (0..cols)
            .map(|_| (0..rows).map(|_| int(rng.gen_range(-4..=4))).collect())
            .collect();
        if n % 4 == 0 && cols > 2 {
            let combo: Vec<_> = (0..rows).map(|i| &columns[0][i] * int(2) - &columns[1][i]).collect();
            columns[cols - 1] = combo;
        }
        let m = RationalMap::from_dense_columns(rows, &columns);
        let exact = m.rank_exact();
        for p in [5, 7, big] {
            let rp = rank_mod_p(&m, p).map_err(|e| e.to_string())?;
            ensure(rp <= exact, || format!("matrix {n}: rank mod {p} = {rp} > rank {exact}"))?;
        }
        let cert = kernel_trivial_certificate(&m, &[5, 7]);
        let sound = match cert.verdict {
            Verdict::Proved => exact == cols,
            Verdict::Refuted => exact < cols,
            Verdict::Inconclusive => true,
        };
        ensure(sound, || format!("matrix {n}: {} with rank {exact}/{cols}", cert.verdict))?;
    }
    // mult_map against direct multiplication
    for _ in 0..5 {
        let degs: Vec<u32> = (0..3).map(|_| rng.gen_range(1..4)).collect();
        let gens: Vec<Polynomial> = degs.iter().map(|&d| random_poly(&mut rng, d, 0.6)).collect();
        let target = rng.gen_range(3..6);
        let map = mult_map(&gens, target);
        let coeffs: Vec<i64> = (0..map.ncols()).map(|_| rng.gen_range(-2..=2)).collect();
        let mut via_matrix = vec![int(0); map.nrows()];
        for (col, &a) in map.columns.iter().zip(&coeffs) {
            for (i, v) in col {
                via_matrix[*i as usize] += v * int(a);
            }
        }
        let mut direct = Polynomial::zero();
        for ((b, m), &a) in map.domain_monomials().into_iter().zip(&coeffs) {
            let term = Polynomial::monomial(m, int(a));
            direct = &direct + &(&term * &gens[b]);
        }
        let basis = mono_basis(target);
        let got = Polynomial::from_terms(basis.into_iter().zip(via_matrix));
        ensure(got == direct, || "mult_map disagrees with multiplication".into())?;
    }
    // d^2 = 0
    for k in [3, 6] {
        let eta: [Polynomial; 4] = std::array::from_fn(|_| random_poly(&mut rng, k - 1, 0.5));
        let omega = exterior_derivative(&eta, k).map_err(|e| e.to_string())?;
        ensure(d_residuals(&omega).iter().all(Polynomial::is_zero), || "d^2 != 0".into())?;
    }
    // serialization
    for _ in 0..5 {
        let d = rng.gen_range(0..7);
        let q = random_poly(&mut rng, d, 0.4)
            .scale(&arrmono::exactring::rat(rng.gen_range(1..9), rng.gen_range(1..9)));
        let back = Polynomial::from_poly4(&q.to_poly4()).map_err(|e| e.to_string())?;
        ensure(back == q, || "POLY4 round trip".into())?;
    }
    let text = r.to_json();
    let back = Report::from_json(&text).map_err(|e| e.to_string())?;
    ensure(back.to_json() == text, || "report JSON round trip".into())?;
    Ok("20 matrices sound, mult_map = multiplication, d^2 = 0, POLY4 and JSON round trips".into())
}

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let cache = tempfile::tempdir().expect("tempdir");
    let start = Instant::now();
    let config = RunConfig {
        cache_dir: Some(cache.path().to_path_buf()),
        ..RunConfig::default()
    };
    let pipeline = match Pipeline::new(config) {
        Ok(p) => p,
        Err(e) => {
            println!("FAIL  pipeline setup: {e}");
            return ExitCode::FAILURE;
        }
    };
    let report = pipeline.report();
    println!("report computed in {:.1} s", start.elapsed().as_secs_f64());

    let results: Vec<(u32, &str, Option<Check>)> = vec![
        (1, "construction identities", Some(c1(&pipeline, &report))),
        (2, "primed columns", Some(c2(&pipeline, &report))),
        (3, "regular sequences", Some(c3(&report))),
        (4, "divisibility", Some(c4(&pipeline, &report))),
        (5, "minimal-syzygy scans", Some(c5(&report))),
        (6, "parametrization", Some(c6(&report))),
        (7, "closedness", Some(c7(&report))),
        (8, "low-k checks", Some(c8(&report))),
        (9, "final report and fault injection", Some(c9(&report))),
        (10, "heavy oracle", c10(cache.path(), &report)),
        (11, "property suites", Some(c11(&report))),
    ];
    let mut failed = 0;
    for (n, name, res) in results {
        match res {
            Some(Ok(msg)) => println!("criterion {n:>2} PASS  {name}: {msg}"),
            Some(Err(msg)) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {msg}");
            }
            None => println!("criterion {n:>2} SKIP  {name}: enable with --features heavy-oracles"),
        }
    }
    println!("total {:.1} s", start.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
