use std::sync::OnceLock;

use arrmono::certificate::{Certificate, Verdict};
use arrmono::exactring::{gen_primes, int};
use arrmono::g31::{ArrangementData, Letter};
use arrmono::gradlin::min_syzygy_scan;
use arrmono::koszul::{
    build_minor_table, closedness_system, general_wedge_kernel, monodromy_report, param_dim,
    param_matrix, param_omega, param_omega_minors, quartic_divisor, syzygy_triples,
    wedge_residuals, Closedness, MinorTable, MonodromyCase, ParamVector, SyzygyTriple, TwoForm,
    E2Evidence, CASE_PAIRS, EIGENVALUE_ORDER_MENU, PROVED_STATEMENT,
};
use arrmono::poly::Polynomial;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

struct Fixture {
    data: ArrangementData,
    table: MinorTable,
    triples: [SyzygyTriple; 4],
    grad: [Polynomial; 4],
    primes: Vec<u64>,
}

fn fx() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let data = ArrangementData::build().unwrap().0;
        let (table, certs) = build_minor_table(&data.primed);
        assert!(certs.iter().all(Certificate::is_proved));
        let triples = syzygy_triples(&data.primed, &data.basis);
        let grad = data.gradient();
        Fixture {
            data,
            table,
            triples,
            grad,
            primes: gen_primes(2, 62, 0).unwrap(),
        }
    })
}

fn add(a: &TwoForm, b: &TwoForm) -> TwoForm {
    let (ca, cb) = (a.coeffs(), b.coeffs());
    TwoForm::from_coeffs(a.k, std::array::from_fn(|i| ca[i] + cb[i])).unwrap()
}

fn residuals_vanish(w: &TwoForm) -> bool {
    wedge_residuals(w, &fx().grad).iter().all(Polynomial::is_zero)
}

#[test]
fn minors_divisible_by_quartic_binomials() {
    let t = &fx().table;
    for partner in [Letter::N, Letter::P, Letter::Q] {
        let div = quartic_divisor(partner);
        for (idx, m) in t.minors(Letter::M, partner).iter().enumerate() {
            assert!(m.exact_div(&div).is_ok(), "M{} minor {idx}", partner.name());
        }
        let degs: Vec<_> = t.reduced(partner).unwrap().iter().map(|p| p.degree()).collect();
        assert_eq!(degs, [Some(24), Some(40), Some(36)]);
    }
}

#[test]
fn syzygy_triples_annihilate_gradient() {
    let f = fx();
    for t in &f.triples {
        assert_eq!(t.certify(&f.grad, &f.table).verdict, Verdict::Proved, "{}", t.name());
    }
}

#[test]
fn zero_parameters_give_zero_form() {
    let f = fx();
    for k in [40, 50] {
        assert!(param_omega(&ParamVector::zero(k), &f.triples).unwrap().is_zero());
    }
}

#[test]
fn param_omega_is_linear_and_matches_minor_formula() {
    let f = fx();
    let mut rng = ChaCha20Rng::seed_from_u64(40);
    let a = ParamVector::random(40, &mut rng, 5);
    let b = ParamVector::random(40, &mut rng, 5);
    let sum = ParamVector::new(40, std::array::from_fn(|i| &a.a[i] + &b.a[i])).unwrap();
    let (wa, wb) = (param_omega(&a, &f.triples).unwrap(), param_omega(&b, &f.triples).unwrap());
    assert_eq!(param_omega(&sum, &f.triples).unwrap(), add(&wa, &wb));
    let scaled = ParamVector::new(40, a.a.clone().map(|p| p.scale(&int(-3)))).unwrap();
    let ws = param_omega(&scaled, &f.triples).unwrap();
    let want = TwoForm::from_coeffs(40, wa.coeffs().map(|p| p.scale(&int(-3)))).unwrap();
    assert_eq!(ws, want);
    assert_eq!(param_omega_minors(&a, &f.table).unwrap(), wa);
}

#[test]
fn single_parameter_forms_are_wedge_closed() {
    let f = fx();
    // A'_2 lives in S_2 for k = 50
    let x2 = Polynomial::x().pow(2);
    let a = ParamVector::new(50, [Polynomial::zero(), x2, Polynomial::zero()]).unwrap();
    let w = param_omega(&a, &f.triples).unwrap();
    assert!(!w.is_zero());
    assert!(w.coeffs().iter().all(|c| c.is_zero() || c.degree() == Some(48)));
    assert!(residuals_vanish(&w));

    let mut rng = ChaCha20Rng::seed_from_u64(8);
    let r = ParamVector::random(40, &mut rng, 9);
    assert!(r.a[1].is_zero() && r.a[2].is_zero());
    assert!(residuals_vanish(&param_omega(&r, &f.triples).unwrap()));
}

#[test]
fn random_k50_form_is_wedge_closed() {
    let f = fx();
    let mut rng = ChaCha20Rng::seed_from_u64(50);
    let a = ParamVector::random(50, &mut rng, 3);
    let w = param_omega(&a, &f.triples).unwrap();
    assert_eq!(w, param_omega_minors(&a, &f.table).unwrap());
    assert!(residuals_vanish(&w));
}

#[test]
fn parametrization_ranks() {
    let f = fx();
    let p = f.primes[0];
    assert_eq!(param_dim(50), 1330 + 10 + 84);
    assert_eq!(param_dim(40), 165);
    let m50 = param_matrix(50, &f.table, p).unwrap();
    assert_eq!((m50.ncols(), m50.rank()), (1424, 1424));
    let m40 = param_matrix(40, &f.table, p).unwrap();
    assert_eq!((m40.ncols(), m40.rank()), (165, 165));
}

#[test]
fn closedness_systems_have_trivial_kernel() {
    let f = fx();
    let p = f.primes[1];
    let e4 = closedness_system(50, &f.table, &[Closedness::E4], p).unwrap();
    assert_eq!((e4.nrows(), e4.ncols()), (19600, 1424));
    assert_eq!(e4.kernel_dim(), 0);
    let all = closedness_system(50, &f.table, &Closedness::ALL, p).unwrap();
    assert_eq!(all.nrows(), 4 * 19600);
    assert_eq!(all.kernel_dim(), 0);
    assert_eq!(closedness_system(40, &f.table, &[Closedness::E4], p).unwrap().kernel_dim(), 0);
}

#[test]
fn low_degree_wedge_kernels_vanish() {
    let f = fx();
    for k in [10, 20] {
        let (dim, cert) = general_wedge_kernel(k, &f.data.basis, &f.primes);
        assert_eq!(dim, 0);
        assert_eq!(cert.verdict, Verdict::Proved);
    }
}

#[test]
fn scans_are_identical_across_thread_pools() {
    let f = fx();
    let g = f.table.reduced(Letter::N).unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let s = min_syzygy_scan("mn", g, 48, &f.primes, &gen_primes(24, 62, 1).unwrap());
            serde_json::to_string(&(s.below, s.at_first, s.first_degree, s.multidegree)).unwrap()
        })
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert!(one.contains("[24,8,12]"));
}

fn case_inputs(k50: Verdict) -> E2Evidence {
    let mut e2 = E2Evidence::new();
    for k in [10, 20, 30, 40, 50] {
        let v = if k == 50 { k50 } else { Verdict::Proved };
        let dim = (v == Verdict::Proved).then_some(0);
        e2.insert(k, (dim, vec![(format!("check.k{k}"), v)]));
    }
    e2
}

#[test]
fn conclusion_requires_every_case() {
    let cases: Vec<MonodromyCase> = CASE_PAIRS
        .iter()
        .map(|&(k, _)| MonodromyCase::evaluate(k, &case_inputs(Verdict::Proved)))
        .collect();
    let ok = monodromy_report(&cases, &[]);
    assert_eq!(ok.verdict, Verdict::Proved);
    assert_eq!(ok.statement, PROVED_STATEMENT);
    assert_eq!(ok.eigenvalue_order_menu, EIGENVALUE_ORDER_MENU);
    assert_eq!(ok.b1, Some(59));

    let cases: Vec<MonodromyCase> = CASE_PAIRS
        .iter()
        .map(|&(k, _)| MonodromyCase::evaluate(k, &case_inputs(Verdict::Inconclusive)))
        .collect();
    let bad = monodromy_report(&cases, &[]);
    assert_eq!(bad.verdict, Verdict::Inconclusive);
    assert!(bad.failing.iter().any(|s| s.contains("k=10")), "{:?}", bad.failing);
    assert!(bad.statement.contains("not established"));
    assert_eq!(bad.b1, None);
}
