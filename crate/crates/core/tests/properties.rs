use arrmono::certificate::{Certificate, Verdict};
use arrmono::exactring::{crt, int, rat, rational_reconstruct, reduce_mod};
use arrmono::gradlin::{
    kernel_mod_p, kernel_trivial_certificate, mult_map, rank_mod_p, ModPoly, RationalMap,
};
use arrmono::koszul::{d_residuals, exterior_derivative, wedge_residuals, TwoForm};
use arrmono::poly::{mono_basis, sum_of_products, Monomial, Polynomial};
use num_rational::BigRational;
use proptest::prelude::*;

const P: u64 = 1_000_000_007;

fn rational() -> impl Strategy<Value = BigRational> {
    (-50i64..50, 1i64..30).prop_map(|(n, d)| rat(n, d))
}

fn poly(max_deg: u32) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec(
        (prop::array::uniform4(0u32..=max_deg), -20i64..20, 1i64..6),
        0..8,
    )
    .prop_map(|terms| {
        Polynomial::from_terms(terms.into_iter().map(|(e, n, d)| (Monomial::new(e), rat(n, d))))
    })
}

/// Homogeneous polynomial of degree `d` with integer coefficients.
fn homogeneous(d: u32) -> impl Strategy<Value = Polynomial> {
    let basis = mono_basis(d);
    prop::collection::vec(-3i64..=3, basis.len())
        .prop_map(move |c| Polynomial::from_terms(basis.iter().copied().zip(c.into_iter().map(int))))
}

fn point() -> impl Strategy<Value = [BigRational; 4]> {
    prop::array::uniform4(rational())
}

fn matrix() -> impl Strategy<Value = (usize, Vec<Vec<BigRational>>)> {
    (1usize..7, 1usize..6).prop_flat_map(|(rows, cols)| {
        (
            Just(rows),
            prop::collection::vec(prop::collection::vec((-3i64..=3).prop_map(int), rows), cols),
        )
    })
}

fn two_form(k: u32) -> impl Strategy<Value = TwoForm> {
    prop::array::uniform6(homogeneous(k - 2)).prop_map(move |c| TwoForm::from_coeffs(k, c).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reduce_mod_is_a_ring_homomorphism(a in rational(), b in rational()) {
        let (ra, rb) = (reduce_mod(&a, P).unwrap(), reduce_mod(&b, P).unwrap());
        prop_assert_eq!(reduce_mod(&(&a + &b), P).unwrap(), ra + rb);
        prop_assert_eq!(reduce_mod(&(&a * &b), P).unwrap(), ra * rb);
    }

    #[test]
    fn crt_then_reconstruction_recovers_small_rationals(q in rational()) {
        let primes = [P, 998_244_353, 1_000_000_009];
        let residues: Vec<(u64, u64)> =
            primes.iter().map(|&p| (reduce_mod(&q, p).unwrap().residue(), p)).collect();
        let (a, m) = crt(&residues);
        prop_assert_eq!(rational_reconstruct(&a, &m), Some(q));
    }

    #[test]
    fn multiplication_commutes_with_evaluation(a in poly(4), b in poly(4), x in point()) {
        prop_assert_eq!((&a * &b).eval(&x), a.eval(&x) * b.eval(&x));
        prop_assert_eq!((&a + &b).eval(&x), a.eval(&x) + b.eval(&x));
    }

    #[test]
    fn exact_division_inverts_multiplication(a in poly(3), b in poly(3)) {
        prop_assume!(!b.is_zero());
        prop_assert_eq!((&a * &b).exact_div(&b).unwrap(), a);
    }

    #[test]
    fn sum_of_products_matches_pairwise(a in poly(3), b in poly(3), c in poly(3), d in poly(3)) {
        let want = &(&a * &b) + &(&c * &d);
        prop_assert_eq!(sum_of_products(&[(&a, &b), (&c, &d)]), want);
    }

    #[test]
    fn poly4_round_trip(a in poly(6)) {
        prop_assert_eq!(Polynomial::from_poly4(&a.to_poly4()).unwrap(), a);
    }

    #[test]
    fn modular_reduction_respects_products(a in poly(3), b in poly(3)) {
        let (ma, mb) = (ModPoly::reduce(&a, P).unwrap(), ModPoly::reduce(&b, P).unwrap());
        prop_assert_eq!(ModPoly::reduce(&(&a * &b), P).unwrap(), ma.mul(&mb));
    }

    #[test]
    fn euler_identity_on_homogeneous_polynomials(h in homogeneous(4)) {
        let g = h.gradient();
        let e = (0..4).fold(Polynomial::zero(), |s, i| &s + &(&Polynomial::var(i) * &g[i]));
        prop_assert_eq!(e, h.scale(&int(4)));
    }

    #[test]
    fn mult_map_agrees_with_multiplication(
        g1 in homogeneous(1), g2 in homogeneous(2),
        r1 in homogeneous(2), r2 in homogeneous(1),
    ) {
        let map = mult_map(&[g1.clone(), g2.clone()], 3);
        let basis_cols = map.domain_monomials();
        let mut via = vec![int(0); map.nrows()];
        for (col, (b, m)) in map.columns.iter().zip(basis_cols) {
            let c = if b == 0 { r1.coeff(m) } else { r2.coeff(m) };
            for (i, v) in col {
                via[*i as usize] += v * &c;
            }
        }
        let got = Polynomial::from_terms(mono_basis(3).into_iter().zip(via));
        prop_assert_eq!(got, &(&r1 * &g1) + &(&r2 * &g2));
    }

    #[test]
    fn modular_rank_never_exceeds_rational_rank((rows, cols) in matrix(), p in prop::sample::select(vec![3u64, 5, 7, P])) {
        let m = RationalMap::from_dense_columns(rows, &cols);
        let exact = m.rank_exact();
        let rp = rank_mod_p(&m, p).unwrap();
        prop_assert!(rp <= exact);
        let kernel_p = kernel_mod_p(&m, p).unwrap().len();
        prop_assert!(kernel_p >= cols.len() - exact);
        let cert = kernel_trivial_certificate(&m, &[p]);
        match cert.verdict {
            Verdict::Proved => prop_assert_eq!(exact, cols.len()),
            Verdict::Refuted => prop_assert!(exact < cols.len()),
            Verdict::Inconclusive => {}
        }
    }

    #[test]
    fn exterior_derivative_squares_to_zero(eta in prop::array::uniform4(homogeneous(3))) {
        let w = exterior_derivative(&eta, 4).unwrap();
        prop_assert!(d_residuals(&w).iter().all(Polynomial::is_zero));
    }

    #[test]
    fn wedge_residuals_are_linear(a in two_form(4), b in two_form(4), grad in prop::array::uniform4(homogeneous(2))) {
        let (ca, cb) = (a.coeffs(), b.coeffs());
        let sum = TwoForm::from_coeffs(4, std::array::from_fn(|i| ca[i] + cb[i])).unwrap();
        let (ra, rb) = (wedge_residuals(&a, &grad), wedge_residuals(&b, &grad));
        let rs = wedge_residuals(&sum, &grad);
        for i in 0..4 {
            prop_assert_eq!(&rs[i], &(&ra[i] + &rb[i]));
        }
        prop_assert!(wedge_residuals(&TwoForm::zero(4), &grad).iter().all(Polynomial::is_zero));
    }

    #[test]
    fn certificate_json_round_trip(claim in "[a-z ]{1,20}", v in 0u64..1000, seed in any::<u64>()) {
        let c = Certificate::new("prop.cert", claim, Verdict::Inconclusive)
            .with_value("n", v)
            .with_primes(&[P])
            .with_seed(seed);
        let back: Certificate = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        prop_assert_eq!(serde_json::to_value(&back).unwrap(), serde_json::to_value(&c).unwrap());
    }
}

#[test]
fn twenty_seeded_matrices_respect_soundness() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(20);
    for n in 0..20 {
        let rows = rng.gen_range(2..9);
        let cols = rng.gen_range(1..8);
        let mut columns: Vec<Vec<BigRational>> = (0..cols)
            .map(|_| (0..rows).map(|_| int(rng.gen_range(-5..=5))).collect())
            .collect();
        if n % 3 == 0 && cols >= 3 {
            columns[2] = (0..rows).map(|i| &columns[0][i] * int(3) + &columns[1][i]).collect();
        }
        let m = RationalMap::from_dense_columns(rows, &columns);
        let exact = m.rank_exact();
        for p in [3u64, 5, 7, P] {
            assert!(rank_mod_p(&m, p).unwrap() <= exact, "matrix {n} mod {p}");
        }
        let cert = kernel_trivial_certificate(&m, &[P]);
        if cert.verdict == Verdict::Proved {
            assert_eq!(exact, cols);
        }
        assert_eq!(m.kernel_exact().len(), cols - exact);
    }
}
