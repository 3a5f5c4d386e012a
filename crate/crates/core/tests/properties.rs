use derham::cohomology::exact_rank;
use derham::exterior::{codifferential, d, hodge_star, wedge, Form, MultiIndex};
use derham::poly::{q, Poly, Q};
use derham::spaces::{classify_delta, pair_quotient, WindowClass};
use derham::ScalarField;
use num_traits::One;
use proptest::prelude::*;

type Terms = Vec<(Vec<u32>, i64, i64)>;

fn poly_from(n: usize, terms: &Terms) -> Poly {
    let mut p = Poly::zero(n);
    for (e, a, b) in terms {
        p.add_term(e.iter().take(n).copied().collect(), q(*a, *b));
    }
    p
}

fn terms() -> impl Strategy<Value = Terms> {
    prop::collection::vec((prop::collection::vec(0u32..4, 4), -9i64..10, 1i64..6), 0..4)
}

/// `(n, degree, coefficient terms per multi-index slot)`
fn form_strategy() -> impl Strategy<Value = Form> {
    (2usize..=4)
        .prop_flat_map(|n| (Just(n), 0..=n, prop::collection::vec(terms(), 6)))
        .prop_map(|(n, deg, slots)| build(n, deg, &slots))
}

fn build(n: usize, deg: usize, slots: &[Terms]) -> Form {
    let mut f = Form::zero(n, deg as isize);
    for (i, t) in MultiIndex::all(n, deg).into_iter().zip(slots) {
        f.add_term(i, ScalarField::from_poly(poly_from(n, t))).unwrap();
    }
    f
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn d_squared_vanishes(f in form_strategy()) {
        prop_assert_eq!(d(&d(&f).unwrap()).unwrap().is_zero_exact(), Some(true));
    }

    #[test]
    fn codifferential_squared_vanishes(f in form_strategy()) {
        let c = codifferential(&codifferential(&f).unwrap()).unwrap();
        prop_assert_eq!(c.is_zero_exact(), Some(true));
    }

    #[test]
    fn star_star_sign(f in form_strategy()) {
        let n = f.n() as isize;
        let k = f.degree();
        let sign = if (k * (n - k)) % 2 == 0 { Q::one() } else { -Q::one() };
        prop_assert_eq!(hodge_star(&hodge_star(&f)).equals_exact(&f.scale(&sign)), Some(true));
    }

    #[test]
    fn d_is_linear(a in form_strategy(), slots in prop::collection::vec(terms(), 6), num in -5i64..6, den in 1i64..4) {
        let b = build(a.n(), a.degree() as usize, &slots);
        let c = q(num, den);
        let lhs = d(&a.add(&b.scale(&c)).unwrap()).unwrap();
        let rhs = d(&a).unwrap().add(&d(&b).unwrap().scale(&c)).unwrap();
        prop_assert_eq!(lhs.equals_exact(&rhs), Some(true));
    }

    #[test]
    fn wedge_graded_commutative(a in form_strategy(), slots in prop::collection::vec(terms(), 6), deg in 0usize..=4) {
        let deg = deg.min(a.n());
        let b = build(a.n(), deg, &slots);
        let sign = if (a.degree() as usize * deg) % 2 == 0 { Q::one() } else { -Q::one() };
        let ab = wedge(&a, &b).unwrap();
        let ba = wedge(&b, &a).unwrap().scale(&sign);
        prop_assert_eq!(ab.equals_exact(&ba), Some(true));
    }

    #[test]
    fn pair_quotient_symmetric(x in prop::collection::vec(-6.0f64..6.0, 3), y in prop::collection::vec(-6.0f64..6.0, 3), lam in 0.05f64..1.0, delta in -2.0f64..4.0) {
        let u = |p: &[f64]| vec![(p[0] * p[1]).sin(), p[2].cos() / (1.0 + p[0] * p[0])];
        let a = pair_quotient(&u, &x, &y, lam, delta);
        let b = pair_quotient(&u, &y, &x, lam, delta);
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn classifier_partition(n in 2usize..6, delta in 0.001f64..10.0) {
        let c = classify_delta(n, delta).unwrap().class;
        let shifted = delta + 1.0 - n as f64;
        match c {
            WindowClass::Isomorphism => prop_assert!(shifted < 0.0),
            WindowClass::BoundaryExcluded => prop_assert!((shifted - shifted.round()).abs() < 1e-9 && shifted > -1e-9),
            WindowClass::Injection { m } => prop_assert_eq!(m as f64, shifted.floor()),
            WindowClass::NonPositive => prop_assert!(false, "positive delta classified as non-positive"),
        }
    }

    #[test]
    fn rank_invariant_under_row_operations(rows in prop::collection::vec(prop::collection::vec(-4i64..5, 4), 1..6), c in 1i64..7) {
        let m: Vec<Vec<Q>> = rows.iter().map(|r| r.iter().map(|v| q(*v, 1)).collect()).collect();
        let mut rev = m.clone();
        rev.reverse();
        let scaled: Vec<Vec<Q>> = m.iter().map(|r| r.iter().map(|v| v * q(c, 1)).collect()).collect();
        let r = exact_rank(&m);
        prop_assert_eq!(r, exact_rank(&rev));
        prop_assert_eq!(r, exact_rank(&scaled));
        prop_assert!(r <= rows.len().min(4));
    }
}
