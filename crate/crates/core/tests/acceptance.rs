//! Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.

use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use derham::bump::{gaussian, random_bump_form, random_cococycle, random_cocycle, BumpField, BumpForm, GaussTerm};
use derham::cohomology::{
    aniso_representative_basis, class_map_consistency, class_projection, compare_projections, exact_rank,
    representative_basis, solvability_check, TimeCoefficient,
};
use derham::exterior::{codifferential, d, hodge_star, l2_inner, wedge, Form, MultiIndex};
use derham::harmonics::{exponents_of_degree, harmonic_basis};
use derham::kernels::{expansion_table, LOG_CONSTANT};
use derham::poly::{q, qi, Poly, Q};
use derham::potentials::{
    check_points, hodge_decompose, lemma_check, moment_functional, mollified_identity, DenseForm,
};
use derham::spaces::{
    aniso_norm, classify_delta, gamma_norm, holder_seminorm, time_class_check, weight, weighted_sup_norm,
    AnisoParams, SampleGrid, TimeClass, TimeGrid, TimeSampledForm, WindowClass,
};
use derham::{QuadratureSpec, ScalarField};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TAU: f64 = 1e-4;

fn spec() -> QuadratureSpec {
    QuadratureSpec { tol: TAU, ..QuadratureSpec::default() }
}

fn verdict(id: u32, name: &str, ok: bool, start: Instant, limit: Duration, detail: &str) {
    let elapsed = start.elapsed();
    let pass = ok && elapsed <= limit;
    let _ = writeln!(
        std::io::stdout().lock(),
        "{} criterion {id:02} {name}: {detail}; runtime {:.1}s (limit {}s)",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    assert!(ok, "criterion {id} failed: {detail}");
    assert!(elapsed <= limit, "criterion {id} exceeded its runtime limit");
}

fn random_poly<R: Rng>(n: usize, rng: &mut R) -> Poly {
    let mut p = Poly::zero(n);
    for _ in 0..rng.gen_range(1..=4) {
        let e: Vec<u32> = (0..n).map(|_| rng.gen_range(0..=3)).collect();
        p.add_term(e, q(rng.gen_range(-9..=9), rng.gen_range(1..=5)));
    }
    p
}

fn random_poly_form<R: Rng>(n: usize, degree: usize, rng: &mut R) -> Form {
    let mut f = Form::zero(n, degree as isize);
    for i in MultiIndex::all(n, degree) {
        if rng.gen_bool(0.7) {
            f.add_term(i, ScalarField::from_poly(random_poly(n, rng))).unwrap();
        }
    }
    f
}

#[test]
fn criterion_01_exterior_exactness() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut forms = 0;
    let mut ok = true;
    while forms < 200 {
        for n in 2..=4usize {
            for deg in 0..=n {
                let f = random_poly_form(n, deg, &mut rng);
                ok &= d(&d(&f).unwrap()).unwrap().is_zero_exact() == Some(true);
                ok &= codifferential(&codifferential(&f).unwrap()).unwrap().is_zero_exact() == Some(true);
                forms += 1;
            }
        }
    }
    let mut basis = 0;
    for n in 2..=5usize {
        for deg in 0..=n {
            let sign = if (deg * (n - deg)) % 2 == 0 { Q::one() } else { -Q::one() };
            for i in MultiIndex::all(n, deg) {
                let b = Form::basis(i.clone());
                let ss = hodge_star(&hodge_star(&b));
                ok &= ss.equals_exact(&b.scale(&sign)) == Some(true);
                ok &= wedge(&b, &hodge_star(&b)).unwrap().equals_exact(&Form::volume(n)) == Some(true);
                basis += 1;
            }
        }
    }
    verdict(1, "exterior exactness", ok, start, Duration::from_secs(10), &format!("{forms} random forms, {basis} basis forms, exact"));
}

#[test]
fn criterion_02_adjointness() {
    let start = Instant::now();
    let spec = spec();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst = 0.0f64;
    let mut pairs = 0;
    for n in [2usize, 3] {
        for _ in 0..5 {
            let qd = rng.gen_range(0..n);
            let a = random_bump_form(n, qd, &mut rng);
            let b = random_bump_form(n, qd + 1, &mut rng);
            let lhs = l2_inner(&a.d().to_form(), &b.to_form(), &spec).unwrap().value;
            let rhs = l2_inner(&a.to_form(), &b.codifferential().to_form(), &spec).unwrap().value;
            worst = worst.max((lhs - rhs).abs());
            pairs += 1;
        }
    }
    verdict(2, "adjointness of d and d*", worst <= 10.0 * TAU, start, Duration::from_secs(60), &format!("{pairs} pairs, max |(da,b) - (a,d*b)| = {worst:.3e} <= {:.0e}", 10.0 * TAU));
}

/// Rank of Δ from degree-k monomials to degree-(k−2) monomials, by exact elimination.
fn laplacian_nullity(n: usize, k: u32) -> usize {
    let monos = exponents_of_degree(n, k);
    if k < 2 {
        return monos.len();
    }
    let targets = exponents_of_degree(n, k - 2);
    let rows: Vec<Vec<Q>> = monos
        .iter()
        .map(|e| {
            let lap = Poly::monomial(e.clone(), Q::one()).laplacian();
            targets.iter().map(|t| lap.coeff(t)).collect()
        })
        .collect();
    monos.len() - exact_rank(&rows)
}

#[test]
fn criterion_03_harmonic_bases() {
    let start = Instant::now();
    let mut ok = true;
    let mut checked = 0;
    for n in 2..=4usize {
        for k in 0..=6u32 {
            let b = harmonic_basis(n, k).unwrap();
            ok &= b.members.iter().all(|h| h.poly.laplacian().is_zero());
            let g = b.normalized_gram().unwrap();
            for (i, row) in g.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    ok &= *v == if i == j { Q::one() } else { Q::zero() };
                }
            }
            ok &= b.len() == laplacian_nullity(n, k);
            checked += 1;
        }
    }
    verdict(3, "harmonic bases", ok, start, Duration::from_secs(30), &format!("{checked} (n, k) pairs, exact"));
}

#[test]
fn criterion_04_expansion_convergence() {
    let start = Instant::now();
    let mut ok = true;
    let mut worst_ratio = 0.0f64;
    let mut final_rem = 0.0f64;
    for n in [2usize, 3] {
        let mut x = vec![0.0; n];
        let mut y = vec![0.0; n];
        x[0] = 4.0;
        y[0] = 1.0;
        let rows = expansion_table(n, &x, &y, 40).unwrap();
        for r in &rows[1..=6] {
            let ratio = r.ratio.unwrap();
            worst_ratio = worst_ratio.max(ratio);
            ok &= ratio <= 0.6;
        }
        final_rem = final_rem.max(rows[40].remainder);
        ok &= rows[40].remainder <= 1e-6;
    }
    verdict(4, "expansion of the fundamental solution", ok, start, Duration::from_secs(30), &format!("max ratio m=1..6 {worst_ratio:.4} <= 0.6, remainder at m=40 {final_rem:.2e} <= 1e-6"));
}

fn profiles(n: usize) -> Vec<BumpField> {
    let mut c = vec![0.0; n];
    c[0] = 0.3;
    c[1] = -0.2;
    vec![
        gaussian(n),
        BumpField::single(GaussTerm::new(vec![0.0; n], qi(2), &Poly::one(n) + &Poly::var(n, 0).scale(&q(1, 2)))),
        BumpField::single(GaussTerm::new(c, q(3, 2), Poly::one(n))),
    ]
}

#[test]
fn criterion_05_fundamental_solution_normalization() {
    let start = Instant::now();
    let spec = spec();
    let mut worst = 0.0f64;
    let mut printed_gap = 0.0f64;
    for n in [2usize, 3] {
        for phi in profiles(n) {
            let (v, p0) = mollified_identity(n, &phi, LOG_CONSTANT, &spec).unwrap();
            worst = worst.max((v - p0).abs());
            if n == 2 {
                let (w, _) = mollified_identity(n, &phi, 1.0 / std::f64::consts::PI, &spec).unwrap();
                printed_gap = printed_gap.max((w - p0).abs());
            }
        }
    }
    verdict(5, "fundamental solution normalization", worst <= 1e-3, start, Duration::from_secs(60), &format!("max |int e Lap phi - phi(0)| = {worst:.2e} <= 1e-3 with c2 = 1/(2 pi); c2 = 1/pi misses by {printed_gap:.3}"));
}

#[test]
fn criterion_06_potential_identities() {
    let start = Instant::now();
    let spec = spec();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut worst = [0.0f64; 4];
    let mut ok = true;
    let mut count = 0;
    for n in [2usize, 3] {
        let pts = check_points(n);
        for qd in 0..n {
            for _ in 0..5 {
                let f = DenseForm::from_bump(&random_cocycle(n, qd + 1, &mut rng).unwrap());
                let g = if qd >= 1 {
                    DenseForm::from_bump(&random_cococycle(n, qd - 1, &mut rng).unwrap())
                } else {
                    DenseForm::zero(n, 0)
                };
                let r = lemma_check(&f, &g, 1.0, &spec, &pts).unwrap();
                for (w, v) in worst.iter_mut().zip([r.d_phi_f, r.codiff_phi_f, r.codiff_phihat_g, r.d_phihat_g]) {
                    *w = w.max(v);
                }
                ok &= r.pass;
                count += 1;
            }
        }
    }
    verdict(
        6,
        "potential identities",
        ok,
        start,
        Duration::from_secs(600),
        &format!(
            "{count} cocycle pairs; max residuals dPhi f - f {:.2e}, d*Phi f {:.2e}, d*Phihat g - g {:.2e}, dPhihat g {:.2e} <= {:.0e}",
            worst[0], worst[1], worst[2], worst[3], 20.0 * TAU
        ),
    );
}

#[test]
fn criterion_07_hodge_decomposition() {
    let start = Instant::now();
    let spec = spec();
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let pts = check_points(3);
    let (mut res, mut cod) = (0.0f64, 0.0f64);
    let mut ok = true;
    for deg in [0usize, 1, 2, 3, 1] {
        let u = DenseForm::from_bump(&random_bump_form(3, deg, &mut rng));
        let (_, _, r) = hodge_decompose(&u, 2.0, &spec, &pts).unwrap();
        res = res.max(r.residual);
        cod = cod.max(r.codiff_v);
        ok &= r.pass;
    }
    verdict(7, "decomposition u = d*Phihat u + dPhi u", ok, start, Duration::from_secs(600), &format!("5 bump forms; max |u - v - w| {res:.2e}, max |d*v| {cod:.2e} <= {:.0e}", 30.0 * TAU));
}

#[test]
fn criterion_08_moment_dichotomy() {
    let start = Instant::now();
    let spec = spec();
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut cob_worst = 0.0f64;
    let mut raw_moment = 0.0f64;
    let mut ok = true;
    for m in [0u32, 1] {
        let delta = 2.5 + m as f64;
        for qd in [0usize, 1] {
            for _ in 0..5 {
                let u = random_bump_form(3, qd, &mut rng);
                let f = u.d().to_form();
                let g = (qd >= 1).then(|| u.codifferential().to_form());
                let pair = solvability_check(&f, g.as_ref(), qd, m, &spec).unwrap();
                let proj = class_projection(&f, m, delta, &spec).unwrap();
                raw_moment = raw_moment.max(proj.max_moment);
                cob_worst = cob_worst.max(pair.max_abs).max(proj.max_coefficient);
            }
        }
    }
    ok &= cob_worst <= 10.0 * TAU;
    // generators: at least one pairing above 10τ, and the moment table equals the
    // flux oracle c = −k/(n+2k−2) on the generator's own entry
    let mut min_pairing = f64::INFINITY;
    let mut oracle_gap = 0.0f64;
    for m in [0u32, 1] {
        let basis = representative_basis(3, 1, m).unwrap();
        for (g, label) in basis.members.iter().zip(&basis.labels) {
            let pair = solvability_check(g, None, 0, m, &spec).unwrap();
            min_pairing = min_pairing.min(pair.max_abs);
            ok &= !pair.solvable;
            let tab = moment_functional(&DenseForm::from_form(g).unwrap(), m, 0, &spec).unwrap();
            for e in &tab.entries {
                let expect = if e.k == label.k && e.j == label.j { -(e.k as f64) / (1.0 + 2.0 * e.k as f64) } else { 0.0 };
                oracle_gap = oracle_gap.max((e.value - expect).abs());
            }
        }
    }
    ok &= oracle_gap <= 10.0 * TAU;
    verdict(
        8,
        "moment dichotomy",
        ok,
        start,
        Duration::from_secs(300),
        &format!("coboundary max pairing/projection {cob_worst:.2e} <= {:.0e} (raw moments up to {raw_moment:.2}); generator min of max pairing {min_pairing:.4}; generator moments vs flux oracle gap {oracle_gap:.2e}", 10.0 * TAU),
    );
}

#[test]
fn criterion_09_class_map() {
    let start = Instant::now();
    let spec = spec();
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let basis = representative_basis(3, 1, 0).unwrap();
    let mut ok = true;
    let mut inv_gap = 0.0f64;
    for g in &basis.members {
        let u = random_bump_form(3, 0, &mut rng).to_form();
        let r = class_map_consistency(g, &u, 0, 2.5, &spec).unwrap();
        inv_gap = inv_gap.max(r.gap);
        ok &= r.pass;
    }
    for g in representative_basis(3, 2, 0).unwrap().members.iter().take(2) {
        let u = random_bump_form(3, 1, &mut rng).to_form();
        let r = class_map_consistency(g, &u, 0, 2.5, &spec).unwrap();
        inv_gap = inv_gap.max(r.gap);
        ok &= r.pass;
    }
    let p: Vec<_> = basis.members.iter().map(|g| class_projection(g, 0, 2.5, &spec).unwrap()).collect();
    let mut distinct = true;
    for i in 0..p.len() {
        for j in 0..i {
            let c = compare_projections(&p[i], &p[j]).unwrap();
            distinct &= c.symbolically_distinct && c.rank == 2;
        }
    }
    ok &= distinct;
    ok &= p.iter().all(|x| x.projection.is_symbolic() && d(&x.projection).unwrap().is_zero_exact() == Some(true));
    // two passes: the projection of a generator scales its moments by −k/(n+2k−2)
    let mut two_pass = 0.0f64;
    for (g, proj) in basis.members.iter().zip(&p) {
        let again = class_projection(&proj.projection, 0, 2.5, &spec).unwrap();
        let a = again.table.unwrap();
        let b = moment_functional(&DenseForm::from_form(g).unwrap(), 0, 0, &spec).unwrap();
        for (x, y) in a.entries.iter().zip(&b.entries) {
            two_pass = two_pass.max((x.value - (-1.0 / 3.0) * y.value).abs());
        }
    }
    ok &= two_pass <= 20.0 * TAU;
    let mut iso = 0.0f64;
    for g in &basis.members {
        iso = iso.max(class_projection(g, 0, 1.5, &spec).unwrap().max_coefficient);
    }
    for _ in 0..3 {
        let f = random_bump_form(3, 0, &mut rng).d().to_form();
        iso = iso.max(class_projection(&f, 0, 1.5, &spec).unwrap().max_coefficient);
    }
    ok &= iso <= 10.0 * TAU;
    verdict(
        9,
        "class map",
        ok,
        start,
        Duration::from_secs(300),
        &format!("invariance gap {inv_gap:.2e} <= {:.0e}; generators pairwise distinct {distinct}; two-pass gap {two_pass:.2e}; isomorphism-window max {iso:.1e}", 20.0 * TAU),
    );
}

#[test]
fn criterion_10_window_classifier() {
    let start = Instant::now();
    let mut ok = true;
    let mut count = 0;
    for n in 2..=4i64 {
        for k in 1..=80i64 {
            // δ = k/10; boundary iff 10δ − 10(n−1) ∈ {0, 10, 20, …}
            let shifted = k - 10 * (n - 1);
            let expect = if shifted < 0 {
                WindowClass::Isomorphism
            } else if shifted % 10 == 0 {
                WindowClass::BoundaryExcluded
            } else {
                WindowClass::Injection { m: (shifted / 10) as u32 }
            };
            ok &= classify_delta(n as usize, k as f64 * 0.1).unwrap().class == expect;
            count += 1;
        }
    }
    verdict(10, "window classifier", ok, start, Duration::from_secs(1), &format!("{count} (n, delta) cases, exact"));
}

#[test]
fn criterion_11_anisotropic_suite() {
    let start = Instant::now();
    let lam = 0.5f64;
    let mut ok = true;
    let coeffs: Vec<TimeCoefficient> = vec![Arc::new(|t| t), Arc::new(|t| 1.0 - t / 2.0), Arc::new(|t| t * t / 4.0)];
    let rep = aniso_representative_basis(3, 1, 0, coeffs, 1.0, TimeClass::Bounded { s: 0 }).unwrap();
    let times = TimeGrid::uniform(1.0, 0).unwrap();
    let mut coherent = true;
    for &t in &times.times {
        coherent &= rep.slice_coherent(t).unwrap();
    }
    ok &= coherent;
    let acc_t = time_class_check(&|t| t, 1.0, TimeClass::Bounded { s: 0 }).unwrap().accepted;
    let acc_half = time_class_check(&|t: f64| t.powf(lam / 2.0), 1.0, TimeClass::Holder { s: 0, mu: lam / 2.0 }).unwrap().accepted;
    let quarter = time_class_check(&|t: f64| t.powf(lam / 4.0), 1.0, TimeClass::Holder { s: 0, mu: lam / 2.0 }).unwrap();
    ok &= acc_t && acc_half && !quarter.accepted;

    let grid = SampleGrid::new(3, 0).unwrap();
    let params = AnisoParams { s: 0, k: 0, lambda: lam, mu: lam / 2.0, delta: 1.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(1111);
    let b = random_bump_form(3, 1, &mut rng);
    let sep = |f: &BumpForm| TimeSampledForm::separable(&DenseForm::from_bump(f), |t: f64| 1.0 + t.powf(0.25));
    let (u, du, cu) = (sep(&b), sep(&b.d()), sep(&b.codifferential()));
    let g = gamma_norm(&u, &du, &cu, &params, &grid, &times).unwrap();
    let shifted = AnisoParams { delta: params.delta + 1.0, ..params.clone() };
    let parts = aniso_norm(&u, &params, &grid, &times).unwrap().value
        + aniso_norm(&du, &shifted, &grid, &times).unwrap().value
        + aniso_norm(&cu, &shifted, &grid, &times).unwrap().value;
    let additive = g.value - parts == 0.0;
    ok &= additive;
    let mut monotone = true;
    for i in 0..10 {
        let f = random_bump_form(3, i % 4, &mut rng);
        let a: f64 = rng.gen_range(0.2..1.0);
        let u = TimeSampledForm::separable(&DenseForm::from_bump(&f), move |t: f64| (a * t).sin() + t.powf(lam / 2.0));
        let with = aniso_norm(&u, &params, &grid, &times).unwrap().value;
        let without = aniso_norm(&u, &AnisoParams { mu: 0.0, ..params.clone() }, &grid, &times).unwrap().value;
        monotone &= without <= with;
    }
    ok &= monotone;
    verdict(
        11,
        "anisotropic suite",
        ok,
        start,
        Duration::from_secs(300),
        &format!(
            "slice coherence {coherent}; accepts t {acc_t}, t^(lambda/2) {acc_half}; rejects t^(lambda/4) {} (estimates {:.3} -> {:.3}); gamma additivity {additive}; mu monotonicity {monotone}",
            !quarter.accepted,
            quarter.estimates[0],
            quarter.estimates.last().unwrap()
        ),
    );
}

/// Golden-section maximization of `(1 + r²)^{5/2} e^{−r²}` on `[0, 5]`.
fn gaussian_sup_oracle() -> f64 {
    let f = |r: f64| (1.0 + r * r).powf(2.5) * (-r * r).exp();
    let (mut a, mut b) = (0.0f64, 5.0f64);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - g * (b - a);
        let e = a + g * (b - a);
        if f(c) > f(e) {
            b = e;
        } else {
            a = c;
        }
    }
    f((a + b) / 2.0)
}

#[test]
fn criterion_12_norm_estimators() {
    let start = Instant::now();
    let mut ok = true;
    let delta = 1.7;
    let unit = Form::function(3, ScalarField::sampled(move |x| weight(x).powf(-delta)));
    let g2 = SampleGrid::new(3, 2).unwrap();
    let unit_val = weighted_sup_norm(&unit, 0, delta, &g2).unwrap().value;
    ok &= (unit_val - 1.0).abs() <= 4.0 * f64::EPSILON;
    let gauss = Form::function(3, ScalarField::sampled(|x| (-x.iter().map(|v| v * v).sum::<f64>()).exp()));
    let oracle = gaussian_sup_oracle();
    let est = weighted_sup_norm(&gauss, 0, 5.0, &g2).unwrap().value;
    let rel = (est - oracle).abs() / oracle;
    ok &= rel <= 0.05;
    let mut monotone = true;
    let smooth = Form::function(3, ScalarField::sampled(|x| (x[0] - 0.3 * x[1]).sin() / (1.0 + x.iter().map(|v| v * v).sum::<f64>())));
    let mut prev = [0.0f64; 3];
    for level in 0..=2 {
        let g = SampleGrid::new(3, level).unwrap();
        let now = [
            weighted_sup_norm(&gauss, 1, 2.0, &g).unwrap().value,
            weighted_sup_norm(&smooth, 0, 1.0, &g).unwrap().value,
            holder_seminorm(&smooth, 0.5, 1.0, &g).unwrap().value,
        ];
        monotone &= now.iter().zip(&prev).all(|(a, b)| a >= b);
        prev = now;
    }
    ok &= monotone;
    verdict(
        12,
        "norm estimators",
        ok,
        start,
        Duration::from_secs(60),
        &format!("unit case {unit_val:.17}; gaussian estimate {est:.4} vs oracle {oracle:.4} (rel {rel:.3}); refinement monotone {monotone}"),
    );
}
