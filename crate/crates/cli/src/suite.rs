//! The configurable verification suite behind `derham run-suite`.

use std::sync::Arc;

use derham::bump::{gaussian, random_bump_form, random_cococycle, random_cocycle, BumpForm};
use derham::cohomology::{
    aniso_representative_basis, class_map_consistency, class_projection, compare_projections, exact_rank,
    generator_moment_oracle, representative_basis, solvability_check, TimeCoefficient,
};
use derham::exterior::{codifferential, d, hodge_star, l2_inner, wedge, Form, MultiIndex};
use derham::harmonics::{exponents_of_degree, harmonic_basis, harmonic_dim};
use derham::kernels::{expansion_table, LOG_CONSTANT};
use derham::poly::{q, Poly, Q};
use derham::potentials::{
    check_points, hodge_decompose, lemma_check, moment_functional, mollified_identity, potential, DenseForm,
    KernelChoice,
};
use derham::spaces::{
    aniso_norm, classify_delta, gamma_norm, time_class_check, weight, weighted_sup_norm, AnisoParams, SampleGrid,
    TimeClass, TimeGrid, TimeSampledForm, WindowClass, TIME_GROWTH_BUDGET,
};
use derham::ScalarField;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::SuiteConfig;
use crate::error::CliError;
use crate::report::{digest, Check, Comparison, Report, Series};

struct Ctx<'a> {
    cfg: &'a SuiteConfig,
    report: Report,
}

impl Ctx<'_> {
    fn tau(&self) -> f64 {
        self.cfg.spec.tol
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.cfg.seed.wrapping_mul(1_000_003).wrapping_add(stream))
    }

    /// Record a fallible check; an error becomes a failing check carrying the message.
    fn run<T: Serialize>(&mut self, name: String, anchor: &str, inputs: &T, f: impl FnOnce(&Self) -> derham::Result<Check>) {
        let c = f(self).unwrap_or_else(|e| Check::error(name, anchor, inputs, e));
        self.report.checks.push(c);
    }
}

/// Run every selected group. Validation errors are reported before any work.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Report, CliError> {
    cfg.validate()?;
    let mut cx = Ctx { cfg, report: Report::new(cfg.suite_id.clone(), digest(cfg), cfg.spec.workers) };
    for &n in &cfg.ns {
        if cfg.runs("algebra") {
            algebra(&mut cx, n);
        }
        if cfg.runs("harmonics") {
            harmonics(&mut cx, n);
        }
        if cfg.runs("kernels") {
            kernels(&mut cx, n);
        }
        if cfg.runs("potentials") {
            potentials(&mut cx, n);
        }
        if cfg.runs("spaces") {
            spaces(&mut cx, n);
        }
        if cfg.runs("aniso") {
            aniso(&mut cx, n);
        }
        if cfg.runs("cohomology") {
            cohomology(&mut cx, n);
        }
    }
    Ok(cx.report)
}

fn random_poly_form<R: Rng>(n: usize, degree: usize, rng: &mut R) -> Form {
    let mut f = Form::zero(n, degree as isize);
    for i in MultiIndex::all(n, degree) {
        let mut p = Poly::zero(n);
        for _ in 0..rng.gen_range(1..=3) {
            let e: Vec<u32> = (0..n).map(|_| rng.gen_range(0..=3)).collect();
            p.add_term(e, q(rng.gen_range(-9..=9), rng.gen_range(1..=5)));
        }
        f.add_term(i, ScalarField::from_poly(p)).expect("index matches degree");
    }
    f
}

fn algebra(cx: &mut Ctx, n: usize) {
    let seed = cx.cfg.seed;
    let inputs = ("algebra", n, seed);
    cx.run(format!("algebra.d_squared[n={n}]"), "d∘d = 0", &inputs, |cx| {
        let mut rng = cx.rng(1);
        let mut bad = 0;
        for k in 0..20 {
            let f = random_poly_form(n, k % (n + 1), &mut rng);
            bad += usize::from(d(&d(&f)?)?.is_zero_exact() != Some(true));
        }
        Ok(Check::measure(format!("algebra.d_squared[n={n}]"), "d∘d = 0", &inputs, bad as f64, 0.0, Comparison::Equal))
    });
    cx.run(format!("algebra.codiff_squared[n={n}]"), "d*∘d* = 0", &inputs, |cx| {
        let mut rng = cx.rng(2);
        let mut bad = 0;
        for k in 0..20 {
            let f = random_poly_form(n, k % (n + 1), &mut rng);
            bad += usize::from(codifferential(&codifferential(&f)?)?.is_zero_exact() != Some(true));
        }
        Ok(Check::measure(format!("algebra.codiff_squared[n={n}]"), "d*∘d* = 0", &inputs, bad as f64, 0.0, Comparison::Equal))
    });
    cx.run(format!("algebra.star_identities[n={n}]"), "⋆⋆ = (−1)^{q(n−q)}, dx_I∧⋆dx_I = vol", &n, |_| {
        let mut bad = 0;
        for deg in 0..=n {
            let sign = if (deg * (n - deg)) % 2 == 0 { Q::one() } else { -Q::one() };
            for i in MultiIndex::all(n, deg) {
                let b = Form::basis(i);
                bad += usize::from(hodge_star(&hodge_star(&b)).equals_exact(&b.scale(&sign)) != Some(true));
                bad += usize::from(wedge(&b, &hodge_star(&b))?.equals_exact(&Form::volume(n)) != Some(true));
            }
        }
        Ok(Check::measure(format!("algebra.star_identities[n={n}]"), "⋆⋆ = (−1)^{q(n−q)}, dx_I∧⋆dx_I = vol", &n, bad as f64, 0.0, Comparison::Equal))
    });
    let tau = cx.tau();
    let spec = cx.cfg.spec.clone();
    cx.run(format!("algebra.adjointness[n={n}]"), "d and d* formally adjoint", &inputs, |cx| {
        let mut rng = cx.rng(3);
        let mut worst = 0.0f64;
        for _ in 0..2 {
            let qd = rng.gen_range(0..n);
            let a = random_bump_form(n, qd, &mut rng);
            let b = random_bump_form(n, qd + 1, &mut rng);
            let lhs = l2_inner(&a.d().to_form(), &b.to_form(), &spec)?.value;
            let rhs = l2_inner(&a.to_form(), &b.codifferential().to_form(), &spec)?.value;
            worst = worst.max((lhs - rhs).abs());
        }
        Ok(Check::measure(format!("algebra.adjointness[n={n}]"), "d and d* formally adjoint", &inputs, worst, 10.0 * tau, Comparison::AtMost))
    });
}

fn harmonics(cx: &mut Ctx, n: usize) {
    let anchor = "harmonic polynomial bases";
    cx.run(format!("harmonics.bases[n={n}]"), anchor, &n, |_| {
        let mut bad = 0usize;
        for k in 0..=4u32 {
            let b = harmonic_basis(n, k)?;
            bad += b.members.iter().filter(|h| !h.poly.laplacian().is_zero()).count();
            let g = b.normalized_gram()?;
            for (i, row) in g.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    bad += usize::from(*v != if i == j { Q::one() } else { Q::from_integer(0.into()) });
                }
            }
            let monos = exponents_of_degree(n, k);
            let nullity = if k < 2 {
                monos.len()
            } else {
                let targets = exponents_of_degree(n, k - 2);
                let rows: Vec<Vec<Q>> = monos
                    .iter()
                    .map(|e| {
                        let lap = Poly::monomial(e.clone(), Q::one()).laplacian();
                        targets.iter().map(|t| lap.coeff(t)).collect()
                    })
                    .collect();
                monos.len() - exact_rank(&rows)
            };
            bad += usize::from(b.len() != nullity || b.len() != harmonic_dim(n, k as usize)?);
        }
        Ok(Check::measure(format!("harmonics.bases[n={n}]"), anchor, &n, bad as f64, 0.0, Comparison::Equal)
            .with_note("Δh = 0, Gram = I, |basis| = nullity of Δ, k ≤ 4"))
    });
}

fn kernels(cx: &mut Ctx, n: usize) {
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    x[0] = 4.0;
    y[0] = 1.0;
    let inputs = (n, &x, &y);
    let anchor = "harmonic expansion of e(x − y) converges for |y| < |x|";
    match expansion_table(n, &x, &y, 40) {
        Ok(rows) => {
            let ratio = rows[1..=6].iter().filter_map(|r| r.ratio).fold(0.0, f64::max);
            cx.report.checks.push(Check::measure(format!("kernels.expansion_ratio[n={n}]"), anchor, &inputs, ratio, 0.6, Comparison::AtMost));
            cx.report.checks.push(Check::measure(
                format!("kernels.expansion_remainder[n={n}]"),
                anchor,
                &inputs,
                rows[40].remainder,
                1e-6,
                Comparison::AtMost,
            ));
            cx.report.series.insert(
                format!("expansion_n{n}"),
                Series::new(&["m", "remainder", "ratio"], rows.iter().map(|r| vec![r.m as f64, r.remainder, r.ratio.unwrap_or(f64::NAN)]).collect()),
            );
        }
        Err(e) => cx.report.checks.push(Check::error(format!("kernels.expansion[n={n}]"), anchor, &inputs, e)),
    }
    let spec = cx.cfg.spec.clone();
    let anchor = "Δe = δ₀ (mollified)";
    cx.run(format!("kernels.mollified_identity[n={n}]"), anchor, &n, |_| {
        let (v, p0) = mollified_identity(n, &gaussian(n), LOG_CONSTANT, &spec)?;
        Ok(Check::measure(format!("kernels.mollified_identity[n={n}]"), anchor, &n, (v - p0).abs(), 1e-3, Comparison::AtMost))
    });
}

fn potentials(cx: &mut Ctx, n: usize) {
    let spec = cx.cfg.spec.clone();
    let tau = cx.tau();
    let pts = check_points(n);
    for (stream, &qd) in cx.cfg.qs.clone().iter().enumerate() {
        if qd >= n {
            continue;
        }
        let inputs = ("lemma", n, qd, cx.cfg.seed);
        let name = format!("potentials.identities[n={n},q={qd}]");
        let anchor = "dΦf = f, d*Φf = 0, d*Φ̂g = g, dΦ̂g = 0";
        cx.run(name.clone(), anchor, &inputs, |cx| {
            let mut rng = cx.rng(100 + stream as u64);
            let f = DenseForm::from_bump(&random_cocycle(n, qd + 1, &mut rng)?);
            let g = if qd >= 1 { DenseForm::from_bump(&random_cococycle(n, qd - 1, &mut rng)?) } else { DenseForm::zero(n, 0) };
            let r = lemma_check(&f, &g, 1.0, &spec, &pts)?;
            let worst = r.d_phi_f.max(r.codiff_phi_f).max(r.codiff_phihat_g).max(r.d_phihat_g);
            Ok(Check::measure(name, anchor, &inputs, worst, 20.0 * tau, Comparison::AtMost))
        });
    }
    let anchor = "Φ̂g decays like |x|^{1−n}";
    let radii = [3.0, 4.5, 6.0, 9.0, 12.0, 18.0];
    let mut series = None;
    cx.run(format!("potentials.decay[n={n}]"), anchor, &(n, radii), |_| {
        let dir: Vec<f64> = (0..n).map(|i| [0.8, 0.36, 0.48, 0.0, 0.0][i]).collect();
        let len = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        let points: Vec<Vec<f64>> = radii.iter().map(|r| dir.iter().map(|v| r * v / len).collect()).collect();
        let g = DenseForm::from_bump(&BumpForm::monomial(MultiIndex::empty(n), gaussian(n)));
        let res = potential(&g, KernelChoice::PhiHat, &points, &spec)?;
        let rows: Vec<Vec<f64>> = radii
            .iter()
            .zip(&res.values)
            .map(|(r, v)| vec![r.ln(), v.iter().map(|a| a * a).sum::<f64>().sqrt().ln()])
            .collect();
        let k = rows.len() as f64;
        let mx = rows.iter().map(|r| r[0]).sum::<f64>() / k;
        let my = rows.iter().map(|r| r[1]).sum::<f64>() / k;
        let slope = rows.iter().map(|r| (r[0] - mx) * (r[1] - my)).sum::<f64>() / rows.iter().map(|r| (r[0] - mx).powi(2)).sum::<f64>();
        series = Some(Series::new(&["log_r", "log_abs_phi_f"], rows));
        Ok(Check::measure(format!("potentials.decay[n={n}]"), anchor, &(n, radii), -slope, n as f64 - 1.1, Comparison::AtLeast))
    });
    if let Some(s) = series {
        cx.report.series.insert(format!("decay_fit_n{n}"), s);
    }
    let delta = n as f64 / 2.0 + 0.5;
    let inputs = ("hodge", n, delta, cx.cfg.seed);
    let anchor = "u = d*Φ̂u + dΦu, d*(d*Φ̂u) = 0";
    cx.run(format!("potentials.decomposition[n={n}]"), anchor, &inputs, |cx| {
        let mut rng = cx.rng(200);
        let u = DenseForm::from_bump(&random_bump_form(n, 1, &mut rng));
        let (_, _, r) = hodge_decompose(&u, delta, &spec, &pts)?;
        Ok(Check::measure(format!("potentials.decomposition[n={n}]"), anchor, &inputs, r.residual.max(r.codiff_v), 30.0 * tau, Comparison::AtMost))
    });
}

fn gaussian_sup_oracle(delta: f64) -> f64 {
    let f = |r: f64| (1.0 + r * r).powf(delta / 2.0) * (-r * r).exp();
    let (mut a, mut b) = (0.0f64, 10.0f64);
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

fn spaces(cx: &mut Ctx, n: usize) {
    for &delta in &cx.cfg.deltas.clone() {
        let name = format!("spaces.classify[n={n},delta={delta}]");
        let anchor = "weight windows of (d, d*)";
        match classify_delta(n, delta) {
            Ok(w) => {
                let m = match w.class {
                    WindowClass::Injection { m } => m as f64,
                    _ => -1.0,
                };
                cx.report.checks.push(Check::measure(name, anchor, &(n, delta), m, -1.0, Comparison::AtLeast).with_note(w.to_string()));
            }
            Err(e) => cx.report.checks.push(Check::error(name, anchor, &(n, delta), e)),
        }
    }
    let level = cx.cfg.grid_level;
    let anchor = "weighted sup-norm of w^{−δ} is 1";
    cx.run(format!("spaces.unit_weight[n={n}]"), anchor, &(n, level), |_| {
        let delta = 1.7;
        let u = Form::function(n, ScalarField::sampled(move |x| weight(x).powf(-delta)));
        let v = weighted_sup_norm(&u, 0, delta, &SampleGrid::new(n, level)?)?.value;
        Ok(Check::measure(format!("spaces.unit_weight[n={n}]"), anchor, &(n, level), (v - 1.0).abs(), 4.0 * f64::EPSILON, Comparison::AtMost))
    });
    let anchor = "sup w^δ e^{−|x|²} against a 1-D maximization";
    cx.run(format!("spaces.gaussian_sup[n={n}]"), anchor, &(n, 5.0), |_| {
        let u = Form::function(n, ScalarField::sampled(|x| (-x.iter().map(|v| v * v).sum::<f64>()).exp()));
        let oracle = gaussian_sup_oracle(5.0);
        let v = weighted_sup_norm(&u, 0, 5.0, &SampleGrid::new(n, 2)?)?.value;
        Ok(Check::measure(format!("spaces.gaussian_sup[n={n}]"), anchor, &(n, 5.0), (v - oracle).abs() / oracle, 0.05, Comparison::AtMost)
            .with_note(format!("estimate {v:.5}, oracle {oracle:.5}")))
    });
    let anchor = "estimates grow under grid refinement";
    cx.run(format!("spaces.refinement[n={n}]"), anchor, &n, |_| {
        let u = Form::function(n, ScalarField::sampled(|x| (x[0] - 0.3 * x[1]).sin() / (1.0 + x.iter().map(|v| v * v).sum::<f64>())));
        let mut prev = 0.0;
        let mut drops = 0;
        for level in 0..=2 {
            let v = weighted_sup_norm(&u, 1, 1.0, &SampleGrid::new(n, level)?)?.value;
            drops += usize::from(v < prev);
            prev = v;
        }
        Ok(Check::measure(format!("spaces.refinement[n={n}]"), anchor, &n, drops as f64, 0.0, Comparison::Equal))
    });
}

fn aniso(cx: &mut Ctx, n: usize) {
    let lam = cx.cfg.lambda;
    let mu = cx.cfg.mu;
    let t_max = cx.cfg.t_max;
    let anchor = "time classes C^{s,0} and C^{s,λ/2}";
    let cases: [(&str, Box<dyn Fn(f64) -> f64>, TimeClass, bool); 3] = [
        ("t", Box::new(|t| t), TimeClass::Bounded { s: 0 }, true),
        ("t^(lambda/2)", Box::new(move |t: f64| t.powf(lam / 2.0)), TimeClass::Holder { s: 0, mu: lam / 2.0 }, true),
        ("t^(lambda/4)", Box::new(move |t: f64| t.powf(lam / 4.0)), TimeClass::Holder { s: 0, mu: lam / 2.0 }, false),
    ];
    for (label, a, class, accept) in cases {
        let name = format!("aniso.time_class[n={n},{label}]");
        let inputs = (label, lam, t_max);
        match time_class_check(&*a, t_max, class) {
            Ok(r) => {
                let growth = r.estimates.last().copied().unwrap_or(0.0) / r.estimates[0].max(f64::MIN_POSITIVE);
                let cmp = if accept { Comparison::AtMost } else { Comparison::Above };
                cx.report.checks.push(
                    Check::measure(name, anchor, &inputs, growth, TIME_GROWTH_BUDGET, cmp)
                        .with_note(if accept { "expected accepted" } else { "expected rejected" }),
                );
            }
            Err(e) => cx.report.checks.push(Check::error(name, anchor, &inputs, e)),
        }
    }
    let params = AnisoParams { s: 0, k: 0, lambda: lam, mu, delta: 1.0 };
    let inputs = ("gamma", n, lam, mu, cx.cfg.seed);
    let anchor = "Γ-norm = ‖u‖ + ‖du‖ + ‖d*u‖";
    cx.run(format!("aniso.gamma_additivity[n={n}]"), anchor, &inputs, |cx| {
        let grid = SampleGrid::new(n, 0)?;
        let times = TimeGrid::uniform(t_max, 0)?;
        let b = random_bump_form(n, 1, &mut cx.rng(300));
        let sep = |f: &BumpForm| TimeSampledForm::separable(&DenseForm::from_bump(f), |t: f64| 1.0 + t.powf(0.25));
        let (u, du, cu) = (sep(&b), sep(&b.d()), sep(&b.codifferential()));
        let g = gamma_norm(&u, &du, &cu, &params, &grid, &times)?;
        let shifted = AnisoParams { delta: params.delta + 1.0, ..params.clone() };
        let parts = aniso_norm(&u, &params, &grid, &times)?.value
            + aniso_norm(&du, &shifted, &grid, &times)?.value
            + aniso_norm(&cu, &shifted, &grid, &times)?.value;
        Ok(Check::measure(format!("aniso.gamma_additivity[n={n}]"), anchor, &inputs, (g.value - parts).abs(), 0.0, Comparison::Equal))
    });
    let anchor = "time-Hölder term only adds to the norm";
    cx.run(format!("aniso.mu_monotone[n={n}]"), anchor, &inputs, |cx| {
        let grid = SampleGrid::new(n, 0)?;
        let times = TimeGrid::uniform(t_max, 0)?;
        let f = random_bump_form(n, 0, &mut cx.rng(301));
        let u = TimeSampledForm::separable(&DenseForm::from_bump(&f), move |t: f64| t.sin() + t.powf(lam / 2.0));
        let with = aniso_norm(&u, &params, &grid, &times)?.value;
        let without = aniso_norm(&u, &AnisoParams { mu: 0.0, ..params.clone() }, &grid, &times)?.value;
        Ok(Check::measure(format!("aniso.mu_monotone[n={n}]"), anchor, &inputs, with - without, 0.0, Comparison::AtLeast))
    });
    let anchor = "slices of the anisotropic basis lie in the isotropic span";
    cx.run(format!("aniso.slice_coherence[n={n}]"), anchor, &(n, t_max), |_| {
        let coeffs: Vec<TimeCoefficient> = (0..n).map(|i| Arc::new(move |t: f64| 1.0 + (i as f64 + 1.0) * t) as TimeCoefficient).collect();
        let rep = aniso_representative_basis(n, 1, 0, coeffs, t_max, TimeClass::Bounded { s: 0 })?;
        let mut bad = 0;
        for &t in &TimeGrid::uniform(t_max, 0)?.times {
            bad += usize::from(!rep.slice_coherent(t)?);
        }
        Ok(Check::measure(format!("aniso.slice_coherence[n={n}]"), anchor, &(n, t_max), bad as f64, 0.0, Comparison::Equal))
    });
}

fn cohomology(cx: &mut Ctx, n: usize) {
    let spec = cx.cfg.spec.clone();
    let tau = cx.tau();
    for &m in &cx.cfg.ms.clone() {
        let anchor = "generators d(h dx_I / ((n+2k−2)ϑ^{n+2k−2}))";
        cx.run(format!("cohomology.basis_rank[n={n},m={m}]"), anchor, &(n, m), |_| {
            let b = representative_basis(n, 1, m)?;
            Ok(Check::measure(format!("cohomology.basis_rank[n={n},m={m}]"), anchor, &(n, m), b.rank as f64, b.labels.len() as f64, Comparison::Equal)
                .with_note(format!("upper bound {}", b.bound)))
        });
    }
    for &delta in &cx.cfg.deltas.clone() {
        let tag = format!("n={n},delta={delta}");
        let window = match classify_delta(n, delta) {
            Ok(w) => w,
            Err(e) => {
                cx.report.checks.push(Check::error(format!("cohomology.window[{tag}]"), "weight windows of (d, d*)", &(n, delta), e));
                continue;
            }
        };
        let dependents = ["coboundary_pairings", "coboundary_projection", "generator_pairing", "generator_moments", "invariance", "distinct"];
        match window.class {
            WindowClass::BoundaryExcluded | WindowClass::NonPositive => {
                for d in dependents {
                    cx.report.checks.push(Check::skip(
                        format!("cohomology.{d}[{tag}]"),
                        "excluded weights",
                        &(n, delta),
                        format!("{window}: no class map at this weight"),
                    ));
                }
            }
            WindowClass::Isomorphism => {
                let anchor = "trivial cohomology in the isomorphism window";
                cx.run(format!("cohomology.isomorphism_zero[{tag}]"), anchor, &(n, delta), |cx| {
                    let mut worst = 0.0f64;
                    for g in &representative_basis(n, 1, 0)?.members {
                        worst = worst.max(class_projection(g, 0, delta, &spec)?.max_coefficient);
                    }
                    let f = random_bump_form(n, 0, &mut cx.rng(400)).d().to_form();
                    worst = worst.max(class_projection(&f, 0, delta, &spec)?.max_coefficient);
                    Ok(Check::measure(format!("cohomology.isomorphism_zero[{tag}]"), anchor, &(n, delta), worst, 10.0 * tau, Comparison::AtMost))
                });
            }
            WindowClass::Injection { m } => {
                if !cx.cfg.ms.contains(&m) {
                    for d in dependents {
                        cx.report.checks.push(Check::skip(format!("cohomology.{d}[{tag}]"), "plumbing", &(n, delta), format!("m = {m} not selected")));
                    }
                    continue;
                }
                injection_checks(cx, n, m, delta, &tag);
            }
        }
    }
}

fn injection_checks(cx: &mut Ctx, n: usize, m: u32, delta: f64, tag: &str) {
    let spec = cx.cfg.spec.clone();
    let tau = cx.tau();
    let inputs = (n, m, delta, cx.cfg.seed);
    let mut rng = cx.rng(500);
    let u = random_bump_form(n, 0, &mut rng);
    let f = u.d().to_form();
    let anchor = "solvability pairings vanish on coboundaries";
    cx.run(format!("cohomology.coboundary_pairings[{tag}]"), anchor, &inputs, |_| {
        let r = solvability_check(&f, None, 0, m, &spec)?;
        Ok(Check::measure(format!("cohomology.coboundary_pairings[{tag}]"), anchor, &inputs, r.max_abs, 10.0 * tau, Comparison::AtMost))
    });
    let anchor = "d(Φ − Φ_m) annihilates coboundaries";
    cx.run(format!("cohomology.coboundary_projection[{tag}]"), anchor, &inputs, |_| {
        let p = class_projection(&f, m, delta, &spec)?;
        Ok(Check::measure(format!("cohomology.coboundary_projection[{tag}]"), anchor, &inputs, p.max_coefficient, 10.0 * tau, Comparison::AtMost))
    });
    let basis = match representative_basis(n, 1, m) {
        Ok(b) => b,
        Err(e) => {
            cx.report.checks.push(Check::error(format!("cohomology.basis[{tag}]"), "plumbing", &inputs, e));
            return;
        }
    };
    let anchor = "generators are not coboundaries";
    cx.run(format!("cohomology.generator_pairing[{tag}]"), anchor, &inputs, |_| {
        let mut least = f64::INFINITY;
        for g in &basis.members {
            least = least.min(solvability_check(g, None, 0, m, &spec)?.max_abs);
        }
        Ok(Check::measure(format!("cohomology.generator_pairing[{tag}]"), anchor, &inputs, least, 10.0 * tau, Comparison::Above)
            .with_note("smallest over generators of the largest pairing"))
    });
    let anchor = "generator moments equal −k/(n+2k−2)";
    cx.run(format!("cohomology.generator_moments[{tag}]"), anchor, &inputs, |_| {
        let mut gap = 0.0f64;
        for (g, label) in basis.members.iter().zip(&basis.labels) {
            let tab = moment_functional(&DenseForm::from_form(g)?, m, 0, &spec)?;
            for e in &tab.entries {
                let expect = if e.k == label.k && e.j == label.j { generator_moment_oracle(n, e.k) } else { 0.0 };
                gap = gap.max((e.value - expect).abs());
            }
        }
        Ok(Check::measure(format!("cohomology.generator_moments[{tag}]"), anchor, &inputs, gap, 10.0 * tau, Comparison::AtMost))
    });
    let anchor = "class map constant on g + du";
    cx.run(format!("cohomology.invariance[{tag}]"), anchor, &inputs, |_| {
        let r = class_map_consistency(&basis.members[0], &u.to_form(), m, delta, &spec)?;
        Ok(Check::measure(format!("cohomology.invariance[{tag}]"), anchor, &inputs, r.gap, 20.0 * tau, Comparison::AtMost))
    });
    let anchor = "distinct generators have distinct classes";
    cx.run(format!("cohomology.distinct[{tag}]"), anchor, &inputs, |_| {
        let a = class_projection(&basis.members[0], m, delta, &spec)?;
        let b = class_projection(&basis.members[1], m, delta, &spec)?;
        let c = compare_projections(&a, &b)?;
        Ok(Check::holds(format!("cohomology.distinct[{tag}]"), anchor, &inputs, c.symbolically_distinct && c.rank == 2))
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Verdict;

    #[test]
    fn empty_check_list_gives_empty_passing_report() {
        let cfg = SuiteConfig { checks: Some(vec![]), ..SuiteConfig::default() };
        let r = run_suite(&cfg).unwrap();
        assert!(r.checks.is_empty() && r.passed());
    }

    #[test]
    fn boundary_weight_skips_dependents() {
        let cfg = SuiteConfig { deltas: vec![2.0], ms: vec![0], checks: Some(vec!["spaces".into(), "cohomology".into()]), ..SuiteConfig::default() };
        let r = run_suite(&cfg).unwrap();
        let classify = r.checks.iter().find(|c| c.name.starts_with("spaces.classify")).unwrap();
        assert!(classify.note.as_deref().unwrap().contains("BoundaryExcluded"));
        let skipped: Vec<_> = r.checks.iter().filter(|c| c.verdict == Verdict::Skip).collect();
        assert_eq!(skipped.len(), 6);
        assert!(r.passed(), "{}", r.summary());
    }

    #[test]
    fn invalid_config_rejected_before_running() {
        let cfg = SuiteConfig { ns: vec![9], ..SuiteConfig::default() };
        assert!(matches!(run_suite(&cfg), Err(CliError::Validation(_))));
    }

    #[test]
    fn cheap_groups_pass_and_are_deterministic() {
        let cfg = SuiteConfig { ns: vec![2], checks: Some(vec!["algebra".into(), "harmonics".into(), "kernels".into()]), ..SuiteConfig::default() };
        let a = run_suite(&cfg).unwrap();
        let b = run_suite(&cfg).unwrap();
        assert!(a.passed(), "{}", a.summary());
        assert_eq!(a.checks, b.checks);
        assert_eq!(a.series, b.series);
        assert!(a.series.contains_key("expansion_n2"));
    }
}
