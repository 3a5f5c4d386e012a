//! Weight windows, sample grids and grid-supremum estimators of the weighted
//! isotropic and anisotropic Hölder norms. Every estimate is a supremum over a
//! finite grid and hence a lower bound of the true norm; grids at higher levels
//! contain those at lower levels.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{binomial, Form, MultiIndex};
use crate::field::ScalarField;
use crate::harmonics::exponents_of_degree;
use crate::potentials::DenseForm;

const BOUNDARY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "class")]
pub enum WindowClass {
    NonPositive,
    Isomorphism,
    BoundaryExcluded,
    Injection { m: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightWindow {
    pub n: usize,
    pub delta: f64,
    #[serde(flatten)]
    pub class: WindowClass,
}

impl std::fmt::Display for WeightWindow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.class {
            WindowClass::Injection { m } => write!(f, "Injection{{m={m}}}"),
            c => write!(f, "{c:?}"),
        }
    }
}

/// Which of the windows `δ ≤ 0`, `0 < δ < n−1`, `δ + 1 − n ∈ {0, 1, …}`,
/// `n−1+m < δ < n+m` contains `δ`. Integers are matched within 1e-9.
pub fn classify_delta(n: usize, delta: f64) -> Result<WeightWindow> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("n = {n} must be at least 2")));
    }
    if !delta.is_finite() {
        return Err(Error::InvalidArgument(format!("δ = {delta} is not finite")));
    }
    let shifted = delta + 1.0 - n as f64;
    let class = if delta <= 0.0 {
        WindowClass::NonPositive
    } else if shifted > -BOUNDARY_TOL && (shifted - shifted.round()).abs() < BOUNDARY_TOL {
        WindowClass::BoundaryExcluded
    } else if shifted < 0.0 {
        WindowClass::Isomorphism
    } else {
        WindowClass::Injection { m: shifted.floor() as u32 }
    };
    Ok(WeightWindow { n, delta, class })
}

/// `w(x) = √(1 + |x|²)`
pub fn weight(x: &[f64]) -> f64 {
    (1.0 + x.iter().map(|v| v * v).sum::<f64>()).sqrt()
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Unit directions of the primitive integer vectors in `{−a, …, a}ⁿ \ {0}`.
/// For `a = 1` this is the `3ⁿ − 1` point stencil (26 points in ℝ³).
pub fn integer_directions(n: usize, a: i64) -> Vec<Vec<f64>> {
    let side = (2 * a + 1) as usize;
    let mut out = Vec::new();
    let total = side.pow(n as u32);
    for code in 0..total {
        let mut c = code;
        let v: Vec<i64> = (0..n)
            .map(|_| {
                let d = (c % side) as i64 - a;
                c /= side;
                d
            })
            .collect();
        let g = v.iter().fold(0, |acc, &e| gcd(acc, e));
        if g != 1 {
            continue;
        }
        let l = (v.iter().map(|e| (e * e) as f64).sum::<f64>()).sqrt();
        out.push(v.iter().map(|&e| e as f64 / l).collect());
    }
    out
}

/// The `3ⁿ − 1` stencil directions.
pub fn stencil_directions(n: usize) -> Vec<Vec<f64>> {
    integer_directions(n, 1)
}

/// Spatial sample grid at refinement `level`: shells `|x| = 2^{j/2^L}` for
/// `1 ≤ |x| ≤ 64` along the directions of [`integer_directions`]`(n, L+1)`,
/// plus a lattice of spacing `2^{−L−1}` inside the unit ball `U`.
#[derive(Clone, Debug)]
pub struct SampleGrid {
    pub n: usize,
    pub level: u32,
    pub shell_points: Vec<Vec<f64>>,
    pub lattice_points: Vec<Vec<f64>>,
    pub pair_directions: Vec<Vec<f64>>,
}

pub const GRID_RADIUS: f64 = 64.0;

impl SampleGrid {
    pub fn new(n: usize, level: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("n = {n} must be at least 2")));
        }
        if level > 4 {
            return Err(Error::InvalidArgument(format!("grid level {level} above 4")));
        }
        let dirs = integer_directions(n, level as i64 + 1);
        let per = 1u32 << level;
        let mut shell_points = Vec::new();
        for j in 0..=(6 * per) {
            let r = 2f64.powf(j as f64 / per as f64);
            for d in &dirs {
                shell_points.push(d.iter().map(|v| v * r).collect());
            }
        }
        let steps = 2 * per as i64;
        let h = 1.0 / steps as f64;
        let side = (2 * steps + 1) as usize;
        let mut lattice_points = Vec::new();
        for code in 0..side.pow(n as u32) {
            let mut c = code;
            let x: Vec<f64> = (0..n)
                .map(|_| {
                    let d = (c % side) as i64 - steps;
                    c /= side;
                    d as f64 * h
                })
                .collect();
            if norm(&x) < 1.0 {
                lattice_points.push(x);
            }
        }
        Ok(SampleGrid { n, level, shell_points, lattice_points, pair_directions: stencil_directions(n) })
    }

    pub fn points(&self) -> impl Iterator<Item = &Vec<f64>> {
        self.lattice_points.iter().chain(&self.shell_points)
    }

    pub fn len(&self) -> usize {
        self.shell_points.len() + self.lattice_points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Admissible Hölder pairs `(x, x + h e)`: `x` a shell point, `e` a stencil
    /// direction, `h = |x|/2^{i+1}` for `i ≤ L+1`, both ends outside the open unit ball.
    pub fn pairs(&self) -> Vec<(Vec<f64>, Vec<f64>)> {
        let mut out = Vec::new();
        for x in &self.shell_points {
            let r = norm(x);
            for e in &self.pair_directions {
                for i in 0..=(self.level + 1) {
                    let h = r / 2f64.powi(i as i32 + 1);
                    let y: Vec<f64> = x.iter().zip(e).map(|(a, b)| a + h * b).collect();
                    if norm(&y) >= 1.0 {
                        out.push((x.clone(), y));
                    }
                }
            }
        }
        out
    }
}

/// Uniform time grid `t_i = iT/N`, `N = 8·2^L`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_max: f64,
    pub times: Vec<f64>,
}

impl TimeGrid {
    pub fn uniform(t_max: f64, level: u32) -> Result<Self> {
        if !(t_max > 0.0) {
            return Err(Error::InvalidArgument(format!("T = {t_max} must be positive")));
        }
        let n = 8usize << level;
        Ok(TimeGrid { t_max, times: (0..=n).map(|i| t_max * i as f64 / n as f64).collect() })
    }

    pub fn from_times(t_max: f64, times: Vec<f64>) -> Result<Self> {
        if times.len() < 8 {
            return Err(Error::InsufficientTimeSampling(times.len()));
        }
        if times.iter().any(|t| !(0.0..=t_max).contains(t)) {
            return Err(Error::InvalidArgument("time samples must lie in [0, T]".into()));
        }
        Ok(TimeGrid { t_max, times })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormComponent {
    pub label: String,
    pub value: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GridDescriptor {
    pub level: u32,
    pub points: usize,
    pub pairs: usize,
    pub time_points: usize,
}

/// A grid supremum: a lower bound for the norm it estimates.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub sup_part: f64,
    pub holder_part: f64,
    pub time_part: f64,
    pub grid: GridDescriptor,
    pub components: Vec<NormComponent>,
}

type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type VecFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

fn fd_partial(f: ScalarFn, i: usize, h: f64) -> ScalarFn {
    Arc::new(move |x: &[f64]| {
        let mut y = x.to_vec();
        y[i] = x[i] + h;
        let a = f(&y);
        y[i] = x[i] - h;
        let b = f(&y);
        (a - b) / (2.0 * h)
    })
}

/// Dense evaluator of `∂^α u`: exact for symbolic coefficients, nested central
/// differences for sampled ones (within their declared smoothness).
pub fn derivative(u: &Form, alpha: &[u32]) -> Result<VecFn> {
    let n = u.n();
    if alpha.len() != n {
        return Err(Error::DimensionMismatch(alpha.len(), n));
    }
    let order: u32 = alpha.iter().sum();
    let deg = u.degree();
    if deg < 0 || deg > n as isize {
        return Ok(Arc::new(|_| Vec::new()));
    }
    let h = f64::EPSILON.powf(1.0 / (order as f64 + 2.0));
    let mut coeffs: Vec<Option<ScalarFn>> = Vec::new();
    for i in MultiIndex::all(n, deg as usize) {
        coeffs.push(match u.coeff(&i) {
            None => None,
            Some(ScalarField::Symbolic(s)) => {
                let mut p = s.clone();
                for (ax, &a) in alpha.iter().enumerate() {
                    for _ in 0..a {
                        p = p.partial(ax);
                    }
                }
                let c = p.compile();
                Some(Arc::new(move |x: &[f64]| c.eval(x)) as ScalarFn)
            }
            Some(ScalarField::Sampled(s)) => {
                if order > s.smoothness {
                    return Err(Error::SmoothnessBudget { order: order as usize, budget: s.smoothness as usize });
                }
                let mut f: ScalarFn = s.callable();
                for (ax, &a) in alpha.iter().enumerate() {
                    for _ in 0..a {
                        f = fd_partial(f, ax, h);
                    }
                }
                Some(f)
            }
        });
    }
    Ok(Arc::new(move |x: &[f64]| coeffs.iter().map(|c| c.as_ref().map_or(0.0, |f| f(x))).collect()))
}

fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn par_max(points: &[&Vec<f64>], f: impl Fn(&[f64]) -> f64 + Sync) -> f64 {
    points.par_iter().map(|x| f(x)).reduce(|| 0.0, f64::max)
}

/// `Σ_{|α| ≤ s} sup_grid w^{δ+|α|}(x) |∂^α u(x)|`, with one component per `α`.
pub fn weighted_sup_norm(u: &Form, s: u32, delta: f64, grid: &SampleGrid) -> Result<NormEstimate> {
    if u.n() != grid.n {
        return Err(Error::DimensionMismatch(u.n(), grid.n));
    }
    let pts: Vec<&Vec<f64>> = grid.points().collect();
    let mut components = Vec::new();
    let mut total = 0.0;
    for k in 0..=s {
        for alpha in exponents_of_degree(grid.n, k) {
            let du = derivative(u, &alpha)?;
            let v = par_max(&pts, |x| weight(x).powf(delta + k as f64) * euclid(&du(x)));
            components.push(NormComponent { label: format!("sup alpha={alpha:?}"), value: v });
            total += v;
        }
    }
    Ok(NormEstimate {
        value: total,
        sup_part: total,
        holder_part: 0.0,
        time_part: 0.0,
        grid: GridDescriptor { level: grid.level, points: grid.len(), pairs: 0, time_points: 0 },
        components,
    })
}

/// `w^{δ+λ}(x, y) |u(x) − u(y)| / |x − y|^λ` with `w(x, y) = max{w(x), w(y)}`.
pub fn pair_quotient(u: &dyn Fn(&[f64]) -> Vec<f64>, x: &[f64], y: &[f64], lambda: f64, delta: f64) -> f64 {
    let dist = x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    if dist == 0.0 {
        return 0.0;
    }
    let (a, b) = (u(x), u(y));
    let diff = a.iter().zip(&b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
    weight(x).max(weight(y)).powf(delta + lambda) * diff / dist.powf(lambda)
}

/// Grid supremum of [`pair_quotient`] over [`SampleGrid::pairs`].
pub fn holder_seminorm(u: &Form, lambda: f64, delta: f64, grid: &SampleGrid) -> Result<NormEstimate> {
    holder_pairs(u, lambda, delta, grid, &grid.pairs())
}

/// As [`holder_seminorm`] on an explicit pair list (pairs violating
/// `|x − y| ≤ |x|/2` or meeting the open unit ball are skipped).
pub fn holder_pairs(
    u: &Form,
    lambda: f64,
    delta: f64,
    grid: &SampleGrid,
    pairs: &[(Vec<f64>, Vec<f64>)],
) -> Result<NormEstimate> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::InvalidArgument(format!("λ = {lambda} must lie in (0, 1]")));
    }
    if u.n() != grid.n {
        return Err(Error::DimensionMismatch(u.n(), grid.n));
    }
    let f = u.evaluator();
    let v = pairs
        .par_iter()
        .map(|(x, y)| {
            let dist = x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            if dist > norm(x) / 2.0 * (1.0 + 1e-12) || norm(x) < 1.0 || norm(y) < 1.0 {
                return 0.0;
            }
            pair_quotient(&f, x, y, lambda, delta)
        })
        .reduce(|| 0.0, f64::max);
    Ok(NormEstimate {
        value: v,
        sup_part: 0.0,
        holder_part: v,
        time_part: 0.0,
        grid: GridDescriptor { level: grid.level, points: grid.len(), pairs: pairs.len(), time_points: 0 },
        components: vec![NormComponent { label: format!("holder lambda={lambda}"), value: v }],
    })
}

/// `‖u‖_{C^{s,λ}_δ}` estimate: [`weighted_sup_norm`] plus the Hölder seminorm of
/// every order-`s` derivative, weighted by `δ + s`.
pub fn iso_norm(u: &Form, s: u32, lambda: f64, delta: f64, grid: &SampleGrid) -> Result<NormEstimate> {
    let mut est = weighted_sup_norm(u, s, delta, grid)?;
    let pairs = grid.pairs();
    for alpha in exponents_of_degree(grid.n, s) {
        let du = derivative(u, &alpha)?;
        let deg = u.degree();
        let df = DenseForm::new(u.n(), deg.max(0) as usize, move |x| du(x)).to_form();
        let h = holder_pairs(&df, lambda, delta + s as f64, grid, &pairs)?;
        est.holder_part += h.value;
        est.components.push(NormComponent { label: format!("holder alpha={alpha:?}"), value: h.value });
    }
    est.value = est.sup_part + est.holder_part;
    est.grid.pairs = pairs.len();
    Ok(est)
}

/// A form depending on a time parameter, `(x, t) ↦ coefficients`.
#[derive(Clone)]
pub struct TimeSampledForm {
    pub n: usize,
    pub degree: usize,
    f: Arc<dyn Fn(&[f64], f64) -> Vec<f64> + Send + Sync>,
}

impl std::fmt::Debug for TimeSampledForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "TimeSampledForm(n={}, degree={})", self.n, self.degree)
    }
}

impl TimeSampledForm {
    pub fn new(n: usize, degree: usize, f: impl Fn(&[f64], f64) -> Vec<f64> + Send + Sync + 'static) -> Self {
        TimeSampledForm { n, degree, f: Arc::new(f) }
    }

    /// `a(t) u(x)`
    pub fn separable(u: &DenseForm, a: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        let g = u.callable();
        TimeSampledForm::new(u.n, u.degree, move |x, t| {
            let s = a(t);
            g(x).into_iter().map(|v| s * v).collect()
        })
    }

    pub fn eval(&self, x: &[f64], t: f64) -> Vec<f64> {
        (self.f)(x, t)
    }

    pub fn slice(&self, t: f64) -> DenseForm {
        let f = self.f.clone();
        DenseForm::new(self.n, self.degree, move |x| f(x, t))
    }

    /// `∂_t^j` by nested central differences.
    pub fn time_derivative(&self, j: u32) -> TimeSampledForm {
        let mut f = self.f.clone();
        let h = f64::EPSILON.powf(1.0 / (j as f64 + 2.0));
        for _ in 0..j {
            let g = f.clone();
            f = Arc::new(move |x: &[f64], t: f64| {
                g(x, t + h).iter().zip(g(x, t - h)).map(|(a, b)| (a - b) / (2.0 * h)).collect()
            });
        }
        TimeSampledForm { n: self.n, degree: self.degree, f }
    }

    pub fn sub(&self, o: &TimeSampledForm) -> Result<TimeSampledForm> {
        if self.n != o.n || self.degree != o.degree {
            return Err(Error::DegreeMismatch(self.degree as isize, o.degree as isize));
        }
        let (a, b) = (self.f.clone(), o.f.clone());
        Ok(TimeSampledForm::new(self.n, self.degree, move |x, t| {
            a(x, t).iter().zip(b(x, t)).map(|(p, q)| p - q).collect()
        }))
    }
}

/// `sup_{t ≠ τ} |a(t) − a(τ)| / |t − τ|^μ` over grid pairs (`sup |a(t) − a(τ)|` for `μ = 0`).
pub fn time_quotient(a: &[f64], times: &[f64], mu: f64) -> f64 {
    let mut best = 0.0f64;
    for i in 0..times.len() {
        for j in 0..i {
            let dt = (times[i] - times[j]).abs();
            if dt == 0.0 {
                continue;
            }
            best = best.max((a[i] - a[j]).abs() / dt.powf(mu));
        }
    }
    best
}

/// Declared time regularity of a coefficient on `[0, T]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum TimeClass {
    /// `C^{s,0}`: `s` bounded continuous derivatives
    Bounded { s: u32 },
    /// `C^{s,μ}`: in addition the `s`-th derivative is `μ`-Hölder
    Holder { s: u32, mu: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeClassReport {
    pub levels: Vec<u32>,
    pub estimates: Vec<f64>,
    pub budget: f64,
    pub accepted: bool,
}

/// Growth allowed between the coarsest and finest time levels.
pub const TIME_GROWTH_BUDGET: f64 = 1.25;

/// Estimate the time seminorm of `a` on refining grids (levels 0..=6) and
/// reject when it grows by more than [`TIME_GROWTH_BUDGET`] (or is not finite).
pub fn time_class_check(a: &dyn Fn(f64) -> f64, t_max: f64, class: TimeClass) -> Result<TimeClassReport> {
    let levels: Vec<u32> = (0..=6).collect();
    let (s, mu) = match class {
        TimeClass::Bounded { s } => (s, 0.0),
        TimeClass::Holder { s, mu } => (s, mu),
    };
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::InvalidArgument(format!("μ = {mu} must lie in [0, 1]")));
    }
    let h = f64::EPSILON.powf(1.0 / (s as f64 + 2.0));
    let deriv = |t: f64| -> f64 {
        let mut coeffs = vec![1.0];
        for _ in 0..s {
            let mut next = vec![0.0; coeffs.len() + 1];
            for (i, c) in coeffs.iter().enumerate() {
                next[i] += c;
                next[i + 1] -= c;
            }
            coeffs = next;
        }
        let half = s as f64 / 2.0;
        coeffs.iter().enumerate().map(|(i, c)| c * a(t + (half - i as f64) * 2.0 * h)).sum::<f64>()
            / (2.0 * h).powi(s as i32)
    };
    let mut estimates = Vec::new();
    for &l in &levels {
        let g = TimeGrid::uniform(t_max, l)?;
        let vals: Vec<f64> = g.times.iter().map(|&t| if s == 0 { a(t) } else { deriv(t) }).collect();
        let sup = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let q = if mu > 0.0 { time_quotient(&vals, &g.times, mu) } else { 0.0 };
        estimates.push(sup + q);
    }
    let budget = TIME_GROWTH_BUDGET * estimates[0].max(f64::MIN_POSITIVE);
    let last = *estimates.last().unwrap();
    let accepted = last.is_finite() && last <= budget;
    Ok(TimeClassReport { levels, estimates, budget, accepted })
}

/// Like [`time_class_check`], failing with [`Error::TimeClassRejected`].
pub fn verify_time_class(a: &dyn Fn(f64) -> f64, t_max: f64, class: TimeClass) -> Result<TimeClassReport> {
    let r = time_class_check(a, t_max, class)?;
    if !r.accepted {
        return Err(Error::TimeClassRejected { estimate: *r.estimates.last().unwrap(), budget: r.budget });
    }
    Ok(r)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnisoParams {
    pub s: u32,
    pub k: u32,
    pub lambda: f64,
    pub mu: f64,
    pub delta: f64,
}

/// Anisotropic norm estimate: `sup_t` of the spatial norms of `∂_t^j u(·, t)`
/// with `|α| + 2j ≤ 2s + k` (weights `δ + |α|`) plus the spatial Hölder term,
/// plus, for `μ > 0`, `sup_x w^δ(x) sup_{t≠τ} |u(x,t) − u(x,τ)| / |t − τ|^μ`.
pub fn aniso_norm(
    u: &TimeSampledForm,
    p: &AnisoParams,
    grid: &SampleGrid,
    times: &TimeGrid,
) -> Result<NormEstimate> {
    if times.times.len() < 8 {
        return Err(Error::InsufficientTimeSampling(times.times.len()));
    }
    if u.n != grid.n {
        return Err(Error::DimensionMismatch(u.n, grid.n));
    }
    if !(p.mu >= 0.0 && p.mu <= 1.0) {
        return Err(Error::InvalidArgument(format!("μ = {} must lie in [0, 1]", p.mu)));
    }
    let mut sup_part = 0.0;
    let mut holder_part = 0.0;
    let mut components = Vec::new();
    let pairs = grid.pairs();
    for j in 0..=p.s {
        let uj = if j == 0 { u.clone() } else { u.time_derivative(j) };
        let order = 2 * (p.s - j) + p.k;
        let mut best_sup = 0.0f64;
        let mut best_holder = 0.0f64;
        for &t in &times.times {
            let slice = uj.slice(t).to_form();
            best_sup = best_sup.max(weighted_sup_norm(&slice, order, p.delta, grid)?.value);
            if j == 0 {
                for alpha in exponents_of_degree(grid.n, order) {
                    let du = derivative(&slice, &alpha)?;
                    let df = DenseForm::new(u.n, u.degree, move |x| du(x)).to_form();
                    best_holder = best_holder.max(holder_pairs(&df, p.lambda, p.delta + order as f64, grid, &pairs)?.value);
                }
            }
        }
        components.push(NormComponent { label: format!("sup_t spatial j={j}"), value: best_sup });
        sup_part += best_sup;
        holder_part += best_holder;
    }
    components.push(NormComponent { label: "sup_t holder".into(), value: holder_part });
    let mut time_part = 0.0;
    if p.mu > 0.0 {
        let pts: Vec<&Vec<f64>> = grid.points().collect();
        let dim = binomial(u.n, u.degree);
        time_part = par_max(&pts, |x| {
            let vals: Vec<Vec<f64>> = times.times.iter().map(|&t| u.eval(x, t)).collect();
            let mut best = 0.0f64;
            for i in 0..vals.len() {
                for k in 0..i {
                    let dt = (times.times[i] - times.times[k]).abs();
                    if dt == 0.0 {
                        continue;
                    }
                    let diff = (0..dim).map(|c| (vals[i][c] - vals[k][c]).powi(2)).sum::<f64>().sqrt();
                    best = best.max(diff / dt.powf(p.mu));
                }
            }
            weight(x).powf(p.delta) * best
        });
        components.push(NormComponent { label: format!("time mu={}", p.mu), value: time_part });
    }
    Ok(NormEstimate {
        value: sup_part + holder_part + time_part,
        sup_part,
        holder_part,
        time_part,
        grid: GridDescriptor { level: grid.level, points: grid.len(), pairs: pairs.len(), time_points: times.times.len() },
        components,
    })
}

/// `‖u‖_Γ = ‖u‖ + ‖du‖ + ‖d*u‖` with weights `δ`, `δ + 1`, `δ + 1`.
pub fn gamma_norm(
    u: &TimeSampledForm,
    du: &TimeSampledForm,
    codiff_u: &TimeSampledForm,
    p: &AnisoParams,
    grid: &SampleGrid,
    times: &TimeGrid,
) -> Result<NormEstimate> {
    let shifted = AnisoParams { delta: p.delta + 1.0, ..p.clone() };
    let a = aniso_norm(u, p, grid, times)?;
    let b = aniso_norm(du, &shifted, grid, times)?;
    let c = aniso_norm(codiff_u, &shifted, grid, times)?;
    Ok(NormEstimate {
        value: a.value + b.value + c.value,
        sup_part: a.sup_part + b.sup_part + c.sup_part,
        holder_part: a.holder_part + b.holder_part + c.holder_part,
        time_part: a.time_part + b.time_part + c.time_part,
        grid: a.grid.clone(),
        components: vec![
            NormComponent { label: "u".into(), value: a.value },
            NormComponent { label: "du".into(), value: b.value },
            NormComponent { label: "d*u".into(), value: c.value },
        ],
    })
}
