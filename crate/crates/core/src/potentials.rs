//! Potential operators `Φf(x) = ∫ f(y) ∧ φ(x, y)`, their hatted and truncated
//! versions, the moment functional, and residual checks of the identities they
//! satisfy.
//!
//! For a target `|x| < R` the integral is taken in polar coordinates centred at
//! `x` over the whole ball `|y| ≤ R`: since the singular kernel is homogeneous of
//! degree `1 − n`, `ψ(x, x + ρω) ρ^{n−1} = ψ(−ω)` and the integrand is smooth
//! along every ray. The first radial panel `[0, ε]` is the singular patch. The
//! nodes move smoothly with `x`, so finite differences of potentials are as
//! smooth as the potentials themselves.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bump::{BumpField, BumpForm};
use crate::error::{Error, Result};
use crate::exterior::{binomial, fd_codifferential_at, fd_d_at, Form, MultiIndex};
use crate::field::{SampledField, ScalarField};
use crate::harmonics::harmonic_basis;
use crate::kernels::{
    fundamental_solution_with, kernel_phi, representative_factor, truncated_kernel, KernelDoubleForm,
    KernelKind, LOG_CONSTANT,
};
use crate::poly::{q_from_f64, q_to_f64, Poly, Q};
use crate::quadrature::{integrate_ball, GaussLegendre, QuadratureSpec, SphereRule};

pub type DenseFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A numerically given form: a dense coefficient evaluator in lexicographic index order.
#[derive(Clone)]
pub struct DenseForm {
    pub n: usize,
    pub degree: usize,
    f: DenseFn,
}

impl std::fmt::Debug for DenseForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "DenseForm(n={}, degree={})", self.n, self.degree)
    }
}

impl DenseForm {
    pub fn new(n: usize, degree: usize, f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        DenseForm { n, degree, f: Arc::new(f) }
    }

    pub fn zero(n: usize, degree: usize) -> Self {
        let len = binomial(n, degree);
        DenseForm::new(n, degree, move |_| vec![0.0; len])
    }

    pub fn from_form(f: &Form) -> Result<Self> {
        if f.degree() < 0 || f.degree() > f.n() as isize {
            return Err(Error::DegreeOutOfRange { n: f.n(), degree: f.degree() });
        }
        Ok(DenseForm::new(f.n(), f.degree() as usize, f.evaluator()))
    }

    pub fn from_bump(b: &BumpForm) -> Self {
        DenseForm::new(b.n, b.degree, b.evaluator())
    }

    pub fn len(&self) -> usize {
        binomial(self.n, self.degree)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        (self.f)(x)
    }

    pub fn callable(&self) -> DenseFn {
        self.f.clone()
    }

    /// Central-difference `d` at `x`.
    pub fn d_at(&self, x: &[f64], h: f64) -> Vec<f64> {
        fd_d_at(&*self.f, self.n, self.degree, x, h)
    }

    /// Central-difference `d*` at `x`.
    pub fn codiff_at(&self, x: &[f64], h: f64) -> Vec<f64> {
        fd_codifferential_at(&*self.f, self.n, self.degree, x, h)
    }

    /// The form `x ↦ d_h self (x)`; zero of degree n for top-degree input.
    pub fn fd_d(&self, h: f64) -> DenseForm {
        if self.degree >= self.n {
            return DenseForm::zero(self.n, self.n);
        }
        let me = self.clone();
        DenseForm::new(self.n, self.degree + 1, move |x| me.d_at(x, h))
    }

    /// The form `x ↦ d*_h self (x)`; zero of degree 0 for 0-form input.
    pub fn fd_codifferential(&self, h: f64) -> DenseForm {
        if self.degree == 0 {
            return DenseForm::zero(self.n, 0);
        }
        let me = self.clone();
        DenseForm::new(self.n, self.degree - 1, move |x| me.codiff_at(x, h))
    }

    pub fn add(&self, o: &DenseForm) -> Result<DenseForm> {
        self.combine(o, 1.0)
    }

    pub fn sub(&self, o: &DenseForm) -> Result<DenseForm> {
        self.combine(o, -1.0)
    }

    fn combine(&self, o: &DenseForm, s: f64) -> Result<DenseForm> {
        if self.n != o.n {
            return Err(Error::DimensionMismatch(self.n, o.n));
        }
        if self.degree != o.degree {
            return Err(Error::DegreeMismatch(self.degree as isize, o.degree as isize));
        }
        let (a, b) = (self.f.clone(), o.f.clone());
        Ok(DenseForm::new(self.n, self.degree, move |x| {
            a(x).iter().zip(b(x)).map(|(u, v)| u + s * v).collect()
        }))
    }

    pub fn scale(&self, c: f64) -> DenseForm {
        let a = self.f.clone();
        DenseForm::new(self.n, self.degree, move |x| a(x).iter().map(|v| c * v).collect())
    }

    /// As a [`Form`] with one sampled coefficient per index.
    pub fn to_form(&self) -> Form {
        let mut out = Form::zero(self.n, self.degree as isize);
        for i in MultiIndex::all(self.n, self.degree) {
            let pos = i.position();
            let f = self.f.clone();
            out.add_term(i, ScalarField::Sampled(SampledField::new(move |x| f(x)[pos])))
                .expect("degree matches");
        }
        out
    }
}

/// `max_x |a(x)|` over the grid, with the Euclidean norm on coefficient vectors.
pub fn grid_norm(points: &[Vec<f64>], a: impl Fn(&[f64]) -> Vec<f64>) -> f64 {
    points
        .iter()
        .map(|p| a(p).iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0, |m, v| if v > m || v.is_nan() { v } else { m })
}

/// Deterministic residual grid: five points in or near the unit ball.
pub fn check_points(n: usize) -> Vec<Vec<f64>> {
    let base: [[f64; 5]; 5] = [
        [0.3, 0.2, 0.1, -0.1, 0.05],
        [-0.5, 0.4, 0.2, 0.3, -0.2],
        [0.9, -0.6, 0.3, 0.1, 0.1],
        [0.0, 0.0, 0.0, 0.0, 0.0],
        [1.4, 0.5, -0.7, 0.2, 0.3],
    ];
    base.iter().map(|p| p[..n].to_vec()).collect()
}

/// Step used for finite differences of potentials.
pub const FD_STEP: f64 = 1e-2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelChoice {
    Phi,
    PhiHat,
    PhiM(u32),
    PhiHatM(u32),
}

impl KernelChoice {
    fn kind(self) -> KernelKind {
        match self {
            KernelChoice::Phi | KernelChoice::PhiM(_) => KernelKind::Phi,
            _ => KernelKind::PhiHat,
        }
    }

    fn truncation(self) -> Option<u32> {
        match self {
            KernelChoice::PhiM(m) | KernelChoice::PhiHatM(m) => Some(m),
            _ => None,
        }
    }

    /// Output degree for an input of degree `p`.
    pub fn output_degree(self, n: usize, p: usize) -> Result<usize> {
        match self.kind() {
            KernelKind::Phi if p >= 1 => Ok(p - 1),
            KernelKind::PhiHat if p < n => Ok(p + 1),
            _ => Err(Error::DegreeOutOfRange { n, degree: p as isize }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointValue {
    pub value: Vec<f64>,
    pub tail: f64,
    pub patch: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PotentialResult {
    pub degree: usize,
    pub points: Vec<Vec<f64>>,
    pub values: Vec<Vec<f64>>,
    pub tail_estimate: f64,
    pub singular_patch_estimate: f64,
    pub spec: QuadratureSpec,
}

/// A potential operator applied to fixed data, with the angular kernel table
/// and the moment corrections precomputed.
#[derive(Clone)]
pub struct PotentialOperator {
    kernel: Arc<KernelDoubleForm>,
    f: DenseForm,
    spec: QuadratureSpec,
    out_degree: usize,
    rule: Arc<SphereRule>,
    psi_dirs: Arc<Vec<f64>>,
    gl: Arc<GaussLegendre>,
    gl_half: Arc<GaussLegendre>,
    /// `(x-factor, coefficient)` for each correction term
    corrections: Arc<Vec<(crate::field::CompiledField, MultiIndex, f64)>>,
    correction_tail: f64,
}

impl PotentialOperator {
    pub fn new(f: &DenseForm, choice: KernelChoice, spec: &QuadratureSpec) -> Result<Self> {
        spec.validate()?;
        let n = f.n;
        let out_degree = choice.output_degree(n, f.degree)?;
        let kernel = match choice.truncation() {
            Some(m) => truncated_kernel(n, out_degree, m, choice.kind())?,
            None => kernel_phi(n, out_degree, choice.kind())?,
        };
        debug_assert_eq!(kernel.input_degree(), f.degree);
        let rule = SphereRule::new(n, spec.angular);
        let rows = binomial(n, out_degree);
        let cols = binomial(n, f.degree);
        let mut psi_dirs = Vec::with_capacity(rule.len() * rows * cols);
        for k in 0..rule.len() {
            let minus: Vec<f64> = rule.dir(k).iter().map(|v| -v).collect();
            psi_dirs.extend(kernel.psi_singular(&minus));
        }
        let (corrections, correction_tail) = if kernel.corrections.is_empty() {
            (Vec::new(), 0.0)
        } else {
            let (m, tail) = correction_integrals(&kernel, f, spec)?;
            let c = kernel
                .corrections
                .iter()
                .zip(m)
                .map(|(t, v)| (t.x_factor.compile(), t.x_index.clone(), kernel.prefactor * v))
                .collect();
            (c, tail)
        };
        let half = (spec.order / 2).max(2);
        Ok(PotentialOperator {
            kernel,
            f: f.clone(),
            spec: spec.clone(),
            out_degree,
            rule: Arc::new(rule),
            psi_dirs: Arc::new(psi_dirs),
            gl: Arc::new(GaussLegendre::new(spec.order)),
            gl_half: Arc::new(GaussLegendre::new(half)),
            corrections: Arc::new(corrections),
            correction_tail,
        })
    }

    pub fn out_degree(&self) -> usize {
        self.out_degree
    }

    pub fn kernel(&self) -> &KernelDoubleForm {
        &self.kernel
    }

    /// Value at `x` with its tail and singular-patch estimates.
    pub fn eval(&self, x: &[f64]) -> Result<PointValue> {
        let n = self.f.n;
        if x.len() != n {
            return Err(Error::DimensionMismatch(x.len(), n));
        }
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut pv = if r < self.spec.radius { self.eval_polar(x) } else { self.eval_far(x) };
        for (xf, i, c) in self.corrections.iter() {
            pv.value[i.position()] += c * xf.eval(x);
        }
        pv.tail += self.correction_tail;
        Ok(pv)
    }

    /// Value at `x`, failing when the tail estimate exceeds τ.
    pub fn eval_checked(&self, x: &[f64]) -> Result<PointValue> {
        let pv = self.eval(x)?;
        if pv.tail > self.spec.tol {
            return Err(Error::NonConvergence { tail: pv.tail, tol: self.spec.tol });
        }
        Ok(pv)
    }

    /// The potential as a dense form (values only).
    pub fn as_dense(&self) -> DenseForm {
        let me = self.clone();
        let len = binomial(self.f.n, self.out_degree);
        DenseForm::new(self.f.n, self.out_degree, move |x| me.eval(x).map(|p| p.value).unwrap_or(vec![f64::NAN; len]))
    }

    fn eval_polar(&self, x: &[f64]) -> PointValue {
        let n = self.f.n;
        let rows = binomial(n, self.out_degree);
        let cols = self.f.len();
        let spec = &self.spec;
        let big_r = spec.radius;
        let inner_r2 = (0.75 * big_r).powi(2);
        let hpan = big_r / spec.panels as f64;
        let x2: f64 = x.iter().map(|v| v * v).sum();
        let per_dir: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = spec.install(|| {
            (0..self.rule.len())
                .into_par_iter()
                .map(|k| {
                    let omega = self.rule.dir(k);
                    let xw: f64 = x.iter().zip(omega).map(|(a, b)| a * b).sum();
                    let exit = -xw + (xw * xw + big_r * big_r - x2).max(0.0).sqrt();
                    let mut ray = vec![0.0; cols];
                    let mut tail = vec![0.0; cols];
                    let mut patch = vec![0.0; cols];
                    let mut y = vec![0.0; n];
                    let mut add = |rho: f64, w: f64, acc: &mut [f64], tl: Option<&mut [f64]>| {
                        for i in 0..n {
                            y[i] = x[i] + rho * omega[i];
                        }
                        let v = (self.f.f)(&y);
                        for c in 0..cols {
                            acc[c] += w * v[c];
                        }
                        if let Some(tl) = tl {
                            if y.iter().map(|a| a * a).sum::<f64>() > inner_r2 {
                                for c in 0..cols {
                                    tl[c] += w * v[c];
                                }
                            }
                        }
                    };
                    let eps = spec.shell.min(exit);
                    for (rho, w) in self.gl.on(0.0, eps) {
                        add(rho, w, &mut ray, Some(&mut tail));
                    }
                    let mut half = vec![0.0; cols];
                    for (rho, w) in self.gl_half.on(0.0, eps) {
                        add(rho, w, &mut half, None);
                    }
                    for c in 0..cols {
                        patch[c] = ray[c] - half[c];
                    }
                    if exit > eps {
                        let np = ((exit - eps) / hpan).ceil().max(1.0) as usize;
                        let len = (exit - eps) / np as f64;
                        for p in 0..np {
                            let a = eps + p as f64 * len;
                            for (rho, w) in self.gl.on(a, a + len) {
                                add(rho, w, &mut ray, Some(&mut tail));
                            }
                        }
                    }
                    let psi = &self.psi_dirs[k * rows * cols..(k + 1) * rows * cols];
                    let wk = self.rule.weights[k];
                    let apply = |v: &[f64]| -> Vec<f64> {
                        (0..rows)
                            .map(|i| wk * (0..cols).map(|c| psi[i * cols + c] * v[c]).sum::<f64>())
                            .collect()
                    };
                    (apply(&ray), apply(&tail), apply(&patch))
                })
                .collect()
        });
        let mut value = vec![0.0; rows];
        let mut tail = vec![0.0; rows];
        let mut patch = vec![0.0; rows];
        for (v, t, p) in &per_dir {
            for i in 0..rows {
                value[i] += v[i];
                tail[i] += t[i];
                patch[i] += p[i].abs();
            }
        }
        PointValue {
            value,
            tail: tail.iter().map(|v| v.abs()).fold(0.0, f64::max),
            patch: patch.iter().copied().fold(0.0, f64::max),
        }
    }

    fn eval_far(&self, x: &[f64]) -> PointValue {
        let n = self.f.n;
        let rows = binomial(n, self.out_degree);
        let cols = self.f.len();
        let kernel = &self.kernel;
        let f = &self.f.f;
        let res = integrate_ball(n, &self.spec, rows, |y, out| {
            let z: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
            let psi = kernel.psi_singular(&z);
            let v = f(y);
            for i in 0..rows {
                out[i] = (0..cols).map(|c| psi[i * cols + c] * v[c]).sum();
            }
        });
        PointValue { tail: res.tail_estimate(), value: res.value, patch: 0.0 }
    }
}

/// `∫ f ∧ y_form` for every correction term of a truncated kernel.
fn correction_integrals(kernel: &KernelDoubleForm, f: &DenseForm, spec: &QuadratureSpec) -> Result<(Vec<f64>, f64)> {
    let n = f.n;
    // (term, dense position of f's index K, sign, compiled y-coefficient on K^c)
    let mut parts = Vec::new();
    for (t, term) in kernel.corrections.iter().enumerate() {
        for (j, c) in term.y_form.terms() {
            let k = j.complement();
            let (_, neg) = k.wedge(j).expect("disjoint");
            let cf = c.as_symbolic().expect("symbolic").compile();
            parts.push((t, k.position(), if neg { -1.0 } else { 1.0 }, cf));
        }
    }
    let dim = kernel.corrections.len();
    let ff = f.callable();
    let res = integrate_ball(n, spec, dim, |y, out| {
        let v = ff(y);
        for (t, pos, s, cf) in &parts {
            out[*t] += s * v[*pos] * cf.eval(y);
        }
    });
    Ok((res.value.clone(), res.tail_estimate()))
}

/// `Φf`, `Φ̂f`, `Φ_m f` or `Φ̂_m f` at the given points.
pub fn potential(
    f: &DenseForm,
    choice: KernelChoice,
    x_points: &[Vec<f64>],
    spec: &QuadratureSpec,
) -> Result<PotentialResult> {
    let op = PotentialOperator::new(f, choice, spec)?;
    let mut values = Vec::new();
    let (mut tail, mut patch) = (0.0f64, 0.0f64);
    for x in x_points {
        let pv = op.eval_checked(x)?;
        tail = tail.max(pv.tail);
        patch = patch.max(pv.patch);
        values.push(pv.value);
    }
    Ok(PotentialResult {
        degree: op.out_degree,
        points: x_points.to_vec(),
        values,
        tail_estimate: tail,
        singular_patch_estimate: patch,
        spec: spec.clone(),
    })
}

/// Shells used by [`check_decay`].
pub const DECAY_SHELLS: [f64; 3] = [3.0, 6.0, 12.0];

/// Fitted decay exponent of `max_{|x|=r} |f(x)|` against `w(r) = √(1 + r²)`
/// on [`DECAY_SHELLS`] with the 26-point stencil (`+∞` when `f` vanishes there).
pub fn fitted_decay(f: &DenseForm) -> f64 {
    let dirs = crate::spaces::stencil_directions(f.n);
    let mut pts = Vec::new();
    for &r in &DECAY_SHELLS {
        let m = dirs
            .iter()
            .map(|d| {
                let x: Vec<f64> = d.iter().map(|v| v * r).collect();
                f.eval(&x).iter().map(|v| v * v).sum::<f64>().sqrt()
            })
            .fold(0.0, f64::max);
        pts.push(((1.0 + r * r).sqrt().ln(), m.max(1e-300).ln()));
    }
    if pts.iter().all(|p| p.1 <= 1e-300f64.ln() + 1e-9) {
        return f64::INFINITY;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    -sxy / sxx
}

/// Accept data declared to decay like `w^{−(δ+1)}` when the fitted exponent is at
/// least `δ + 1 − 0.25`.
pub fn check_decay(f: &DenseForm, delta: f64) -> Result<f64> {
    let fitted = fitted_decay(f);
    let required = delta + 1.0 - 0.25;
    if fitted < required {
        return Err(Error::DecayViolation { fitted, required });
    }
    Ok(fitted)
}

fn check_closed(f: &DenseForm, points: &[Vec<f64>], tol: f64, codiff: bool) -> Result<()> {
    let h = 1e-3;
    let res = grid_norm(points, |x| if codiff { f.codiff_at(x, h) } else { f.d_at(x, h) });
    if res > tol {
        return Err(Error::Precondition(if codiff {
            format!("not a cocycle for d* (grid residual {res:.3e})")
        } else {
            format!("not a cocycle (grid residual {res:.3e})")
        }));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    /// `‖dΦf − f‖`
    pub d_phi_f: f64,
    /// `‖d*Φf‖`
    pub codiff_phi_f: f64,
    /// `‖d*Φ̂g − g‖`
    pub codiff_phihat_g: f64,
    /// `‖dΦ̂g‖`
    pub d_phihat_g: f64,
    pub budget: f64,
    pub pass: bool,
}

/// Grid residuals of `dΦf = f`, `d*Φf = 0`, `d*Φ̂g = g`, `dΦ̂g = 0` for a closed `f`
/// of degree q+1 and a co-closed `g` of degree q−1.
pub fn lemma_check(
    f: &DenseForm,
    g: &DenseForm,
    delta: f64,
    spec: &QuadratureSpec,
    points: &[Vec<f64>],
) -> Result<LemmaReport> {
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!("δ = {delta} must be positive")));
    }
    let budget = 20.0 * spec.tol;
    let mut rep = LemmaReport {
        d_phi_f: 0.0,
        codiff_phi_f: 0.0,
        codiff_phihat_g: 0.0,
        d_phihat_g: 0.0,
        budget,
        pass: true,
    };
    if f.degree >= 1 {
        check_closed(f, points, spec.tol, false)?;
        check_decay(f, delta)?;
        let phi = PotentialOperator::new(f, KernelChoice::Phi, spec)?.as_dense();
        rep.d_phi_f = grid_norm(points, |x| {
            let a = phi.d_at(x, FD_STEP);
            a.iter().zip(f.eval(x)).map(|(u, v)| u - v).collect()
        });
        rep.codiff_phi_f = grid_norm(points, |x| phi.codiff_at(x, FD_STEP));
    }
    if g.degree + 1 <= g.n && g.degree + 1 >= 1 && g.degree < g.n {
        check_closed(g, points, spec.tol, true)?;
        check_decay(g, delta)?;
        let hat = PotentialOperator::new(g, KernelChoice::PhiHat, spec)?.as_dense();
        rep.codiff_phihat_g = grid_norm(points, |x| {
            let a = hat.codiff_at(x, FD_STEP);
            a.iter().zip(g.eval(x)).map(|(u, v)| u - v).collect()
        });
        rep.d_phihat_g = grid_norm(points, |x| hat.d_at(x, FD_STEP));
    }
    rep.pass = [rep.d_phi_f, rep.codiff_phi_f, rep.codiff_phihat_g, rep.d_phihat_g]
        .iter()
        .all(|v| *v <= budget);
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemReport {
    /// `‖du − f‖`
    pub d_residual: f64,
    /// `‖d*u − g‖`
    pub codiff_residual: f64,
    pub budget: f64,
    pub pass: bool,
}

/// `u = Φf + Φ̂g` for closed `f` (degree q+1) and co-closed `g` (degree q−1);
/// either may be the zero form.
pub fn solve_system(
    f: &DenseForm,
    g: &DenseForm,
    q: usize,
    delta: f64,
    spec: &QuadratureSpec,
    points: &[Vec<f64>],
) -> Result<(DenseForm, SystemReport)> {
    let n = f.n;
    if g.n != n {
        return Err(Error::DimensionMismatch(g.n, n));
    }
    if q > n || f.degree != q + 1 && q < n || (q >= 1 && g.degree != q - 1) {
        return Err(Error::DegreeMismatch(f.degree as isize, q as isize + 1));
    }
    let mut u = DenseForm::zero(n, q);
    if q < n {
        check_closed(f, points, spec.tol, false)?;
        if grid_norm(points, |x| f.eval(x)) > 0.0 {
            check_decay(f, delta)?;
            u = u.add(&PotentialOperator::new(f, KernelChoice::Phi, spec)?.as_dense())?;
        }
    }
    if q >= 1 {
        check_closed(g, points, spec.tol, true)?;
        if grid_norm(points, |x| g.eval(x)) > 0.0 {
            check_decay(g, delta)?;
            u = u.add(&PotentialOperator::new(g, KernelChoice::PhiHat, spec)?.as_dense())?;
        }
    }
    let budget = 20.0 * spec.tol;
    let d_residual = if q < n {
        grid_norm(points, |x| u.d_at(x, FD_STEP).iter().zip(f.eval(x)).map(|(a, b)| a - b).collect())
    } else {
        0.0
    };
    let codiff_residual = if q >= 1 {
        grid_norm(points, |x| u.codiff_at(x, FD_STEP).iter().zip(g.eval(x)).map(|(a, b)| a - b).collect())
    } else {
        0.0
    };
    let pass = d_residual <= budget && codiff_residual <= budget;
    Ok((u, SystemReport { d_residual, codiff_residual, budget, pass }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HodgeReport {
    /// `‖u − v − w‖`
    pub residual: f64,
    /// `‖d*v‖`
    pub codiff_v: f64,
    /// `‖dv − du‖`
    pub dv_minus_du: f64,
    pub exact_norm: f64,
    pub coexact_norm: f64,
    pub budget: f64,
    pub pass: bool,
}

/// `u = d*Φ̂u + dΦu`: returns the coexact part `v = d*Φ̂u`, the exact part
/// `w = dΦu` and grid residuals. Requires decay with `δ > n/2`.
pub fn hodge_decompose(
    u: &DenseForm,
    delta: f64,
    spec: &QuadratureSpec,
    points: &[Vec<f64>],
) -> Result<(DenseForm, DenseForm, HodgeReport)> {
    let n = u.n;
    if !(delta > n as f64 / 2.0) {
        return Err(Error::WindowMismatch(format!(
            "decomposition needs δ > n/2 = {}; got δ = {delta}",
            n as f64 / 2.0
        )));
    }
    let zero_u = grid_norm(points, |x| u.eval(x)) == 0.0;
    if !zero_u {
        check_decay(u, delta)?;
    }
    let q = u.degree;
    let v = if q < n && !zero_u {
        PotentialOperator::new(u, KernelChoice::PhiHat, spec)?.as_dense().fd_codifferential(FD_STEP)
    } else {
        DenseForm::zero(n, q)
    };
    let w = if q >= 1 && !zero_u {
        PotentialOperator::new(u, KernelChoice::Phi, spec)?.as_dense().fd_d(FD_STEP)
    } else {
        DenseForm::zero(n, q)
    };
    let budget = 30.0 * spec.tol;
    let residual = grid_norm(points, |x| {
        let (a, b, c) = (u.eval(x), v.eval(x), w.eval(x));
        (0..a.len()).map(|i| a[i] - b[i] - c[i]).collect()
    });
    let codiff_v = grid_norm(points, |x| v.codiff_at(x, FD_STEP));
    let dv_minus_du = grid_norm(points, |x| {
        v.d_at(x, FD_STEP).iter().zip(u.d_at(x, FD_STEP)).map(|(a, b)| a - b).collect()
    });
    let exact_norm = grid_norm(points, |x| w.eval(x));
    let coexact_norm = grid_norm(points, |x| v.eval(x));
    let pass = residual <= budget && codiff_v <= budget;
    Ok((v, w, HodgeReport { residual, codiff_v, dv_minus_du, exact_norm, coexact_norm, budget, pass }))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentEntry {
    pub k: u32,
    pub j: usize,
    /// 1-based `I`, `|I| = q`
    pub index: Vec<usize>,
    #[serde(serialize_with = "ser_display")]
    pub poly: Poly,
    pub value: f64,
}

fn ser_display<T: std::fmt::Display, S: serde::Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// `c_{k,j,I} = (1/(σₙ N)) ∫ f ∧ d*_y(p(y) ⋆dy_I)` (or `d_y` for the hatted side),
/// with `h = p/√N`, so that the representative is `Σ c p(x) dx_I / ((n+2k−2)ϑ^{n+2k−2})`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentTable {
    pub n: usize,
    pub q: usize,
    pub m: u32,
    pub kind: KernelKind,
    pub entries: Vec<MomentEntry>,
    pub tail_estimate: f64,
}

impl MomentTable {
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|e| e.value.abs()).fold(0.0, f64::max)
    }

    /// Entrywise maximum difference against a table of the same shape.
    pub fn max_gap(&self, o: &MomentTable) -> Result<f64> {
        if self.entries.len() != o.entries.len() {
            return Err(Error::InvalidArgument("moment tables differ in shape".into()));
        }
        Ok(self.entries.iter().zip(&o.entries).map(|(a, b)| (a.value - b.value).abs()).fold(0.0, f64::max))
    }
}

/// The moments of `f` against the harmonic corrections of degree `k ≤ m+1`.
/// `f` of degree q+1 pairs with the `φ` side, degree q−1 with the `φ̂` side.
pub fn moment_functional(f: &DenseForm, m: u32, q: usize, spec: &QuadratureSpec) -> Result<MomentTable> {
    spec.validate()?;
    let n = f.n;
    let kind = if f.degree == q + 1 {
        KernelKind::Phi
    } else if q >= 1 && f.degree == q - 1 {
        KernelKind::PhiHat
    } else {
        return Err(Error::DegreeMismatch(f.degree as isize, q as isize + 1));
    };
    let kernel = truncated_kernel(n, q, m, kind)?;
    let (vals, tail) = correction_integrals(&kernel, f, spec)?;
    if tail > spec.tol {
        return Err(Error::NonConvergence { tail, tol: spec.tol });
    }
    let mut entries = Vec::new();
    for (t, v) in kernel.corrections.iter().zip(vals) {
        let h = &harmonic_basis(n, t.k)?.members[t.j - 1];
        entries.push(MomentEntry {
            k: t.k,
            j: t.j,
            index: t.x_index.one_based(),
            poly: h.poly.clone(),
            value: kernel.prefactor * v / q_to_f64(&h.norm_sq),
        });
    }
    Ok(MomentTable { n, q, m, kind, entries, tail_estimate: tail })
}

/// `Σ c_{k,j,I} p(x) dx_I / ((n+2k−2) ϑ^{n+2k−2}(x))`, with exact rational coefficients.
pub fn representative_from_moments(table: &MomentTable) -> Result<Form> {
    let n = table.n;
    let mut out = Form::try_zero(n, table.q as isize)?;
    for e in &table.entries {
        if e.value == 0.0 {
            continue;
        }
        let c = q_from_f64(e.value);
        let field = representative_factor(n, e.k, &e.poly.scale(&c), &Q::from_integer(1.into()));
        out.add_term(MultiIndex::new(n, &e.index)?, ScalarField::Symbolic(field))?;
    }
    Ok(out)
}

/// `∫ e(x) Δφ(x) dx` for a bump profile `φ`, with `c₂` the `n = 2` log constant;
/// returns the integral and `φ(0)`.
pub fn mollified_identity(n: usize, phi: &BumpField, c2: f64, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    spec.validate()?;
    let mut lap = BumpField::default();
    for i in 0..n {
        lap = lap.add(&phi.partial(i).partial(i));
    }
    let lap = lap.compile();
    let res = integrate_ball(n, spec, 1, |y, out| {
        out[0] = match fundamental_solution_with(n, y, c2) {
            Ok(e) => e * lap.eval(y),
            Err(_) => 0.0,
        };
    });
    Ok((res.value[0], phi.compile().eval(&vec![0.0; n])))
}

/// The default `n = 2` log constant, for reports.
pub fn log_constant() -> f64 {
    LOG_CONSTANT
}
