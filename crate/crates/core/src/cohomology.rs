//! Cocycle tests, the moment solvability conditions, the class projection
//! `d(Φ − Φ_m)` and explicit cohomology generators for the isotropic and
//! anisotropic complexes.

use std::sync::Arc;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::{binomial, codifferential, d, fd_d, l2_inner, Form, MultiIndex};
use crate::field::ScalarField;
use crate::harmonics::{harmonic_basis, harmonic_dim};
use crate::kernels::representative_factor;
use crate::potentials::{
    check_points, grid_norm, moment_functional, representative_from_moments, DenseForm, MomentTable,
};
use crate::poly::{q_from_f64, q_to_f64, qi, Poly, Q};
use crate::quadrature::QuadratureSpec;
use crate::spaces::{classify_delta, time_class_check, TimeClass, TimeClassReport, TimeGrid, WeightWindow, WindowClass};

/// Step and tolerance of the numeric closedness test.
pub const FD_CLOSED_STEP: f64 = 1e-3;
pub const FD_CLOSED_TOL: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CocycleReport {
    pub degree: isize,
    /// exact symbolic test was used
    pub symbolic: bool,
    pub closed: bool,
    /// grid residual of the numeric test (0 on the symbolic path)
    pub residual: f64,
}

fn closed_report(f: &Form, codiff: bool) -> Result<CocycleReport> {
    let degree = f.degree();
    if f.is_symbolic() {
        let image = if codiff { codifferential(f)? } else { d(f)? };
        return Ok(CocycleReport { degree, symbolic: true, closed: image.is_zero_exact() == Some(true), residual: 0.0 });
    }
    let n = f.n();
    if degree < 0 || degree > n as isize {
        return Ok(CocycleReport { degree, symbolic: false, closed: true, residual: 0.0 });
    }
    let dense = DenseForm::from_form(f)?;
    let pts = check_points(n);
    let residual = grid_norm(&pts, |x| {
        if codiff {
            dense.codiff_at(x, FD_CLOSED_STEP)
        } else {
            dense.d_at(x, FD_CLOSED_STEP)
        }
    });
    Ok(CocycleReport { degree, symbolic: false, closed: residual <= FD_CLOSED_TOL, residual })
}

/// `df = 0`: exact when every coefficient is symbolic, otherwise a grid residual.
pub fn cocycle_check(f: &Form) -> Result<CocycleReport> {
    closed_report(f, false)
}

/// `d*g = 0`, as [`cocycle_check`].
pub fn cococycle_check(g: &Form) -> Result<CocycleReport> {
    closed_report(g, true)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairingRow {
    pub k: u32,
    pub j: usize,
    /// 1-based `I`
    pub index: Vec<usize>,
    /// time slice, for the anisotropic mode
    pub t: Option<f64>,
    /// `(f, dh) + (g, d*h)`
    pub value: f64,
    pub tail: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolvabilityReport {
    pub n: usize,
    pub q: usize,
    pub m: u32,
    pub rows: Vec<PairingRow>,
    pub max_abs: f64,
    pub threshold: f64,
    /// all pairings within the threshold
    pub solvable: bool,
}

impl SolvabilityReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,j,index,t,value,tail\n");
        for r in &self.rows {
            let idx: Vec<String> = r.index.iter().map(|i| i.to_string()).collect();
            let t = r.t.map(|t| t.to_string()).unwrap_or_default();
            s.push_str(&format!("{},{},{},{},{:e},{:e}\n", r.k, r.j, idx.join(" "), t, r.value, r.tail));
        }
        s
    }
}

/// `(h, k, j, I)` for the basis of `H_{≤m+1, Λ^q}` in `(k, j, I)` order.
fn pairing_space(n: usize, m: u32, q: usize) -> Result<Vec<(Form, u32, usize, MultiIndex)>> {
    let mut out = Vec::new();
    for k in 0..=m + 1 {
        for h in &harmonic_basis(n, k)?.members {
            for i in MultiIndex::all(n, q) {
                out.push((Form::monomial(i.clone(), ScalarField::from_poly(h.poly.clone())), k, h.j, i));
            }
        }
    }
    Ok(out)
}

fn pairing_rows(f: &Form, g: Option<&Form>, q: usize, m: u32, t: Option<f64>, spec: &QuadratureSpec) -> Result<Vec<PairingRow>> {
    let n = f.n();
    let mut rows = Vec::new();
    for (h, k, j, i) in pairing_space(n, m, q)? {
        let mut value = 0.0;
        let mut tail = 0.0;
        let dh = d(&h)?;
        if !dh.is_empty() {
            let p = l2_inner(f, &dh, spec)?;
            value += p.value;
            tail += p.tail_estimate;
        }
        if let Some(g) = g {
            let ch = codifferential(&h)?;
            if !ch.is_empty() {
                let p = l2_inner(g, &ch, spec)?;
                value += p.value;
                tail += p.tail_estimate;
            }
        }
        rows.push(PairingRow { k, j, index: i.one_based(), t, value, tail });
    }
    Ok(rows)
}

fn check_pair(f: &Form, g: Option<&Form>, q: usize) -> Result<()> {
    let n = f.n();
    if f.degree() != q as isize + 1 {
        return Err(Error::DegreeMismatch(f.degree(), q as isize + 1));
    }
    if !cocycle_check(f)?.closed {
        return Err(Error::Precondition("not a cocycle".into()));
    }
    if let Some(g) = g {
        if g.n() != n {
            return Err(Error::DimensionMismatch(g.n(), n));
        }
        if g.degree() != q as isize - 1 {
            return Err(Error::DegreeMismatch(g.degree(), q as isize - 1));
        }
        if !cococycle_check(g)?.closed {
            return Err(Error::Precondition("not a cocycle for d*".into()));
        }
    }
    Ok(())
}

fn finish(n: usize, q: usize, m: u32, rows: Vec<PairingRow>, spec: &QuadratureSpec) -> SolvabilityReport {
    let max_abs = rows.iter().map(|r| r.value.abs()).fold(0.0, f64::max);
    let threshold = 10.0 * spec.tol;
    SolvabilityReport { n, q, m, rows, max_abs, threshold, solvable: max_abs <= threshold }
}

/// Pair a closed `f` (degree q+1) and co-closed `g` (degree q−1) against every
/// `h ∈ H_{≤m+1, Λ^q}`: `(f, dh) + (g, d*h)`.
pub fn solvability_check(f: &Form, g: Option<&Form>, q: usize, m: u32, spec: &QuadratureSpec) -> Result<SolvabilityReport> {
    check_pair(f, g, q)?;
    let rows = pairing_rows(f, g, q, m, None, spec)?;
    Ok(finish(f.n(), q, m, rows, spec))
}

/// [`solvability_check`] repeated on every slice of a time grid.
pub fn solvability_check_slices(
    f: &crate::spaces::TimeSampledForm,
    g: Option<&crate::spaces::TimeSampledForm>,
    q: usize,
    m: u32,
    times: &TimeGrid,
    spec: &QuadratureSpec,
) -> Result<SolvabilityReport> {
    let mut rows = Vec::new();
    for &t in &times.times {
        let fs = f.slice(t).to_form();
        let gs = g.map(|g| g.slice(t).to_form());
        check_pair(&fs, gs.as_ref(), q)?;
        rows.extend(pairing_rows(&fs, gs.as_ref(), q, m, Some(t), spec)?);
    }
    Ok(finish(f.n, q, m, rows, spec))
}

/// Result of `d(Φ − Φ_m)` on a cocycle. The finite sum follows the printed
/// convention `(Φ − Φ_m)f = + Σ c h(x) dx_I / ((n+2k−2)ϑ^{n+2k−2})`; the kernel
/// definition `φ_m = φ + correction` gives the opposite sign, which spans the
/// same image.
#[derive(Clone, Debug, Serialize)]
pub struct ClassProjection {
    pub window: WeightWindow,
    pub table: Option<MomentTable>,
    #[serde(skip)]
    pub representative: Form,
    #[serde(skip)]
    pub projection: Form,
    /// [`projection_size`] of the projection.
    pub max_coefficient: f64,
    pub max_moment: f64,
    pub sign_convention: &'static str,
}

pub const SIGN_NOTE: &str = "(Phi - Phi_m) f = + sum c h dx_I / ((n+2k-2) theta^(n+2k-2)); the kernel definition yields the opposite sign";

/// `d(Φ − Φ_m) f` for a cocycle `f` of degree q+1 ≥ 1 and declared weight `δ`.
/// In the isomorphism window the projection is zero; any other window than
/// `Injection{m}` is a mismatch.
pub fn class_projection(f: &Form, m: u32, delta: f64, spec: &QuadratureSpec) -> Result<ClassProjection> {
    let n = f.n();
    if f.degree() < 1 || f.degree() > n as isize {
        return Err(Error::DegreeOutOfRange { n, degree: f.degree() });
    }
    let q = f.degree() as usize - 1;
    if !cocycle_check(f)?.closed {
        return Err(Error::Precondition("not a cocycle".into()));
    }
    let window = classify_delta(n, delta)?;
    match window.class {
        WindowClass::Isomorphism => {
            return Ok(ClassProjection {
                window,
                table: None,
                representative: Form::zero(n, q as isize),
                projection: Form::zero(n, q as isize + 1),
                max_coefficient: 0.0,
                max_moment: 0.0,
                sign_convention: SIGN_NOTE,
            })
        }
        WindowClass::Injection { m: wm } if wm == m => {}
        _ => {
            return Err(Error::WindowMismatch(format!(
                "δ = {delta} lies in {window} for n = {n}; projection with m = {m} needs Injection{{m={m}}}"
            )))
        }
    }
    let dense = DenseForm::from_form(f)?;
    let table = moment_functional(&dense, m, q, spec)?;
    let representative = representative_from_moments(&table)?;
    let projection = d(&representative)?;
    Ok(ClassProjection {
        window,
        max_coefficient: projection_size(&projection, delta)?,
        max_moment: table.max_abs(),
        table: Some(table),
        representative,
        projection,
        sign_convention: SIGN_NOTE,
    })
}

/// `max |x|^{δ+1} |f_I(x)|` over exact rational sample points with `2 ≤ |x| ≤ 5`.
pub fn projection_size(f: &Form, delta: f64) -> Result<f64> {
    let points = rational_points(f.n(), 24);
    let vals = exact_features(f, &points)?;
    let per = vals.len() / points.len().max(1);
    let mut best = 0.0f64;
    for (chunk, (_, r)) in vals.chunks(per.max(1)).zip(&points) {
        let scale = q_to_f64(r).powf(delta + 1.0);
        for v in chunk {
            best = best.max(q_to_f64(v).abs() * scale);
        }
    }
    Ok(best)
}

/// Exact rank of a rational matrix (row reduction with first-nonzero pivots).
pub fn exact_rank(rows: &[Vec<Q>]) -> usize {
    let mut a: Vec<Vec<Q>> = rows.to_vec();
    let cols = a.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..a.len()).find(|&r| !a[r][c].is_zero()) else { continue };
        a.swap(rank, p);
        let pivot = a[rank][c].clone();
        for r in 0..a.len() {
            if r != rank && !a[r][c].is_zero() {
                let factor = &a[r][c] / &pivot;
                for cc in c..cols {
                    let v = &a[rank][cc] * &factor;
                    a[r][cc] -= v;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Rational points with rational norm in `2 ≤ |x| ≤ 5`, from inverse
/// stereographic projection of small rational parameters.
pub fn rational_points(n: usize, count: usize) -> Vec<(Vec<Q>, Q)> {
    (0..count)
        .map(|p| {
            let den = (p % 5 + 2) as i64;
            let t: Vec<Q> = (0..n - 1)
                .map(|i| Q::new((((7 * p + 3 * i * i + 5 * i + 1) % 13) as i64 - 6).into(), den.into()))
                .collect();
            let s: Q = t.iter().map(|v| v * v).sum();
            let denom = &s + Q::one();
            let r = Q::new((4 + (p % 7) as i64).into(), 2.into());
            let mut x: Vec<Q> = t.iter().map(|v| v * qi(2) / &denom * &r).collect();
            x.push((&s - Q::one()) / &denom * &r);
            (x, r)
        })
        .collect()
}

fn exact_features(f: &Form, points: &[(Vec<Q>, Q)]) -> Result<Vec<Q>> {
    let n = f.n();
    let deg = f.degree();
    let mut out = Vec::new();
    for (x, r) in points {
        for i in MultiIndex::all(n, deg.max(0) as usize) {
            let v = match f.coeff(&i) {
                None => Q::zero(),
                Some(c) => c
                    .as_symbolic()
                    .ok_or(Error::SampledCoefficient)?
                    .eval_exact(x, r)
                    .ok_or_else(|| Error::InvalidArgument("coefficient has no exact value".into()))?,
            };
            out.push(v);
        }
    }
    Ok(out)
}

/// Exact dimension of the span of symbolic forms restricted to `|x| ≥ 2`,
/// evaluated at rational points of rational norm.
pub fn span_rank(forms: &[Form]) -> Result<usize> {
    let Some(first) = forms.first() else { return Ok(0) };
    let cols = binomial(first.n(), first.degree().max(0) as usize).max(1);
    let points = rational_points(first.n(), forms.len() / cols + 6);
    let rows = forms.iter().map(|f| exact_features(f, &points)).collect::<Result<Vec<_>>>()?;
    Ok(exact_rank(&rows))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeneratorLabel {
    pub k: u32,
    pub j: usize,
    /// 1-based `I`, `|I| = q_out − 1`
    pub index: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CohomologyBasis {
    pub n: usize,
    pub q_out: usize,
    pub m: u32,
    pub labels: Vec<GeneratorLabel>,
    #[serde(skip)]
    pub members: Vec<Form>,
    pub rank: usize,
    pub bound: usize,
}

/// The generator `d(h(x) dx_I / ((n+2k−2)ϑ^{n+2k−2}(x)))` for a primitive harmonic `h`.
pub fn generator(n: usize, k: u32, h: &Poly, index: &MultiIndex) -> Result<Form> {
    let c = representative_factor(n, k, h, &Q::one());
    d(&Form::monomial(index.clone(), ScalarField::Symbolic(c)))
}

/// All generators `d(h_k^{(j)} dx_I / ((n+2k−2)ϑ^{n+2k−2}))`, `1 ≤ k ≤ m+1`,
/// `|I| = q_out − 1`, with the exact rank of their span and the bound
/// `C(n, q_out−1) Σ J(k)`.
pub fn representative_basis(n: usize, q_out: usize, m: u32) -> Result<CohomologyBasis> {
    if q_out < 1 || q_out > n {
        return Err(Error::DegreeOutOfRange { n, degree: q_out as isize });
    }
    let mut labels = Vec::new();
    let mut members = Vec::new();
    let mut total_j = 0;
    for k in 1..=m + 1 {
        total_j += harmonic_dim(n, k as usize)?;
        for h in &harmonic_basis(n, k)?.members {
            for i in MultiIndex::all(n, q_out - 1) {
                members.push(generator(n, k, &h.poly, &i)?);
                labels.push(GeneratorLabel { k, j: h.j, index: i.one_based() });
            }
        }
    }
    let rank = span_rank(&members)?;
    Ok(CohomologyBasis { n, q_out, m, labels, members, rank, bound: binomial(n, q_out - 1) * total_j })
}

/// Coefficient of the `(k, j)` generator in the moment table of its own
/// generator for `q_out = 1`: `−k/(n+2k−2)` on that entry, zero elsewhere.
pub fn generator_moment_oracle(n: usize, k: u32) -> f64 {
    -(k as f64) / (n as f64 + 2.0 * k as f64 - 2.0)
}

pub type TimeCoefficient = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `d(Σ a_I(t) h(x) dx_I / ((n+2k−2)ϑ^{n+2k−2}))` with one time coefficient per generator.
#[derive(Clone)]
pub struct AnisoRepresentative {
    pub base: CohomologyBasis,
    pub coefficients: Vec<TimeCoefficient>,
    pub t_max: f64,
    pub class: TimeClass,
    pub class_reports: Vec<TimeClassReport>,
}

impl std::fmt::Debug for AnisoRepresentative {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AnisoRepresentative")
            .field("base", &self.base)
            .field("t_max", &self.t_max)
            .field("class", &self.class)
            .finish()
    }
}

impl AnisoRepresentative {
    /// The symbolic slice at time `t` (coefficients rounded to exact rationals).
    pub fn slice(&self, t: f64) -> Result<Form> {
        let first = &self.base.members[0];
        let mut out = Form::zero(first.n(), first.degree());
        for (g, a) in self.base.members.iter().zip(&self.coefficients) {
            let c = q_from_f64(a(t));
            if !c.is_zero() {
                out = out.add(&g.scale(&c))?;
            }
        }
        Ok(out)
    }

    /// Slice is closed and lies in the span of the isotropic generators (exact).
    pub fn slice_coherent(&self, t: f64) -> Result<bool> {
        let s = self.slice(t)?;
        if d(&s)?.is_zero_exact() != Some(true) {
            return Ok(false);
        }
        let mut all = self.base.members.clone();
        all.push(s);
        Ok(span_rank(&all)? == self.base.rank)
    }
}

/// Attach time coefficients (one per generator, in basis order) after checking
/// each against its declared class on refining time grids.
pub fn aniso_representative_basis(
    n: usize,
    q_out: usize,
    m: u32,
    coefficients: Vec<TimeCoefficient>,
    t_max: f64,
    class: TimeClass,
) -> Result<AnisoRepresentative> {
    let base = representative_basis(n, q_out, m)?;
    if coefficients.len() != base.members.len() {
        return Err(Error::InvalidArgument(format!(
            "{} time coefficients for {} generators",
            coefficients.len(),
            base.members.len()
        )));
    }
    let mut class_reports = Vec::new();
    for a in &coefficients {
        let r = time_class_check(&**a, t_max, class)?;
        if !r.accepted {
            return Err(Error::TimeClassRejected { estimate: *r.estimates.last().unwrap(), budget: r.budget });
        }
        class_reports.push(r);
    }
    Ok(AnisoRepresentative { base, coefficients, t_max, class, class_reports })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConsistencyReport {
    /// [`projection_size`] of the difference of the two projections
    pub gap: f64,
    pub budget: f64,
    pub pass: bool,
}

/// Projections of `g` and `g + du` agree within `20τ`.
pub fn class_map_consistency(g: &Form, u: &Form, m: u32, delta: f64, spec: &QuadratureSpec) -> Result<ConsistencyReport> {
    let du = if u.is_symbolic() { d(u)? } else { fd_d(u, 1e-4)? };
    let a = class_projection(g, m, delta, spec)?;
    let b = class_projection(&g.add(&du)?, m, delta, spec)?;
    let gap = projection_size(&a.projection.sub(&b.projection)?, delta)?;
    let budget = 20.0 * spec.tol;
    Ok(ConsistencyReport { gap, budget, pass: gap <= budget })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistinctReport {
    /// the symbolic projections differ
    pub symbolically_distinct: bool,
    /// exact rank of the two projections
    pub rank: usize,
    pub max_gap: f64,
}

pub fn compare_projections(a: &ClassProjection, b: &ClassProjection) -> Result<DistinctReport> {
    let equal = a.projection.equals_exact(&b.projection).unwrap_or(false);
    let rank = span_rank(&[a.projection.clone(), b.projection.clone()])?;
    let max_gap = match (&a.table, &b.table) {
        (Some(x), Some(y)) => x.max_gap(y)?,
        _ => 0.0,
    };
    Ok(DistinctReport { symbolically_distinct: !equal, rank, max_gap })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(n: usize, v: &[usize]) -> MultiIndex {
        MultiIndex::new(n, v).unwrap()
    }

    #[test]
    fn cocycle_examples() {
        let n = 2;
        let u = Form::function(n, ScalarField::from_poly(&Poly::var(n, 0) * &Poly::var(n, 1)));
        let du = d(&u).unwrap();
        let r = cocycle_check(&du).unwrap();
        assert!(r.symbolic && r.closed);
        let f = Form::monomial(idx(n, &[1]), ScalarField::from_poly(Poly::var(n, 1)));
        assert!(!cocycle_check(&f).unwrap().closed);
        let df = d(&f).unwrap();
        let v = df.symbolic_coeff(&idx(n, &[1, 2])).unwrap().as_poly().unwrap();
        assert_eq!(v, Poly::constant(n, qi(-1)));
        let s = Form::monomial(idx(n, &[1]), ScalarField::sampled(|x| x[1]));
        let r = cocycle_check(&s).unwrap();
        assert!(!r.symbolic && !r.closed);
    }

    #[test]
    fn generator_formula() {
        let n = 3;
        let g = generator(n, 1, &Poly::var(n, 0), &MultiIndex::empty(n)).unwrap();
        assert_eq!(cocycle_check(&g).unwrap().closed, true);
        for (x, r) in rational_points(n, 6) {
            let r3 = &r * &r * &r;
            let r5 = &r3 * &r * &r;
            for i in 0..n {
                let got = g.symbolic_coeff(&MultiIndex::from_zero_based(n, vec![i]).unwrap()).unwrap().eval_exact(&x, &r).unwrap();
                let delta = if i == 0 { Q::one() / &r3 } else { Q::zero() };
                let want = (delta - qi(3) * &x[0] * &x[i] / &r5) / qi(3);
                assert_eq!(got, want);
            }
        }
    }

    #[test]
    fn rational_points_have_rational_norm() {
        for (x, r) in rational_points(4, 10) {
            let s: Q = x.iter().map(|v| v * v).sum();
            assert_eq!(s, &r * &r);
            assert!(r >= qi(2));
        }
    }

    #[test]
    fn basis_rank_and_bound() {
        let b = representative_basis(3, 1, 0).unwrap();
        assert_eq!(b.members.len(), 3);
        assert_eq!(b.bound, 3);
        assert!(b.rank <= 3);
        assert_eq!(b.rank, 3);
        for g in &b.members {
            assert!(cocycle_check(g).unwrap().closed);
        }
        let mut rev = b.members.clone();
        rev.reverse();
        assert_eq!(span_rank(&rev).unwrap(), b.rank);
        let b1 = representative_basis(3, 1, 1).unwrap();
        assert!(b1.members.len() > b.members.len());
        assert_eq!(b1.rank, 8);
    }

    #[test]
    fn exact_rank_basics() {
        let rows = vec![vec![qi(1), qi(2)], vec![qi(2), qi(4)], vec![qi(0), qi(1)]];
        assert_eq!(exact_rank(&rows), 2);
        assert_eq!(exact_rank(&[]), 0);
    }

    #[test]
    fn window_rules() {
        let spec = QuadratureSpec::default();
        let g = generator(3, 1, &Poly::var(3, 0), &MultiIndex::empty(3)).unwrap();
        let p = class_projection(&g, 0, 1.5, &spec).unwrap();
        assert!(p.projection.is_empty() && p.max_coefficient == 0.0);
        assert!(matches!(class_projection(&g, 1, 2.5, &spec), Err(Error::WindowMismatch(_))));
        assert!(matches!(class_projection(&g, 0, 2.0, &spec), Err(Error::WindowMismatch(_))));
    }

    #[test]
    fn aniso_slices() {
        let coeffs: Vec<TimeCoefficient> = vec![Arc::new(|t| t), Arc::new(|_| 1.0), Arc::new(|_| 0.0)];
        let a = aniso_representative_basis(3, 1, 0, coeffs, 1.0, TimeClass::Bounded { s: 0 }).unwrap();
        let half = a.slice(0.5).unwrap();
        let want = a.base.members[0].scale(&Q::new(1.into(), 2.into())).add(&a.base.members[1]).unwrap();
        assert!(half.equals_exact(&want).unwrap());
        assert!(a.slice_coherent(0.5).unwrap());
        let bad: Vec<TimeCoefficient> = vec![Arc::new(|t: f64| t.powf(0.125)); 3];
        assert!(matches!(
            aniso_representative_basis(3, 1, 0, bad, 1.0, TimeClass::Holder { s: 0, mu: 0.25 }),
            Err(Error::TimeClassRejected { .. })
        ));
    }
}
