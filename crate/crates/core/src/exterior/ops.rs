use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{binomial, Form, MultiIndex};
use crate::error::{Error, Result};
use crate::field::{SampledField, ScalarField, SymField, Validity};
use crate::poly::{Poly, Q};
use crate::quadrature::{integrate_ball, QuadratureSpec};

fn signed_field(c: &ScalarField, negative: bool) -> ScalarField {
    if negative {
        c.neg()
    } else {
        c.clone()
    }
}

fn check_n(a: &Form, b: &Form) -> Result<()> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch(a.n(), b.n()));
    }
    Ok(())
}

fn dense_len(n: usize, degree: isize) -> usize {
    if degree < 0 || degree > n as isize {
        0
    } else {
        binomial(n, degree as usize)
    }
}

pub fn wedge(a: &Form, b: &Form) -> Result<Form> {
    check_n(a, b)?;
    let n = a.n();
    let mut out = Form::zero(n, a.degree() + b.degree());
    for (i, ca) in a.terms() {
        for (j, cb) in b.terms() {
            if let Some((k, neg)) = i.wedge(j) {
                out.add_term(k, signed_field(&ca.mul(cb), neg))?;
            }
        }
    }
    Ok(out)
}

/// `⋆dx_I = ε · dx_{I^c}` with `dx_I ∧ ⋆dx_I = dx_1 ∧ … ∧ dx_n`.
pub fn hodge_star(a: &Form) -> Form {
    let n = a.n();
    let mut out = Form::zero(n, n as isize - a.degree());
    if a.degree() < 0 || a.degree() > n as isize {
        return out;
    }
    for (i, c) in a.terms() {
        let comp = i.complement();
        let (_, neg) = i.wedge(&comp).expect("complement is disjoint");
        out.add_term(comp, signed_field(c, neg)).expect("degree matches");
    }
    out
}

fn symbolic_terms(a: &Form) -> Result<Vec<(&MultiIndex, &SymField)>> {
    a.terms()
        .map(|(i, c)| c.as_symbolic().map(|s| (i, s)).ok_or(Error::SampledCoefficient))
        .collect()
}

/// Exterior derivative `Σ ∂_j a_I dx_j ∧ dx_I`.
pub fn d(a: &Form) -> Result<Form> {
    let n = a.n();
    let mut out = Form::zero(n, a.degree() + 1);
    for (i, c) in symbolic_terms(a)? {
        for j in 0..n {
            if let Some((k, neg)) = i.insert(j) {
                let dc = c.partial(j);
                if !dc.is_zero() {
                    let dc = if neg { dc.neg() } else { dc };
                    out.add_term(k, ScalarField::Symbolic(dc))?;
                }
            }
        }
    }
    Ok(out)
}

/// The sign `s(n, q)` in `d* = s ⋆d⋆` on q-forms, derived from the ⋆⋆ sign on
/// (q−1)-forms.
pub fn codiff_sign(n: usize, q: usize) -> i32 {
    assert!(q >= 1 && q <= n);
    let probe = Form::basis(MultiIndex::from_zero_based(n, (0..q - 1).collect()).unwrap());
    let back = hodge_star(&hodge_star(&probe));
    let c = back
        .symbolic_coeff(&MultiIndex::from_zero_based(n, (0..q - 1).collect()).unwrap())
        .and_then(SymField::as_poly)
        .map(|p| p.coeff(&vec![0; n]))
        .expect("⋆⋆ of a basis form is ± itself");
    let star_star: i32 = if c.is_positive() { 1 } else { -1 };
    if q % 2 == 0 {
        star_star
    } else {
        -star_star
    }
}

/// Codifferential `d* = s(n,q) ⋆d⋆`; 0-forms map to the empty form of degree −1.
pub fn codifferential(a: &Form) -> Result<Form> {
    let n = a.n();
    let q = a.degree();
    symbolic_terms(a)?;
    if q <= 0 || q > n as isize {
        return Ok(Form::zero(n, (q - 1).max(-1)));
    }
    let s = codiff_sign(n, q as usize);
    let out = hodge_star(&d(&hodge_star(a))?);
    Ok(if s < 0 { out.neg() } else { out })
}

/// Componentwise Laplacian `Σ_I Δa_I dx_I`; equals `−(dd* + d*d)`.
pub fn laplacian(a: &Form) -> Result<Form> {
    let mut out = Form::zero(a.n(), a.degree());
    for (i, c) in symbolic_terms(a)? {
        out.add_term(i.clone(), ScalarField::Symbolic(c.laplacian()))?;
    }
    Ok(out)
}

/// One first-order contribution `out[out] += sign · ∂_axis in[input]` of a
/// constant-coefficient operator on dense coefficient vectors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivTerm {
    pub out: usize,
    pub input: usize,
    pub axis: usize,
    pub sign: f64,
}

type TermCache = Mutex<HashMap<(usize, usize, bool), Arc<Vec<DerivTerm>>>>;

fn terms_cached(n: usize, q: usize, codiff: bool) -> Arc<Vec<DerivTerm>> {
    static CACHE: OnceLock<TermCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().unwrap().get(&(n, q, codiff)) {
        return t.clone();
    }
    // apply the symbolic operator to x_axis dx_I and read off the constant coefficients
    let mut terms = Vec::new();
    for input in MultiIndex::all(n, q) {
        for axis in 0..n {
            let probe = Form::monomial(input.clone(), ScalarField::from_poly(Poly::var(n, axis)));
            let image = if codiff { codifferential(&probe) } else { d(&probe) }.expect("symbolic");
            for (k, c) in image.terms() {
                let v = c
                    .as_symbolic()
                    .and_then(SymField::as_poly)
                    .map(|p| p.coeff(&vec![0; n]))
                    .unwrap_or_else(Q::zero);
                if !v.is_zero() {
                    terms.push(DerivTerm {
                        out: k.position(),
                        input: input.position(),
                        axis,
                        sign: v.to_f64().unwrap_or(0.0),
                    });
                }
            }
        }
    }
    let terms = Arc::new(terms);
    cache.lock().unwrap().insert((n, q, codiff), terms.clone());
    terms
}

/// Dense structure of `d` on q-forms.
pub fn d_terms(n: usize, q: usize) -> Arc<Vec<DerivTerm>> {
    terms_cached(n, q, false)
}

/// Dense structure of `d*` on q-forms.
pub fn codiff_terms(n: usize, q: usize) -> Arc<Vec<DerivTerm>> {
    terms_cached(n, q, true)
}

fn fd_apply(
    f: &dyn Fn(&[f64]) -> Vec<f64>,
    terms: &[DerivTerm],
    n: usize,
    out_len: usize,
    x: &[f64],
    step: f64,
) -> Vec<f64> {
    let mut grads: Vec<Option<Vec<f64>>> = vec![None; n];
    let mut out = vec![0.0; out_len];
    let mut y = x.to_vec();
    for t in terms {
        if grads[t.axis].is_none() {
            y[t.axis] = x[t.axis] + step;
            let fp = f(&y);
            y[t.axis] = x[t.axis] - step;
            let fm = f(&y);
            y[t.axis] = x[t.axis];
            grads[t.axis] = Some(fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * step)).collect());
        }
        out[t.out] += t.sign * grads[t.axis].as_ref().unwrap()[t.input];
    }
    out
}

/// Central-difference `d` of a dense q-form evaluator at `x`.
pub fn fd_d_at(f: &dyn Fn(&[f64]) -> Vec<f64>, n: usize, q: usize, x: &[f64], step: f64) -> Vec<f64> {
    if q >= n {
        return Vec::new();
    }
    fd_apply(f, &d_terms(n, q), n, binomial(n, q + 1), x, step)
}

/// Central-difference `d*` of a dense q-form evaluator at `x`.
pub fn fd_codifferential_at(
    f: &dyn Fn(&[f64]) -> Vec<f64>,
    n: usize,
    q: usize,
    x: &[f64],
    step: f64,
) -> Vec<f64> {
    if q == 0 {
        return Vec::new();
    }
    fd_apply(f, &codiff_terms(n, q), n, binomial(n, q - 1), x, step)
}

fn shrink(v: Validity, step: f64) -> Validity {
    match v {
        Validity::Everywhere => Validity::Everywhere,
        Validity::Ball(r) => Validity::Ball(r - step),
        Validity::Exterior(r) => Validity::Exterior(r + step),
    }
}

fn fd_form(a: &Form, step: f64, codiff: bool) -> Result<Form> {
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!("step {step} must be positive")));
    }
    let n = a.n();
    let q = a.degree();
    let out_degree = if codiff { q - 1 } else { q + 1 };
    let mut out = Form::zero(n, out_degree);
    if q < 0 || q > n as isize || dense_len(n, out_degree) == 0 {
        return Ok(out);
    }
    let mut validity = Validity::Everywhere;
    let mut smoothness = u32::MAX;
    for (_, c) in a.terms() {
        if let ScalarField::Sampled(s) = c {
            validity = match (validity, s.validity) {
                (Validity::Everywhere, v) | (v, Validity::Everywhere) => v,
                (Validity::Ball(r1), Validity::Ball(r2)) => Validity::Ball(r1.min(r2)),
                (Validity::Exterior(r1), Validity::Exterior(r2)) => Validity::Exterior(r1.max(r2)),
                (Validity::Ball(r), _) | (_, Validity::Ball(r)) => Validity::Ball(r),
            };
            smoothness = smoothness.min(s.smoothness);
        }
    }
    let validity = shrink(validity, step);
    let eval = Arc::new(a.evaluator());
    let qq = q as usize;
    for k in MultiIndex::all(n, out_degree as usize) {
        let pos = k.position();
        let eval = eval.clone();
        let coeff = move |x: &[f64]| {
            let v = if codiff {
                fd_codifferential_at(&*eval, n, qq, x, step)
            } else {
                fd_d_at(&*eval, n, qq, x, step)
            };
            v[pos]
        };
        let field = SampledField::new(coeff)
            .with_validity(validity)
            .with_smoothness(smoothness.saturating_sub(1));
        out.add_term(k, ScalarField::Sampled(field))?;
    }
    Ok(out)
}

/// Central-difference exterior derivative with sampled output coefficients.
pub fn fd_d(a: &Form, step: f64) -> Result<Form> {
    fd_form(a, step, false)
}

/// Central-difference codifferential with sampled output coefficients.
pub fn fd_codifferential(a: &Form, step: f64) -> Result<Form> {
    fd_form(a, step, true)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct L2Inner {
    pub value: f64,
    pub tail_estimate: f64,
}

/// `∫_{|x| ≤ R} Σ_I a_I b_I dx`; fails when the tail estimate exceeds τ.
pub fn l2_inner(a: &Form, b: &Form, spec: &QuadratureSpec) -> Result<L2Inner> {
    check_n(a, b)?;
    if a.degree() != b.degree() {
        return Err(Error::DegreeMismatch(a.degree(), b.degree()));
    }
    spec.validate()?;
    let n = a.n();
    let shared: Vec<&MultiIndex> = a.terms().map(|(i, _)| i).filter(|i| b.coeff(i).is_some()).collect();
    if shared.is_empty() {
        return Ok(L2Inner { value: 0.0, tail_estimate: 0.0 });
    }
    let (fa, fb) = (a.evaluator(), b.evaluator());
    let res = integrate_ball(n, spec, 1, |y, out| {
        let (va, vb) = (fa(y), fb(y));
        out[0] = va.iter().zip(&vb).map(|(s, t)| s * t).sum();
    });
    let tail = res.tail_estimate();
    if tail > spec.tol {
        return Err(Error::NonConvergence { tail, tol: spec.tol });
    }
    Ok(L2Inner { value: res.value[0], tail_estimate: tail })
}
