//! The fundamental solution of the Laplacian, the double-form kernels built
//! from it, its harmonic expansion, and the ϑ-truncated kernels.
//!
//! Every kernel coefficient is stored as a [`SymField`] in `z = x − y` times the
//! global factor `1/σₙ` (which is `1/(2π)` for `n = 2`). Differentiation in `y`
//! is `−∂_z`.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, OnceLock, RwLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{binomial, codifferential, d, hodge_star, Form, MultiIndex};
use crate::field::{CompiledField, RadialFactor, ScalarField, SymField};
use crate::harmonics::harmonic_basis;
use crate::poly::{q_from_f64, qi, Poly, Q};
use crate::quadrature::sphere_area;

pub use crate::theta::theta;

/// Coefficient multiplying `ln|x|` for `n = 2`.
pub const LOG_CONSTANT: f64 = 1.0 / (2.0 * std::f64::consts::PI);

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `e(x)`: `|x|^{2−n}/((2−n)σₙ)` for n ≥ 3, `ln|x|/(2π)` for n = 2.
pub fn fundamental_solution(n: usize, x: &[f64]) -> Result<f64> {
    fundamental_solution_with(n, x, LOG_CONSTANT)
}

/// As [`fundamental_solution`], with an explicit constant `c₂` in front of `ln|x|`
/// when `n = 2`.
pub fn fundamental_solution_with(n: usize, x: &[f64], c2: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("n = {n}: need n ≥ 2")));
    }
    if x.len() != n {
        return Err(Error::DimensionMismatch(x.len(), n));
    }
    let r = norm(x);
    if r == 0.0 {
        return Err(Error::Singularity("e(x) at x = 0".into()));
    }
    Ok(if n == 2 {
        c2 * r.ln()
    } else {
        r.powi(2 - n as i32) / ((2.0 - n as f64) * sphere_area(n))
    })
}

/// `σₙ · e(z)` as an exact field.
pub fn fundamental_field(n: usize) -> SymField {
    if n == 2 {
        SymField::simple(Poly::one(2), 0, 0, true)
    } else {
        SymField::term(Poly::constant(n, Q::new(1.into(), (2 - n as i64).into())), RadialFactor::radial(2 - n as i32))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KernelKind {
    /// `e_q`
    E,
    /// `φ_q = d*_y e_q`
    Phi,
    /// `φ̂_q = d_y e_q`
    PhiHat,
}

/// A smooth correction `x_factor(x) · y_form(y) ⊗ dx_I` of a truncated kernel.
#[derive(Clone, Debug)]
pub struct CorrectionTerm {
    pub k: u32,
    pub j: usize,
    pub x_index: MultiIndex,
    /// `p(x)/(N (n+2k−2) ϑ^{n+2k−2}(x))`
    pub x_factor: SymField,
    /// `d*_y(p(y) ⋆dy_I)` or `d_y(p(y) ⋆dy_I)`
    pub y_form: Form,
}

/// `Σ_{I,J} κ_{I,J}(x, y) dy_J ⊗ dx_I`, scaled by `prefactor`.
#[derive(Clone, Debug)]
pub struct KernelDoubleForm {
    pub n: usize,
    /// degree in `x`
    pub q: usize,
    /// degree in `y`
    pub y_degree: usize,
    pub kind: KernelKind,
    /// truncation order, if corrected
    pub m: Option<u32>,
    pub prefactor: f64,
    /// coefficients as functions of `z = x − y`
    pub entries: BTreeMap<(MultiIndex, MultiIndex), SymField>,
    pub corrections: Vec<CorrectionTerm>,
    compiled: Vec<(usize, usize, CompiledField)>,
}

impl KernelDoubleForm {
    fn new(
        n: usize,
        q: usize,
        y_degree: usize,
        kind: KernelKind,
        entries: BTreeMap<(MultiIndex, MultiIndex), SymField>,
    ) -> Self {
        // ψ_{I,K} = sign(K, K^c) κ_{I,K^c} so that f ∧ κ = Σ f_K ψ_{I,K} vol
        let compiled = entries
            .iter()
            .map(|((i, j), c)| {
                let k = j.complement();
                let (_, neg) = k.wedge(j).expect("disjoint");
                let c = if neg { c.neg() } else { c.clone() };
                (i.position(), k.position(), c.compile())
            })
            .collect();
        KernelDoubleForm {
            n,
            q,
            y_degree,
            kind,
            m: None,
            prefactor: 1.0 / sphere_area(n),
            entries,
            corrections: Vec::new(),
            compiled,
        }
    }

    /// Degree of the forms this kernel integrates against: `n − y_degree`.
    pub fn input_degree(&self) -> usize {
        self.n - self.y_degree
    }

    /// `ψ(z)` as a row-major `C(n,q) × C(n, input_degree)` matrix, singular part only:
    /// `(f ∧ κ)(y) = Σ_{I,K} f_K(y) ψ_{I,K}(x − y) dx_I ⊗ vol_y`.
    pub fn psi_singular(&self, z: &[f64]) -> Vec<f64> {
        let cols = binomial(self.n, self.input_degree());
        let mut out = vec![0.0; binomial(self.n, self.q) * cols];
        for (i, k, c) in &self.compiled {
            out[i * cols + k] = self.prefactor * c.eval(z);
        }
        out
    }

    /// Full `ψ(x, y)`, corrections included.
    pub fn psi(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let z: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        let mut out = self.psi_singular(&z);
        let cols = binomial(self.n, self.input_degree());
        for t in &self.corrections {
            let xf = self.prefactor * t.x_factor.eval_f64(x);
            for (jdx, c) in t.y_form.terms() {
                let k = jdx.complement();
                let (_, neg) = k.wedge(jdx).expect("disjoint");
                let v = c.eval(y).unwrap_or(0.0);
                out[t.x_index.position() * cols + k.position()] += if neg { -xf * v } else { xf * v };
            }
        }
        out
    }

    /// Apply `d*_y` (`Phi`) or `d_y` to every entry, for structural checks.
    pub fn differentiate_y(&self, codiff: bool) -> Result<BTreeMap<MultiIndex, Form>> {
        let mut by_x: BTreeMap<MultiIndex, Form> = BTreeMap::new();
        for ((i, j), c) in &self.entries {
            let f = by_x.entry(i.clone()).or_insert_with(|| Form::zero(self.n, self.y_degree as isize));
            f.add_term(j.clone(), ScalarField::Symbolic(c.clone()))?;
        }
        let mut out = BTreeMap::new();
        for (i, f) in by_x {
            let g = if codiff { codifferential(&f)? } else { d(&f)? };
            out.insert(i, g.neg());
        }
        Ok(out)
    }
}

/// `e_q(x, y) = Σ_I e(x − y) (⋆dy_I) ⊗ dx_I`.
pub fn kernel_e_q(n: usize, q: usize) -> Result<KernelDoubleForm> {
    check(n, q)?;
    let e = fundamental_field(n);
    let mut entries = BTreeMap::new();
    for i in MultiIndex::all(n, q) {
        let star = hodge_star(&Form::basis(i.clone()));
        for (j, c) in star.terms() {
            let sgn = c.as_symbolic().and_then(SymField::as_poly).expect("constant").coeff(&vec![0; n]);
            entries.insert((i.clone(), j.clone()), e.scale(&sgn));
        }
    }
    Ok(KernelDoubleForm::new(n, q, n - q, KernelKind::E, entries))
}

fn check(n: usize, q: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("n = {n}: need n ≥ 2")));
    }
    if q > n {
        return Err(Error::DegreeOutOfRange { n, degree: q as isize });
    }
    Ok(())
}

/// Sign picked up when the x-covector `dx_I` (|I| = q) is moved in front of the
/// y-form in `f(y) ∧ φ(x, y)`: `(−1)^q` for `φ`, `(−1)^{q−1}` for `φ̂`.
pub fn contraction_negative(kind: KernelKind, q: usize) -> bool {
    match kind {
        KernelKind::PhiHat => q % 2 == 0,
        _ => q % 2 == 1,
    }
}

fn build_phi(n: usize, q: usize, kind: KernelKind) -> Result<KernelDoubleForm> {
    let e = fundamental_field(n);
    let mut entries = BTreeMap::new();
    let y_degree = match kind {
        KernelKind::Phi => (n - q) as isize - 1,
        _ => (n - q) as isize + 1,
    };
    for i in MultiIndex::all(n, q) {
        let base = hodge_star(&Form::basis(i.clone())).mul_field(&ScalarField::Symbolic(e.clone()));
        // one y-derivative: ∂_y = −∂_z
        let g = match kind {
            KernelKind::Phi => codifferential(&base)?,
            _ => d(&base)?,
        };
        let g = if contraction_negative(kind, q) { g } else { g.neg() };
        for (j, c) in g.terms() {
            let c = c.as_symbolic().expect("symbolic").canonical();
            if !c.is_zero() {
                entries.insert((i.clone(), j.clone()), c);
            }
        }
    }
    if y_degree < 0 || y_degree > n as isize {
        return Ok(KernelDoubleForm::new(n, q, 0, kind, BTreeMap::new()));
    }
    Ok(KernelDoubleForm::new(n, q, y_degree as usize, kind, entries))
}

type KernelMemo = RwLock<HashMap<(usize, usize, KernelKind, Option<u32>), Arc<KernelDoubleForm>>>;

fn memo() -> &'static KernelMemo {
    static MEMO: OnceLock<KernelMemo> = OnceLock::new();
    MEMO.get_or_init(Default::default)
}

/// `φ_q` (`Phi`) or `φ̂_q` (`PhiHat`); `E` yields `e_q`.
pub fn kernel_phi(n: usize, q: usize, kind: KernelKind) -> Result<Arc<KernelDoubleForm>> {
    check(n, q)?;
    let key = (n, q, kind, None);
    if let Some(k) = memo().read().unwrap().get(&key) {
        return Ok(k.clone());
    }
    let k = Arc::new(match kind {
        KernelKind::E => kernel_e_q(n, q)?,
        _ => build_phi(n, q, kind)?,
    });
    Ok(memo().write().unwrap().entry(key).or_insert(k).clone())
}

/// `ϑ^{−(n+2k−2)} p / (N (n+2k−2))`, the x-factor shared by the truncated kernels
/// and the cohomology representatives.
pub fn representative_factor(n: usize, k: u32, p: &Poly, norm_sq: &Q) -> SymField {
    let w = n as i64 + 2 * k as i64 - 2;
    SymField::term(p.scale(&(Q::from_integer(1.into()) / (norm_sq * qi(w)))), RadialFactor::theta_pow(-(w as i32)))
}

/// `φ_{m,q}` / `φ̂_{m,q}`: the kernel plus the ϑ-desingularized harmonic corrections
/// for `1 ≤ k ≤ m+1`.
pub fn truncated_kernel(n: usize, q: usize, m: u32, kind: KernelKind) -> Result<Arc<KernelDoubleForm>> {
    if kind == KernelKind::E {
        return Err(Error::InvalidArgument("truncation applies to phi and phi_hat".into()));
    }
    check(n, q)?;
    let key = (n, q, kind, Some(m));
    if let Some(k) = memo().read().unwrap().get(&key) {
        return Ok(k.clone());
    }
    let mut kern = (*kernel_phi(n, q, kind)?).clone();
    kern.m = Some(m);
    for k in 1..=m + 1 {
        let basis = harmonic_basis(n, k)?;
        for h in &basis.members {
            for i in MultiIndex::all(n, q) {
                let yf = hodge_star(&Form::basis(i.clone())).mul_field(&ScalarField::from_poly(h.poly.clone()));
                let y_form = match kind {
                    KernelKind::Phi => codifferential(&yf)?,
                    _ => d(&yf)?,
                };
                let y_form = if contraction_negative(kind, q) { y_form.neg() } else { y_form };
                if y_form.is_zero_exact() == Some(true) {
                    continue;
                }
                kern.corrections.push(CorrectionTerm {
                    k,
                    j: h.j,
                    x_index: i,
                    x_factor: representative_factor(n, k, &h.poly, &h.norm_sq),
                    y_form,
                });
            }
        }
    }
    let kern = Arc::new(kern);
    Ok(memo().write().unwrap().entry(key).or_insert(kern).clone())
}

/// Gegenbauer polynomial `C_k^{λ}(t)`.
fn gegenbauer(k: u32, lambda: f64, t: f64) -> f64 {
    let (mut c0, mut c1) = (1.0, 2.0 * lambda * t);
    if k == 0 {
        return c0;
    }
    for j in 2..=k {
        let jf = j as f64;
        let c2 = (2.0 * t * (jf + lambda - 1.0) * c1 - (jf + 2.0 * lambda - 2.0) * c0) / jf;
        c0 = c1;
        c1 = c2;
    }
    c1
}

/// `Σ_j h_k^{(j)}(x) h_k^{(j)}(y)` for any basis orthonormal under `dS/σₙ`.
pub fn zonal(n: usize, k: u32, x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (norm(x), norm(y));
    if k == 0 {
        return 1.0;
    }
    if rx == 0.0 || ry == 0.0 {
        return 0.0;
    }
    let t = (x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / (rx * ry)).clamp(-1.0, 1.0);
    let scale = (rx * ry).powi(k as i32);
    if n == 2 {
        2.0 * (k as f64 * t.acos()).cos() * scale
    } else {
        let lambda = (n as f64 - 2.0) / 2.0;
        (n as f64 + 2.0 * k as f64 - 2.0) / (n as f64 - 2.0) * gegenbauer(k, lambda, t) * scale
    }
}

/// Term `k` of the expansion, summed over `j`:
/// `Σ_j h_k^{(j)}(x) h_k^{(j)}(y) / (σₙ (n+2k−2) |x|^{n+2k−2})`.
pub fn expansion_term(n: usize, k: u32, x: &[f64], y: &[f64]) -> f64 {
    let w = n as f64 + 2.0 * k as f64 - 2.0;
    zonal(n, k, x, y) / (sphere_area(n) * w * norm(x).powf(w))
}

/// The same term computed exactly from the stored harmonic basis, at rational
/// points with `|x|` rational.
pub fn expansion_term_exact(n: usize, k: u32, x: &[f64], y: &[f64]) -> Result<f64> {
    let basis = harmonic_basis(n, k)?;
    let xq: Vec<Q> = x.iter().map(|v| q_from_f64(*v)).collect();
    let yq: Vec<Q> = y.iter().map(|v| q_from_f64(*v)).collect();
    let z = basis.zonal_exact(&xq, &yq);
    let w = n as f64 + 2.0 * k as f64 - 2.0;
    Ok(crate::poly::q_to_f64(&z) / (sphere_area(n) * w * norm(x).powf(w)))
}

/// `e(x) − Σ_{k=1}^{m} term_k(x, y)`, valid for `|x| > |y|`.
pub fn expansion_partial_sum(n: usize, m_terms: u32, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != n || y.len() != n {
        return Err(Error::DimensionMismatch(x.len(), n));
    }
    if norm(x) <= norm(y) {
        return Err(Error::InvalidArgument("expansion needs |x| > |y| (outside convergence cone)".into()));
    }
    let mut s = fundamental_solution(n, x)?;
    for k in 1..=m_terms {
        s -= expansion_term(n, k, x, y);
    }
    Ok(s)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionRow {
    pub m: u32,
    pub partial_sum: f64,
    pub remainder: f64,
    /// `remainder(m)/remainder(m−1)`; absent for the first row
    pub ratio: Option<f64>,
}

/// Convergence table of the expansion against the direct value `e(x − y)`.
pub fn expansion_table(n: usize, x: &[f64], y: &[f64], max_m: u32) -> Result<Vec<ExpansionRow>> {
    let z: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let exact = fundamental_solution(n, &z)?;
    let mut rows: Vec<ExpansionRow> = Vec::new();
    for m in 0..=max_m {
        let s = expansion_partial_sum(n, m, x, y)?;
        let rem = (exact - s).abs();
        let ratio = rows.last().map(|r| rem / r.remainder);
        rows.push(ExpansionRow { m, partial_sum: s, remainder: rem, ratio });
    }
    Ok(rows)
}

/// Zero test helper for kernel entries.
pub fn entries_vanish(forms: &BTreeMap<MultiIndex, Form>) -> bool {
    forms.values().all(|f| f.is_zero_exact() == Some(true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn fundamental_solution_values() {
        let v = fundamental_solution(3, &[2.0, 0.0, 0.0]).unwrap();
        assert!((v + 1.0 / (8.0 * PI)).abs() < 1e-15);
        assert_eq!(fundamental_solution(2, &[0.6, 0.8]).unwrap().abs() < 1e-16, true);
        assert!(matches!(fundamental_solution(3, &[0.0; 3]), Err(Error::Singularity(_))));
    }

    #[test]
    fn field_matches_function() {
        for n in 2..=4 {
            let f = fundamental_field(n);
            let x: Vec<f64> = (0..n).map(|i| 0.3 + i as f64).collect();
            let v = f.eval_f64(&x) / sphere_area(n);
            assert!((v - fundamental_solution(n, &x).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn e_q_structure() {
        let k = kernel_e_q(3, 0).unwrap();
        assert_eq!(k.entries.len(), 1);
        assert!(k.entries.contains_key(&(MultiIndex::empty(3), MultiIndex::full(3))));
        let k = kernel_e_q(3, 3).unwrap();
        assert!(k.entries.contains_key(&(MultiIndex::full(3), MultiIndex::empty(3))));
        let k = kernel_e_q(2, 1).unwrap();
        let e = fundamental_field(2);
        let i1 = MultiIndex::new(2, &[1]).unwrap();
        let i2 = MultiIndex::new(2, &[2]).unwrap();
        assert_eq!(k.entries[&(i1.clone(), i2.clone())], e);
        assert_eq!(k.entries[&(i2, i1)], e.neg());
    }

    #[test]
    fn phi_zero_matches_gradient_of_e() {
        let k = kernel_phi(3, 0, KernelKind::Phi).unwrap();
        assert_eq!(k.input_degree(), 1);
        let (x, y) = ([1.0, 0.5, -0.2], [0.1, 0.2, 0.3]);
        let psi = k.psi(&x, &y);
        let h = 1e-5;
        for i in 0..3 {
            let mut yp = y;
            let mut ym = y;
            yp[i] += h;
            ym[i] -= h;
            let zp: Vec<f64> = x.iter().zip(&yp).map(|(a, b)| a - b).collect();
            let zm: Vec<f64> = x.iter().zip(&ym).map(|(a, b)| a - b).collect();
            let grad = (fundamental_solution(3, &zp).unwrap() - fundamental_solution(3, &zm).unwrap()) / (2.0 * h);
            // Φf = −∫ f_i ∂_{y_i} e(x − y)
            assert!((psi[i] + grad).abs() < 1e-8, "{i}: {} vs {}", psi[i], -grad);
        }
    }

    #[test]
    fn kernels_are_annihilated_by_a_second_derivative() {
        for n in 2..=4 {
            for q in 0..=n {
                let phi = kernel_phi(n, q, KernelKind::Phi).unwrap();
                assert!(entries_vanish(&phi.differentiate_y(true).unwrap()), "phi n={n} q={q}");
                let hat = kernel_phi(n, q, KernelKind::PhiHat).unwrap();
                assert!(entries_vanish(&hat.differentiate_y(false).unwrap()), "hat n={n} q={q}");
            }
        }
    }

    #[test]
    fn singular_part_is_homogeneous() {
        let k = kernel_phi(3, 1, KernelKind::Phi).unwrap();
        let z = [0.3, -0.4, 0.5];
        let z2: Vec<f64> = z.iter().map(|v| 2.0 * v).collect();
        let (a, b) = (k.psi_singular(&z), k.psi_singular(&z2));
        for (u, v) in a.iter().zip(&b) {
            assert!((u - 4.0 * v).abs() < 1e-12);
        }
    }

    #[test]
    fn truncated_correction_count() {
        let k = truncated_kernel(3, 0, 0, KernelKind::Phi).unwrap();
        assert_eq!(k.corrections.len(), 3);
        assert!(k.corrections.iter().all(|c| c.k == 1));
        for c in &k.corrections {
            let again = codifferential(&c.y_form).unwrap();
            assert!(again.is_zero_exact().unwrap());
        }
    }

    #[test]
    fn correction_matches_expansion_outside_two() {
        // at |x| ≥ 2, Σ_j x-factor · h_j(y) = expansion term with |x| for ϑ
        let n = 3;
        let x = [2.0, 3.0, 6.0];
        let y = [0.5, -0.25, 0.125];
        for k in 1..=3 {
            let b = harmonic_basis(n, k).unwrap();
            let sum: f64 = b
                .members
                .iter()
                .map(|h| representative_factor(n, k, &h.poly, &h.norm_sq).eval_f64(&x) * h.poly.eval_f64(&y))
                .sum();
            let term = expansion_term(n, k, &x, &y) * sphere_area(n);
            assert!((sum - term).abs() < 1e-14, "k={k}");
        }
    }

    #[test]
    fn zonal_matches_exact_basis() {
        for n in 2..=4 {
            for k in 1..=5 {
                let x: Vec<f64> = (0..n).map(|i| 1.5 - 0.5 * i as f64).collect();
                let y: Vec<f64> = (0..n).map(|i| 0.25 * (i as f64 + 1.0)).collect();
                let a = expansion_term(n, k, &x, &y);
                let b = expansion_term_exact(n, k, &x, &y).unwrap();
                assert!((a - b).abs() < 1e-13 * (1.0 + a.abs()), "n={n} k={k}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn expansion_examples() {
        let y0 = [0.0; 3];
        let x = [4.0, 1.0, 0.0];
        assert_eq!(expansion_partial_sum(3, 7, &x, &y0).unwrap(), fundamental_solution(3, &x).unwrap());
        let t = expansion_table(3, &[4.0, 0.0, 0.0], &[1.0, 0.0, 0.0], 6).unwrap();
        for r in &t[1..] {
            assert!(r.ratio.unwrap() <= 0.6);
        }
        let t = expansion_table(2, &[3.0, 0.0], &[1.0, 0.0], 40).unwrap();
        assert!(t[40].remainder <= 1e-6);
        assert!(expansion_partial_sum(3, 2, &[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0]).is_err());
    }
}
