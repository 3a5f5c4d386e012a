//! Coefficient fields of exterior forms.
//!
//! A symbolic field is a finite sum `Σ P(x)·|x|^c·(ln|x|)^l·Π_j (ϑ^{(j)}(|x|))^{e_j}`
//! with exact rational polynomials `P`. The family is closed under products and
//! partial derivatives (`∂_i |x| = x_i/|x|`, `∂_i ϑ^{(j)} = ϑ^{(j+1)} x_i/|x|`),
//! which is what lets `d` and `d*` act exactly on kernels and on the cohomology
//! representatives `h(x)/ϑ^{n+2k−2}(x)`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::poly::{qi, CompiledPoly, Poly, Q};
use crate::theta::theta_radial_derivatives;

/// The non-polynomial factor of a symbolic term.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct RadialFactor {
    /// power of |x|
    pub r_pow: i32,
    /// power of ln|x|
    pub log_pow: u32,
    /// `theta[j]` is the exponent of ϑ^{(j)}; trailing zeros trimmed
    pub theta: Vec<i32>,
}

impl RadialFactor {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn radial(r_pow: i32) -> Self {
        RadialFactor { r_pow, ..Default::default() }
    }

    pub fn theta_pow(p: i32) -> Self {
        let mut f = RadialFactor::default();
        f.set_theta(0, p);
        f
    }

    pub fn theta_exp(&self, j: usize) -> i32 {
        self.theta.get(j).copied().unwrap_or(0)
    }

    fn set_theta(&mut self, j: usize, e: i32) {
        if self.theta.len() <= j {
            self.theta.resize(j + 1, 0);
        }
        self.theta[j] = e;
        while self.theta.last() == Some(&0) {
            self.theta.pop();
        }
    }

    fn times(&self, o: &RadialFactor) -> RadialFactor {
        let mut out = RadialFactor {
            r_pow: self.r_pow + o.r_pow,
            log_pow: self.log_pow + o.log_pow,
            theta: Vec::new(),
        };
        let len = self.theta.len().max(o.theta.len());
        for j in 0..len {
            out.set_theta(j, self.theta_exp(j) + o.theta_exp(j));
        }
        out
    }

    /// Highest ϑ-derivative order carried with a nonzero exponent.
    pub fn theta_order(&self) -> usize {
        self.theta.len().saturating_sub(1)
    }

    fn has_theta_derivative(&self) -> bool {
        self.theta.iter().skip(1).any(|&e| e != 0)
    }
}

/// Exact symbolic coefficient: sum of `Poly × RadialFactor` terms.
#[derive(Clone, PartialEq, Eq)]
pub struct SymField {
    nvars: usize,
    terms: BTreeMap<RadialFactor, Poly>,
}

impl SymField {
    pub fn zero(nvars: usize) -> Self {
        SymField { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Q) -> Self {
        Self::from_poly(Poly::constant(nvars, c))
    }

    pub fn from_poly(p: Poly) -> Self {
        Self::term(p, RadialFactor::one())
    }

    pub fn term(p: Poly, f: RadialFactor) -> Self {
        let mut s = Self::zero(p.nvars());
        s.add_term(f, p);
        s
    }

    /// `poly · ϑ^{−theta_power} · |x|^{radial_power} · (ln|x|)^{log}`: the single-term shape
    /// used by the JSON exchange format.
    pub fn simple(poly: Poly, theta_power: i32, radial_power: i32, log: bool) -> Self {
        let mut f = RadialFactor::radial(radial_power);
        f.log_pow = u32::from(log);
        f.set_theta(0, -theta_power);
        Self::term(poly, f)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&RadialFactor, &Poly)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, f: RadialFactor, p: Poly) {
        if p.is_zero() {
            return;
        }
        let e = self.terms.entry(f).or_insert_with(|| Poly::zero(p.nvars()));
        *e = &*e + &p;
        self.terms.retain(|_, v| !v.is_zero());
    }

    /// Syntactically empty (no terms at all).
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Exact zero test, modulo the relation `|x|² = Σ x_i²`.
    pub fn is_zero(&self) -> bool {
        self.canonical().terms.is_empty()
    }

    /// Canonical representative: within each class of terms that agree except for an
    /// even shift of the |x| power, everything is brought to the smallest power.
    pub fn canonical(&self) -> SymField {
        let s = Poly::norm_sq(self.nvars);
        let mut groups: BTreeMap<(u32, Vec<i32>, i32), Vec<(i32, &Poly)>> = BTreeMap::new();
        for (f, p) in &self.terms {
            groups
                .entry((f.log_pow, f.theta.clone(), f.r_pow.rem_euclid(2)))
                .or_default()
                .push((f.r_pow, p));
        }
        let mut out = SymField::zero(self.nvars);
        for ((log_pow, theta, _), members) in groups {
            let cmin = members.iter().map(|(c, _)| *c).min().unwrap();
            let mut acc = Poly::zero(self.nvars);
            for (c, p) in members {
                let shift = ((c - cmin) / 2) as u32;
                acc = &acc + &(p * &s.pow(shift));
            }
            let f = RadialFactor { r_pow: cmin, log_pow, theta };
            out.add_term(f, acc);
        }
        out
    }

    pub fn add(&self, o: &SymField) -> SymField {
        assert_eq!(self.nvars, o.nvars);
        let mut out = self.clone();
        for (f, p) in &o.terms {
            out.add_term(f.clone(), p.clone());
        }
        out
    }

    pub fn sub(&self, o: &SymField) -> SymField {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> SymField {
        SymField {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(f, p)| (f.clone(), -p)).collect(),
        }
    }

    pub fn scale(&self, c: &Q) -> SymField {
        let mut out = SymField::zero(self.nvars);
        for (f, p) in &self.terms {
            out.add_term(f.clone(), p.scale(c));
        }
        out
    }

    pub fn mul(&self, o: &SymField) -> SymField {
        assert_eq!(self.nvars, o.nvars);
        let mut out = SymField::zero(self.nvars);
        for (f1, p1) in &self.terms {
            for (f2, p2) in &o.terms {
                out.add_term(f1.times(f2), p1 * p2);
            }
        }
        out
    }

    pub fn mul_poly(&self, p: &Poly) -> SymField {
        self.mul(&SymField::from_poly(p.clone()))
    }

    /// Exact partial derivative in variable `i` (0-based).
    pub fn partial(&self, i: usize) -> SymField {
        let n = self.nvars;
        let xi = Poly::var(n, i);
        let mut out = SymField::zero(n);
        for (f, p) in &self.terms {
            out.add_term(f.clone(), p.partial(i));
            if f.r_pow != 0 {
                let mut g = f.clone();
                g.r_pow -= 2;
                out.add_term(g, (p * &xi).scale(&qi(f.r_pow as i64)));
            }
            if f.log_pow > 0 {
                let mut g = f.clone();
                g.log_pow -= 1;
                g.r_pow -= 2;
                out.add_term(g, (p * &xi).scale(&qi(f.log_pow as i64)));
            }
            for j in 0..f.theta.len() {
                let e = f.theta[j];
                if e == 0 {
                    continue;
                }
                let mut g = f.clone();
                g.set_theta(j, e - 1);
                g.set_theta(j + 1, g.theta_exp(j + 1) + 1);
                g.r_pow -= 1;
                out.add_term(g, (p * &xi).scale(&qi(e as i64)));
            }
        }
        out
    }

    pub fn laplacian(&self) -> SymField {
        let mut out = SymField::zero(self.nvars);
        for i in 0..self.nvars {
            out = out.add(&self.partial(i).partial(i));
        }
        out
    }

    pub fn max_theta_order(&self) -> usize {
        self.terms.keys().map(|f| f.theta_order()).max().unwrap_or(0)
    }

    /// Whether every term is a plain polynomial.
    pub fn as_poly(&self) -> Option<Poly> {
        match self.terms.len() {
            0 => Some(Poly::zero(self.nvars)),
            1 => {
                let (f, p) = self.terms.iter().next().unwrap();
                (*f == RadialFactor::one()).then(|| p.clone())
            }
            _ => None,
        }
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.compile().eval(x)
    }

    /// Exact value at a rational point whose norm `r` is rational and `r ≥ 2`
    /// (there ϑ = |x|, ϑ' = 1 and all higher ϑ-derivatives vanish).
    /// Returns `None` where no exact value exists (log factors, or `r < 2`
    /// with ϑ factors present).
    pub fn eval_exact(&self, x: &[Q], r: &Q) -> Option<Q> {
        let mut acc = Q::zero();
        for (f, p) in &self.terms {
            if f.log_pow > 0 {
                return None;
            }
            if !f.theta.is_empty() && *r < qi(2) {
                return None;
            }
            if f.theta.iter().skip(2).any(|&e| e > 0) {
                continue;
            }
            // ϑ' = 1 contributes nothing; ϑ = r adds to the radial power
            let pow = f.r_pow + f.theta_exp(0);
            let mut t = p.eval(x);
            if t.is_zero() {
                continue;
            }
            if pow != 0 {
                if r.is_zero() {
                    return None;
                }
                let rp = num_traits::pow(r.clone(), pow.unsigned_abs() as usize);
                if pow > 0 {
                    t *= rp;
                } else {
                    t /= rp;
                }
            }
            acc += t;
        }
        Some(acc)
    }

    pub fn compile(&self) -> CompiledField {
        CompiledField {
            terms: self
                .terms
                .iter()
                .map(|(f, p)| (f.clone(), p.compile()))
                .collect(),
            theta_order: self.max_theta_order(),
            uses_theta: self.terms.keys().any(|f| !f.theta.is_empty()),
        }
    }
}

/// Float evaluator for a [`SymField`].
#[derive(Clone, Debug)]
pub struct CompiledField {
    terms: Vec<(RadialFactor, CompiledPoly)>,
    theta_order: usize,
    uses_theta: bool,
}

impl CompiledField {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let th = if self.uses_theta {
            theta_radial_derivatives(r, self.theta_order)
        } else {
            Vec::new()
        };
        let lnr = r.ln();
        let mut acc = 0.0;
        for (f, p) in &self.terms {
            if r < 1.0 && f.has_theta_derivative() {
                continue; // ϑ is constant on the unit ball
            }
            let mut t = p.eval(x);
            if t == 0.0 {
                continue;
            }
            if f.r_pow != 0 {
                t *= r.powi(f.r_pow);
            }
            if f.log_pow != 0 {
                t *= lnr.powi(f.log_pow as i32);
            }
            for (j, &e) in f.theta.iter().enumerate() {
                if e != 0 {
                    t *= th[j].powi(e);
                }
            }
            acc += t;
        }
        acc
    }
}

impl fmt::Debug for SymField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for SymField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (rf, p) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({p})")?;
            if rf.r_pow != 0 {
                write!(f, "*|x|^{}", rf.r_pow)?;
            }
            if rf.log_pow != 0 {
                write!(f, "*ln|x|^{}", rf.log_pow)?;
            }
            for (j, &e) in rf.theta.iter().enumerate() {
                if e != 0 {
                    write!(f, "*θ{}^{}", "'".repeat(j), e)?;
                }
            }
        }
        Ok(())
    }
}

pub type SampledFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Where a sampled coefficient may be evaluated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Validity {
    Everywhere,
    /// `|x| ≤ radius`
    Ball(f64),
    /// `|x| ≥ radius`
    Exterior(f64),
}

impl Validity {
    pub fn contains(&self, x: &[f64]) -> bool {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        match *self {
            Validity::Everywhere => true,
            Validity::Ball(rad) => r <= rad,
            Validity::Exterior(rad) => r >= rad,
        }
    }

    fn intersect(self, o: Validity) -> Validity {
        use Validity::*;
        match (self, o) {
            (Everywhere, v) | (v, Everywhere) => v,
            (Ball(a), Ball(b)) => Ball(a.min(b)),
            (Exterior(a), Exterior(b)) => Exterior(a.max(b)),
            // no exact representation of an annulus; keep the stricter side
            (Ball(a), Exterior(_)) | (Exterior(_), Ball(a)) => Ball(a),
        }
    }
}

/// A numeric coefficient given by a callable.
#[derive(Clone)]
pub struct SampledField {
    f: SampledFn,
    pub validity: Validity,
    /// number of derivatives the callable is declared to support
    pub smoothness: u32,
}

impl SampledField {
    pub fn new(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        SampledField { f: Arc::new(f), validity: Validity::Everywhere, smoothness: u32::MAX }
    }

    pub fn with_validity(mut self, v: Validity) -> Self {
        self.validity = v;
        self
    }

    pub fn with_smoothness(mut self, s: u32) -> Self {
        self.smoothness = s;
        self
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if !self.validity.contains(x) {
            return Err(Error::OutsideValidity(x.to_vec()));
        }
        Ok((self.f)(x))
    }

    /// Evaluate without the validity check.
    pub fn eval_unchecked(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    pub fn callable(&self) -> SampledFn {
        self.f.clone()
    }
}

/// Coefficient of an exterior form.
#[derive(Clone)]
pub enum ScalarField {
    Symbolic(SymField),
    Sampled(SampledField),
}

impl ScalarField {
    pub fn from_poly(p: Poly) -> Self {
        ScalarField::Symbolic(SymField::from_poly(p))
    }

    pub fn sampled(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField::Sampled(SampledField::new(f))
    }

    pub fn is_symbolic(&self) -> bool {
        matches!(self, ScalarField::Symbolic(_))
    }

    pub fn as_symbolic(&self) -> Option<&SymField> {
        match self {
            ScalarField::Symbolic(s) => Some(s),
            ScalarField::Sampled(_) => None,
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        match self {
            ScalarField::Symbolic(s) => Ok(s.eval_f64(x)),
            ScalarField::Sampled(s) => s.eval(x),
        }
    }

    /// Syntactic/exact zero for symbolic fields; sampled fields are never known to be zero.
    pub fn is_known_zero(&self) -> bool {
        match self {
            ScalarField::Symbolic(s) => s.is_zero(),
            ScalarField::Sampled(_) => false,
        }
    }

    fn to_sampled(&self) -> SampledField {
        match self {
            ScalarField::Sampled(s) => s.clone(),
            ScalarField::Symbolic(s) => {
                let c = s.compile();
                SampledField::new(move |x| c.eval(x))
            }
        }
    }

    pub fn add(&self, o: &ScalarField) -> ScalarField {
        match (self, o) {
            (ScalarField::Symbolic(a), ScalarField::Symbolic(b)) => ScalarField::Symbolic(a.add(b)),
            _ => {
                let (a, b) = (self.to_sampled(), o.to_sampled());
                let v = a.validity.intersect(b.validity);
                let s = a.smoothness.min(b.smoothness);
                let (fa, fb) = (a.callable(), b.callable());
                ScalarField::Sampled(
                    SampledField::new(move |x| fa(x) + fb(x)).with_validity(v).with_smoothness(s),
                )
            }
        }
    }

    pub fn mul(&self, o: &ScalarField) -> ScalarField {
        match (self, o) {
            (ScalarField::Symbolic(a), ScalarField::Symbolic(b)) => ScalarField::Symbolic(a.mul(b)),
            _ => {
                let (a, b) = (self.to_sampled(), o.to_sampled());
                let v = a.validity.intersect(b.validity);
                let s = a.smoothness.min(b.smoothness);
                let (fa, fb) = (a.callable(), b.callable());
                ScalarField::Sampled(
                    SampledField::new(move |x| fa(x) * fb(x)).with_validity(v).with_smoothness(s),
                )
            }
        }
    }

    pub fn scale(&self, c: &Q) -> ScalarField {
        match self {
            ScalarField::Symbolic(s) => ScalarField::Symbolic(s.scale(c)),
            ScalarField::Sampled(s) => {
                let cf = crate::poly::q_to_f64(c);
                let f = s.callable();
                ScalarField::Sampled(
                    SampledField::new(move |x| cf * f(x))
                        .with_validity(s.validity)
                        .with_smoothness(s.smoothness),
                )
            }
        }
    }

    pub fn scale_f64(&self, c: f64) -> ScalarField {
        match self {
            ScalarField::Symbolic(s) => ScalarField::Symbolic(s.scale(&crate::poly::q_from_f64(c))),
            ScalarField::Sampled(_) => self.scale(&crate::poly::q_from_f64(c)),
        }
    }

    pub fn neg(&self) -> ScalarField {
        self.scale(&-Q::one())
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarField::Symbolic(s) => write!(f, "Symbolic({s})"),
            ScalarField::Sampled(s) => write!(f, "Sampled({:?})", s.validity),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::q;

    #[test]
    fn radial_laplacian_of_newtonian_kernel_vanishes() {
        for n in 3..=5 {
            let e = SymField::term(Poly::one(n), RadialFactor::radial(2 - n as i32));
            assert!(e.laplacian().is_zero(), "n={n}");
            assert!(!e.is_zero());
        }
        let log = SymField::simple(Poly::one(2), 0, 0, true);
        assert!(log.laplacian().is_zero());
    }

    #[test]
    fn mixed_partials_commute_with_theta_factors() {
        let n = 3;
        let f = SymField::term(Poly::var(n, 0), RadialFactor::theta_pow(-3));
        for i in 0..n {
            for j in 0..n {
                let a = f.partial(i).partial(j);
                let b = f.partial(j).partial(i);
                assert!(a.sub(&b).is_zero());
            }
        }
    }

    #[test]
    fn chain_rule_matches_finite_differences() {
        // x1 / (3 |x|^3) at (3,1,1)
        let f = SymField::term(Poly::var(3, 0).scale(&q(1, 3)), RadialFactor::radial(-3));
        let p = [3.0, 1.0, 1.0];
        let h = 1e-4;
        for i in 0..3 {
            let mut a = p;
            let mut b = p;
            a[i] += h;
            b[i] -= h;
            let fd = (f.eval_f64(&a) - f.eval_f64(&b)) / (2.0 * h);
            assert!((f.partial(i).eval_f64(&p) - fd).abs() < 1e-6);
        }
    }

    #[test]
    fn theta_field_derivative_matches_finite_differences_in_splice() {
        let f = SymField::term(Poly::var(3, 1), RadialFactor::theta_pow(-5));
        let p = [0.9, 0.7, 0.5]; // |p| ≈ 1.24, inside the splice region
        let h = 1e-5;
        for i in 0..3 {
            let mut a = p;
            let mut b = p;
            a[i] += h;
            b[i] -= h;
            let fd = (f.eval_f64(&a) - f.eval_f64(&b)) / (2.0 * h);
            assert!((f.partial(i).eval_f64(&p) - fd).abs() < 1e-7);
        }
    }

    #[test]
    fn exact_evaluation_outside_two() {
        let f = SymField::term(Poly::var(3, 0), RadialFactor::theta_pow(-3));
        // (2, 3, 6) has norm 7
        let pt = [qi(2), qi(3), qi(6)];
        assert_eq!(f.eval_exact(&pt, &qi(7)), Some(q(2, 343)));
        assert_eq!(f.eval_exact(&pt.clone().map(|v| v / qi(7)), &qi(1)), None);
    }
}
