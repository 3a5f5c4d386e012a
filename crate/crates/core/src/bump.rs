//! Gaussian bump forms: coefficients `Σ P(x − c) e^{−α|x − c|²}` with exact
//! polynomial parts, so `d` and `d*` stay exact while evaluation is cheap.
//! These are the smooth, rapidly decaying test data for the potential checks.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::exterior::{binomial, codiff_terms, d_terms, DerivTerm, Form, MultiIndex};
use crate::field::{SampledField, ScalarField};
use crate::poly::{q, q_to_f64, qi, CompiledPoly, Poly, Q};

/// `P(x − c) e^{−α|x − c|²}`
#[derive(Clone, Debug, PartialEq)]
pub struct GaussTerm {
    pub center: Vec<f64>,
    pub alpha: Q,
    pub poly: Poly,
}

impl GaussTerm {
    pub fn new(center: Vec<f64>, alpha: Q, poly: Poly) -> Self {
        assert_eq!(center.len(), poly.nvars());
        GaussTerm { center, alpha, poly }
    }

    /// `∂_i` = `(∂_i P − 2α s_i P) e^{−α|s|²}`
    pub fn partial(&self, i: usize) -> GaussTerm {
        let n = self.poly.nvars();
        let p = &self.poly.partial(i) - &(&Poly::var(n, i) * &self.poly).scale(&(qi(2) * &self.alpha));
        GaussTerm { center: self.center.clone(), alpha: self.alpha.clone(), poly: p }
    }
}

/// Sum of Gaussian terms.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BumpField {
    pub terms: Vec<GaussTerm>,
}

impl BumpField {
    pub fn single(t: GaussTerm) -> Self {
        BumpField { terms: vec![t] }
    }

    pub fn is_empty(&self) -> bool {
        self.terms.iter().all(|t| t.poly.is_zero())
    }

    pub fn partial(&self, i: usize) -> BumpField {
        BumpField { terms: self.terms.iter().map(|t| t.partial(i)).filter(|t| !t.poly.is_zero()).collect() }
    }

    pub fn add(&self, o: &BumpField) -> BumpField {
        let mut terms = self.terms.clone();
        terms.extend(o.terms.iter().cloned());
        BumpField { terms }
    }

    pub fn scale(&self, c: &Q) -> BumpField {
        BumpField {
            terms: self
                .terms
                .iter()
                .map(|t| GaussTerm { poly: t.poly.scale(c), ..t.clone() })
                .filter(|t| !t.poly.is_zero())
                .collect(),
        }
    }

    pub fn compile(&self) -> CompiledBump {
        CompiledBump {
            terms: self
                .terms
                .iter()
                .map(|t| (t.center.clone(), q_to_f64(&t.alpha), t.poly.compile()))
                .collect(),
        }
    }

    /// Smallest radius beyond which every term is below `eps` (relative to its
    /// polynomial size, which is O(1) for the generated data).
    pub fn support_radius(&self, eps: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let c = t.center.iter().map(|v| v * v).sum::<f64>().sqrt();
                c + (-eps.ln() / q_to_f64(&t.alpha)).sqrt() + 1.0
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct CompiledBump {
    terms: Vec<(Vec<f64>, f64, CompiledPoly)>,
}

impl CompiledBump {
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert!(x.len() <= 8);
        let mut acc = 0.0;
        let mut s = [0.0f64; 8];
        for (c, a, p) in &self.terms {
            let mut r2 = 0.0;
            for i in 0..x.len() {
                s[i] = x[i] - c[i];
                r2 += s[i] * s[i];
            }
            let g = (-a * r2).exp();
            if g > 0.0 {
                acc += p.eval(&s[..x.len()]) * g;
            }
        }
        acc
    }
}

/// A form with [`BumpField`] coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct BumpForm {
    pub n: usize,
    pub degree: usize,
    pub coeffs: BTreeMap<MultiIndex, BumpField>,
}

impl BumpForm {
    pub fn zero(n: usize, degree: usize) -> Self {
        BumpForm { n, degree, coeffs: BTreeMap::new() }
    }

    pub fn monomial(index: MultiIndex, f: BumpField) -> Self {
        let mut b = BumpForm::zero(index.n(), index.len());
        b.coeffs.insert(index, f);
        b
    }

    pub fn add(&self, o: &BumpForm) -> Result<BumpForm> {
        if self.n != o.n || self.degree != o.degree {
            return Err(Error::DegreeMismatch(self.degree as isize, o.degree as isize));
        }
        let mut out = self.clone();
        for (i, f) in &o.coeffs {
            let e = out.coeffs.entry(i.clone()).or_default();
            *e = e.add(f);
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Q) -> BumpForm {
        BumpForm {
            n: self.n,
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|(i, f)| (i.clone(), f.scale(c))).collect(),
        }
    }

    fn apply(&self, terms: &[DerivTerm], out_degree: usize) -> BumpForm {
        let all_in = MultiIndex::all(self.n, self.degree);
        let all_out = MultiIndex::all(self.n, out_degree);
        let mut out = BumpForm::zero(self.n, out_degree);
        for t in terms {
            if let Some(f) = self.coeffs.get(&all_in[t.input]) {
                let g = f.partial(t.axis).scale(&if t.sign < 0.0 { qi(-1) } else { qi(1) });
                if !g.is_empty() {
                    let e = out.coeffs.entry(all_out[t.out].clone()).or_default();
                    *e = e.add(&g);
                }
            }
        }
        out
    }

    /// Exact exterior derivative; the empty form of degree n for top-degree input.
    pub fn d(&self) -> BumpForm {
        if self.degree >= self.n {
            return BumpForm::zero(self.n, self.n);
        }
        self.apply(&d_terms(self.n, self.degree), self.degree + 1)
    }

    /// Exact codifferential; the empty 0-form for 0-form input.
    pub fn codifferential(&self) -> BumpForm {
        if self.degree == 0 {
            return BumpForm::zero(self.n, 0);
        }
        self.apply(&codiff_terms(self.n, self.degree), self.degree - 1)
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.values().all(BumpField::is_empty)
    }

    pub fn support_radius(&self, eps: f64) -> f64 {
        self.coeffs.values().map(|f| f.support_radius(eps)).fold(0.0, f64::max)
    }

    /// Dense evaluator in lexicographic index order.
    pub fn evaluator(&self) -> impl Fn(&[f64]) -> Vec<f64> + Send + Sync + Clone + 'static {
        let len = binomial(self.n, self.degree);
        let parts: Arc<Vec<(usize, CompiledBump)>> =
            Arc::new(self.coeffs.iter().map(|(i, f)| (i.position(), f.compile())).collect());
        move |x: &[f64]| {
            let mut out = vec![0.0; len];
            for (p, f) in parts.iter() {
                out[*p] = f.eval(x);
            }
            out
        }
    }

    /// As a [`Form`] with sampled coefficients.
    pub fn to_form(&self) -> Form {
        let mut f = Form::zero(self.n, self.degree as isize);
        for (i, c) in &self.coeffs {
            if c.is_empty() {
                continue;
            }
            let cc = c.compile();
            f.add_term(i.clone(), ScalarField::Sampled(SampledField::new(move |x| cc.eval(x))))
                .expect("index matches degree");
        }
        f
    }
}

/// A random bump field: one or two Gaussians with centres in `[−1, 1]ⁿ`,
/// rates in `{1, 3/2, 2}` and affine polynomial parts with small rational coefficients.
pub fn random_bump_field<R: Rng>(n: usize, rng: &mut R) -> BumpField {
    let count = rng.gen_range(1..=2);
    let mut terms = Vec::new();
    for _ in 0..count {
        let center: Vec<f64> = (0..n).map(|_| rng.gen_range(-4..=4) as f64 / 4.0).collect();
        let alpha = [q(1, 1), q(3, 2), qi(2)][rng.gen_range(0..3)].clone();
        let mut p = Poly::constant(n, q(rng.gen_range(-4..=4), 4));
        for i in 0..n {
            p = &p + &Poly::var(n, i).scale(&q(rng.gen_range(-2..=2), 4));
        }
        if p.is_zero() {
            p = Poly::one(n);
        }
        terms.push(GaussTerm::new(center, alpha, p));
    }
    BumpField { terms }
}

/// A random q-form with a bump coefficient on every index.
pub fn random_bump_form<R: Rng>(n: usize, degree: usize, rng: &mut R) -> BumpForm {
    let mut b = BumpForm::zero(n, degree);
    for i in MultiIndex::all(n, degree) {
        b.coeffs.insert(i, random_bump_field(n, rng));
    }
    b
}

/// A nonzero closed (q+1)-form `dα` for a random bump q-form `α`.
pub fn random_cocycle<R: Rng>(n: usize, q_plus_one: usize, rng: &mut R) -> Result<BumpForm> {
    if q_plus_one == 0 || q_plus_one > n {
        return Err(Error::DegreeOutOfRange { n, degree: q_plus_one as isize });
    }
    loop {
        let f = random_bump_form(n, q_plus_one - 1, rng).d();
        if !f.is_empty() {
            return Ok(f);
        }
    }
}

/// A nonzero co-closed (q−1)-form `d*β` for a random bump q-form `β`.
pub fn random_cococycle<R: Rng>(n: usize, q_minus_one: usize, rng: &mut R) -> Result<BumpForm> {
    if q_minus_one >= n {
        return Err(Error::DegreeOutOfRange { n, degree: q_minus_one as isize });
    }
    loop {
        let g = random_bump_form(n, q_minus_one + 1, rng).codifferential();
        if !g.is_empty() {
            return Ok(g);
        }
    }
}

/// The standard Gaussian `e^{−|x|²}` as a bump field.
pub fn gaussian(n: usize) -> BumpField {
    BumpField::single(GaussTerm::new(vec![0.0; n], qi(1), Poly::one(n)))
}
