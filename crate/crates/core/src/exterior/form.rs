use std::collections::BTreeMap;
use std::fmt;

use num_traits::One;

use super::MultiIndex;
use crate::error::{Error, Result};
use crate::field::{ScalarField, SymField};
use crate::poly::{Poly, Q};

/// A degree-q form `Σ_I a_I dx_I`. Absent indices have zero coefficients.
///
/// Degrees −1 and above n are allowed and always empty, so `d` and `d*` are total.
#[derive(Clone)]
pub struct Form {
    n: usize,
    degree: isize,
    coeffs: BTreeMap<MultiIndex, ScalarField>,
}

impl Form {
    /// Empty form; degrees outside `0..=n` are allowed and stay empty.
    pub fn zero(n: usize, degree: isize) -> Self {
        assert!(degree >= -1, "degree {degree} for n={n}");
        Form { n, degree, coeffs: BTreeMap::new() }
    }

    /// Checked constructor for an empty form of a proper degree.
    pub fn try_zero(n: usize, degree: isize) -> Result<Self> {
        if degree < 0 || degree > n as isize {
            return Err(Error::DegreeOutOfRange { n, degree });
        }
        Ok(Self::zero(n, degree))
    }

    pub fn from_terms(
        n: usize,
        degree: usize,
        terms: impl IntoIterator<Item = (MultiIndex, ScalarField)>,
    ) -> Result<Self> {
        let mut f = Self::try_zero(n, degree as isize)?;
        for (i, c) in terms {
            f.add_term(i, c)?;
        }
        Ok(f)
    }

    /// `c · dx_I`
    pub fn monomial(index: MultiIndex, c: ScalarField) -> Self {
        let n = index.n();
        let mut f = Self::zero(n, index.len() as isize);
        f.coeffs.insert(index, c);
        f
    }

    /// `dx_I` with unit coefficient.
    pub fn basis(index: MultiIndex) -> Self {
        let n = index.n();
        Self::monomial(index, ScalarField::from_poly(Poly::one(n)))
    }

    pub fn function(n: usize, c: ScalarField) -> Self {
        Self::monomial(MultiIndex::empty(n), c)
    }

    pub fn volume(n: usize) -> Self {
        Self::basis(MultiIndex::full(n))
    }

    pub fn add_term(&mut self, index: MultiIndex, c: ScalarField) -> Result<()> {
        if index.n() != self.n {
            return Err(Error::DimensionMismatch(index.n(), self.n));
        }
        if index.len() as isize != self.degree {
            return Err(Error::DegreeMismatch(index.len() as isize, self.degree));
        }
        let merged = match self.coeffs.remove(&index) {
            Some(old) => old.add(&c),
            None => c,
        };
        if !merged.is_known_zero() {
            self.coeffs.insert(index, merged);
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> isize {
        self.degree
    }

    pub fn coeff(&self, index: &MultiIndex) -> Option<&ScalarField> {
        self.coeffs.get(index)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &ScalarField)> {
        self.coeffs.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_symbolic(&self) -> bool {
        self.coeffs.values().all(ScalarField::is_symbolic)
    }

    pub fn symbolic_coeff(&self, index: &MultiIndex) -> Option<&SymField> {
        self.coeffs.get(index).and_then(ScalarField::as_symbolic)
    }

    /// Exact zero test; `None` if any coefficient is sampled.
    pub fn is_zero_exact(&self) -> Option<bool> {
        let mut all = true;
        for c in self.coeffs.values() {
            match c {
                ScalarField::Symbolic(s) => all &= s.is_zero(),
                ScalarField::Sampled(_) => return None,
            }
        }
        Some(all)
    }

    /// Exact equality of symbolic forms.
    pub fn equals_exact(&self, other: &Form) -> Option<bool> {
        if self.n != other.n || self.degree != other.degree {
            return Some(false);
        }
        self.sub(other).ok()?.is_zero_exact()
    }

    pub fn add(&self, other: &Form) -> Result<Form> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch(self.degree, other.degree));
        }
        let mut out = self.clone();
        for (i, c) in &other.coeffs {
            out.add_term(i.clone(), c.clone())?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Form) -> Result<Form> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Form {
        self.scale(&-Q::one())
    }

    pub fn scale(&self, c: &Q) -> Form {
        let mut out = Form::zero(self.n, self.degree);
        for (i, v) in &self.coeffs {
            let s = v.scale(c);
            if !s.is_known_zero() {
                out.coeffs.insert(i.clone(), s);
            }
        }
        out
    }

    /// Multiply every coefficient by a scalar field.
    pub fn mul_field(&self, c: &ScalarField) -> Form {
        let mut out = Form::zero(self.n, self.degree);
        for (i, v) in &self.coeffs {
            let s = v.mul(c);
            if !s.is_known_zero() {
                out.coeffs.insert(i.clone(), s);
            }
        }
        out
    }

    /// Coefficients at `x` as a dense vector in lexicographic index order.
    pub fn eval_dense(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch(x.len(), self.n));
        }
        let len = if self.degree < 0 || self.degree > self.n as isize {
            0
        } else {
            super::binomial(self.n, self.degree as usize)
        };
        let mut out = vec![0.0; len];
        for (i, c) in &self.coeffs {
            out[i.position()] = c.eval(x)?;
        }
        Ok(out)
    }

    /// A thread-safe dense evaluator; symbolic coefficients are compiled to floats.
    pub fn evaluator(&self) -> impl Fn(&[f64]) -> Vec<f64> + Send + Sync + Clone + 'static {
        let len = if self.degree < 0 || self.degree > self.n as isize {
            0
        } else {
            super::binomial(self.n, self.degree as usize)
        };
        let parts: Vec<(usize, std::sync::Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>)> = self
            .coeffs
            .iter()
            .map(|(i, c)| {
                let f: std::sync::Arc<dyn Fn(&[f64]) -> f64 + Send + Sync> = match c {
                    ScalarField::Symbolic(s) => {
                        let cf = s.compile();
                        std::sync::Arc::new(move |x: &[f64]| cf.eval(x))
                    }
                    ScalarField::Sampled(s) => s.callable(),
                };
                (i.position(), f)
            })
            .collect();
        let parts = std::sync::Arc::new(parts);
        move |x: &[f64]| {
            let mut out = vec![0.0; len];
            for (p, f) in parts.iter() {
                out[*p] = f(x);
            }
            out
        }
    }
}

impl fmt::Debug for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0 (degree {})", self.degree);
        }
        let mut first = true;
        for (i, c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "[{c:?}] {i}")?;
        }
        Ok(())
    }
}
