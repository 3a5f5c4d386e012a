//! The shared JSON exchange format for symbolic forms.
//!
//! ```json
//! { "n": 3, "degree": 1,
//!   "coeffs": [ { "index": [1], "poly": [[1, 3, [1, 0, 0]]],
//!                 "theta_power": 3, "radial_power": 0, "log": false } ] }
//! ```
//!
//! Each entry stands for `poly · ϑ^{−theta_power} · |x|^{radial_power} · (ln|x|)^{log}`
//! times `dx_index` (1-based); repeated indices add up. The optional
//! `theta_derivs` list carries exponents of ϑ′, ϑ″, … produced by differentiation.
//! Numerators and denominators that overflow `i64` are written as decimal strings.

use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{Form, MultiIndex};
use crate::error::{Error, Result};
use crate::field::{RadialFactor, ScalarField, SymField};
use crate::poly::{Exponents, Poly, Q};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Int {
    Small(i64),
    Big(String),
}

impl Int {
    fn from_big(v: &BigInt) -> Int {
        v.to_i64().map(Int::Small).unwrap_or_else(|| Int::Big(v.to_string()))
    }

    fn to_big(&self) -> Result<BigInt> {
        match self {
            Int::Small(v) => Ok(BigInt::from(*v)),
            Int::Big(s) => BigInt::from_str(s).map_err(|e| Error::Serialization(format!("{s}: {e}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub index: Vec<usize>,
    pub poly: Vec<(Int, Int, Exponents)>,
    #[serde(default)]
    pub theta_power: i32,
    #[serde(default)]
    pub radial_power: i32,
    #[serde(default)]
    pub log: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_derivs: Option<Vec<i32>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormJson {
    pub n: usize,
    pub degree: usize,
    pub coeffs: Vec<TermJson>,
}

impl FormJson {
    pub fn from_form(f: &Form) -> Result<FormJson> {
        if f.degree() < 0 || f.degree() > f.n() as isize {
            return Err(Error::DegreeOutOfRange { n: f.n(), degree: f.degree() });
        }
        let mut coeffs = Vec::new();
        for (i, c) in f.terms() {
            let s = c.as_symbolic().ok_or_else(|| {
                Error::Serialization("sampled coefficients have no JSON representation".into())
            })?;
            for (rf, p) in s.terms() {
                if rf.log_pow > 1 {
                    return Err(Error::Serialization("log powers above 1 are not representable".into()));
                }
                let derivs: Vec<i32> = rf.theta.iter().skip(1).copied().collect();
                coeffs.push(TermJson {
                    index: i.one_based(),
                    poly: p
                        .terms()
                        .map(|(e, v)| (Int::from_big(v.numer()), Int::from_big(v.denom()), e.clone()))
                        .collect(),
                    theta_power: -rf.theta_exp(0),
                    radial_power: rf.r_pow,
                    log: rf.log_pow == 1,
                    theta_derivs: (!derivs.is_empty()).then_some(derivs),
                });
            }
        }
        Ok(FormJson { n: f.n(), degree: f.degree() as usize, coeffs })
    }

    pub fn to_form(&self) -> Result<Form> {
        let n = self.n;
        let mut form = Form::try_zero(n, self.degree as isize)?;
        for t in &self.coeffs {
            let index = MultiIndex::new(n, &t.index)?;
            let mut p = Poly::zero(n);
            for (num, den, e) in &t.poly {
                if e.len() != n {
                    return Err(Error::DimensionMismatch(e.len(), n));
                }
                let den = den.to_big()?;
                if den.is_zero() {
                    return Err(Error::Serialization("zero denominator".into()));
                }
                p.add_term(e.clone(), Q::new(num.to_big()?, den));
            }
            let mut theta = vec![-t.theta_power];
            theta.extend(t.theta_derivs.iter().flatten().copied());
            while theta.last() == Some(&0) {
                theta.pop();
            }
            let rf = RadialFactor { r_pow: t.radial_power, log_pow: u32::from(t.log), theta };
            form.add_term(index, ScalarField::Symbolic(SymField::term(p, rf)))?;
        }
        Ok(form)
    }
}

pub fn form_to_json(f: &Form) -> Result<String> {
    let j = FormJson::from_form(f)?;
    serde_json::to_string(&j).map_err(|e| Error::Serialization(e.to_string()))
}

pub fn form_from_json(s: &str) -> Result<Form> {
    let j: FormJson = serde_json::from_str(s).map_err(|e| Error::Serialization(e.to_string()))?;
    j.to_form()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::d;
    use crate::poly::q;

    #[test]
    fn round_trip_with_theta_derivatives() {
        let n = 3;
        let u = Form::function(
            n,
            ScalarField::Symbolic(SymField::term(Poly::var(n, 0).scale(&q(1, 3)), RadialFactor::theta_pow(-3))),
        );
        let du = d(&u).unwrap();
        let s = form_to_json(&du).unwrap();
        assert!(s.contains("theta_derivs"));
        let back = form_from_json(&s).unwrap();
        assert!(back.equals_exact(&du).unwrap());
    }

    #[test]
    fn parses_documented_shape() {
        let s = r#"{"n":3,"degree":1,"coeffs":[{"index":[1],"poly":[[1,3,[1,0,0]]],"theta_power":3,"radial_power":0,"log":false}]}"#;
        let f = form_from_json(s).unwrap();
        assert_eq!(f.degree(), 1);
        let v = f.eval_dense(&[3.0, 0.0, 4.0]).unwrap();
        assert!((v[0] - 1.0 / 125.0).abs() < 1e-15);
        assert_eq!(form_to_json(&f).unwrap(), s);
    }

    #[test]
    fn big_integers_survive() {
        let big = Q::new(BigInt::from(10).pow(30), BigInt::from(7));
        let f = Form::function(2, ScalarField::from_poly(Poly::constant(2, big)));
        let s = form_to_json(&f).unwrap();
        assert!(s.contains("\"1000000000000000000000000000000\""));
        assert!(form_from_json(&s).unwrap().equals_exact(&f).unwrap());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(form_from_json(r#"{"n":3,"degree":1,"coeffs":[{"index":[2,1],"poly":[]}]}"#).is_err());
        assert!(form_from_json(r#"{"n":3,"degree":4,"coeffs":[]}"#).is_err());
        assert!(form_from_json(r#"{"n":2,"degree":0,"coeffs":[{"index":[],"poly":[[1,0,[0,0]]]}]}"#).is_err());
        let sampled = Form::function(2, ScalarField::sampled(|x| x[0]));
        assert!(form_to_json(&sampled).is_err());
    }
}
