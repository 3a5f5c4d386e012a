//! Homogeneous harmonic polynomials with exact rational coefficients.
//!
//! Bases are orthogonal for the normalized sphere measure `dS/σₙ`. Each member
//! stores a primitive integer polynomial `p` and its exact squared norm `N`, so
//! the orthonormal element is `p/√N`; every identity that involves `h(x)h(y)`
//! only ever needs `p(x)p(y)/N`, which stays rational.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::{binomial, Form, MultiIndex};
use crate::field::ScalarField;
use crate::poly::{qi, Exponents, Poly, Q};

/// Dimension J(k) of degree-k homogeneous harmonics in n variables.
pub fn harmonic_dim(n: usize, k: usize) -> Result<usize> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("n = {n}: need n ≥ 2")));
    }
    let all = binomial(n + k - 1, k);
    let lower = if k >= 2 { binomial(n + k - 3, k - 2) } else { 0 };
    Ok(all - lower)
}

/// All exponent vectors of total degree `k`, in descending lexicographic order
/// (`x₁^k` first).
pub fn exponents_of_degree(n: usize, k: u32) -> Vec<Exponents> {
    fn rec(n: usize, left: u32, cur: &mut Exponents, out: &mut Vec<Exponents>) {
        if cur.len() == n - 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for e in (0..=left).rev() {
            cur.push(e);
            rec(n, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        rec(n, k, &mut Vec::with_capacity(n), &mut out);
    }
    out
}

/// `∫_{S^{n−1}} x^α dS / σₙ`.
pub fn sphere_moment(n: usize, alpha: &[u32]) -> Q {
    if alpha.iter().any(|a| a % 2 == 1) {
        return Q::zero();
    }
    let mut num = BigInt::one();
    for &a in alpha {
        let mut k = a as i64 - 1;
        while k > 1 {
            num *= k;
            k -= 2;
        }
    }
    let total: u32 = alpha.iter().sum();
    let mut den = BigInt::one();
    let mut f = n as i64;
    while f < n as i64 + total as i64 {
        den *= f;
        f += 2;
    }
    Q::new(num, den)
}

/// `∫ p q dS/σₙ` for arbitrary polynomials.
pub fn sphere_inner(p: &Poly, q: &Poly) -> Q {
    let n = p.nvars();
    let mut acc = Q::zero();
    for (a, ca) in p.terms() {
        for (b, cb) in q.terms() {
            let e: Exponents = a.iter().zip(b).map(|(x, y)| x + y).collect();
            let m = sphere_moment(n, &e);
            if !m.is_zero() {
                acc += ca * cb * m;
            }
        }
    }
    acc
}

/// Harmonic part of a degree-k homogeneous polynomial:
/// `Σ_j (−1)^j |x|^{2j} Δ^j p / (2^j j! Π_{i=1}^j (n+2k−2i−2))`.
pub fn harmonic_projection(p: &Poly, k: u32) -> Poly {
    let n = p.nvars() as i64;
    let r2 = Poly::norm_sq(p.nvars());
    let mut out = p.clone();
    let mut lap = p.clone();
    let mut rpow = Poly::one(p.nvars());
    let mut c = Q::one();
    let mut j = 1i64;
    loop {
        lap = lap.laplacian();
        if lap.is_zero() {
            break;
        }
        rpow = &rpow * &r2;
        c = -c / qi(2 * j * (n + 2 * k as i64 - 2 * j - 2));
        out = &out + &(&rpow * &lap).scale(&c);
        j += 1;
    }
    out
}

/// `Σ_α α! p_α q_α`; proportional to the sphere inner product on degree-k harmonics.
fn fischer(p: &Poly, q: &Poly) -> Q {
    let mut acc = Q::zero();
    for (e, c) in p.terms() {
        let d = q.coeff(e);
        if !d.is_zero() {
            acc += c * d * multi_factorial(e);
        }
    }
    acc
}

fn multi_factorial(e: &[u32]) -> Q {
    let mut f = BigInt::one();
    for &a in e {
        for i in 2..=a {
            f *= i;
        }
    }
    Q::from_integer(f)
}

/// `n(n+2)…(n+2k−2)`: ratio of Fischer to normalized sphere norm on degree-k harmonics.
fn fischer_to_sphere(n: usize, k: u32) -> Q {
    let mut d = BigInt::one();
    for i in 0..k as i64 {
        d *= n as i64 + 2 * i;
    }
    Q::from_integer(d)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HarmonicPoly {
    /// primitive integer polynomial
    #[serde(serialize_with = "ser_display")]
    pub poly: Poly,
    pub k: u32,
    /// 1-based position in its degree
    pub j: usize,
    /// `∫ poly² dS/σₙ`
    #[serde(serialize_with = "ser_display")]
    pub norm_sq: Q,
}

fn ser_display<T: std::fmt::Display, S: serde::Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

impl HarmonicPoly {
    /// Squared scale `c²` such that `c·poly` has unit norm.
    pub fn normalization_sq(&self) -> Q {
        self.norm_sq.recip()
    }

    /// `c·poly` as floats, with `c = 1/√N`.
    pub fn normalized_f64(&self) -> (f64, Poly) {
        (1.0 / crate::poly::q_to_f64(&self.norm_sq).sqrt(), self.poly.clone())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HarmonicBasis {
    pub n: usize,
    pub k: u32,
    pub members: Vec<HarmonicPoly>,
}

impl HarmonicBasis {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Exact Gram matrix of the raw members under `dS/σₙ`.
    pub fn gram(&self) -> Vec<Vec<Q>> {
        self.members
            .iter()
            .map(|a| self.members.iter().map(|b| sphere_inner(&a.poly, &b.poly)).collect())
            .collect()
    }

    /// Exact Gram matrix of the normalized members `p/√N`. Fails only if an
    /// off-diagonal entry would need an irrational square root.
    pub fn normalized_gram(&self) -> Result<Vec<Vec<Q>>> {
        let g = self.gram();
        let mut out = vec![vec![Q::zero(); self.len()]; self.len()];
        for i in 0..self.len() {
            for j in 0..self.len() {
                if g[i][j].is_zero() {
                    continue;
                }
                let nn = &self.members[i].norm_sq * &self.members[j].norm_sq;
                let root = rational_sqrt(&nn).ok_or_else(|| {
                    Error::Precondition(format!("entry ({i},{j}) is not rational after normalization"))
                })?;
                out[i][j] = &g[i][j] / root;
            }
        }
        Ok(out)
    }

    /// `Σ_j h_j(x) h_j(y)` for the orthonormal basis, exactly.
    pub fn zonal_exact(&self, x: &[Q], y: &[Q]) -> Q {
        self.members
            .iter()
            .map(|m| m.poly.eval(x) * m.poly.eval(y) / &m.norm_sq)
            .fold(Q::zero(), |a, b| a + b)
    }
}

fn rational_sqrt(v: &Q) -> Option<Q> {
    if v.is_negative() {
        return None;
    }
    let (n, d) = (v.numer(), v.denom());
    let (rn, rd) = (n.sqrt(), d.sqrt());
    (&rn * &rn == *n && &rd * &rd == *d).then(|| Q::new(rn, rd))
}

fn build_basis(n: usize, k: u32) -> HarmonicBasis {
    let mut vs: Vec<(Poly, Q)> = Vec::new();
    for alpha in exponents_of_degree(n, k).into_iter().filter(|a| a[0] <= 1) {
        let mono = Poly::monomial(alpha.clone(), Q::one());
        let mut v = harmonic_projection(&mono, k);
        let af = multi_factorial(&alpha);
        for (u, fu) in &vs {
            // ⟨H x^α, u⟩_F = α!·u_α for harmonic u
            let c = u.coeff(&alpha) * &af / fu;
            if !c.is_zero() {
                v = &v - &u.scale(&c);
            }
        }
        let (prim, _) = v.primitive();
        let f = fischer(&prim, &prim);
        vs.push((prim, f));
    }
    let ratio = fischer_to_sphere(n, k);
    let members = vs
        .into_iter()
        .enumerate()
        .map(|(i, (poly, f))| HarmonicPoly { poly, k, j: i + 1, norm_sq: f / &ratio })
        .collect();
    HarmonicBasis { n, k, members }
}

/// Sphere-orthogonal basis of degree-k harmonics, memoized per `(n, k)`.
pub fn harmonic_basis(n: usize, k: u32) -> Result<Arc<HarmonicBasis>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("n = {n}: need n ≥ 2")));
    }
    static MEMO: OnceLock<RwLock<HashMap<(usize, u32), Arc<HarmonicBasis>>>> = OnceLock::new();
    let memo = MEMO.get_or_init(Default::default);
    if let Some(b) = memo.read().unwrap().get(&(n, k)) {
        return Ok(b.clone());
    }
    let b = Arc::new(build_basis(n, k));
    Ok(memo.write().unwrap().entry((n, k)).or_insert(b).clone())
}

/// `{h_k^{(j)} dx_I : k ≤ m, |I| = q}` ordered by `(k, j, I)`.
pub fn harmonic_qform_space(n: usize, m: u32, q: usize) -> Result<Vec<Form>> {
    if q > n {
        return Err(Error::DegreeOutOfRange { n, degree: q as isize });
    }
    let mut out = Vec::new();
    for k in 0..=m {
        let b = harmonic_basis(n, k)?;
        for h in &b.members {
            for i in MultiIndex::all(n, q) {
                out.push(Form::monomial(i, ScalarField::from_poly(h.poly.clone())));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::q;

    #[test]
    fn dimensions() {
        assert_eq!(harmonic_dim(3, 2).unwrap(), 5);
        assert_eq!(harmonic_dim(2, 5).unwrap(), 2);
        assert_eq!(harmonic_dim(4, 0).unwrap(), 1);
        assert!(harmonic_dim(1, 2).is_err());
    }

    #[test]
    fn moments() {
        assert_eq!(sphere_moment(3, &[2, 0, 0]), q(1, 3));
        assert_eq!(sphere_moment(3, &[4, 0, 0]), q(1, 5));
        assert_eq!(sphere_moment(3, &[1, 0, 0]), Q::zero());
        assert_eq!(sphere_moment(2, &[2, 2]), q(1, 8));
        assert_eq!(sphere_moment(4, &[0, 0, 0, 0]), Q::one());
    }

    #[test]
    fn small_bases() {
        let b = harmonic_basis(3, 1).unwrap();
        assert_eq!(b.len(), 3);
        for m in &b.members {
            assert_eq!(m.normalization_sq(), qi(3));
        }
        let b = harmonic_basis(2, 1).unwrap();
        assert_eq!(b.gram(), vec![vec![q(1, 2), Q::zero()], vec![Q::zero(), q(1, 2)]]);
        let b = harmonic_basis(5, 0).unwrap();
        assert_eq!(b.members[0].poly, Poly::one(5));
    }

    #[test]
    fn projection_example() {
        let x1sq = Poly::monomial(vec![2, 0, 0], Q::one());
        let h = harmonic_projection(&x1sq, 2);
        let expect = &x1sq - &Poly::norm_sq(3).scale(&q(1, 3));
        assert_eq!(h, expect);
    }

    #[test]
    fn bases_are_harmonic_and_orthonormal() {
        for n in 2..=4 {
            for k in 0..=5u32 {
                let b = harmonic_basis(n, k).unwrap();
                assert_eq!(b.len(), harmonic_dim(n, k as usize).unwrap());
                for m in &b.members {
                    assert!(m.poly.laplacian().is_zero());
                    assert!(m.poly.is_homogeneous(k));
                    assert_eq!(sphere_inner(&m.poly, &m.poly), m.norm_sq);
                }
                let g = b.normalized_gram().unwrap();
                for (i, row) in g.iter().enumerate() {
                    for (j, v) in row.iter().enumerate() {
                        assert_eq!(*v, if i == j { Q::one() } else { Q::zero() });
                    }
                }
            }
        }
    }

    #[test]
    fn qform_space_sizes() {
        assert_eq!(harmonic_qform_space(3, 0, 1).unwrap().len(), 3);
        assert_eq!(harmonic_qform_space(3, 1, 0).unwrap().len(), 4);
        assert_eq!(harmonic_qform_space(2, 2, 2).unwrap().len(), 5);
    }
}
