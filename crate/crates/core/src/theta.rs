//! The smoothing function ϑ: smooth, radial, ≥ 1, and equal to |x| for |x| ≥ 2.
//!
//! ϑ(x) = (1 − χ(|x|))·2 + χ(|x|)·|x| where χ is the e^{−1/t} smooth step
//! (χ = 0 for r ≤ 1, χ = 1 for r ≥ 2). Radial derivatives of every order are
//! computed with truncated Taylor arithmetic, so symbolic fields that carry
//! ϑ', ϑ'', … factors evaluate without finite differences.

/// Number of Taylor coefficients carried by [`Jet`].
pub const JET_ORDER: usize = 10;

/// Truncated Taylor series `Σ c_k (t − t0)^k`.
#[derive(Clone, Copy, Debug)]
pub struct Jet {
    c: [f64; JET_ORDER],
}

impl Jet {
    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; JET_ORDER];
        c[0] = v;
        Jet { c }
    }

    pub fn variable(t0: f64) -> Self {
        let mut c = [0.0; JET_ORDER];
        c[0] = t0;
        c[1] = 1.0;
        Jet { c }
    }

    pub fn zero() -> Self {
        Jet { c: [0.0; JET_ORDER] }
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// `d^k/dt^k` at the expansion point.
    pub fn derivative(&self, k: usize) -> f64 {
        let mut f = 1.0;
        for i in 2..=k {
            f *= i as f64;
        }
        self.c[k] * f
    }

    pub fn add(&self, o: &Jet) -> Jet {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(o.c.iter()) {
            *a += b;
        }
        Jet { c }
    }

    pub fn sub(&self, o: &Jet) -> Jet {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(o.c.iter()) {
            *a -= b;
        }
        Jet { c }
    }

    pub fn mul(&self, o: &Jet) -> Jet {
        let mut c = [0.0; JET_ORDER];
        for i in 0..JET_ORDER {
            for j in 0..JET_ORDER - i {
                c[i + j] += self.c[i] * o.c[j];
            }
        }
        Jet { c }
    }

    pub fn scale(&self, s: f64) -> Jet {
        let mut c = self.c;
        c.iter_mut().for_each(|v| *v *= s);
        Jet { c }
    }

    pub fn recip(&self) -> Jet {
        let a0 = self.c[0];
        let mut b = [0.0; JET_ORDER];
        b[0] = 1.0 / a0;
        for k in 1..JET_ORDER {
            let mut s = 0.0;
            for j in 1..=k {
                s += self.c[j] * b[k - j];
            }
            b[k] = -s / a0;
        }
        Jet { c: b }
    }

    pub fn exp(&self) -> Jet {
        let mut b = [0.0; JET_ORDER];
        b[0] = self.c[0].exp();
        for k in 1..JET_ORDER {
            let mut s = 0.0;
            for j in 1..=k {
                s += j as f64 * self.c[j] * b[k - j];
            }
            b[k] = s / k as f64;
        }
        Jet { c: b }
    }
}

/// `e^{−1/t}` for t > 0, zero otherwise, as a jet in t.
fn flat(t: Jet) -> Jet {
    if t.value() <= 0.0 {
        Jet::zero()
    } else {
        t.recip().scale(-1.0).exp()
    }
}

/// Smooth step χ(r) as a jet in r.
pub fn chi_jet(r: f64) -> Jet {
    if r <= 1.0 {
        return Jet::zero();
    }
    if r >= 2.0 {
        return Jet::constant(1.0);
    }
    let rv = Jet::variable(r);
    let a = flat(rv.sub(&Jet::constant(1.0)));
    let b = flat(Jet::constant(2.0).sub(&rv));
    a.mul(&a.add(&b).recip())
}

/// ϑ as a function of the radius, as a jet in r.
pub fn theta_jet(r: f64) -> Jet {
    if r >= 2.0 {
        return Jet::variable(r);
    }
    if r <= 1.0 {
        return Jet::constant(2.0);
    }
    let chi = chi_jet(r);
    let one_minus = Jet::constant(1.0).sub(&chi);
    one_minus.scale(2.0).add(&chi.mul(&Jet::variable(r)))
}

/// `[ϑ(r), ϑ'(r), …]` up to and including derivative `order`.
pub fn theta_radial_derivatives(r: f64, order: usize) -> Vec<f64> {
    assert!(order < JET_ORDER, "ϑ derivative order {order} not supported");
    let j = theta_jet(r);
    (0..=order).map(|k| j.derivative(k)).collect()
}

/// ϑ at a point of ℝⁿ.
pub fn theta(x: &[f64]) -> f64 {
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    theta_jet(r).value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equals_radius_outside_two() {
        assert_eq!(theta(&[3.0, 4.0, 0.0]), 5.0);
        assert_eq!(theta(&[2.0, 0.0]), 2.0);
    }

    #[test]
    fn plateau_at_origin() {
        assert_eq!(theta(&[0.0, 0.0, 0.0]), 2.0);
    }

    #[test]
    fn bounded_below_by_one() {
        for i in 0..=400 {
            let r = i as f64 * 0.01;
            let v = theta_jet(r).value();
            assert!(v >= 1.0, "ϑ({r}) = {v}");
        }
    }

    #[test]
    fn jet_derivatives_match_finite_differences() {
        for &r in &[1.2, 1.5, 1.8] {
            let d = theta_radial_derivatives(r, 2);
            let h = 1e-5;
            let f = |s: f64| theta_jet(s).value();
            let d1 = (f(r + h) - f(r - h)) / (2.0 * h);
            let d2 = (f(r + h) - 2.0 * f(r) + f(r - h)) / (h * h);
            assert!((d[1] - d1).abs() < 1e-7, "r={r}: {} vs {}", d[1], d1);
            assert!((d[2] - d2).abs() < 1e-3, "r={r}: {} vs {}", d[2], d2);
        }
    }

    #[test]
    fn smooth_splice_at_two() {
        // one-sided differences from inside the splice match those of |x|
        let h = 1e-4;
        let f = |s: f64| theta_jet(s).value();
        let left = (f(2.0) - f(2.0 - h)) / h;
        assert!((left - 1.0).abs() < 1e-6);
        let left2 = (f(2.0) - 2.0 * f(2.0 - h) + f(2.0 - 2.0 * h)) / (h * h);
        assert!(left2.abs() < 1e-6);
    }
}
