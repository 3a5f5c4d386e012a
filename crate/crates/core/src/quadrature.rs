//! Quadrature plumbing: Gauss–Legendre panels, product rules on the sphere and
//! ball integrals with a tail estimate. Reductions run in a fixed order, so
//! results are bit-reproducible for a given [`QuadratureSpec`].

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// truncation radius R
    pub radius: f64,
    /// radius ε of the polar patch around a singular target
    pub shell: f64,
    /// radial panels over [0, R]
    pub panels: usize,
    /// Gauss points per panel
    pub order: usize,
    /// polar-angle nodes of the sphere rule
    pub angular: usize,
    /// target tolerance τ
    pub tol: f64,
    /// worker threads; 0 uses the global pool
    pub workers: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            radius: 12.0,
            shell: 0.1,
            panels: 24,
            order: 10,
            angular: 32,
            tol: 1e-4,
            workers: 0,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 2.0) {
            return Err(Error::InvalidArgument(format!("R = {} must exceed 2", self.radius)));
        }
        if !(self.shell > 0.0 && self.shell < self.radius) {
            return Err(Error::InvalidArgument(format!("ε = {} must lie in (0, R)", self.shell)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("τ = {} must be positive", self.tol)));
        }
        if self.panels == 0 || self.order < 2 || self.angular < 2 {
            return Err(Error::InvalidArgument("panels ≥ 1, order ≥ 2, angular ≥ 2 required".into()));
        }
        Ok(())
    }

    /// Run `f` on the configured worker pool.
    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        if self.workers == 0 {
            return f();
        }
        static POOLS: OnceLock<Mutex<HashMap<usize, Arc<rayon::ThreadPool>>>> = OnceLock::new();
        let pool = {
            let mut pools = POOLS.get_or_init(Default::default).lock().unwrap();
            pools
                .entry(self.workers)
                .or_insert_with(|| {
                    Arc::new(
                        rayon::ThreadPoolBuilder::new()
                            .num_threads(self.workers)
                            .build()
                            .expect("thread pool"),
                    )
                })
                .clone()
        };
        pool.install(f)
    }
}

/// Gauss–Legendre nodes and weights on [−1, 1].
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(m: usize) -> Self {
        assert!(m >= 1);
        let mut nodes = vec![0.0; m];
        let mut weights = vec![0.0; m];
        for i in 0..(m + 1) / 2 {
            let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(m, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(m, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[m - 1 - i] = x;
            weights[i] = w;
            weights[m - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Nodes and weights mapped to [a, b].
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, half * w))
    }
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=m {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let p = if m == 0 { 1.0 } else { p1 };
    let d = m as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Area σₙ of the unit sphere in ℝⁿ.
pub fn sphere_area(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI * sphere_area(n - 2) / (n as f64 - 2.0),
    }
}

/// Product rule on the unit sphere `S^{n−1}`; weights sum to σₙ.
#[derive(Clone, Debug)]
pub struct SphereRule {
    pub n: usize,
    /// directions, flattened (`n` entries each)
    pub dirs: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    pub fn new(n: usize, m: usize) -> Self {
        assert!(n >= 2);
        if n == 2 {
            let count = 2 * m;
            let mut dirs = Vec::with_capacity(2 * count);
            for k in 0..count {
                let phi = (k as f64 + 0.5) * 2.0 * PI / count as f64;
                dirs.push(phi.cos());
                dirs.push(phi.sin());
            }
            return SphereRule { n, dirs, weights: vec![2.0 * PI / count as f64; count] };
        }
        let sub = SphereRule::new(n - 1, m);
        let gl = GaussLegendre::new(m);
        let mut dirs = Vec::new();
        let mut weights = Vec::new();
        // odd n: the polar weight (1 − t²)^{(n−3)/2} is a polynomial in t = cos θ
        let in_cos = n % 2 == 1;
        for (node, w) in gl.nodes.iter().zip(&gl.weights) {
            let (c, s, wt) = if in_cos {
                let t = *node;
                let s = (1.0 - t * t).sqrt();
                (t, s, w * (1.0 - t * t).powf((n as f64 - 3.0) / 2.0))
            } else {
                let th = 0.5 * PI * (node + 1.0);
                (th.cos(), th.sin(), 0.5 * PI * w * th.sin().powi(n as i32 - 2))
            };
            for (k, sw) in sub.weights.iter().enumerate() {
                dirs.push(c);
                dirs.extend(sub.dirs[k * (n - 1)..(k + 1) * (n - 1)].iter().map(|v| v * s));
                weights.push(wt * sw);
            }
        }
        SphereRule { n, dirs, weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dir(&self, k: usize) -> &[f64] {
        &self.dirs[k * self.n..(k + 1) * self.n]
    }
}

/// Radial panel breakpoints on [0, R]: uniform panels plus 1, 2 (the ϑ splice)
/// and 3R/4 (the inner radius of the tail estimate).
pub fn radial_breaks(spec: &QuadratureSpec) -> Vec<f64> {
    let r = spec.radius;
    let mut b: Vec<f64> = (0..=spec.panels).map(|k| r * k as f64 / spec.panels as f64).collect();
    b.extend([1.0, 1.25, 1.5, 1.75, 2.0, 0.75 * r]);
    b.retain(|v| *v <= r);
    b.sort_by(|a, c| a.partial_cmp(c).unwrap());
    b.dedup_by(|a, c| (*a - *c).abs() < 1e-12);
    b
}

/// Integral over the ball |y| ≤ R, and over |y| ≤ 3R/4 for the tail estimate.
#[derive(Clone, Debug)]
pub struct BallIntegral {
    pub value: Vec<f64>,
    pub inner: Vec<f64>,
}

impl BallIntegral {
    /// `max_k |value_k − inner_k|`
    pub fn tail_estimate(&self) -> f64 {
        self.value
            .iter()
            .zip(&self.inner)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// `∫_{|y| ≤ R} f(y) dy` for a vector-valued integrand of length `dim`,
/// in polar coordinates about the origin.
pub fn integrate_ball<F>(n: usize, spec: &QuadratureSpec, dim: usize, f: F) -> BallIntegral
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    let rule = SphereRule::new(n, spec.angular);
    let gl = GaussLegendre::new(spec.order);
    let breaks = radial_breaks(spec);
    let inner_r = 0.75 * spec.radius;
    let mut radial: Vec<(f64, f64, bool)> = Vec::new();
    for w in breaks.windows(2) {
        for (rho, wt) in gl.on(w[0], w[1]) {
            radial.push((rho, wt * rho.powi(n as i32 - 1), w[1] <= inner_r + 1e-12));
        }
    }
    let per_dir: Vec<(Vec<f64>, Vec<f64>)> = spec.install(|| {
        (0..rule.len())
            .into_par_iter()
            .map(|k| {
                let omega = rule.dir(k);
                let mut y = vec![0.0; n];
                let mut buf = vec![0.0; dim];
                let mut full = vec![0.0; dim];
                let mut inner = vec![0.0; dim];
                for &(rho, wt, is_inner) in &radial {
                    for (yi, oi) in y.iter_mut().zip(omega) {
                        *yi = rho * oi;
                    }
                    buf.iter_mut().for_each(|v| *v = 0.0);
                    f(&y, &mut buf);
                    for c in 0..dim {
                        full[c] += wt * buf[c];
                        if is_inner {
                            inner[c] += wt * buf[c];
                        }
                    }
                }
                let w = rule.weights[k];
                (full.iter().map(|v| v * w).collect(), inner.iter().map(|v| v * w).collect())
            })
            .collect()
    });
    let mut value = vec![0.0; dim];
    let mut inner = vec![0.0; dim];
    for (a, b) in &per_dir {
        for c in 0..dim {
            value[c] += a[c];
            inner[c] += b[c];
        }
    }
    BallIntegral { value, inner }
}
