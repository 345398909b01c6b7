//! Brute-force quadrature oracles for axisymmetric data.
//!
//! Everything here works on the profile curve `ψ ↦ r(ψ)` with analytic
//! derivatives and Gauss–Legendre quadrature in ψ, sharing no code path with
//! the grid-based library.
#![allow(dead_code)]

use std::f64::consts::PI;

pub const ORACLE_NODES: usize = 400;

/// Nodes and weights of the `m`-point Gauss–Legendre rule on `[−1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        loop {
            let (p, dp) = legendre_with_derivative(m, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(m, z);
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

fn legendre_with_derivative(m: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 2..=m {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = m as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}

/// `∫_0^π f(ψ) dψ`.
pub fn integrate_colatitude(f: impl Fn(f64) -> f64) -> f64 {
    let (x, w) = gauss_legendre(ORACLE_NODES);
    x.iter().zip(&w).map(|(&x, &w)| 0.5 * PI * w * f(0.5 * PI * (x + 1.0))).sum()
}

/// `|S^d|` by the two-step recursion from `|S^0| = 2`, `|S^1| = 2π`.
pub fn sphere_area(d: usize) -> f64 {
    match d {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (d as f64 - 1.0) * sphere_area(d - 2),
    }
}

pub fn sharp_constant(n: usize) -> f64 {
    sphere_area(n - 1).powf(2.0 / (n as f64 - 1.0))
}

/// Zonal function `a + b P_l(cos ψ)` with its first two ψ-derivatives.
#[derive(Clone, Copy, Debug)]
pub struct Zonal {
    pub base: f64,
    pub amplitude: f64,
    pub degree: usize,
}

impl Zonal {
    pub fn new(base: f64, amplitude: f64, degree: usize) -> Self {
        Self { base, amplitude, degree }
    }

    pub fn eval(&self, psi: f64) -> [f64; 3] {
        let l = self.degree as f64;
        let (x, s) = (psi.cos(), psi.sin());
        let (p, dp_dx) = if self.degree == 0 { (1.0, 0.0) } else { legendre_with_derivative(self.degree, x) };
        let d1 = -s * dp_dx;
        // Legendre's equation in ψ: P'' + cot ψ P' + l(l+1) P = 0.
        let d2 = -l * (l + 1.0) * p - x / s * d1;
        [self.base + self.amplitude * p, self.amplitude * d1, self.amplitude * d2]
    }
}

/// Profile and orbit principal curvatures of the radial graph `r(ψ)` in the
/// warped plane `dr² + sinh²r dψ²`.
pub fn curvatures(r: [f64; 3], psi: f64) -> (f64, f64) {
    let [r, r1, r2] = r;
    let (lam, lamp) = (r.sinh(), r.cosh());
    let v = (1.0 + r1 * r1 / (lam * lam)).sqrt();
    let profile = (lam * lamp + 2.0 * lamp * r1 * r1 / lam - r2) / (lam * lam * v.powi(3));
    let orbit = (lamp / lam - r1 * psi.cos() / psi.sin() / (lam * lam)) / v;
    (profile, orbit)
}

/// Per-ψ data of an axisymmetric hypersurface in H^n.
pub struct Slice {
    pub p1: f64,
    pub p2: f64,
    /// Area element including the orbit factor, so that `∫ f · density dψ`
    /// is a surface integral.
    pub density: f64,
}

pub fn slice(n: usize, shape: &Zonal, psi: f64) -> Slice {
    let r = shape.eval(psi);
    let (a, b) = curvatures(r, psi);
    let m = (n - 2) as f64;
    let lam = r[0].sinh();
    let p1 = (a + m * b) / (m + 1.0);
    let e2 = m * a * b + m * (m - 1.0) / 2.0 * b * b;
    let p2 = e2 / ((m + 1.0) * m / 2.0);
    let density = sphere_area(n - 2) * (lam * psi.sin()).powi(n as i32 - 2) * (lam * lam + r[1] * r[1]).sqrt();
    Slice { p1, p2, density }
}

pub fn area(n: usize, shape: &Zonal) -> f64 {
    integrate_colatitude(|psi| slice(n, shape, psi).density)
}

/// `(∫p_1² dμ, |Σ|)`.
pub fn willmore_terms(n: usize, shape: &Zonal) -> (f64, f64) {
    let lhs = integrate_colatitude(|psi| {
        let s = slice(n, shape, psi);
        s.p1 * s.p1 * s.density
    });
    (lhs, area(n, shape))
}

/// `∫p_1² dμ − ω^{2/(n−1)}|Σ|^{(n−3)/(n−1)} − |Σ|`.
pub fn willmore_deficit(n: usize, shape: &Zonal) -> f64 {
    let (lhs, a) = willmore_terms(n, shape);
    let nf = n as f64;
    lhs - sharp_constant(n) * a.powf((nf - 3.0) / (nf - 1.0)) - a
}

/// `∫p_2 dμ − ω^{2/(n−1)}|Σ|^{(n−3)/(n−1)} − |Σ|`.
pub fn af2_deficit(n: usize, shape: &Zonal) -> f64 {
    let int_p2 = integrate_colatitude(|psi| {
        let s = slice(n, shape, psi);
        s.p2 * s.density
    });
    let a = area(n, shape);
    let nf = n as f64;
    int_p2 - sharp_constant(n) * a.powf((nf - 3.0) / (nf - 1.0)) - a
}

pub fn min_p1(n: usize, shape: &Zonal, samples: usize) -> f64 {
    (0..samples)
        .map(|i| slice(n, shape, PI * (i as f64 + 0.5) / samples as f64).p1)
        .fold(f64::INFINITY, f64::min)
}

/// Smallest amplitude `ε` at which `1 + ε P_l(cos ψ)` stops being mean-convex.
pub fn convexity_threshold(n: usize, degree: usize) -> f64 {
    let (mut lo, mut hi) = (0.0, 0.999);
    assert!(min_p1(n, &Zonal::new(1.0, hi, degree), 4000) < 0.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if min_p1(n, &Zonal::new(1.0, mid, degree), 4000) < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Sobolev deficit of a positive zonal `f` on `S^{n−1}` in the `f`-form.
pub fn sobolev_deficit(n: usize, f: &Zonal) -> f64 {
    let nf = n as f64;
    let orbit = sphere_area(n - 2);
    let k = (nf - 3.0) / (nf - 1.0);
    let lhs = integrate_colatitude(|psi| {
        let [f, f1, _] = f.eval(psi);
        orbit * psi.sin().powi(n as i32 - 2) * (f.powf(nf - 3.0) + k * f.powf(nf - 5.0) * f1 * f1)
    });
    let top = integrate_colatitude(|psi| orbit * psi.sin().powi(n as i32 - 2) * f.eval(psi)[0].powf(nf - 1.0));
    lhs - sharp_constant(n) * top.powf(k)
}

/// The same deficit for `f = w^{2/(n−3)}`, expressed through `w`.
pub fn sobolev_deficit_w(n: usize, w: &Zonal) -> f64 {
    let nf = n as f64;
    let orbit = sphere_area(n - 2);
    let c = 4.0 / ((nf - 1.0) * (nf - 3.0));
    let crit = 2.0 * (nf - 1.0) / (nf - 3.0);
    let lhs = integrate_colatitude(|psi| {
        let [w, w1, _] = w.eval(psi);
        orbit * psi.sin().powi(n as i32 - 2) * (c * w1 * w1 + w * w)
    });
    let top = integrate_colatitude(|psi| orbit * psi.sin().powi(n as i32 - 2) * w.eval(psi)[0].powf(crit));
    lhs - sharp_constant(n) * top.powf((nf - 3.0) / (nf - 1.0))
}
