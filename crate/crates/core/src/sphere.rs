//! Grids on the unit sphere S^{n-1}.
//!
//! Two layouts share one set of stencils:
//!
//! - [`GridMode::Full2Sphere`]: an offset equiangular lattice on S^2 (n = 3),
//!   colatitude `ψ_i = (i + 1/2)π/N_ψ`, longitude `θ_j = 2πj/N_θ`.
//! - [`GridMode::Axisymmetric`]: colatitude nodes only, for any n ≥ 3. The
//!   remaining n − 2 directions are the orbits of the rotation group; they are
//!   carried analytically as one representative angular slot with
//!   multiplicity n − 2 and round metric `sin²ψ`.
//!
//! Tensors live in the reduced frame `(ψ, θ)` with `σ = diag(1, sin²ψ)`. In
//! axisymmetric mode every θ-derivative vanishes and all tensors are diagonal.
//!
//! Derivatives are 4th-order centered differences. Across a pole the
//! colatitude stencil continues through `(−ψ, θ) ↦ (ψ, θ + π)`, which the half
//! cell offset turns into an index reflection. Quadrature is the product of
//! the periodic trapezoid rule in longitude with a Fejér-type rule in
//! colatitude that integrates `cos(kψ)·sin^{m}ψ` exactly for `k < N_ψ`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ImcfError, Result};

/// Components `(f_ψ, f_θ)` of a covector in the reduced frame.
pub type Covector = [f64; 2];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GridMode {
    #[serde(rename = "axisym")]
    Axisymmetric,
    #[serde(rename = "s2")]
    Full2Sphere,
}

impl std::fmt::Display for GridMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GridMode::Axisymmetric => f.write_str("axisym"),
            GridMode::Full2Sphere => f.write_str("s2"),
        }
    }
}

impl std::str::FromStr for GridMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "axisym" | "axisymmetric" => Ok(GridMode::Axisymmetric),
            "s2" | "full" => Ok(GridMode::Full2Sphere),
            other => Err(format!("unknown grid mode '{other}' (expected axisym or s2)")),
        }
    }
}

/// Symmetric 2×2 tensor in the reduced `(ψ, θ)` frame.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Sym2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Sym2 {
    pub const fn new(xx: f64, xy: f64, yy: f64) -> Self {
        Self { xx, xy, yy }
    }

    pub const fn diag(xx: f64, yy: f64) -> Self {
        Self { xx, xy: 0.0, yy }
    }

    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    pub fn inverse(&self) -> Sym2 {
        let det = self.det();
        Sym2::new(self.yy / det, -self.xy / det, self.xx / det)
    }

    pub fn scale(&self, s: f64) -> Sym2 {
        Sym2::new(self.xx * s, self.xy * s, self.yy * s)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match (i, j) {
            (0, 0) => self.xx,
            (1, 1) => self.yy,
            _ => self.xy,
        }
    }

    /// `Σ_ij self^{ij} other_ij` with the θθ slot counted `mult` times.
    pub fn contract(&self, other: &Sym2, mult: f64) -> f64 {
        self.xx * other.xx + 2.0 * self.xy * other.xy + mult * self.yy * other.yy
    }
}

/// Values of a scalar function at the nodes of a [`SphereGrid`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScalarField {
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn constant(grid: &SphereGrid, c: f64) -> Self {
        Self::new(vec![c; grid.node_count()])
    }

    /// Samples `f(ψ, θ)` at every node.
    pub fn from_fn(grid: &SphereGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        Self::new(
            (0..grid.node_count())
                .map(|k| f(grid.colatitude(k), grid.longitude(k)))
                .collect(),
        )
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        Self::new(self.values.iter().map(|&x| f(x)).collect())
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        assert_eq!(self.len(), other.len(), "field length mismatch");
        Self::new(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn first_non_finite(&self) -> Option<usize> {
        self.values.iter().position(|x| !x.is_finite())
    }
}

impl std::ops::Index<usize> for ScalarField {
    type Output = f64;

    fn index(&self, k: usize) -> &f64 {
        &self.values[k]
    }
}

const D1: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
const D2: [f64; 5] = [-1.0, 16.0, -30.0, 16.0, -1.0];

/// 4th-order first and second differences from the taps at offsets −2, −1, 1, 2.
/// Written in difference form so constants differentiate to exactly zero.
#[inline]
fn central(f0: f64, [m2, m1, p1, p2]: [f64; 4], h: f64) -> (f64, f64) {
    let d1 = (8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h);
    let d2 = (16.0 * ((p1 - f0) + (m1 - f0)) - ((p2 - f0) + (m2 - f0))) / (12.0 * h * h);
    (d1, d2)
}

/// Order of the finite-difference stencils used on every grid.
pub const STENCIL_ORDER: usize = 4;

#[derive(Clone, Debug)]
pub struct SphereGrid {
    mode: GridMode,
    ambient_dim: usize,
    n_colat: usize,
    n_lon: usize,
    h_colat: f64,
    h_lon: f64,
    colat: Vec<f64>,
    sin_colat: Vec<f64>,
    cos_colat: Vec<f64>,
    lon: Vec<f64>,
    weights: Vec<f64>,
    laplacian_bound: f64,
}

/// Builds a grid; for [`GridMode::Full2Sphere`] the longitude count is `2 * resolution`.
pub fn build_grid(mode: GridMode, n: usize, resolution: usize) -> Result<SphereGrid> {
    match mode {
        GridMode::Axisymmetric => SphereGrid::axisymmetric(n, resolution),
        GridMode::Full2Sphere => {
            if n != 3 {
                return Err(ImcfError::FullGridDimension(n));
            }
            SphereGrid::full_sphere(resolution, 2 * resolution)
        }
    }
}

impl SphereGrid {
    pub fn axisymmetric(n: usize, n_colat: usize) -> Result<Self> {
        if n < 3 {
            return Err(ImcfError::DimensionTooSmall(n));
        }
        if n_colat < 8 {
            return Err(ImcfError::ResolutionTooSmall(n_colat));
        }
        let base = colatitude_weights(n_colat, n - 2);
        let orbit = unit_sphere_measure(n - 2);
        let weights = base.iter().map(|w| w * orbit).collect();
        Ok(Self::assemble(GridMode::Axisymmetric, n, n_colat, 1, weights))
    }

    pub fn full_sphere(n_colat: usize, n_lon: usize) -> Result<Self> {
        if n_colat < 8 {
            return Err(ImcfError::ResolutionTooSmall(n_colat));
        }
        if n_lon < 8 {
            return Err(ImcfError::ResolutionTooSmall(n_lon));
        }
        if !n_lon.is_multiple_of(2) {
            return Err(ImcfError::OddLongitudeCount(n_lon));
        }
        let base = colatitude_weights(n_colat, 1);
        let dlon = 2.0 * PI / n_lon as f64;
        let weights = base
            .iter()
            .flat_map(|w| std::iter::repeat_n(w * dlon, n_lon))
            .collect();
        Ok(Self::assemble(GridMode::Full2Sphere, 3, n_colat, n_lon, weights))
    }

    fn assemble(mode: GridMode, n: usize, n_colat: usize, n_lon: usize, weights: Vec<f64>) -> Self {
        let h_colat = PI / n_colat as f64;
        let colat: Vec<f64> = (0..n_colat).map(|i| (i as f64 + 0.5) * h_colat).collect();
        let h_lon = 2.0 * PI / n_lon as f64;
        let lon = (0..n_lon).map(|j| j as f64 * h_lon).collect();
        let mut grid = Self {
            mode,
            ambient_dim: n,
            n_colat,
            n_lon,
            h_colat,
            h_lon,
            sin_colat: colat.iter().map(|p| p.sin()).collect(),
            cos_colat: colat.iter().map(|p| p.cos()).collect(),
            colat,
            lon,
            weights,
            laplacian_bound: 0.0,
        };
        grid.laplacian_bound = grid.gershgorin_laplacian_bound();
        grid
    }

    pub fn mode(&self) -> GridMode {
        self.mode
    }

    /// Ambient dimension n of H^n; the grid discretizes S^{n-1}.
    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn n_colat(&self) -> usize {
        self.n_colat
    }

    pub fn n_lon(&self) -> usize {
        self.n_lon
    }

    pub fn node_count(&self) -> usize {
        self.n_colat * self.n_lon
    }

    pub fn colat_spacing(&self) -> f64 {
        self.h_colat
    }

    pub fn lon_spacing(&self) -> f64 {
        self.h_lon
    }

    /// Number of sphere directions carried by the θ slot of the reduced frame.
    pub fn angular_multiplicity(&self) -> usize {
        match self.mode {
            GridMode::Axisymmetric => self.ambient_dim - 2,
            GridMode::Full2Sphere => 1,
        }
    }

    pub fn colat_index(&self, node: usize) -> usize {
        node / self.n_lon
    }

    pub fn colatitude(&self, node: usize) -> f64 {
        self.colat[self.colat_index(node)]
    }

    pub fn longitude(&self, node: usize) -> f64 {
        self.lon[node % self.n_lon]
    }

    pub fn sin_colat(&self, node: usize) -> f64 {
        self.sin_colat[self.colat_index(node)]
    }

    pub fn cos_colat(&self, node: usize) -> f64 {
        self.cos_colat[self.colat_index(node)]
    }

    pub fn colatitudes(&self) -> &[f64] {
        &self.colat
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Round metric `σ` in the reduced frame at a node.
    pub fn round_metric(&self, node: usize) -> Sym2 {
        let s = self.sin_colat(node);
        Sym2::diag(1.0, s * s)
    }

    /// `|c|²_σ` for a covector at a node.
    pub fn norm_sq(&self, node: usize, c: Covector) -> f64 {
        let s = self.sin_colat(node);
        c[0] * c[0] + c[1] * c[1] / (s * s)
    }

    /// `⟨a, b⟩_σ` for two covectors at a node.
    pub fn inner(&self, node: usize, a: Covector, b: Covector) -> f64 {
        let s = self.sin_colat(node);
        a[0] * b[0] + a[1] * b[1] / (s * s)
    }

    /// Upper bound (Gershgorin) on the spectral radius of the discrete
    /// Laplace–Beltrami operator; drives the explicit time-step limit.
    pub fn laplacian_bound(&self) -> f64 {
        self.laplacian_bound
    }

    pub fn check(&self, f: &ScalarField) -> Result<()> {
        if f.len() != self.node_count() {
            return Err(ImcfError::ShapeMismatch {
                expected: self.node_count(),
                found: f.len(),
            });
        }
        match f.first_non_finite() {
            Some(node) => Err(ImcfError::NonFinite { node }),
            None => Ok(()),
        }
    }

    /// Node index of the colatitude neighbour `i + offset` in column `j`,
    /// continued across the poles.
    fn colat_neighbor(&self, i: usize, j: usize, offset: isize) -> usize {
        let n = self.n_colat as isize;
        let ii = i as isize + offset;
        let (row, flip) = if ii < 0 {
            (-ii - 1, true)
        } else if ii >= n {
            (2 * n - 1 - ii, true)
        } else {
            (ii, false)
        };
        let col = if flip { (j + self.n_lon / 2) % self.n_lon } else { j };
        row as usize * self.n_lon + col
    }

    fn lon_neighbor(&self, i: usize, j: usize, offset: isize) -> usize {
        let m = self.n_lon as isize;
        let col = (j as isize + offset).rem_euclid(m) as usize;
        i * self.n_lon + col
    }

    /// First and second colatitude differences `(∂_ψ f, ∂_ψψ f)`.
    fn colat_differences(&self, f: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut d1 = vec![0.0; f.len()];
        let mut d2 = vec![0.0; f.len()];
        for i in 0..self.n_colat {
            for j in 0..self.n_lon {
                let k = i * self.n_lon + j;
                let taps = [-2, -1, 1, 2].map(|off| f[self.colat_neighbor(i, j, off)]);
                (d1[k], d2[k]) = central(f[k], taps, self.h_colat);
            }
        }
        (d1, d2)
    }

    fn lon_differences(&self, f: &[f64]) -> (Vec<f64>, Vec<f64>) {
        if self.mode == GridMode::Axisymmetric {
            return (vec![0.0; f.len()], vec![0.0; f.len()]);
        }
        let mut d1 = vec![0.0; f.len()];
        let mut d2 = vec![0.0; f.len()];
        for i in 0..self.n_colat {
            for j in 0..self.n_lon {
                let k = i * self.n_lon + j;
                let taps = [-2, -1, 1, 2].map(|off| f[self.lon_neighbor(i, j, off)]);
                (d1[k], d2[k]) = central(f[k], taps, self.h_lon);
            }
        }
        (d1, d2)
    }

    /// First covariant derivatives `f_i`.
    pub fn covariant_gradient(&self, f: &ScalarField) -> Result<Vec<Covector>> {
        self.check(f)?;
        let (dpsi, _) = self.colat_differences(f.values());
        let (dtheta, _) = self.lon_differences(f.values());
        Ok(dpsi.into_iter().zip(dtheta).map(|(a, b)| [a, b]).collect())
    }

    /// Second covariant derivatives `f_ij` of the round metric, including the
    /// Christoffel terms `Γ^ψ_θθ = −sinψ cosψ` and `Γ^θ_ψθ = cotψ`.
    pub fn covariant_hessian(&self, f: &ScalarField) -> Result<Vec<Sym2>> {
        Ok(self.gradient_and_hessian(f)?.1)
    }

    pub fn gradient_and_hessian(&self, f: &ScalarField) -> Result<(Vec<Covector>, Vec<Sym2>)> {
        self.check(f)?;
        let (dpsi, dpsipsi) = self.colat_differences(f.values());
        let (dtheta, dthetatheta) = self.lon_differences(f.values());
        let dpsitheta = match self.mode {
            GridMode::Axisymmetric => vec![0.0; f.len()],
            GridMode::Full2Sphere => self.colat_differences(&dtheta).0,
        };
        let mut grad = Vec::with_capacity(f.len());
        let mut hess = Vec::with_capacity(f.len());
        for k in 0..f.len() {
            let s = self.sin_colat(k);
            let c = self.cos_colat(k);
            grad.push([dpsi[k], dtheta[k]]);
            hess.push(Sym2::new(
                dpsipsi[k],
                dpsitheta[k] - (c / s) * dtheta[k],
                dthetatheta[k] + s * c * dpsi[k],
            ));
        }
        Ok((grad, hess))
    }

    /// Laplace–Beltrami operator of the round metric on S^{n-1}.
    pub fn laplace_beltrami(&self, f: &ScalarField) -> Result<ScalarField> {
        self.check(f)?;
        let (dpsi, dpsipsi) = self.colat_differences(f.values());
        let (_, dthetatheta) = self.lon_differences(f.values());
        let m = self.angular_multiplicity() as f64;
        Ok(ScalarField::new(
            (0..f.len())
                .map(|k| {
                    let s = self.sin_colat(k);
                    let c = self.cos_colat(k);
                    dpsipsi[k] + m * (c / s) * dpsi[k] + dthetatheta[k] / (s * s)
                })
                .collect(),
        ))
    }

    /// `trace_σ` of a covariant 2-tensor, counting the angular slot with its multiplicity.
    pub fn trace(&self, node: usize, t: &Sym2) -> f64 {
        let s = self.sin_colat(node);
        t.xx + self.angular_multiplicity() as f64 * t.yy / (s * s)
    }

    pub fn integrate(&self, f: &ScalarField) -> Result<f64> {
        self.check(f)?;
        Ok(self.weights.iter().zip(f.values()).map(|(w, v)| w * v).sum())
    }

    fn gershgorin_laplacian_bound(&self) -> f64 {
        let m = self.angular_multiplicity() as f64;
        let h = self.h_colat;
        let mut bound: f64 = 0.0;
        // Rows in one column suffice: longitude translations permute rows.
        for i in 0..self.n_colat {
            let mut row: Vec<(usize, f64)> = Vec::with_capacity(10);
            let mut add = |node: usize, c: f64| match row.iter_mut().find(|(k, _)| *k == node) {
                Some(e) => e.1 += c,
                None => row.push((node, c)),
            };
            let s = self.sin_colat[i];
            let cot = self.cos_colat[i] / s;
            for (st, off) in (-2..=2).enumerate() {
                let node = self.colat_neighbor(i, 0, off);
                add(node, D2[st] / (12.0 * h * h) + m * cot * D1[st] / (12.0 * h));
            }
            if self.mode == GridMode::Full2Sphere {
                let hl = self.h_lon;
                for (st, off) in (-2..=2).enumerate() {
                    add(self.lon_neighbor(i, 0, off), D2[st] / (12.0 * hl * hl * s * s));
                }
            }
            bound = bound.max(row.iter().map(|(_, c)| c.abs()).sum());
        }
        bound
    }
}

/// Measure ω_d of the unit sphere S^d ⊂ R^{d+1}, `2π^{(d+1)/2} / Γ((d+1)/2)`.
pub fn unit_sphere_measure(d: usize) -> f64 {
    2.0 * PI.powf((d as f64 + 1.0) / 2.0) / gamma_half(d + 1)
}

/// Γ(k/2) for a positive integer k.
fn gamma_half(k: usize) -> f64 {
    assert!(k > 0, "Gamma has a pole at 0");
    if k.is_multiple_of(2) {
        (1..k / 2).map(|j| j as f64).product()
    } else {
        // Γ(j + 1/2) = (2j)! √π / (4^j j!) = √π Π_{i=1..j} (i − 1/2)
        let j = (k - 1) / 2;
        PI.sqrt() * (1..=j).map(|i| i as f64 - 0.5).product::<f64>()
    }
}

/// Weights of `∫_0^π f(ψ) sin^m ψ dψ` on the midpoint nodes, exact for
/// `f ∈ span{cos kψ : k < n}`.
fn colatitude_weights(n: usize, m: usize) -> Vec<f64> {
    let moments: Vec<f64> = (0..n).map(|k| cos_sin_moment(k, m)).collect();
    (0..n)
        .map(|i| {
            let psi = (i as f64 + 0.5) * PI / n as f64;
            moments
                .iter()
                .enumerate()
                .map(|(k, mk)| {
                    let c = if k == 0 { 1.0 } else { 2.0 };
                    c * (k as f64 * psi).cos() * mk
                })
                .sum::<f64>()
                / n as f64
        })
        .collect()
}

/// `∫_0^π cos(kψ) sin^m ψ dψ` in closed form via the binomial expansion of
/// `((e^{iψ} − e^{−iψ}) / 2i)^m`.
fn cos_sin_moment(k: usize, m: usize) -> f64 {
    let exp_integral = |a: i64| -> Complex64 {
        if a == 0 {
            Complex64::new(PI, 0.0)
        } else if a % 2 == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, 2.0 / a as f64)
        }
    };
    let mut sum = Complex64::new(0.0, 0.0);
    let mut binom = 1.0;
    for j in 0..=m {
        let l = m as i64 - 2 * j as i64;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let term = 0.5 * (exp_integral(l + k as i64) + exp_integral(l - k as i64));
        sum += term * (sign * binom);
        binom = binom * (m - j) as f64 / (j + 1) as f64;
    }
    (sum / Complex64::new(0.0, 2.0).powi(m as i32)).re
}
