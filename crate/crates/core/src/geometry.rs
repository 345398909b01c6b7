//! Extrinsic geometry of radial graphs in H^n = R⁺ × S^{n-1}, `ḡ = dr² + sinh²r σ`.
//!
//! A star-shaped hypersurface is the graph `r = r(θ)` over S^{n-1}. With
//! `λ = sinh r` and `φ = Φ(r)`, `Φ' = 1/λ`:
//!
//! ```text
//! g_ij = λ²(σ_ij + φ_i φ_j)
//! h_ij = λ'/(vλ) g_ij − (λ/v) φ_ij,      v = √(1 + |∇φ|²_σ)
//! ```
//!
//! `φ` itself is never formed; only `φ_i = r_i/λ` and
//! `φ_ij = r_ij/λ − (λ'/λ²) r_i r_j` enter. The unit normal is the outward one,
//! so geodesic spheres have principal curvatures `coth r`.

use std::sync::Arc;

use crate::error::{ImcfError, Result};
use crate::sphere::{Covector, GridMode, ScalarField, SphereGrid, Sym2};

/// The hypersurface `{(r(θ), θ)}`; `r > 0` at every node.
#[derive(Clone, Debug)]
pub struct RadialGraph {
    grid: Arc<SphereGrid>,
    radius: ScalarField,
}

impl RadialGraph {
    pub fn new(grid: Arc<SphereGrid>, radius: ScalarField) -> Result<Self> {
        grid.check(&radius)?;
        if let Some((node, &value)) = radius.values().iter().enumerate().find(|(_, &r)| r <= 0.0) {
            return Err(ImcfError::NonPositiveRadius { node, value });
        }
        Ok(Self { grid, radius })
    }

    pub fn sphere(grid: Arc<SphereGrid>, r0: f64) -> Result<Self> {
        let radius = ScalarField::constant(&grid, r0);
        Self::new(grid, radius)
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn radius(&self) -> &ScalarField {
        &self.radius
    }

    pub fn ambient_dim(&self) -> usize {
        self.grid.ambient_dim()
    }
}

/// Per-node geometric data of a radial graph.
#[derive(Clone, Debug)]
pub struct GeometryFields {
    grid: Arc<SphereGrid>,
    radius: ScalarField,
    lambda: Vec<f64>,
    lambda_prime: Vec<f64>,
    grad_r: Vec<Covector>,
    grad_phi: Vec<Covector>,
    hess_phi: Vec<Sym2>,
    v: Vec<f64>,
    metric: Vec<Sym2>,
    metric_inv: Vec<Sym2>,
    second_form: Vec<Sym2>,
    principal: Vec<[f64; 2]>,
    p: Vec<Vec<f64>>,
    norm_a_sq: Vec<f64>,
    area_density: Vec<f64>,
}

pub fn compute_geometry(graph: &RadialGraph) -> Result<GeometryFields> {
    let grid = graph.grid().clone();
    let n = grid.ambient_dim();
    let dim = n - 1;
    let mult = grid.angular_multiplicity();
    let (grad_r, hess_r) = grid.gradient_and_hessian(graph.radius())?;
    let nodes = grid.node_count();

    let binom: Vec<f64> = (0..=dim).map(|k| binomial(dim, k)).collect();
    let mut f = GeometryFields {
        grid: grid.clone(),
        radius: graph.radius().clone(),
        lambda: Vec::with_capacity(nodes),
        lambda_prime: Vec::with_capacity(nodes),
        grad_r: grad_r.clone(),
        grad_phi: Vec::with_capacity(nodes),
        hess_phi: Vec::with_capacity(nodes),
        v: Vec::with_capacity(nodes),
        metric: Vec::with_capacity(nodes),
        metric_inv: Vec::with_capacity(nodes),
        second_form: Vec::with_capacity(nodes),
        principal: Vec::with_capacity(nodes),
        p: vec![Vec::with_capacity(nodes); dim + 1],
        norm_a_sq: Vec::with_capacity(nodes),
        area_density: Vec::with_capacity(nodes),
    };
    let mut kappa = vec![0.0; dim];
    let mut esym = vec![0.0; dim + 1];

    for k in 0..nodes {
        let r = graph.radius()[k];
        let lam = r.sinh();
        let lamp = r.cosh();
        let dr = grad_r[k];
        let hr = hess_r[k];
        let dphi = [dr[0] / lam, dr[1] / lam];
        let c = lamp / (lam * lam);
        let hphi = Sym2::new(
            hr.xx / lam - c * dr[0] * dr[0],
            hr.xy / lam - c * dr[0] * dr[1],
            hr.yy / lam - c * dr[1] * dr[1],
        );
        let v = (1.0 + grid.norm_sq(k, dphi)).sqrt();
        let sigma = grid.round_metric(k);
        let lam2 = lam * lam;
        let g = Sym2::new(
            lam2 * (sigma.xx + dphi[0] * dphi[0]),
            lam2 * (sigma.xy + dphi[0] * dphi[1]),
            lam2 * (sigma.yy + dphi[1] * dphi[1]),
        );
        let a = lamp / (v * lam);
        let b = lam / v;
        let h = Sym2::new(
            a * g.xx - b * hphi.xx,
            a * g.xy - b * hphi.xy,
            a * g.yy - b * hphi.yy,
        );
        let pair = match grid.mode() {
            GridMode::Axisymmetric => {
                if !(g.xx > 0.0 && g.yy > 0.0) {
                    return Err(ImcfError::MetricNotPositiveDefinite { node: k });
                }
                [h.xx / g.xx, h.yy / g.yy]
            }
            GridMode::Full2Sphere => {
                relative_eigenvalues(&g, &h).ok_or(ImcfError::MetricNotPositiveDefinite { node: k })?
            }
        };
        if !(pair[0].is_finite() && pair[1].is_finite()) {
            return Err(ImcfError::NonFinite { node: k });
        }

        kappa[0] = pair[0];
        kappa[1..].iter_mut().for_each(|x| *x = pair[1]);
        debug_assert_eq!(kappa.len(), 1 + mult);
        esym.iter_mut().for_each(|e| *e = 0.0);
        esym[0] = 1.0;
        for &kv in &kappa {
            for j in (1..=dim).rev() {
                esym[j] += esym[j - 1] * kv;
            }
        }
        for j in 0..=dim {
            f.p[j].push(esym[j] / binom[j]);
        }

        f.lambda.push(lam);
        f.lambda_prime.push(lamp);
        f.grad_phi.push(dphi);
        f.hess_phi.push(hphi);
        f.v.push(v);
        f.metric.push(g);
        f.metric_inv.push(g.inverse());
        f.second_form.push(h);
        f.principal.push(pair);
        f.norm_a_sq.push(kappa.iter().map(|x| x * x).sum());
        f.area_density.push(lam.powi(dim as i32) * v);
    }
    Ok(f)
}

/// Eigenvalues of `g⁻¹h` for SPD `g`: Cholesky `g = LLᵀ`, then the symmetric
/// problem `L⁻¹ h L⁻ᵀ`. Ascending; `None` if `g` is not positive definite.
fn relative_eigenvalues(g: &Sym2, h: &Sym2) -> Option<[f64; 2]> {
    if g.xx.is_nan() || g.xx <= 0.0 {
        return None;
    }
    let l11 = g.xx.sqrt();
    let l21 = g.xy / l11;
    let rem = g.yy - l21 * l21;
    if rem.is_nan() || rem <= 0.0 {
        return None;
    }
    let l22 = rem.sqrt();
    // M = L⁻¹ h, S = M L⁻ᵀ
    let m11 = h.xx / l11;
    let m12 = h.xy / l11;
    let m21 = (h.xy - l21 * m11) / l22;
    let m22 = (h.yy - l21 * m12) / l22;
    let s11 = m11 / l11;
    let s12 = (m12 - s11 * l21) / l22;
    let s22 = (m22 - (m21 / l11) * l21) / l22;
    let mean = 0.5 * (s11 + s22);
    let rad = (0.25 * (s11 - s22).powi(2) + s12 * s12).sqrt();
    Some([mean - rad, mean + rad])
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl GeometryFields {
    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn ambient_dim(&self) -> usize {
        self.grid.ambient_dim()
    }

    pub fn node_count(&self) -> usize {
        self.lambda.len()
    }

    pub fn radius(&self) -> &ScalarField {
        &self.radius
    }

    /// `λ = sinh r`.
    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    /// `λ' = cosh r`.
    pub fn lambda_prime(&self) -> &[f64] {
        &self.lambda_prime
    }

    pub fn grad_r(&self) -> &[Covector] {
        &self.grad_r
    }

    /// `∇φ = ∇r / λ`.
    pub fn grad_phi(&self) -> &[Covector] {
        &self.grad_phi
    }

    pub fn hess_phi(&self) -> &[Sym2] {
        &self.hess_phi
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn metric(&self) -> &[Sym2] {
        &self.metric
    }

    pub fn metric_inv(&self) -> &[Sym2] {
        &self.metric_inv
    }

    pub fn second_form(&self) -> &[Sym2] {
        &self.second_form
    }

    /// The distinct principal curvatures of a node in the reduced frame. In
    /// axisymmetric mode the first is the meridian curvature and the second
    /// the angular one, with multiplicity n − 2.
    pub fn principal_pair(&self, node: usize) -> [f64; 2] {
        self.principal[node]
    }

    /// All n − 1 principal curvatures of a node.
    pub fn curvatures(&self, node: usize) -> Vec<f64> {
        let [a, b] = self.principal[node];
        std::iter::once(a)
            .chain(std::iter::repeat_n(b, self.grid.angular_multiplicity()))
            .collect()
    }

    /// Normalized mean curvature `p_k`, `k = 0..=n−1`.
    pub fn p(&self, k: usize) -> &[f64] {
        &self.p[k]
    }

    pub fn p1(&self) -> &[f64] {
        &self.p[1]
    }

    /// `|A|² = Σ κ_i²`.
    pub fn norm_a_sq(&self) -> &[f64] {
        &self.norm_a_sq
    }

    /// `dμ / dvol_σ = λ^{n−1} v`.
    pub fn area_density(&self) -> &[f64] {
        &self.area_density
    }

    pub fn min_p1(&self) -> (usize, f64) {
        self.p[1]
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (k, x)| if x < acc.1 { (k, x) } else { acc })
    }

    /// `max_node max_i |κ_i − 1|`.
    pub fn umbilicity(&self) -> f64 {
        self.principal
            .iter()
            .map(|[a, b]| (a - 1.0).abs().max((b - 1.0).abs()))
            .fold(0.0, f64::max)
    }

    /// `∫_Σ f dμ`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        assert_eq!(f.len(), self.node_count(), "field length mismatch");
        self.grid
            .weights()
            .iter()
            .zip(&self.area_density)
            .zip(f)
            .map(|((w, d), x)| w * d * x)
            .sum()
    }

    pub fn area(&self) -> f64 {
        self.grid.weights().iter().zip(&self.area_density).map(|(w, d)| w * d).sum()
    }

    /// `∇_k g_ij` with respect to the round connection.
    fn metric_derivative(&self, node: usize, k: usize, i: usize, j: usize) -> f64 {
        let lam = self.lambda[node];
        let lamp = self.lambda_prime[node];
        let dr = self.grad_r[node];
        let dphi = self.grad_phi[node];
        let hphi = &self.hess_phi[node];
        let sigma = self.grid.round_metric(node);
        2.0 * lam * lamp * dr[k] * (sigma.get(i, j) + dphi[i] * dphi[j])
            + lam * lam * (hphi.get(i, k) * dphi[j] + dphi[i] * hphi.get(j, k))
    }

    /// `g^{ij} Γ^k_ij` of the induced connection relative to the round one.
    fn connection_trace(&self, node: usize) -> Covector {
        let ginv = &self.metric_inv[node];
        let m = self.grid.angular_multiplicity() as f64;
        let weight = |i: usize, j: usize| if i == 1 && j == 1 { m } else { 1.0 };
        let mut s = [0.0; 2];
        let mut u = [0.0; 2];
        for l in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    let gij = weight(i, j) * ginv.get(i, j);
                    s[l] += gij * self.metric_derivative(node, i, j, l);
                    u[l] += gij * self.metric_derivative(node, l, i, j);
                }
            }
        }
        let mut t = [0.0; 2];
        for (k, tk) in t.iter_mut().enumerate() {
            for l in 0..2 {
                *tk += ginv.get(k, l) * (s[l] - 0.5 * u[l]);
            }
        }
        t
    }
}

pub fn surface_integral(fields: &GeometryFields, f: &ScalarField) -> Result<f64> {
    fields.grid.check(f)?;
    Ok(fields.integrate(f.values()))
}

/// Laplace–Beltrami operator of the induced metric,
/// `Δ_Σ f = g^{ij}(f_{;ij} − C^k_ij f_k)` where `f_{;ij}` is the round-metric
/// Hessian and `C` the difference of the two connections.
pub fn surface_laplacian(fields: &GeometryFields, f: &ScalarField) -> Result<ScalarField> {
    let grid = &fields.grid;
    let (grad, hess) = grid.gradient_and_hessian(f)?;
    let m = grid.angular_multiplicity() as f64;
    Ok(ScalarField::new(
        (0..fields.node_count())
            .map(|k| {
                let t = fields.connection_trace(k);
                fields.metric_inv[k].contract(&hess[k], m) - t[0] * grad[k][0] - t[1] * grad[k][1]
            })
            .collect(),
    ))
}
