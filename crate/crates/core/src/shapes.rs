//! Initial hypersurfaces: geodesic spheres, harmonic perturbations and seeded
//! random star-shaped surfaces.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ImcfError, Result};
use crate::geometry::{compute_geometry, RadialGraph};
use crate::sphere::{GridMode, ScalarField, SphereGrid};

/// Highest degree in random shapes.
pub const RANDOM_MAX_DEGREE: usize = 6;
/// Draws attempted before a random spec is declared inadmissible.
pub const RANDOM_MAX_ATTEMPTS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Sphere,
    #[serde(alias = "perturbed")]
    PerturbedSphere,
    Random,
}

/// `P̃_l^m(cos ψ) cos(m(θ − phase))`, Schmidt semi-normalized so `|Y| ≤ 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub degree: usize,
    #[serde(default)]
    pub order: usize,
    #[serde(default = "unit")]
    pub weight: f64,
    #[serde(default)]
    pub phase: f64,
}

fn unit() -> f64 {
    1.0
}

impl Harmonic {
    pub fn zonal(degree: usize) -> Self {
        Self {
            degree,
            order: 0,
            weight: 1.0,
            phase: 0.0,
        }
    }

    pub fn eval(&self, psi: f64, theta: f64) -> f64 {
        schmidt_legendre(self.degree, self.order, psi.cos()) * (self.order as f64 * (theta - self.phase)).cos()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeSpec {
    pub kind: ShapeKind,
    pub r0: f64,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default)]
    pub harmonics: Vec<Harmonic>,
    #[serde(default)]
    pub seed: u64,
}

impl ShapeSpec {
    pub fn sphere(r0: f64) -> Self {
        Self {
            kind: ShapeKind::Sphere,
            r0,
            epsilon: 0.0,
            harmonics: vec![],
            seed: 0,
        }
    }

    /// `r = r0 + ε P_l(cos ψ)`.
    pub fn perturbed(r0: f64, epsilon: f64, degree: usize) -> Self {
        Self {
            kind: ShapeKind::PerturbedSphere,
            r0,
            epsilon,
            harmonics: vec![Harmonic::zonal(degree)],
            seed: 0,
        }
    }

    pub fn random(r0: f64, epsilon: f64, seed: u64) -> Self {
        Self {
            kind: ShapeKind::Random,
            r0,
            epsilon,
            harmonics: vec![],
            seed,
        }
    }

    pub fn validate(&self, mode: GridMode) -> Result<()> {
        if !(self.r0 > 0.0 && self.r0.is_finite()) {
            return Err(ImcfError::InvalidShape(format!("r0 must be positive, got {}", self.r0)));
        }
        if !(self.epsilon >= 0.0 && self.epsilon < self.r0) {
            return Err(ImcfError::InvalidShape(format!(
                "amplitude must satisfy 0 <= epsilon < r0, got epsilon = {} with r0 = {}",
                self.epsilon, self.r0
            )));
        }
        if self.kind == ShapeKind::PerturbedSphere {
            if self.harmonics.is_empty() {
                return Err(ImcfError::InvalidShape("perturbed sphere needs at least one harmonic".into()));
            }
            for h in &self.harmonics {
                if h.order > h.degree {
                    return Err(ImcfError::InvalidShape(format!(
                        "harmonic order {} exceeds degree {}",
                        h.order, h.degree
                    )));
                }
                if mode == GridMode::Axisymmetric && h.order != 0 {
                    return Err(ImcfError::InvalidShape(
                        "axisymmetric grids only carry zonal harmonics (order 0)".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Legendre polynomial `P_l(x)`.
pub fn legendre(l: usize, x: f64) -> f64 {
    schmidt_legendre(l, 0, x)
}

/// Schmidt semi-normalized associated Legendre function (no Condon–Shortley phase).
pub fn schmidt_legendre(l: usize, m: usize, x: f64) -> f64 {
    assert!(m <= l, "order exceeds degree");
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = 1.0;
    for i in 0..m {
        pmm *= (2 * i + 1) as f64 * s;
    }
    let value = if l == m {
        pmm
    } else {
        let mut prev = pmm;
        let mut cur = x * (2 * m + 1) as f64 * pmm;
        for ll in (m + 2)..=l {
            let next = ((2 * ll - 1) as f64 * x * cur - (ll + m - 1) as f64 * prev) / (ll - m) as f64;
            prev = cur;
            cur = next;
        }
        cur
    };
    if m == 0 {
        value
    } else {
        // sqrt(2 (l−m)! / (l+m)!)
        let ratio: f64 = ((l - m + 1)..=(l + m)).map(|k| k as f64).product();
        value * (2.0 / ratio).sqrt()
    }
}

pub fn make_shape(spec: &ShapeSpec, grid: Arc<SphereGrid>) -> Result<RadialGraph> {
    spec.validate(grid.mode())?;
    match spec.kind {
        ShapeKind::Sphere => RadialGraph::sphere(grid, spec.r0),
        ShapeKind::PerturbedSphere => {
            let r = ScalarField::from_fn(&grid, |psi, theta| {
                spec.r0 + spec.epsilon * spec.harmonics.iter().map(|h| h.weight * h.eval(psi, theta)).sum::<f64>()
            });
            RadialGraph::new(grid, r)
        }
        ShapeKind::Random => random_shape(spec, grid),
    }
}

fn random_shape(spec: &ShapeSpec, grid: Arc<SphereGrid>) -> Result<RadialGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for _ in 0..RANDOM_MAX_ATTEMPTS {
        let terms: Vec<Harmonic> = (1..=RANDOM_MAX_DEGREE)
            .map(|l| {
                let weight = spec.epsilon / (l * l) as f64 * rng.gen_range(-1.0..1.0);
                let (order, phase) = match grid.mode() {
                    GridMode::Axisymmetric => (0, 0.0),
                    GridMode::Full2Sphere => (rng.gen_range(0..=l), rng.gen_range(0.0..2.0 * PI)),
                };
                Harmonic {
                    degree: l,
                    order,
                    weight,
                    phase,
                }
            })
            .collect();
        let r = ScalarField::from_fn(&grid, |psi, theta| {
            spec.r0 + terms.iter().map(|h| h.weight * h.eval(psi, theta)).sum::<f64>()
        });
        let Ok(graph) = RadialGraph::new(grid.clone(), r) else {
            continue;
        };
        if validate_shape(&graph).mean_convex {
            return Ok(graph);
        }
    }
    Err(ImcfError::InvalidShape(format!(
        "no mean-convex draw in {RANDOM_MAX_ATTEMPTS} attempts for seed {}",
        spec.seed
    )))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeValidation {
    pub star_shaped_graph: bool,
    pub mean_convex: bool,
    pub two_convex: bool,
    pub min_p1: f64,
    pub min_p2: f64,
    pub failure: Option<String>,
}

/// Admission report; never fails, geometry errors are folded into the report.
pub fn validate_shape(graph: &RadialGraph) -> ShapeValidation {
    match compute_geometry(graph) {
        Ok(fields) => {
            let min_p1 = fields.min_p1().1;
            let min_p2 = fields.p(2).iter().copied().fold(f64::INFINITY, f64::min);
            ShapeValidation {
                star_shaped_graph: true,
                mean_convex: min_p1 > 0.0,
                two_convex: min_p1 > 0.0 && min_p2 > 0.0,
                min_p1,
                min_p2,
                failure: None,
            }
        }
        Err(e) => ShapeValidation {
            star_shaped_graph: false,
            mean_convex: false,
            two_convex: false,
            min_p1: f64::NAN,
            min_p2: f64::NAN,
            failure: Some(e.to_string()),
        },
    }
}

/// The fixed 20-shape test corpus: three spheres, eleven harmonic
/// perturbations and six random shapes.
pub fn corpus(mode: GridMode) -> Vec<ShapeSpec> {
    let mut out: Vec<ShapeSpec> = [0.5, 1.0, 2.0].into_iter().map(ShapeSpec::sphere).collect();
    for degree in 1..=4 {
        for eps in [0.02, 0.05] {
            out.push(ShapeSpec::perturbed(1.0, eps, degree));
        }
    }
    out.push(ShapeSpec::perturbed(0.7, 0.03, 2));
    out.push(ShapeSpec::perturbed(1.5, 0.08, 3));
    let (o2, o3) = match mode {
        GridMode::Axisymmetric => (0, 0),
        GridMode::Full2Sphere => (1, 2),
    };
    out.push(ShapeSpec {
        kind: ShapeKind::PerturbedSphere,
        r0: 1.2,
        epsilon: 0.05,
        harmonics: vec![
            Harmonic {
                degree: 2,
                order: o2,
                weight: 1.0,
                phase: 0.0,
            },
            Harmonic {
                degree: 3,
                order: o3,
                weight: -0.5,
                phase: 0.3,
            },
        ],
        seed: 0,
    });
    for seed in 1..=6 {
        out.push(ShapeSpec::random(1.0, 0.1, seed));
    }
    out
}
