use std::collections::VecDeque;
use std::str::FromStr;
use std::sync::Arc;

use imcf_core::flow::{self, normal_speed, p1_evolution_rhs, p1_radial_rate};
use imcf_core::functionals::{self, beckner_gap, beckner_w_form, quantity_q, sharp_constant, DEFAULT_EQUALITY_TOL};
use imcf_core::shapes::{corpus, legendre};
use imcf_core::{
    compute_geometry, make_shape, unit_sphere_measure, DtPolicy, FlowConfig, FlowState, GridMode,
    ImcfError, RadialGraph, ScalarField, ShapeSpec, SphereGrid,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::Config;
use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl CheckOutcome {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Willmore,
    Beckner,
    Evolution,
    SphereOracle,
    Af2,
}

impl FromStr for Suite {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "willmore" => Ok(Suite::Willmore),
            "beckner" => Ok(Suite::Beckner),
            "evolution" => Ok(Suite::Evolution),
            "sphere-oracle" => Ok(Suite::SphereOracle),
            "af2" => Ok(Suite::Af2),
            other => Err(CliError::UnknownSuite(other.to_string())),
        }
    }
}

pub const RANDOM_FIELDS: usize = 100;
const SPHERE_RADII: [f64; 3] = [0.5, 1.0, 2.0];

pub fn run_suite(suite: Suite, config: &Config) -> Result<Vec<CheckOutcome>, CliError> {
    config.validate()?;
    match suite {
        Suite::Willmore => willmore(config),
        Suite::Beckner => beckner(config),
        Suite::Evolution => evolution(config),
        Suite::SphereOracle => sphere_oracle(config),
        Suite::Af2 => af2(config),
    }
}

fn label(spec: &ShapeSpec) -> String {
    format!("{:?}(r0={}, eps={}, seed={})", spec.kind, spec.r0, spec.epsilon, spec.seed)
}

fn willmore(config: &Config) -> Result<Vec<CheckOutcome>, CliError> {
    let grid = config.grid()?;
    let mut out = Vec::new();
    for spec in corpus(config.grid.mode) {
        let name = format!("willmore/{}", label(&spec));
        let outcome = match make_shape(&spec, grid.clone()).and_then(|g| compute_geometry(&g)) {
            Ok(fields) => {
                let r = functionals::willmore_deficit(&fields);
                let pass = if spec.epsilon == 0.0 {
                    r.relative_deficit.abs() < DEFAULT_EQUALITY_TOL
                } else {
                    r.relative_deficit >= -DEFAULT_EQUALITY_TOL
                };
                CheckOutcome::new(name, pass, format!("deficit {:.6e} (relative {:.3e})", r.deficit, r.relative_deficit))
            }
            Err(e) => CheckOutcome::new(name, false, e.to_string()),
        };
        out.push(outcome);
    }
    Ok(out)
}

fn random_positive_field(grid: &SphereGrid, rng: &mut ChaCha8Rng) -> ScalarField {
    let scale = rng.gen_range(0.2..3.0);
    let coeffs: Vec<f64> = (1..=6).map(|l| rng.gen_range(-1.0..1.0) / l as f64).collect();
    ScalarField::from_fn(grid, |psi, _| {
        let s: f64 = coeffs.iter().enumerate().map(|(i, c)| c * legendre(i + 1, psi.cos())).sum();
        scale * s.exp()
    })
}

fn beckner(config: &Config) -> Result<Vec<CheckOutcome>, CliError> {
    let n = config.grid.n;
    if n < 4 || config.grid.mode != GridMode::Axisymmetric {
        return Err(ImcfError::BecknerDimension(n).into());
    }
    let grid = config.grid()?;
    let w_power = (n as f64 - 3.0) / 2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(config.shape.seed);
    let mut min_f: f64 = f64::INFINITY;
    let mut min_w: f64 = f64::INFINITY;
    for _ in 0..RANDOM_FIELDS {
        let f = random_positive_field(&grid, &mut rng);
        min_f = min_f.min(beckner_gap(&grid, &f)?.deficit);
        min_w = min_w.min(beckner_w_form(&grid, &f.map(|x| x.powf(w_power)))?.deficit);
    }
    let mut constant_worst: f64 = 0.0;
    for c in [0.3, 1.0, 2.5] {
        let f = ScalarField::constant(&grid, c);
        constant_worst = constant_worst.max(beckner_gap(&grid, &f)?.deficit.abs());
        constant_worst = constant_worst.max(beckner_w_form(&grid, &f.map(|x| x.powf(w_power)))?.deficit.abs());
    }
    Ok(vec![
        CheckOutcome::new(
            "beckner/random-f",
            min_f >= -1e-10,
            format!("{RANDOM_FIELDS} fields, min deficit {min_f:.6e}"),
        ),
        CheckOutcome::new(
            "beckner/random-w",
            min_w >= -1e-10,
            format!("{RANDOM_FIELDS} fields, min deficit {min_w:.6e}"),
        ),
        CheckOutcome::new(
            "beckner/constants",
            constant_worst < 1e-10,
            format!("max |deficit| {constant_worst:.3e}"),
        ),
    ])
}

fn evolution(config: &Config) -> Result<Vec<CheckOutcome>, CliError> {
    let graph = make_shape(&config.shape, config.grid()?)?;
    let mut worst: f64 = 0.0;
    let mut window: VecDeque<FlowState> = VecDeque::with_capacity(3);
    let run = flow::run_with(&config.flow, graph, |s| {
        if window.len() == 3 {
            window.pop_front();
        }
        window.push_back(s.clone());
        if window.len() == 3 {
            let Ok(rate) = p1_radial_rate(window[1].fields()) else { return };
            let span = window[2].t - window[0].t;
            let (before, after) = (window[0].fields().p1(), window[2].fields().p1());
            let scale = rate.values().iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let resid = (0..rate.len())
                .map(|k| ((after[k] - before[k]) / span - rate[k]).abs())
                .fold(0.0, f64::max);
            worst = worst.max(resid / scale);
        }
    })?;
    let area = run.area_law_error();
    let rise = run
        .samples
        .windows(2)
        .map(|w| (w[1].q - w[0].q) / w[0].q.abs())
        .fold(f64::NEG_INFINITY, f64::max);
    let positive_rate = run.samples.iter().map(|s| s.dq_dt).fold(f64::NEG_INFINITY, f64::max);
    Ok(vec![
        CheckOutcome::new("evolution/completed", run.completed(), format!("{:?}", run.termination)),
        CheckOutcome::new(
            "evolution/p1-rate",
            worst < 1e-3,
            format!("max relative residual of centered ∂t p1 {worst:.3e}"),
        ),
        CheckOutcome::new("evolution/area-law", area < 1e-6, format!("max relative error {area:.3e}")),
        CheckOutcome::new(
            "evolution/q-monotone",
            rise <= 1e-8 && positive_rate <= 1e-10,
            format!("largest relative increase {rise:.3e}, largest dQ/dt {positive_rate:.3e}"),
        ),
    ])
}

fn sphere_oracle(config: &Config) -> Result<Vec<CheckOutcome>, CliError> {
    let n = config.grid.n;
    let nf = n as f64;
    let omega = unit_sphere_measure(n - 1);
    let grid = config.grid()?;
    let mut out = Vec::new();
    for r0 in SPHERE_RADII {
        let graph = RadialGraph::sphere(grid.clone(), r0)?;
        let f = compute_geometry(&graph)?;
        let coth = 1.0 / r0.tanh();
        let mut curv: f64 = 0.0;
        for k in 0..f.node_count() {
            for kappa in f.curvatures(k) {
                curv = curv.max((kappa - coth).abs());
            }
            for order in 1..n {
                curv = curv.max((f.p(order)[k] - coth.powi(order as i32)).abs() / coth.powi(order as i32));
            }
            curv = curv.max((f.norm_a_sq()[k] - (nf - 1.0) * coth * coth).abs());
        }
        let area_err = (f.area() - omega * r0.sinh().powi(n as i32 - 1)).abs() / f.area();
        let q_err = (quantity_q(&f) - sharp_constant(n)).abs() / sharp_constant(n);
        let deficit = functionals::willmore_deficit(&f).relative_deficit.abs();
        let speed = normal_speed(&f)?;
        let speed_err = speed.values().iter().fold(0.0f64, |m, s| m.max((s - r0.tanh() / (nf - 1.0)).abs()));
        let rhs_exact = -r0.tanh() / (r0.sinh().powi(2) * (nf - 1.0));
        let rhs_err = p1_evolution_rhs(&f)?
            .values()
            .iter()
            .fold(0.0f64, |m, x| m.max((x - rhs_exact).abs()));

        // A round sphere is a fixed point of the spatial discretization, so
        // fixed steps are stable in either grid mode.
        let cfg = FlowConfig::new(1e-2, 1.0).with_policy(DtPolicy::Fixed).sample_every(10);
        let run = flow::run(&cfg, graph)?;
        let exact = (r0.sinh() * (1.0 / (nf - 1.0)).exp()).asinh();
        let radius_err = run
            .final_state
            .graph()
            .radius()
            .values()
            .iter()
            .fold(0.0f64, |m, r| m.max((r - exact).abs()));

        let tag = |what: &str| format!("sphere-oracle/r0={r0}/{what}");
        out.push(CheckOutcome::new(tag("curvatures"), curv < 1e-10, format!("max error {curv:.3e}")));
        out.push(CheckOutcome::new(tag("area"), area_err < 1e-10, format!("relative error {area_err:.3e}")));
        out.push(CheckOutcome::new(tag("q"), q_err < 1e-8, format!("relative error {q_err:.3e}")));
        out.push(CheckOutcome::new(tag("willmore-equality"), deficit < 1e-8, format!("|relative deficit| {deficit:.3e}")));
        out.push(CheckOutcome::new(tag("speed"), speed_err < 1e-12, format!("max error {speed_err:.3e}")));
        out.push(CheckOutcome::new(tag("p1-rate"), rhs_err < 1e-8, format!("max error {rhs_err:.3e}")));
        out.push(CheckOutcome::new(
            tag("trajectory"),
            radius_err < 1e-8 && run.area_law_error() < 1e-6,
            format!("radius error {radius_err:.3e}, area law {:.3e}", run.area_law_error()),
        ));
    }
    Ok(out)
}

fn af2(config: &Config) -> Result<Vec<CheckOutcome>, CliError> {
    let grid: Arc<SphereGrid> = config.grid()?;
    let mut out = Vec::new();
    for r0 in SPHERE_RADII {
        let f = compute_geometry(&RadialGraph::sphere(grid.clone(), r0)?)?;
        let r = functionals::af2_deficit(&f);
        out.push(CheckOutcome::new(
            format!("af2/sphere(r0={r0})"),
            r.inequality.relative_deficit.abs() < 1e-6,
            format!("relative deficit {:.3e}", r.inequality.relative_deficit),
        ));
    }
    let mut admitted = 0;
    let mut worst = f64::INFINITY;
    let mut nm_worst = f64::INFINITY;
    for spec in corpus(config.grid.mode) {
        let f = compute_geometry(&make_shape(&spec, grid.clone())?)?;
        let r = functionals::af2_deficit(&f);
        nm_worst = nm_worst.min(r.willmore_minus_p2);
        if r.two_convex {
            admitted += 1;
            worst = worst.min(r.inequality.relative_deficit);
        }
    }
    out.push(CheckOutcome::new(
        "af2/corpus",
        worst >= -DEFAULT_EQUALITY_TOL,
        format!("{admitted} 2-convex shapes, min relative deficit {worst:.3e}"),
    ));
    out.push(CheckOutcome::new(
        "af2/newton-maclaurin",
        nm_worst >= -DEFAULT_EQUALITY_TOL,
        format!("min of ∫p1² − ∫p2 {nm_worst:.3e}"),
    ));
    Ok(out)
}
