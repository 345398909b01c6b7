//! Inverse mean curvature flow `∂_t X = ν / ((n−1) p_1)` for radial graphs.
//!
//! The flow is integrated as a scalar PDE for the radial function,
//! `∂_t r = v / ((n−1) p_1)`, which differs from the normal parametrization
//! only by a tangential motion. Time stepping is classical RK4; explicit
//! stepping of this parabolic equation is stable only below a step limit,
//! which [`cfl_time_step`] estimates from the grid's Laplacian bound.

use serde::{Deserialize, Serialize};

use crate::error::{ImcfError, Result};
use crate::functionals;
use crate::geometry::{compute_geometry, surface_laplacian, GeometryFields, RadialGraph};
use crate::sphere::ScalarField;

/// Largest `|z|` on the negative real axis inside the RK4 stability region.
const RK4_REAL_STABILITY: f64 = 2.785;

#[derive(Clone, Debug)]
pub struct FlowState {
    pub t: f64,
    graph: RadialGraph,
    fields: GeometryFields,
}

impl FlowState {
    /// Starts a flow at `t = 0`; the graph must be mean-convex.
    pub fn new(graph: RadialGraph) -> Result<Self> {
        Self::at(0.0, graph)
    }

    pub fn at(t: f64, graph: RadialGraph) -> Result<Self> {
        let fields = compute_geometry(&graph)?;
        check_mean_convex(&fields)?;
        Ok(Self { t, graph, fields })
    }

    pub fn graph(&self) -> &RadialGraph {
        &self.graph
    }

    pub fn fields(&self) -> &GeometryFields {
        &self.fields
    }

    pub fn diagnostics(&self) -> StepDiagnostics {
        StepDiagnostics::of(self)
    }
}

fn check_mean_convex(fields: &GeometryFields) -> Result<()> {
    let (node, p1) = fields.min_p1();
    if p1 > 0.0 && p1.is_finite() {
        Ok(())
    } else {
        Err(ImcfError::MeanConvexity { node, p1 })
    }
}

/// `F = 1 / ((n−1) p_1)`.
pub fn normal_speed(fields: &GeometryFields) -> Result<ScalarField> {
    check_mean_convex(fields)?;
    let d = (fields.ambient_dim() - 1) as f64;
    Ok(ScalarField::new(fields.p1().iter().map(|p| 1.0 / (d * p)).collect()))
}

/// `∂_t r = v F`, since `⟨ν, ∂_r⟩ = 1/v` for the outward normal.
pub fn radial_velocity(fields: &GeometryFields) -> Result<ScalarField> {
    let speed = normal_speed(fields)?;
    Ok(ScalarField::new(
        speed.values().iter().zip(fields.v()).map(|(f, v)| f * v).collect(),
    ))
}

/// Time-step limit of explicit RK4 for the linearized flow. The leading
/// diffusion coefficient of `∂_t r` is `1/((n−1)² p_1² λ² v²) ≤ 1/((n−1)² p_1² λ²)`.
pub fn cfl_time_step(fields: &GeometryFields, safety: f64) -> f64 {
    let d = (fields.ambient_dim() - 1) as f64;
    let diffusion = fields
        .p1()
        .iter()
        .zip(fields.lambda())
        .map(|(p, l)| 1.0 / (d * d * p * p * l * l))
        .fold(0.0, f64::max);
    safety * RK4_REAL_STABILITY / (diffusion * fields.grid().laplacian_bound())
}

/// A step that tripped a guard; `state` is the last valid state.
#[derive(Clone, Debug)]
pub struct FlowAbort {
    pub state: FlowState,
    pub reason: ImcfError,
}

fn velocity_at(state: &FlowState, r: Vec<f64>) -> Result<(RadialGraph, ScalarField)> {
    let graph = RadialGraph::new(state.graph.grid().clone(), ScalarField::new(r))?;
    let fields = compute_geometry(&graph)?;
    let vel = radial_velocity(&fields)?;
    Ok((graph, vel))
}

fn axpy(base: &[f64], a: f64, x: &ScalarField) -> Vec<f64> {
    base.iter().zip(x.values()).map(|(b, x)| b + a * x).collect()
}

/// One classical RK4 step of size `dt`.
pub fn step(state: &FlowState, dt: f64) -> std::result::Result<FlowState, Box<FlowAbort>> {
    if dt == 0.0 {
        return Ok(state.clone());
    }
    let abort = |reason| {
        Box::new(FlowAbort {
            state: state.clone(),
            reason,
        })
    };
    let r0 = state.graph.radius().values();
    let k1 = radial_velocity(&state.fields).map_err(abort)?;
    let (_, k2) = velocity_at(state, axpy(r0, 0.5 * dt, &k1)).map_err(abort)?;
    let (_, k3) = velocity_at(state, axpy(r0, 0.5 * dt, &k2)).map_err(abort)?;
    let (_, k4) = velocity_at(state, axpy(r0, dt, &k3)).map_err(abort)?;
    let r1: Vec<f64> = (0..r0.len())
        .map(|k| r0[k] + dt / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]))
        .collect();
    let graph = RadialGraph::new(state.graph.grid().clone(), ScalarField::new(r1)).map_err(abort)?;
    FlowState::at(state.t + dt, graph).map_err(abort)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum DtPolicy {
    /// Every sample interval is one RK4 step of size `dt`.
    Fixed,
    /// Sample intervals of size `dt` are split into equal substeps no larger
    /// than `safety ×` the RK4 stability limit.
    Cfl { safety: f64 },
}

impl Default for DtPolicy {
    fn default() -> Self {
        DtPolicy::Cfl { safety: 0.8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub dt_policy: DtPolicy,
    /// Diagnostics are recorded every this many `dt` intervals.
    #[serde(default = "default_sample_every")]
    pub sample_every: usize,
    /// Stop early once the umbilicity measure drops below this value.
    #[serde(default)]
    pub umbilicity_stop: Option<f64>,
}

fn default_sample_every() -> usize {
    1
}

impl FlowConfig {
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self {
            dt,
            t_end,
            dt_policy: DtPolicy::default(),
            sample_every: 1,
            umbilicity_stop: None,
        }
    }

    pub fn sample_every(mut self, k: usize) -> Self {
        self.sample_every = k;
        self
    }

    pub fn with_policy(mut self, policy: DtPolicy) -> Self {
        self.dt_policy = policy;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(ImcfError::InvalidFlowConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(ImcfError::InvalidFlowConfig(format!(
                "t_end must be positive, got {}",
                self.t_end
            )));
        }
        if self.sample_every == 0 {
            return Err(ImcfError::InvalidFlowConfig("sample_every must be at least 1".into()));
        }
        if let DtPolicy::Cfl { safety } = self.dt_policy {
            if !(safety > 0.0 && safety <= 1.0) {
                return Err(ImcfError::InvalidFlowConfig(format!(
                    "CFL safety factor must lie in (0, 1], got {safety}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub t: f64,
    pub min_p1: f64,
    pub max_p1: f64,
    /// `max |κ_i − 1|` over nodes and directions.
    pub umbilicity: f64,
    pub area: f64,
    pub q: f64,
    /// `dQ/dt` from the evolution equations evaluated on the current surface.
    pub dq_dt: f64,
}

impl StepDiagnostics {
    pub fn of(state: &FlowState) -> Self {
        let f = &state.fields;
        let (_, min_p1) = f.min_p1();
        let max_p1 = f.p1().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self {
            t: state.t,
            min_p1,
            max_p1,
            umbilicity: f.umbilicity(),
            area: f.area(),
            q: functionals::quantity_q(f),
            dq_dt: q_rate(f).unwrap_or(f64::NAN),
        }
    }
}

/// Right-hand side of the `p_1` evolution equation along the normal flow,
/// `−(1/(n−1)²) Δ_Σ(1/p_1) − (|A|² − (n−1)) / ((n−1)² p_1)`.
pub fn p1_evolution_rhs(fields: &GeometryFields) -> Result<ScalarField> {
    check_mean_convex(fields)?;
    let d = (fields.ambient_dim() - 1) as f64;
    let inv = ScalarField::new(fields.p1().iter().map(|p| 1.0 / p).collect());
    let lap = surface_laplacian(fields, &inv)?;
    Ok(ScalarField::new(
        (0..fields.node_count())
            .map(|k| {
                let p = fields.p1()[k];
                -lap[k] / (d * d) - (fields.norm_a_sq()[k] - d) / (d * d * p)
            })
            .collect(),
    ))
}

/// `∂_t p_1` at fixed sphere coordinates under the radial parametrization:
/// the normal-flow rate plus the tangential drift `F ⟨∇r, ∇p_1⟩_σ / (λ² v)`.
pub fn p1_radial_rate(fields: &GeometryFields) -> Result<ScalarField> {
    let rhs = p1_evolution_rhs(fields)?;
    let speed = normal_speed(fields)?;
    let grid = fields.grid();
    let grad_p1 = grid.covariant_gradient(&ScalarField::new(fields.p1().to_vec()))?;
    Ok(ScalarField::new(
        (0..fields.node_count())
            .map(|k| {
                let lam = fields.lambda()[k];
                let drift = speed[k] * grid.inner(k, fields.grad_r()[k], grad_p1[k])
                    / (lam * lam * fields.v()[k]);
                rhs[k] + drift
            })
            .collect(),
    ))
}

/// `dQ/dt = |Σ|^{−α} (∫ 2 p_1 ∂_t p_1 dμ + (1 − α) W)` with
/// `W = ∫(p_1² − 1) dμ`, `α = (n−3)/(n−1)`, using `∂_t dμ = dμ`.
pub fn q_rate(fields: &GeometryFields) -> Result<f64> {
    let rhs = p1_evolution_rhs(fields)?;
    let n = fields.ambient_dim() as f64;
    let alpha = (n - 3.0) / (n - 1.0);
    let p1 = fields.p1();
    let first: Vec<f64> = (0..p1.len()).map(|k| 2.0 * p1[k] * rhs[k]).collect();
    let w: Vec<f64> = p1.iter().map(|p| p * p - 1.0).collect();
    let area = fields.area();
    Ok(area.powf(-alpha) * (fields.integrate(&first) + (1.0 - alpha) * fields.integrate(&w)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Termination {
    Completed,
    UmbilicityReached { t: f64 },
    GuardViolation { t: f64, kind: String, message: String },
}

#[derive(Clone, Debug)]
pub struct FlowRun {
    pub samples: Vec<StepDiagnostics>,
    pub termination: Termination,
    pub final_state: FlowState,
    pub initial_area: f64,
    pub substeps_taken: usize,
}

impl FlowRun {
    pub fn completed(&self) -> bool {
        !matches!(self.termination, Termination::GuardViolation { .. })
    }

    /// `max_t | |Σ_t| − e^t |Σ_0| | / |Σ_t|` over the recorded samples.
    pub fn area_law_error(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| (s.area - s.t.exp() * self.initial_area).abs() / s.area)
            .fold(0.0, f64::max)
    }
}

/// Evolves `initial` to `config.t_end`, sampling diagnostics every
/// `config.sample_every` intervals of `config.dt`. Guard violations end the
/// run early and are reported in [`FlowRun::termination`].
pub fn run(config: &FlowConfig, initial: RadialGraph) -> Result<FlowRun> {
    run_with(config, initial, |_| {})
}

/// As [`run`], calling `observe` on every state at each `dt` boundary.
pub fn run_with(
    config: &FlowConfig,
    initial: RadialGraph,
    mut observe: impl FnMut(&FlowState),
) -> Result<FlowRun> {
    config.validate()?;
    let mut state = FlowState::new(initial)?;
    let initial_area = state.fields.area();
    let intervals = (config.t_end / config.dt).round().max(1.0) as usize;
    let mut samples = vec![state.diagnostics()];
    observe(&state);
    let mut termination = Termination::Completed;
    let mut substeps_taken = 0;

    'outer: for k in 1..=intervals {
        let t_target = k as f64 * config.dt;
        let span = t_target - state.t;
        let pieces = match config.dt_policy {
            DtPolicy::Fixed => 1,
            DtPolicy::Cfl { safety } => (span / cfl_time_step(&state.fields, safety)).ceil().max(1.0) as usize,
        };
        let h = span / pieces as f64;
        for _ in 0..pieces {
            match step(&state, h) {
                Ok(next) => state = next,
                Err(abort) => {
                    termination = Termination::GuardViolation {
                        t: abort.state.t,
                        kind: abort.reason.kind().to_string(),
                        message: abort.reason.to_string(),
                    };
                    state = abort.state;
                    break 'outer;
                }
            }
            substeps_taken += 1;
        }
        state.t = t_target;
        observe(&state);
        let last = k == intervals;
        if k % config.sample_every == 0 || last {
            let diag = state.diagnostics();
            let reached = config.umbilicity_stop.is_some_and(|tol| diag.umbilicity < tol);
            samples.push(diag);
            if reached && !last {
                termination = Termination::UmbilicityReached { t: state.t };
                break;
            }
        }
    }
    if matches!(termination, Termination::GuardViolation { .. })
        && samples.last().is_some_and(|s| s.t != state.t)
    {
        samples.push(state.diagnostics());
    }

    Ok(FlowRun {
        samples,
        termination,
        final_state: state,
        initial_area,
        substeps_taken,
    })
}
