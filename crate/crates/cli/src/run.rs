use std::path::Path;
use std::time::Instant;

use imcf_core::flow;
use imcf_core::functionals::{
    self, asymptotic_residuals, fit_log_slope, hawking_mass, sharp_constant, Af2Report,
    AsymptoticResiduals,
};
use imcf_core::{compute_geometry, make_shape, InequalityReport, StepDiagnostics, Termination};
use serde::Serialize;

use crate::check::CheckOutcome;
use crate::config::Config;
use crate::error::CliError;
use crate::output::{csv_bytes, real, Artifacts};

pub const AREA_LAW_TOL: f64 = 1e-6;
pub const MONOTONE_SLACK: f64 = 1e-8;
pub const LIMINF_SLACK: f64 = 1e-4;

#[derive(Clone, Debug, Serialize)]
pub struct InequalityBlock {
    pub willmore_initial: InequalityReport,
    pub willmore_final: InequalityReport,
    pub af2_final: Af2Report,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hawking_mass_final: Option<f64>,
}

/// Log-slopes over the second half of the run; `None` when there are too few
/// positive samples.
#[derive(Clone, Debug, Serialize)]
pub struct DecayRates {
    pub umbilicity: Option<f64>,
    pub r21: Option<f64>,
    pub r22: Option<f64>,
    pub r23: Option<f64>,
    pub expected_umbilicity_bound: f64,
    pub expected_r21_r22: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Timings {
    pub setup_seconds: f64,
    pub flow_seconds: f64,
    pub total_seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub config_text: String,
    pub effective_config: String,
    pub sharp_constant: f64,
    pub initial_area: f64,
    pub substeps: usize,
    pub termination: Termination,
    pub samples: Vec<StepDiagnostics>,
    pub residuals: Vec<AsymptoticResiduals>,
    pub inequalities: InequalityBlock,
    pub decay_rates: DecayRates,
    pub checks: Vec<CheckOutcome>,
    pub timings: Timings,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

pub const SERIES_HEADER: [&str; 8] = ["t", "area", "area_ratio", "q", "dq_dt", "min_p1", "max_p1", "umbilicity"];

pub fn series_csv(report: &RunReport) -> Result<Vec<u8>, CliError> {
    let a0 = report.initial_area;
    csv_bytes(
        &SERIES_HEADER,
        report.samples.iter().map(|s| {
            vec![
                real(s.t),
                real(s.area),
                real(s.area / (s.t.exp() * a0)),
                real(s.q),
                real(s.dq_dt),
                real(s.min_p1),
                real(s.max_p1),
                real(s.umbilicity),
            ]
        }),
    )
}

fn second_half<T>(xs: &[T], t: impl Fn(&T) -> f64) -> &[T] {
    let Some(last) = xs.last() else { return xs };
    let mid = 0.5 * t(last);
    let start = xs.iter().position(|x| t(x) >= mid).unwrap_or(xs.len());
    &xs[start..]
}

/// Executes the flow described by `config` and assembles the report.
pub fn execute(config: &Config, config_text: &str) -> Result<RunReport, CliError> {
    let start = Instant::now();
    config.validate()?;
    let grid = config.grid()?;
    let graph = make_shape(&config.shape, grid)?;
    let n = config.grid.n;
    let willmore_initial = functionals::willmore_deficit(&compute_geometry(&graph)?);
    let setup_seconds = start.elapsed().as_secs_f64();

    let flow_start = Instant::now();
    let mut residuals = Vec::new();
    let mut boundary = 0usize;
    let every = config.flow.sample_every;
    let run = flow::run_with(&config.flow, graph, |s| {
        if boundary.is_multiple_of(every) {
            residuals.push(asymptotic_residuals(s));
        }
        boundary += 1;
    })?;
    let flow_seconds = flow_start.elapsed().as_secs_f64();

    let fields = run.final_state.fields();
    let inequalities = InequalityBlock {
        willmore_initial,
        willmore_final: functionals::willmore_deficit(fields),
        af2_final: functionals::af2_deficit(fields),
        hawking_mass_final: hawking_mass(fields).ok(),
    };

    let late = second_half(&run.samples, |s| s.t);
    let late_t: Vec<f64> = late.iter().map(|s| s.t).collect();
    let late_res = second_half(&residuals, |r| r.t);
    let res_t: Vec<f64> = late_res.iter().map(|r| r.t).collect();
    let slope = |f: fn(&AsymptoticResiduals) -> f64| fit_log_slope(&res_t, &late_res.iter().map(f).collect::<Vec<_>>());
    let nf = n as f64;
    let decay_rates = DecayRates {
        umbilicity: fit_log_slope(&late_t, &late.iter().map(|s| s.umbilicity).collect::<Vec<_>>()),
        r21: slope(|r| r.r21),
        r22: slope(|r| r.r22),
        r23: slope(|r| r.r23),
        expected_umbilicity_bound: -1.0 / (nf - 1.0),
        expected_r21_r22: -4.0 / (nf - 1.0),
    };

    let c = sharp_constant(n);
    let area_err = run.area_law_error();
    let worst_rise = run
        .samples
        .windows(2)
        .map(|w| (w[1].q - w[0].q) / w[0].q.abs())
        .fold(f64::NEG_INFINITY, f64::max);
    let q_final = run.samples.last().map_or(f64::NAN, |s| s.q);
    let checks = vec![
        CheckOutcome::new("completed", run.completed(), format!("{:?}", run.termination)),
        CheckOutcome::new(
            "area_law",
            area_err < AREA_LAW_TOL,
            format!("max relative error {area_err:.3e} (tol {AREA_LAW_TOL:e})"),
        ),
        CheckOutcome::new(
            "q_monotone",
            run.samples.len() < 2 || worst_rise <= MONOTONE_SLACK,
            format!("largest relative increase {worst_rise:.3e}"),
        ),
        CheckOutcome::new(
            "q_above_sharp_constant",
            q_final > c - LIMINF_SLACK,
            format!("Q_final − c = {:.3e}", q_final - c),
        ),
    ];
    Ok(RunReport {
        config_text: config_text.to_string(),
        effective_config: config.to_toml(),
        sharp_constant: c,
        initial_area: run.initial_area,
        substeps: run.substeps_taken,
        termination: run.termination.clone(),
        samples: run.samples,
        residuals,
        inequalities,
        decay_rates,
        checks,
        timings: Timings {
            setup_seconds,
            flow_seconds,
            total_seconds: start.elapsed().as_secs_f64(),
        },
    })
}

/// Runs, then writes `report.json` and `series.csv` into `out`.
pub fn cmd_run(config: &Config, config_text: &str, out: &Path) -> Result<RunReport, CliError> {
    let report = execute(config, config_text)?;
    let mut artifacts = Artifacts::new(out);
    let json = serde_json::to_vec_pretty(&report).map_err(|e| CliError::Write {
        path: out.join("report.json"),
        message: e.to_string(),
    })?;
    artifacts.add("report.json", json);
    artifacts.add("series.csv", series_csv(&report)?);
    artifacts.commit()?;
    if let Termination::GuardViolation { t, kind, message } = &report.termination {
        return Err(CliError::GuardAbort {
            t: *t,
            kind: kind.clone(),
            message: message.clone(),
        });
    }
    Ok(report)
}
