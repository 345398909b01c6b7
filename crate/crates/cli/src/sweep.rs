use std::path::Path;
use std::sync::Arc;

use imcf_core::flow;
use imcf_core::functionals::{self, fit_log_slope, quantity_q, sharp_constant};
use imcf_core::{build_grid, compute_geometry, make_shape, FlowConfig, ShapeSpec, Termination};
use rayon::prelude::*;

use crate::config::Config;
use crate::error::CliError;
use crate::output::{csv_bytes, opt_real, real, Artifacts};

pub const THREADS_VAR: &str = "IMCF_THREADS";

pub const SWEEP_HEADER: [&str; 14] = [
    "n",
    "r0",
    "epsilon",
    "degree",
    "status",
    "area0",
    "q0",
    "willmore_deficit",
    "willmore_relative",
    "af2_deficit",
    "q_final",
    "q_final_minus_sharp",
    "umbilicity_rate",
    "message",
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub n: usize,
    pub r0: f64,
    pub epsilon: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CellResult {
    pub status: String,
    pub message: String,
    pub area0: Option<f64>,
    pub q0: Option<f64>,
    pub willmore_deficit: Option<f64>,
    pub willmore_relative: Option<f64>,
    pub af2_deficit: Option<f64>,
    pub q_final: Option<f64>,
    pub q_final_minus_sharp: Option<f64>,
    pub umbilicity_rate: Option<f64>,
}

impl CellResult {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Cells in row order: dimension, then radius, then amplitude.
pub fn cells(config: &Config) -> Vec<Cell> {
    let s = &config.sweep;
    let mut out = Vec::new();
    for &n in &s.dims {
        for &r0 in &s.radii {
            for &epsilon in &s.amplitudes {
                out.push(Cell { n, r0, epsilon });
            }
        }
    }
    out
}

fn evaluate(config: &Config, cell: Cell) -> CellResult {
    let mut result = CellResult::default();
    let outcome = (|| -> Result<Termination, CliError> {
        let grid = Arc::new(build_grid(config.grid.mode, cell.n, config.grid.resolution)?);
        let spec = if cell.epsilon == 0.0 {
            ShapeSpec::sphere(cell.r0)
        } else {
            ShapeSpec::perturbed(cell.r0, cell.epsilon, config.sweep.degree)
        };
        let graph = make_shape(&spec, grid)?;
        let fields = compute_geometry(&graph)?;
        let w = functionals::willmore_deficit(&fields);
        result.area0 = Some(fields.area());
        result.q0 = Some(quantity_q(&fields));
        result.willmore_deficit = Some(w.deficit);
        result.willmore_relative = Some(w.relative_deficit);
        result.af2_deficit = Some(functionals::af2_deficit(&fields).inequality.deficit);

        let flow_config = FlowConfig {
            t_end: config.sweep.t_end.unwrap_or(config.flow.t_end),
            ..config.flow.clone()
        };
        let run = flow::run(&flow_config, graph)?;
        let last = run.samples.last().map_or(f64::NAN, |s| s.q);
        result.q_final = Some(last);
        result.q_final_minus_sharp = Some(last - sharp_constant(cell.n));
        let t_mid = 0.5 * run.samples.last().map_or(0.0, |s| s.t);
        let late: Vec<_> = run.samples.iter().filter(|s| s.t >= t_mid).collect();
        result.umbilicity_rate = fit_log_slope(
            &late.iter().map(|s| s.t).collect::<Vec<_>>(),
            &late.iter().map(|s| s.umbilicity).collect::<Vec<_>>(),
        );
        Ok(run.termination)
    })();
    match outcome {
        Ok(Termination::GuardViolation { t, kind, message }) => {
            result.status = kind;
            result.message = format!("aborted at t = {t}: {message}");
        }
        Ok(_) => result.status = "ok".into(),
        Err(e) => {
            result.status = e.kind().to_string();
            result.message = e.to_string();
        }
    }
    result
}

/// Reads the thread cap from `IMCF_THREADS`; unset means rayon's default.
pub fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_VAR) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(k) if k > 0 => Ok(Some(k)),
            _ => Err(CliError::Threads(v)),
        },
    }
}

pub fn execute(config: &Config, threads: Option<usize>) -> Result<Vec<(Cell, CellResult)>, CliError> {
    config.validate()?;
    let cells = cells(config);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = threads {
        builder = builder.num_threads(k);
    }
    let pool = builder.build().map_err(|e| CliError::Config(e.to_string()))?;
    let results: Vec<CellResult> = pool.install(|| cells.par_iter().map(|&c| evaluate(config, c)).collect());
    Ok(cells.into_iter().zip(results).collect())
}

pub fn sweep_csv(config: &Config, rows: &[(Cell, CellResult)]) -> Result<Vec<u8>, CliError> {
    csv_bytes(
        &SWEEP_HEADER,
        rows.iter().map(|(c, r)| {
            vec![
                c.n.to_string(),
                real(c.r0),
                real(c.epsilon),
                config.sweep.degree.to_string(),
                r.status.clone(),
                opt_real(r.area0),
                opt_real(r.q0),
                opt_real(r.willmore_deficit),
                opt_real(r.willmore_relative),
                opt_real(r.af2_deficit),
                opt_real(r.q_final),
                opt_real(r.q_final_minus_sharp),
                opt_real(r.umbilicity_rate),
                r.message.clone(),
            ]
        }),
    )
}

pub fn cmd_sweep(config: &Config, out: &Path) -> Result<Vec<(Cell, CellResult)>, CliError> {
    let rows = execute(config, thread_cap()?)?;
    let mut artifacts = Artifacts::new(out);
    artifacts.add("sweep.csv", sweep_csv(config, &rows)?);
    artifacts.commit()?;
    Ok(rows)
}
