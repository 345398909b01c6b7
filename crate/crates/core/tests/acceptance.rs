//! Acceptance suite: one line per criterion, nonzero exit if any fails.

mod common;

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use imcf_core::flow::{self, p1_evolution_rhs, p1_radial_rate};
use imcf_core::functionals::{
    self, asymptotic_residuals, beckner_gap, beckner_w_form, fit_log_slope, r23_matches_regime, sharp_constant,
    AsymptoticResiduals,
};
use imcf_core::shapes::corpus;
use imcf_core::{
    build_grid, compute_geometry, make_shape, FlowConfig, FlowRun, FlowState, GridMode, RadialGraph, ScalarField,
    ShapeKind, ShapeSpec, SphereGrid, Termination,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DIMS: [usize; 3] = [3, 4, 5];
const CORPUS_RESOLUTION: usize = 64;
const CORPUS_T_END: f64 = 6.0;
const CORPUS_DT: f64 = 1e-3;
const RESIDUAL_EVERY: usize = 50;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

struct CorpusRun {
    n: usize,
    spec: ShapeSpec,
    run: FlowRun,
    residuals: Vec<AsymptoticResiduals>,
}

fn axisym(n: usize, resolution: usize) -> Arc<SphereGrid> {
    Arc::new(build_grid(GridMode::Axisymmetric, n, resolution).unwrap())
}

fn corpus_runs() -> &'static [CorpusRun] {
    static RUNS: OnceLock<Vec<CorpusRun>> = OnceLock::new();
    RUNS.get_or_init(|| {
        std::thread::scope(|scope| {
            let handles: Vec<_> = DIMS
                .iter()
                .map(|&n| {
                    scope.spawn(move || {
                        let grid = axisym(n, CORPUS_RESOLUTION);
                        corpus(GridMode::Axisymmetric)
                            .into_iter()
                            .map(|spec| {
                                let graph = make_shape(&spec, grid.clone()).unwrap();
                                let cfg = FlowConfig::new(CORPUS_DT, CORPUS_T_END).sample_every(10);
                                let mut residuals = Vec::new();
                                let mut k = 0usize;
                                let run = flow::run_with(&cfg, graph, |s| {
                                    if k.is_multiple_of(RESIDUAL_EVERY) {
                                        residuals.push(asymptotic_residuals(s));
                                    }
                                    k += 1;
                                })
                                .unwrap();
                                CorpusRun {
                                    n,
                                    spec,
                                    run,
                                    residuals,
                                }
                            })
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles.into_iter().flat_map(|h| h.join().unwrap()).collect()
        })
    })
}

fn label(spec: &ShapeSpec) -> String {
    match spec.kind {
        ShapeKind::Sphere => format!("sphere(r0={})", spec.r0),
        ShapeKind::PerturbedSphere => {
            let degrees: Vec<_> = spec.harmonics.iter().map(|h| h.degree.to_string()).collect();
            format!("perturbed(r0={}, eps={}, l={})", spec.r0, spec.epsilon, degrees.join("+"))
        }
        ShapeKind::Random => format!("random(r0={}, eps={}, seed={})", spec.r0, spec.epsilon, spec.seed),
    }
}

fn is_zonal_perturbation(spec: &ShapeSpec, r0: f64, eps: f64) -> bool {
    spec.kind == ShapeKind::PerturbedSphere && spec.r0 == r0 && spec.epsilon == eps && spec.harmonics.len() == 1
}

fn sphere_equality() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in DIMS {
        for r0 in [0.5, 1.0, 2.0] {
            let f = compute_geometry(&RadialGraph::sphere(axisym(n, 64), r0).unwrap()).unwrap();
            worst = worst.max(functionals::willmore_deficit(&f).relative_deficit.abs());
        }
    }
    let full = Arc::new(build_grid(GridMode::Full2Sphere, 3, 32).unwrap());
    for r0 in [0.5, 1.0, 2.0] {
        let f = compute_geometry(&RadialGraph::sphere(full.clone(), r0).unwrap()).unwrap();
        worst = worst.max(functionals::willmore_deficit(&f).relative_deficit.abs());
    }
    let f = compute_geometry(&RadialGraph::sphere(axisym(3, 64), 1.0).unwrap()).unwrap();
    let report = functionals::willmore_deficit(&f);
    let closed = 4.0 * PI * 1f64.cosh().powi(2);
    let lhs_err = (report.lhs - closed).abs() / closed;
    let split_err = (report.lhs - (4.0 * PI + f.area())).abs() / closed;
    Outcome::new(
        worst < 1e-6 && lhs_err < 1e-6 && split_err < 1e-6,
        format!(
            "max |relative deficit| = {worst:.2e}; n=3 r0=1: ∫p1² = {:.8} (4π cosh²1 = {closed:.8}), ω2 + |Σ| = {:.8}",
            report.lhs,
            4.0 * PI + f.area()
        ),
    )
}

fn area_law() -> Outcome {
    let specs = [
        ShapeSpec::sphere(1.0),
        ShapeSpec::perturbed(1.0, 0.05, 2),
        ShapeSpec::perturbed(1.0, 0.08, 3),
    ];
    let cfg = FlowConfig::new(1e-3, 2.0).sample_every(10);
    let start = Instant::now();
    let fine: Vec<(String, f64)> = std::thread::scope(|scope| {
        let handles: Vec<_> = DIMS
            .iter()
            .flat_map(|&n| specs.iter().map(move |spec| (n, spec)))
            .map(|(n, spec)| {
                let cfg = &cfg;
                scope.spawn(move || {
                    let run = flow::run(cfg, make_shape(spec, axisym(n, 256)).unwrap()).unwrap();
                    let err = if run.completed() { run.area_law_error() } else { f64::INFINITY };
                    (format!("n={n} {}", label(spec)), err)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let elapsed = start.elapsed().as_secs_f64();
    let fine_worst = fine.iter().map(|x| x.1).fold(0.0, f64::max);
    let corpus_worst = corpus_runs()
        .iter()
        .map(|c| c.run.area_law_error())
        .fold(0.0, f64::max);
    Outcome::new(
        fine_worst < 1e-6 && corpus_worst < 1e-6 && elapsed < 60.0,
        format!(
            "N=256 runs: max error {fine_worst:.2e} in {elapsed:.1}s; corpus runs: max error {corpus_worst:.2e}"
        ),
    )
}

fn monotonicity() -> Outcome {
    let mut violations = Vec::new();
    let mut worst_rise: f64 = f64::NEG_INFINITY;
    let mut sphere_dev: f64 = 0.0;
    for c in corpus_runs() {
        if c.run.termination != Termination::Completed {
            violations.push(format!("n={} {} terminated: {:?}", c.n, label(&c.spec), c.run.termination));
            continue;
        }
        for w in c.run.samples.windows(2) {
            let rise = (w[1].q - w[0].q) / w[0].q.abs();
            worst_rise = worst_rise.max(rise);
            if rise > 1e-8 {
                violations.push(format!("n={} {} at t={:.3}: rise {rise:.2e}", c.n, label(&c.spec), w[1].t));
                break;
            }
        }
        if c.spec.kind == ShapeKind::Sphere {
            let c0 = sharp_constant(c.n);
            for s in &c.run.samples {
                sphere_dev = sphere_dev.max((s.q - c0).abs() / c0);
            }
        }
    }
    Outcome::new(
        violations.is_empty() && sphere_dev < 1e-7,
        format!(
            "{} runs, largest relative step change {worst_rise:.2e}, sphere |Q − c|/c ≤ {sphere_dev:.2e}{}",
            corpus_runs().len(),
            if violations.is_empty() { String::new() } else { format!("; violations: {}", violations.join(", ")) }
        ),
    )
}

fn liminf_bound() -> Outcome {
    let mut lowest = f64::INFINITY;
    let mut small_worst: f64 = 0.0;
    let mut bad = Vec::new();
    for c in corpus_runs() {
        let q = c.run.samples.last().unwrap().q;
        let c0 = sharp_constant(c.n);
        lowest = lowest.min(q - c0);
        if q <= c0 - 1e-4 {
            bad.push(format!("n={} {}: Q − c = {:.2e}", c.n, label(&c.spec), q - c0));
        }
        if is_zonal_perturbation(&c.spec, 1.0, 0.02) {
            small_worst = small_worst.max((q - c0).abs());
            if (q - c0).abs() >= 1e-3 {
                bad.push(format!("n={} {}: |Q − c| = {:.2e}", c.n, label(&c.spec), (q - c0).abs()));
            }
        }
    }
    Outcome::new(
        bad.is_empty(),
        format!(
            "min over runs of Q(6) − c = {lowest:.2e}; eps = 0.02 runs: max |Q(6) − c| = {small_worst:.2e}{}",
            if bad.is_empty() { String::new() } else { format!("; {}", bad.join(", ")) }
        ),
    )
}

fn umbilicity_decay() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for c in corpus_runs().iter().filter(|c| is_zonal_perturbation(&c.spec, 1.0, 0.05)) {
        let window: Vec<_> = c.run.samples.iter().filter(|s| s.t >= 1.0 - 1e-9 && s.t <= 5.0 + 1e-9).collect();
        let t: Vec<f64> = window.iter().map(|s| s.t).collect();
        let u: Vec<f64> = window.iter().map(|s| s.umbilicity).collect();
        let target = -1.0 / (c.n as f64 - 1.0);
        let slope = fit_log_slope(&t, &u).unwrap_or(f64::NAN);
        let ok = (slope - target).abs() <= 0.2 * target.abs();
        pass &= ok;
        lines.push(format!("n={} l={}: {slope:.3} vs {target:.3}", c.n, c.spec.harmonics[0].degree));
    }
    Outcome::new(pass, format!("fitted log-slopes of U on [1, 5]: {}", lines.join(", ")))
}

fn evolution_consistency() -> Outcome {
    let check_times = [0.5, 1.0, 2.0, 4.0];
    let mut worst: f64 = 0.0;
    for n in DIMS {
        let cfg = FlowConfig::new(1e-3, 4.001);
        let graph = make_shape(&ShapeSpec::perturbed(1.0, 0.05, 2), axisym(n, 128)).unwrap();
        let mut window: VecDeque<FlowState> = VecDeque::with_capacity(3);
        flow::run_with(&cfg, graph, |s| {
            if window.len() == 3 {
                window.pop_front();
            }
            window.push_back(s.clone());
            if window.len() == 3 && check_times.iter().any(|&t| (window[1].t - t).abs() < 1e-9) {
                let span = window[2].t - window[0].t;
                let rate = p1_radial_rate(window[1].fields()).unwrap();
                let (before, after) = (window[0].fields().p1(), window[2].fields().p1());
                let scale = rate.values().iter().fold(0.0f64, |m, x| m.max(x.abs()));
                let resid = (0..rate.len())
                    .map(|k| ((after[k] - before[k]) / span - rate[k]).abs())
                    .fold(0.0, f64::max);
                worst = worst.max(resid / scale);
            }
        })
        .unwrap();
    }
    let mut sphere_worst: f64 = 0.0;
    for n in DIMS {
        for r0 in [0.5, 1.0, 2.0] {
            let f = compute_geometry(&RadialGraph::sphere(axisym(n, 64), r0).unwrap()).unwrap();
            let exact = -r0.tanh() / (r0.sinh().powi(2) * (n as f64 - 1.0));
            let rhs = p1_evolution_rhs(&f).unwrap();
            sphere_worst = sphere_worst.max(rhs.values().iter().fold(0.0f64, |m, x| m.max((x - exact).abs())));
        }
    }
    Outcome::new(
        worst < 1e-3 && sphere_worst < 1e-8,
        format!("perturbed runs: max relative residual {worst:.2e}; sphere oracle error {sphere_worst:.2e}"),
    )
}

fn random_positive_field(grid: &SphereGrid, rng: &mut ChaCha8Rng) -> ScalarField {
    let scale = rng.gen_range(0.2..3.0);
    let coeffs: Vec<f64> = (1..=6).map(|l| rng.gen_range(-1.0..1.0) / l as f64).collect();
    ScalarField::from_fn(grid, |psi, _| {
        let s: f64 = coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * imcf_core::shapes::legendre(i + 1, psi.cos()))
            .sum();
        scale * s.exp()
    })
}

fn beckner_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut min_deficit = f64::INFINITY;
    let mut const_worst: f64 = 0.0;
    let mut identity_worst: f64 = 0.0;
    for n in [4, 5, 6] {
        let grid = build_grid(GridMode::Axisymmetric, n, 512).unwrap();
        for _ in 0..100 {
            let f = random_positive_field(&grid, &mut rng);
            let d = beckner_gap(&grid, &f).unwrap();
            min_deficit = min_deficit.min(d.deficit);
            let w = f.map(|x| x.powf((n as f64 - 3.0) / 2.0));
            let dw = beckner_w_form(&grid, &w).unwrap();
            identity_worst = identity_worst.max((d.lhs - dw.lhs).abs().max((d.rhs - dw.rhs).abs()) / d.lhs);
        }
        for c in [0.3, 1.0, 2.5] {
            let f = ScalarField::constant(&grid, c);
            const_worst = const_worst.max(beckner_gap(&grid, &f).unwrap().deficit.abs());
            let w = f.map(|x| x.powf((n as f64 - 3.0) / 2.0));
            const_worst = const_worst.max(beckner_w_form(&grid, &w).unwrap().deficit.abs());
        }
    }
    Outcome::new(
        min_deficit >= -1e-10 && const_worst < 1e-10 && identity_worst < 1e-8,
        format!(
            "300 random fields: min deficit {min_deficit:.3e}; constants: max |deficit| {const_worst:.2e}; \
             f/w forms: max relative mismatch {identity_worst:.2e}"
        ),
    )
}

fn cross_mode() -> Outcome {
    let spec = ShapeSpec::perturbed(1.0, 0.05, 2);
    let axi_grid = axisym(3, 32);
    let full_grid = Arc::new(SphereGrid::full_sphere(32, 16).unwrap());
    let axi0 = compute_geometry(&make_shape(&spec, axi_grid.clone()).unwrap()).unwrap();
    let full0 = compute_geometry(&make_shape(&spec, full_grid.clone()).unwrap()).unwrap();
    let mut geom: f64 = 0.0;
    for k in 0..full0.node_count() {
        let i = full_grid.colat_index(k);
        let mut a = axi0.principal_pair(i);
        let mut b = full0.principal_pair(k);
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        geom = geom.max((a[0] - b[0]).abs()).max((a[1] - b[1]).abs());
    }
    let cfg = FlowConfig::new(1e-2, 2.0).sample_every(5);
    let axi = flow::run(&cfg, make_shape(&spec, axi_grid).unwrap()).unwrap();
    let full = flow::run(&cfg, make_shape(&spec, full_grid.clone()).unwrap()).unwrap();
    let mut traj: f64 = 0.0;
    for (a, f) in axi.samples.iter().zip(&full.samples) {
        traj = traj
            .max((a.area - f.area).abs() / a.area)
            .max((a.q - f.q).abs() / a.q)
            .max((a.dq_dt - f.dq_dt).abs())
            .max((a.min_p1 - f.min_p1).abs())
            .max((a.umbilicity - f.umbilicity).abs());
    }
    let ra = axi.final_state.graph().radius();
    let rf = full.final_state.graph().radius();
    let radius = (0..rf.len())
        .map(|k| (rf[k] - ra[full_grid.colat_index(k)]).abs())
        .fold(0.0, f64::max);
    let same_len = axi.samples.len() == full.samples.len() && axi.completed() && full.completed();
    Outcome::new(
        same_len && geom < 1e-6 && traj < 1e-6 && radius < 1e-6,
        format!("curvatures {geom:.2e}; diagnostics over t ∈ [0, 2] {traj:.2e}; final radius {radius:.2e}"),
    )
}

fn asymptotic_rates() -> Outcome {
    let mut pass = true;
    let mut rates = Vec::new();
    let mut regimes = Vec::new();
    for c in corpus_runs().iter().filter(|c| is_zonal_perturbation(&c.spec, 1.0, 0.05)) {
        let half: Vec<&AsymptoticResiduals> = c.residuals.iter().filter(|r| r.t >= CORPUS_T_END / 2.0).collect();
        let t: Vec<f64> = half.iter().map(|r| r.t).collect();
        let l = c.spec.harmonics[0].degree;
        let r23: Vec<f64> = half.iter().map(|r| r.r23).collect();
        let regime_ok = r23_matches_regime(c.n, &t, &r23, 0.05);
        pass &= regime_ok;
        regimes.push(format!("n={} l={l} {}", c.n, if regime_ok { "ok" } else { "mismatch" }));
        if c.n != 4 {
            continue;
        }
        let target = -4.0 / 3.0;
        let s21 = fit_log_slope(&t, &half.iter().map(|r| r.r21).collect::<Vec<_>>()).unwrap_or(f64::NAN);
        let s22 = fit_log_slope(&t, &half.iter().map(|r| r.r22).collect::<Vec<_>>()).unwrap_or(f64::NAN);
        pass &= (s21 - target).abs() <= 0.25 * target.abs() && (s22 - target).abs() <= 0.25 * target.abs();
        rates.push(format!("l={l}: R21 {s21:.3}, R22 {s22:.3}"));
    }
    Outcome::new(
        pass,
        format!("n=4 slopes vs −4/3: {}; R23 regimes: {}", rates.join(", "), regimes.join(", ")),
    )
}

fn af2_diagnostic() -> Outcome {
    let mut sphere_worst: f64 = 0.0;
    for r0 in [0.5, 1.0, 2.0] {
        let f = compute_geometry(&RadialGraph::sphere(axisym(4, 64), r0).unwrap()).unwrap();
        sphere_worst = sphere_worst.max(functionals::af2_deficit(&f).inequality.relative_deficit.abs());
    }
    let mut pass = sphere_worst < 1e-6;
    let mut pinned = Vec::new();
    for (eps, degree) in [(0.05, 2), (0.08, 3), (0.05, 4)] {
        let zonal = common::Zonal::new(1.0, eps, degree);
        let oracle = common::af2_deficit(4, &zonal);
        let f = compute_geometry(&make_shape(&ShapeSpec::perturbed(1.0, eps, degree), axisym(4, 256)).unwrap()).unwrap();
        let report = functionals::af2_deficit(&f);
        let rel = (report.inequality.deficit - oracle).abs() / oracle;
        pass &= report.two_convex && report.inequality.deficit > 0.0 && rel < 1e-6;
        pinned.push(format!("eps={eps} l={degree}: {:.6e} (oracle {oracle:.6e})", report.inequality.deficit));
    }
    let grid = axisym(4, 64);
    let mut admitted = 0;
    for spec in corpus(GridMode::Axisymmetric).into_iter().filter(|s| s.kind != ShapeKind::Sphere) {
        let report = functionals::af2_deficit(&compute_geometry(&make_shape(&spec, grid.clone()).unwrap()).unwrap());
        if report.two_convex {
            admitted += 1;
            pass &= report.inequality.deficit > 0.0;
        }
    }
    Outcome::new(
        pass,
        format!(
            "spheres: max |relative deficit| {sphere_worst:.2e}; {}; {admitted} admitted corpus shapes positive",
            pinned.join(", ")
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("sphere equality case", sphere_equality),
        ("exact area law", area_law),
        ("monotonicity of Q", monotonicity),
        ("liminf bound", liminf_bound),
        ("umbilicity decay rate", umbilicity_decay),
        ("evolution-equation consistency", evolution_consistency),
        ("Sobolev suite", beckner_suite),
        ("cross-mode oracle", cross_mode),
        ("asymptotic residuals", asymptotic_rates),
        ("2-convex diagnostic", af2_diagnostic),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        failed += usize::from(!outcome.pass);
        println!(
            "criterion {:>2} {:<32} {} [{:.1}s] {}",
            i + 1,
            name,
            if outcome.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            outcome.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
