//! End-to-end acceptance suite.
//!
//! Every criterion compares the Monte Carlo engine with an analytic or
//! quadrature oracle at a pinned tolerance. Tolerances are stated for
//! 10^6 samples per cell; with fewer samples the Monte Carlo tolerances widen
//! by `sqrt(10^6 / samples)` and criteria that cannot separate signal from
//! noise are skipped.

use std::f64::consts::LN_2;
use std::fmt;
use std::time::Instant;

use crate::dependency::{DependencyConfig, DependencyModel};
use crate::distribution::DistributionSpec;
use crate::engine::{
    simulate_batch, sweep, uniform_p_grid, ArchitectureSpec, ScenarioConfig, SweepBase,
    SweepConfig, SweepResult, DEFAULT_GRID_POINTS,
};
use crate::error::Result;
use crate::estimators::empirical_reliability;
use crate::oracles::{
    self, global_ccf_reliability, indep_moon_reliability, linear_mean_prediction,
    linear_model_reliability, marginal_ccf_reliability, oracle_mean, MeanPolicy,
    SurvivalFunction,
};
use crate::report::sweep_csv;

pub const REFERENCE_SAMPLES: usize = 1_000_000;
/// Below this, mode, separation and curve-shape criteria are skipped.
pub const MIN_SAMPLES_FOR_SHAPE: usize = 100_000;
pub const MIN_SAMPLES: usize = 10;

pub const LINEARITY_SIGMAS: f64 = 4.0;
pub const MARGINAL_1OO3_MEAN: f64 = 1.604_166_666_666_666_7;
pub const MARGINAL_1OO3_TOL: f64 = 0.006;
pub const MARGINAL_3OO3_MEAN: f64 = 0.479_166_666_666_666_7;
pub const MARGINAL_3OO3_TOL: f64 = 0.004;
pub const SEPARATION_SES: f64 = 5.0;
pub const SHAPE_VIOLATIONS_ALLOWED: usize = 2;
pub const SUP_SURVIVAL_TOL: f64 = 0.005;
pub const SURVIVAL_GRID_POINTS: usize = 200;
pub const SURVIVAL_GRID_MAX: f64 = 8.0;
pub const LINEAR_ORACLE_MEAN_TOL: f64 = 1e-4;
pub const MEDIAN_TOL: f64 = 0.01;
pub const ENDPOINT_MEAN_TOL: f64 = 0.003;
pub const REL_MEAN_1OO3_TOL: f64 = 0.01;
pub const REL_MEAN_3OO3_TOL: f64 = 0.03;
pub const MONOTONE_SIGMAS: f64 = 3.0;
pub const MODE_TOL: f64 = 0.06;
pub const THROUGHPUT_TARGET: f64 = 1e6;

#[derive(Clone, Debug)]
pub struct SuiteOptions {
    pub samples: usize,
    pub seed: u64,
    /// Canary: simulate `(N-M+1)ooN` while checking against `MooN` oracles.
    pub invert_m: bool,
    pub determinism_threads: Vec<usize>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            samples: REFERENCE_SAMPLES,
            seed: 0,
            invert_m: false,
            determinism_threads: vec![1, 4],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skip,
    /// Informational, never blocks.
    Info,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
            Status::Info => "INFO",
        })
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub id: &'static str,
    pub title: &'static str,
    pub status: Status,
    pub detail: String,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!("[{}] {:>5}  {}: {}", self.status, self.id, self.title, self.detail)
    }
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub outcomes: Vec<Outcome>,
    pub seconds: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.status != Status::Fail)
    }

    pub fn get(&self, id: &str) -> Option<&Outcome> {
        self.outcomes.iter().find(|o| o.id == id)
    }

    pub fn table(&self) -> String {
        let mut s: String = self.outcomes.iter().map(|o| o.line() + "\n").collect();
        let failed = self.outcomes.iter().filter(|o| o.status == Status::Fail).count();
        s += &format!(
            "{} criteria, {} failed, {:.1} s\n",
            self.outcomes.len(),
            failed,
            self.seconds
        );
        s
    }
}

/// Collects sub-check failures for one criterion.
struct Check {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Self {
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn expect(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(msg());
        }
    }

    fn note(&mut self, msg: String) {
        self.notes.push(msg);
    }

    fn finish(self, id: &'static str, title: &'static str) -> Outcome {
        let (status, detail) = if self.failures.is_empty() {
            (Status::Pass, self.notes.join("; "))
        } else {
            (Status::Fail, self.failures.join("; "))
        };
        Outcome {
            id,
            title,
            status,
            detail,
        }
    }
}

fn skipped(id: &'static str, title: &'static str, why: String) -> Outcome {
    Outcome {
        id,
        title,
        status: Status::Skip,
        detail: why,
    }
}

fn errored(id: &'static str, title: &'static str, e: crate::Error) -> Outcome {
    Outcome {
        id,
        title,
        status: Status::Fail,
        detail: format!("error: {e}"),
    }
}

struct Suite {
    opts: SuiteOptions,
    /// Multiplier applied to Monte Carlo tolerances below the reference size.
    widen: f64,
    exp: DistributionSpec,
}

impl Suite {
    fn arch(m: usize) -> ArchitectureSpec {
        ArchitectureSpec {
            n_components: 3,
            m_required: m,
        }
    }

    fn simulated_arch(&self, m: usize) -> ArchitectureSpec {
        if self.opts.invert_m {
            Self::arch(3 - m + 1)
        } else {
            Self::arch(m)
        }
    }

    fn cell(&self, model: DependencyModel, m: usize, p: f64) -> ScenarioConfig {
        ScenarioConfig {
            arch: self.simulated_arch(m),
            dep: DependencyConfig { model, p },
            dist: self.exp,
            samples: self.opts.samples,
            seed: self.opts.seed,
        }
    }

    fn sweep(&self, model: DependencyModel, m: usize) -> Result<SweepResult> {
        let base = SweepBase {
            arch: self.simulated_arch(m),
            model,
            dist: self.exp,
            samples: self.opts.samples,
            seed: self.opts.seed,
        };
        sweep(&SweepConfig::new(base, uniform_p_grid(DEFAULT_GRID_POINTS))?)
    }

    fn shape_ok(&self) -> bool {
        self.opts.samples >= MIN_SAMPLES_FOR_SHAPE
    }

    fn survival_grid() -> Vec<f64> {
        (0..SURVIVAL_GRID_POINTS)
            .map(|i| SURVIVAL_GRID_MAX * i as f64 / (SURVIVAL_GRID_POINTS - 1) as f64)
            .collect()
    }

    /// Sup distance between the simulated survival and `oracle` on the test grid.
    fn sup_survival<F>(&self, cfg: &ScenarioConfig, mut oracle: F) -> Result<(f64, f64)>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let sample = simulate_batch(cfg)?;
        let grid = Self::survival_grid();
        let emp = empirical_reliability(&sample.values, &grid)?;
        let mut sup: f64 = 0.0;
        for (t, s) in grid.iter().zip(&emp.survival) {
            sup = sup.max((s - oracle(*t)?).abs());
        }
        let mean = sample.values.iter().sum::<f64>() / sample.values.len() as f64;
        Ok((sup, mean))
    }
}

/// Argmax of the exact density of the independent MooN failure time.
///
/// The density is the central difference of the closed-form reliability,
/// maximized on a 1e-5 grid; it shares nothing with the KDE path.
pub fn analytic_mode(arch: &ArchitectureSpec, dist: &DistributionSpec) -> f64 {
    let s = SurvivalFunction::new(*dist);
    let d = 1e-6;
    let step = 1e-5;
    let upper = 10.0 * dist.scale;
    let mut best = (0.0, f64::NEG_INFINITY);
    let mut t = step;
    while t < upper {
        let f = (indep_moon_reliability((t - d).max(0.0), arch, &s) - indep_moon_reliability(t + d, arch, &s)) / (2.0 * d);
        if f > best.1 {
            best = (t, f);
        }
        t += step;
    }
    best.0
}

fn second_difference_violations(values: &[f64], concave: bool) -> usize {
    values
        .windows(3)
        .filter(|w| {
            let d2 = w[2] - 2.0 * w[1] + w[0];
            if concave {
                d2 > 0.0
            } else {
                d2 < 0.0
            }
        })
        .count()
}

fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

pub fn run_suite(opts: &SuiteOptions) -> SuiteReport {
    run_suite_with(opts, |_| {})
}

/// Runs every criterion, reporting each outcome as soon as it is known.
pub fn run_suite_with<F: FnMut(&Outcome)>(opts: &SuiteOptions, mut on_outcome: F) -> SuiteReport {
    let start = Instant::now();
    let mut opts = opts.clone();
    opts.samples = opts.samples.max(MIN_SAMPLES);
    let widen = (REFERENCE_SAMPLES as f64 / opts.samples as f64).sqrt().max(1.0);
    let suite = Suite {
        opts,
        widen,
        exp: DistributionSpec::EXPONENTIAL,
    };
    let mut outcomes = Vec::new();
    let mut push = |o: Outcome| {
        on_outcome(&o);
        outcomes.push(o);
    };

    // sweeps reused by several criteria
    let linear: Vec<Result<SweepResult>> = (1..=3).map(|m| suite.sweep(DependencyModel::Linear, m)).collect();
    let global: Vec<Result<SweepResult>> = (1..=3).map(|m| suite.sweep(DependencyModel::GlobalCcf, m)).collect();

    push(linearity(&suite, "1", "linear model mean is linear in p", &linear));
    push(linearity(&suite, "2", "global CCF mean is linear in p", &global));
    push(marginal_nonlinearity(&suite));
    push(distributional(&suite, "4", "global CCF survival matches exact reliability", DependencyModel::GlobalCcf));
    push(distributional(&suite, "5", "marginal CCF survival matches exact reliability", DependencyModel::MarginalCcf));
    push(linear_quadrature(&suite));
    push(median_invariance(&suite, &global[1]));
    push(endpoint_degeneracy(&suite));
    push(relative_endpoints(&suite, &linear));
    push(mode_anchors(&suite, &linear));
    push(determinism(&suite));
    push(throughput(&suite));
    push(skewness_trend(&suite, &global[0]));

    SuiteReport {
        outcomes,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn linearity(suite: &Suite, id: &'static str, title: &'static str, sweeps: &[Result<SweepResult>]) -> Outcome {
    let mut c = Check::new();
    let mut worst: f64 = 0.0;
    for (i, r) in sweeps.iter().enumerate() {
        let m = i + 1;
        let r = match r {
            Ok(r) => r,
            Err(e) => return errored(id, title, e.clone()),
        };
        for e in &r.entries {
            let pred = linear_mean_prediction(e.p, &Suite::arch(m), &suite.exp).expect("exponential");
            let tol = LINEARITY_SIGMAS * e.stats.mean_std_error * suite.widen;
            let z = (e.stats.mean - pred).abs() / e.stats.mean_std_error;
            worst = worst.max(z);
            c.expect((e.stats.mean - pred).abs() <= tol, || {
                format!("{m}oo3 p={:.4}: mean {:.6} vs {:.6} (tol {:.2e})", e.p, e.stats.mean, pred, tol)
            });
        }
    }
    c.note(format!("60 cells, worst |z| = {worst:.2}"));
    c.finish(id, title)
}

fn marginal_nonlinearity(suite: &Suite) -> Outcome {
    const ID: &str = "3";
    const TITLE: &str = "marginal CCF mean is nonlinear in p";
    let mut c = Check::new();
    let run = |m| -> Result<crate::SummaryStats> {
        let s = simulate_batch(&suite.cell(DependencyModel::MarginalCcf, m, 0.5))?;
        crate::estimators::summarize(&s.values, &Default::default())
    };
    let (s1, s3) = match (run(1), run(3)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return errored(ID, TITLE, e),
    };
    let lin1 = linear_mean_prediction(0.5, &Suite::arch(1), &suite.exp).expect("exponential");
    let lin3 = linear_mean_prediction(0.5, &Suite::arch(3), &suite.exp).expect("exponential");
    let tol1 = MARGINAL_1OO3_TOL * suite.widen;
    let tol3 = MARGINAL_3OO3_TOL * suite.widen;
    c.expect((s1.mean - MARGINAL_1OO3_MEAN).abs() <= tol1, || {
        format!("1oo3 mean {:.6} vs {MARGINAL_1OO3_MEAN:.6} ± {tol1}", s1.mean)
    });
    c.expect((s3.mean - MARGINAL_3OO3_MEAN).abs() <= tol3, || {
        format!("3oo3 mean {:.6} vs {MARGINAL_3OO3_MEAN:.6} ± {tol3}", s3.mean)
    });
    c.note(format!("1oo3 {:.5}, 3oo3 {:.5}", s1.mean, s3.mean));
    if suite.shape_ok() {
        let z1 = (s1.mean - lin1) / s1.mean_std_error;
        let z3 = (lin3 - s3.mean) / s3.mean_std_error;
        c.expect(z1 > SEPARATION_SES, || format!("1oo3 only {z1:.1} SE above linear {lin1:.5}"));
        c.expect(z3 > SEPARATION_SES, || format!("3oo3 only {z3:.1} SE below linear {lin3:.5}"));
        for (m, concave) in [(1, true), (3, false)] {
            match suite.sweep(DependencyModel::MarginalCcf, m) {
                Ok(r) => {
                    let means: Vec<f64> = r.entries.iter().map(|e| e.stats.mean).collect();
                    let v = second_difference_violations(&means, concave);
                    let shape = if concave { "concave" } else { "convex" };
                    c.expect(v <= SHAPE_VIOLATIONS_ALLOWED, || format!("{m}oo3 mean curve not {shape}: {v} violations"));
                    c.note(format!("{m}oo3 {shape} ({v} violations)"));
                }
                Err(e) => return errored(ID, TITLE, e),
            }
        }
    } else {
        c.note(format!("separation and shape skipped below {MIN_SAMPLES_FOR_SHAPE} samples"));
    }
    c.finish(ID, TITLE)
}

fn distributional(suite: &Suite, id: &'static str, title: &'static str, model: DependencyModel) -> Outcome {
    let mut c = Check::new();
    let tol = SUP_SURVIVAL_TOL * suite.widen;
    let s = SurvivalFunction::new(suite.exp);
    let mut worst: f64 = 0.0;
    for m in 1..=3 {
        for p in [0.25, 0.5, 0.75] {
            let arch = Suite::arch(m);
            let oracle = |t: f64| -> Result<f64> {
                Ok(match model {
                    DependencyModel::GlobalCcf => global_ccf_reliability(t, p, &arch, &s),
                    _ => marginal_ccf_reliability(t, p, &arch, &s),
                })
            };
            match suite.sup_survival(&suite.cell(model, m, p), oracle) {
                Ok((sup, _)) => {
                    worst = worst.max(sup);
                    c.expect(sup <= tol, || format!("{m}oo3 p={p}: sup {sup:.5} > {tol}"));
                }
                Err(e) => return errored(id, title, e),
            }
        }
    }
    c.note(format!("9 cells, worst sup {worst:.5}"));
    c.finish(id, title)
}

fn linear_quadrature(suite: &Suite) -> Outcome {
    const ID: &str = "6";
    const TITLE: &str = "linear model survival matches quadrature";
    let mut c = Check::new();
    let arch = Suite::arch(2);
    let s = SurvivalFunction::new(suite.exp);
    let tol = SUP_SURVIVAL_TOL * suite.widen;
    match suite.sup_survival(&suite.cell(DependencyModel::Linear, 2, 0.5), |t| {
        linear_model_reliability(t, 0.5, &arch, &s)
    }) {
        Ok((sup, _)) => {
            c.expect(sup <= tol, || format!("sup {sup:.5} > {tol}"));
            c.note(format!("sup {sup:.5}"));
        }
        Err(e) => return errored(ID, TITLE, e),
    }
    match oracle_mean(|t| linear_model_reliability(t, 0.5, &arch, &s), &MeanPolicy::default()) {
        Ok(mean) => {
            let target = 11.0 / 12.0;
            c.expect((mean - target).abs() <= LINEAR_ORACLE_MEAN_TOL, || {
                format!("quadrature mean {mean:.8} vs {target:.8}")
            });
            c.note(format!("quadrature mean {mean:.8}"));
        }
        Err(e) => return errored(ID, TITLE, e),
    }
    c.finish(ID, TITLE)
}

fn median_invariance(suite: &Suite, sweep: &Result<SweepResult>) -> Outcome {
    const ID: &str = "7";
    const TITLE: &str = "2oo3 global CCF median stays at ln 2";
    let r = match sweep {
        Ok(r) => r,
        Err(e) => return errored(ID, TITLE, e.clone()),
    };
    let mut c = Check::new();
    let tol = MEDIAN_TOL * suite.widen;
    let mut worst: f64 = 0.0;
    for e in &r.entries {
        let dev = (e.stats.median - LN_2).abs();
        worst = worst.max(dev);
        c.expect(dev <= tol, || format!("p={:.4}: median {:.5}", e.p, e.stats.median));
    }
    c.note(format!("worst deviation {worst:.5}"));
    c.finish(ID, TITLE)
}

fn endpoint_degeneracy(suite: &Suite) -> Outcome {
    const ID: &str = "8";
    const TITLE: &str = "p = 1 reduces every model to one component";
    let mut c = Check::new();
    let mean_tol = ENDPOINT_MEAN_TOL * suite.widen;
    let sup_tol = SUP_SURVIVAL_TOL * suite.widen;
    for (model, m) in [
        (DependencyModel::Linear, 1),
        (DependencyModel::GlobalCcf, 2),
        (DependencyModel::MarginalCcf, 3),
    ] {
        match suite.sup_survival(&suite.cell(model, m, 1.0), |t| Ok((-t).exp())) {
            Ok((sup, mean)) => {
                c.expect((mean - 1.0).abs() <= mean_tol, || format!("{model}: mean {mean:.5}"));
                c.expect(sup <= sup_tol, || format!("{model}: sup {sup:.5}"));
                c.note(format!("{model} mean {mean:.5} sup {sup:.5}"));
            }
            Err(e) => return errored(ID, TITLE, e),
        }
    }
    c.finish(ID, TITLE)
}

fn relative_endpoints(suite: &Suite, linear: &[Result<SweepResult>]) -> Outcome {
    const ID: &str = "9";
    const TITLE: &str = "relative mean endpoints and trends (linear model)";
    let mut c = Check::new();
    for (m, target, tol, increasing) in [
        (1usize, 6.0 / 11.0, REL_MEAN_1OO3_TOL, false),
        (3, 3.0, REL_MEAN_3OO3_TOL, true),
    ] {
        let r = match &linear[m - 1] {
            Ok(r) => r,
            Err(e) => return errored(ID, TITLE, e.clone()),
        };
        let last = r.relative.mean.last().copied().flatten().unwrap_or(f64::NAN);
        let tol = tol * suite.widen;
        c.expect((last - target).abs() <= tol, || format!("{m}oo3 rel_mean(1) {last:.5} vs {target:.5} ± {tol}"));
        c.expect(r.relative.mean[0] == Some(1.0), || format!("{m}oo3 rel_mean(0) != 1"));
        c.note(format!("{m}oo3 rel_mean(1) = {last:.5}"));
        for w in r.entries.windows(2) {
            let d = w[1].stats.mean - w[0].stats.mean;
            let tol = MONOTONE_SIGMAS * w[0].stats.mean_std_error.hypot(w[1].stats.mean_std_error) * suite.widen;
            let ok = if increasing { d >= -tol } else { d <= tol };
            c.expect(ok, || format!("{m}oo3 not monotone at p={:.4} (step {d:.2e})", w[1].p));
        }
    }
    c.finish(ID, TITLE)
}

fn mode_anchors(suite: &Suite, linear: &[Result<SweepResult>]) -> Outcome {
    const ID: &str = "10";
    const TITLE: &str = "KDE mode at p = 0 matches density argmax";
    if !suite.shape_ok() {
        return skipped(ID, TITLE, format!("needs at least {MIN_SAMPLES_FOR_SHAPE} samples"));
    }
    let mut c = Check::new();
    for m in [1, 2] {
        let r = match &linear[m - 1] {
            Ok(r) => r,
            Err(e) => return errored(ID, TITLE, e.clone()),
        };
        let target = analytic_mode(&Suite::arch(m), &suite.exp);
        let mode = r.entries[0].stats.mode;
        c.expect((mode - target).abs() <= MODE_TOL, || format!("{m}oo3 mode {mode:.4} vs {target:.4}"));
        c.note(format!("{m}oo3 mode {mode:.4} (exact {target:.4})"));
    }
    c.finish(ID, TITLE)
}

fn determinism(suite: &Suite) -> Outcome {
    const ID: &str = "11";
    const TITLE: &str = "CSV output independent of worker count";
    let base = SweepBase {
        arch: suite.simulated_arch(2),
        model: DependencyModel::MarginalCcf,
        dist: suite.exp,
        samples: suite.opts.samples,
        seed: suite.opts.seed,
    };
    let cfg = match SweepConfig::new(base, uniform_p_grid(5)) {
        Ok(c) => c,
        Err(e) => return errored(ID, TITLE, e),
    };
    let mut outputs = Vec::new();
    for &threads in &suite.opts.determinism_threads {
        let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            Ok(p) => p,
            Err(e) => return errored(ID, TITLE, crate::Error::Unsupported(e.to_string())),
        };
        match pool.install(|| sweep(&cfg).and_then(|r| sweep_csv(&r))) {
            Ok(csv) => outputs.push((threads, csv)),
            Err(e) => return errored(ID, TITLE, e),
        }
    }
    let mut c = Check::new();
    for (threads, csv) in &outputs[1..] {
        c.expect(*csv == outputs[0].1, || {
            format!("{} threads differs from {} threads", threads, outputs[0].0)
        });
    }
    c.note(format!(
        "threads {:?}, {} bytes each",
        suite.opts.determinism_threads,
        outputs[0].1.len()
    ));
    c.finish(ID, TITLE)
}

fn throughput(suite: &Suite) -> Outcome {
    const ID: &str = "12";
    const TITLE: &str = "single-core throughput";
    let cfg = suite.cell(DependencyModel::Linear, 2, 0.5);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build();
    let timed = pool.map(|pool| {
        pool.install(|| {
            let t = Instant::now();
            simulate_batch(&cfg).map(|s| (s.len(), t.elapsed().as_secs_f64()))
        })
    });
    match timed {
        Ok(Ok((n, secs))) => {
            let rate = n as f64 / secs.max(1e-9);
            let verdict = if rate >= THROUGHPUT_TARGET { "meets" } else { "below" };
            Outcome {
                id: ID,
                title: TITLE,
                status: Status::Info,
                detail: format!("{rate:.3e} samples/s/core ({verdict} 1e6 target)"),
            }
        }
        Ok(Err(e)) => errored(ID, TITLE, e),
        Err(e) => errored(ID, TITLE, crate::Error::Unsupported(e.to_string())),
    }
}

fn skewness_trend(suite: &Suite, sweep: &Result<SweepResult>) -> Outcome {
    const ID: &str = "shape";
    const TITLE: &str = "1oo3 global CCF skewness grows with p";
    if !suite.shape_ok() {
        return skipped(ID, TITLE, format!("needs at least {MIN_SAMPLES_FOR_SHAPE} samples"));
    }
    let r = match sweep {
        Ok(r) => r,
        Err(e) => return errored(ID, TITLE, e.clone()),
    };
    let mut c = Check::new();
    let p: Vec<f64> = r.entries.iter().map(|e| e.p).collect();
    let skew: Vec<f64> = r.entries.iter().map(|e| e.stats.skewness.unwrap_or(f64::NAN)).collect();
    let first = skew[0];
    let last = *skew.last().unwrap_or(&f64::NAN);
    let slope = least_squares_slope(&p, &skew);
    c.expect(last > first, || format!("skewness {last:.3} at p=1 not above {first:.3} at p=0"));
    c.expect(slope > 0.0, || format!("skewness trend slope {slope:.3} not positive"));
    let upper: Vec<f64> = r.entries.iter().filter(|e| e.p >= 0.5).map(|e| e.stats.skewness.unwrap_or(f64::NAN)).collect();
    let drops = upper.windows(2).filter(|w| w[1] < w[0]).count();
    c.expect(drops <= SHAPE_VIOLATIONS_ALLOWED, || format!("{drops} decreases over p >= 0.5"));
    c.note(format!("skewness {first:.3} -> {last:.3}, slope {slope:.3}"));
    c.finish(ID, TITLE)
}

/// Exact mean of a model, for reports.
pub fn exact_mean(model: DependencyModel, p: f64, m: usize) -> Result<f64> {
    oracles::model_mean(model, p, &Suite::arch(m), &DistributionSpec::EXPONENTIAL, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_mode_oracle() {
        let e = DistributionSpec::EXPONENTIAL;
        assert!((analytic_mode(&Suite::arch(1), &e) - 3f64.ln()).abs() < 1e-4);
        // f = 6 S^2 (1 - S) peaks at S = 2/3
        assert!((analytic_mode(&Suite::arch(2), &e) - 1.5f64.ln()).abs() < 1e-4);
        // series: exponential(3), mode at the origin
        assert!(analytic_mode(&Suite::arch(3), &e) < 1e-4);
    }

    #[test]
    fn second_differences() {
        assert_eq!(second_difference_violations(&[0.0, 1.0, 1.5, 1.75], true), 0);
        assert_eq!(second_difference_violations(&[0.0, 1.0, 1.5, 1.75], false), 2);
    }

    #[test]
    fn exact_means() {
        let m = exact_mean(DependencyModel::MarginalCcf, 0.5, 3).unwrap();
        assert!((m - MARGINAL_3OO3_MEAN).abs() < 1e-6);
    }
}
