//! Subcommand implementations. Each writes its artifacts into a directory
//! and returns a one-line summary.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use predprey_core::export::{
    describe_outcome, hopf_csv_row, write_dispersion_csv, write_field_csv, write_field_pgm, write_hopf_text,
    write_trajectory_csv, HOPF_CSV_HEADER,
};
use predprey_core::normal_form::{analyze_hopf, Variant};
use predprey_core::repro::{probe_pattern, FieldFormat};
use predprey_core::{
    check_nondelayed_condition, dispersion_curve, integrate_dde, integrate_ode, scan_delta1, simulate_rd,
    simulate_rd_delayed, threshold_bisection, turing_conditions, Error, SimOutcome,
};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::sweep;
use crate::CliError;

/// Summary line plus whether a numerical failure occurred.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub summary: String,
    pub numerical_failure: bool,
}

impl Report {
    fn ok(summary: String) -> Self {
        Self { summary, numerical_failure: false }
    }
}

pub struct Context {
    pub format: FieldFormat,
    pub pool: rayon::ThreadPool,
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    let f = File::create(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(BufWriter::new(f))
}

fn model_header(w: &mut impl Write, cfg: &RunConfig) -> Result<(), CliError> {
    let p = cfg.params()?;
    writeln!(
        w,
        "# r={} K={} omega={} D={} d={} c={} omega1={} D1={} m={} tau={}",
        p.r, p.capacity, p.omega, p.refuge, p.refuge_slope, p.mating, p.omega1, p.residual, p.exponent, p.tau
    )?;
    Ok(())
}

fn is_step_failure(o: &SimOutcome) -> bool {
    matches!(o, SimOutcome::StepFailure { .. })
}

pub fn simulate(cfg: &RunConfig, dir: &Path) -> Result<Report, CliError> {
    cfg.require("simulate", &["t_end"])?;
    let p = cfg.params()?;
    let s0 = cfg.initial_state()?;
    let ctl = cfg.step_control()?;
    let tr = if p.tau > 0.0 { integrate_dde(s0, &p, &ctl)? } else { integrate_ode(s0, &p, &ctl)? };
    let mut w = create(dir, "trajectory.csv")?;
    model_header(&mut w, cfg)?;
    writeln!(w, "# outcome={}", describe_outcome(&tr.outcome))?;
    write_trajectory_csv(&mut w, &tr)?;
    w.flush()?;
    Ok(Report {
        summary: format!("outcome={}", describe_outcome(&tr.outcome)),
        numerical_failure: is_step_failure(&tr.outcome),
    })
}

pub fn pde(cfg: &RunConfig, dir: &Path, format: FieldFormat) -> Result<Report, CliError> {
    cfg.require("pde", &["nx", "t_end"])?;
    let p = cfg.params()?;
    let grid = cfg.grid()?;
    let ic = cfg.initial_field(&grid)?;
    let diff = cfg.diffusivities()?;
    let ctl = cfg.pde_control()?;
    let run = if p.tau > 0.0 {
        simulate_rd_delayed(&ic, &p, &diff, &grid, &ctl)?
    } else {
        simulate_rd(&ic, &p, &diff, &grid, &ctl)?
    };
    for (i, s) in run.snapshots.iter().enumerate() {
        if format.csv() {
            let mut w = create(dir, &format!("field_{i:04}.csv"))?;
            write_field_csv(&mut w, s, &grid)?;
            w.flush()?;
        }
        if format.pgm() {
            for (label, values) in [("prey", &s.prey), ("predator", &s.predator)] {
                let mut w = create(dir, &format!("field_{i:04}_{label}.pgm"))?;
                write_field_pgm(&mut w, values, s.t, &grid)?;
                w.flush()?;
            }
        }
    }
    let nonuniformity = run.last().map_or(f64::NAN, |s| s.max_deviation(s.mean()));
    let summary = format!(
        "outcome={} steps={} snapshots={} nonuniformity={nonuniformity:e}",
        describe_outcome(&run.outcome),
        run.steps,
        run.snapshots.len()
    );
    let mut w = create(dir, "summary.txt")?;
    writeln!(w, "{summary}")?;
    w.flush()?;
    Ok(Report { summary, numerical_failure: is_step_failure(&run.outcome) })
}

pub fn dispersion(cfg: &RunConfig, dir: &Path) -> Result<Report, CliError> {
    cfg.require("dispersion", &["d1", "d2"])?;
    let j = cfg.jacobian()?;
    let diff = cfg.diffusivities()?;
    let curve = dispersion_curve(&j, &diff, &cfg.wavenumbers()?)?;
    let mut w = create(dir, "dispersion.csv")?;
    writeln!(w, "# J=[[{:e},{:e}],[{:e},{:e}]] d1={:e} d2={:e}", j[0][0], j[0][1], j[1][0], j[1][1], diff.d1, diff.d2)?;
    write_dispersion_csv(&mut w, &curve)?;
    w.flush()?;
    let best = curve
        .iter()
        .max_by(|a, b| a.re_lambda_max.total_cmp(&b.re_lambda_max))
        .ok_or_else(|| CliError::Config("empty wavenumber grid".into()))?;
    Ok(Report::ok(format!("max_re_lambda={:e} at_k={:e}", best.re_lambda_max, best.k)))
}

pub fn turing(cfg: &RunConfig, dir: &Path) -> Result<Report, CliError> {
    cfg.require("turing", &["d1", "d2"])?;
    let j = cfg.jacobian()?;
    let diff = cfg.diffusivities()?;
    let r = turing_conditions(&j, &diff);
    let fields = [
        ("trace_negative", r.trace_negative.to_string()),
        ("det_positive", r.det_positive.to_string()),
        ("cross_diffusion_positive", r.cross_diffusion_positive.to_string()),
        ("discriminant_positive", r.discriminant_positive.to_string()),
        ("turing_unstable", r.turing_unstable.to_string()),
        ("k2_max_growth", format!("{:e}", r.k2_max_growth)),
        ("max_growth", format!("{:e}", r.max_growth)),
        ("k2_critical", format!("{:e}", r.k2_critical)),
    ];
    let mut txt = create(dir, "turing.txt")?;
    for (k, v) in &fields {
        writeln!(txt, "{k:<26}{v}")?;
    }
    txt.flush()?;
    let mut csv = create(dir, "turing.csv")?;
    writeln!(csv, "# J=[[{:e},{:e}],[{:e},{:e}]] d1={:e} d2={:e}", j[0][0], j[0][1], j[1][0], j[1][1], diff.d1, diff.d2)?;
    writeln!(csv, "{}", fields.iter().map(|f| f.0).collect::<Vec<_>>().join(","))?;
    writeln!(csv, "{}", fields.iter().map(|f| f.1.as_str()).collect::<Vec<_>>().join(","))?;
    csv.flush()?;
    Ok(Report::ok(format!(
        "turing_unstable={} k2_max_growth={:e} max_growth={:e}",
        r.turing_unstable, r.k2_max_growth, r.max_growth
    )))
}

pub fn hopf(cfg: &RunConfig, dir: &Path) -> Result<Report, CliError> {
    let p = cfg.params()?;
    let diff = cfg.diffusivities()?;
    let variant = match cfg.text("variant")? {
        "literal" => Variant::Literal,
        _ => Variant::Standard,
    };
    let lx = cfg.float("lx")?;
    let mut csv = create(dir, "hopf.csv")?;
    model_header(&mut csv, cfg)?;
    writeln!(csv, "# d1={:e} d2={:e} variant={}", diff.d1, diff.d2, cfg.text("variant")?)?;
    writeln!(csv, "n,k,status,{HOPF_CSV_HEADER}")?;
    let mut first = None;
    let mut failed = false;
    for n in 0..=cfg.int("mode_max")? {
        let k = n as f64 * std::f64::consts::PI / lx;
        match analyze_hopf(&p, &diff, k, variant) {
            Ok(a) => {
                writeln!(csv, "{n},{k:e},ok,{}", hopf_csv_row(&a.report))?;
                first.get_or_insert((n, a.report));
            }
            Err(Error::Domain(_)) => writeln!(csv, "{n},{k:e},no_crossing{}", ",".repeat(12))?,
            Err(e) => {
                failed |= crate::exit_code_for(&e) == 2;
                let label = format!("{e}").split(':').next().unwrap_or("error").replace(' ', "_");
                writeln!(csv, "{n},{k:e},{label}{}", ",".repeat(12))?;
            }
        }
    }
    csv.flush()?;
    let summary = match first {
        Some((n, r)) => {
            let mut txt = create(dir, "hopf.txt")?;
            writeln!(txt, "mode         {n}")?;
            write_hopf_text(&mut txt, &r)?;
            txt.flush()?;
            format!("mode={n} tau_star={:e} omega0={:e} mu2={:e} beta2={:e} T2={:e}", r.tau_star, r.omega0, r.mu2, r.beta2, r.t2)
        }
        None => "no_crossing".to_string(),
    };
    Ok(Report { summary, numerical_failure: failed })
}

pub fn blowup_check(cfg: &RunConfig, dir: &Path) -> Result<Report, CliError> {
    cfg.require("blowup-check", &["x0", "y0"])?;
    let p = cfg.params()?;
    let (x0, y0) = (cfg.float("x0")?, cfg.float("y0")?);
    let cert = match cfg.float_opt("delta1") {
        Some(d) => Some(check_nondelayed_condition(&p, x0, y0, d)?),
        None => scan_delta1(&p, x0, y0, cfg.int("delta1_scan_count")?)?,
    };
    let summary = match cert {
        Some(c) => format!(
            "holds={} t_star_bound={} delta1={} lhs={} rhs={} critical_prey={} trivial={}",
            c.condition_holds,
            c.t_star_bound.map_or("none".to_string(), |t| t.to_string()),
            c.delta1,
            c.lhs,
            c.rhs,
            c.critical_prey,
            c.trivial
        ),
        None => "holds=false t_star_bound=none".to_string(),
    };
    let mut w = create(dir, "certificate.txt")?;
    writeln!(w, "{summary}")?;
    w.flush()?;
    Ok(Report::ok(summary))
}

pub fn threshold(cfg: &RunConfig, dir: &Path) -> Result<Report, CliError> {
    cfg.require("threshold", &["scale_min", "scale_max", "t_end"])?;
    let p = cfg.params()?;
    let ctl = cfg.step_control()?;
    let r = threshold_bisection(&p, &ctl, (cfg.float("scale_min")?, cfg.float("scale_max")?))?;
    let summary = format!(
        "critical_scale={:e} completed_scale={:e} blowup_scale={:e} violations={} runs={}",
        r.critical_scale,
        r.completed_scale,
        r.blowup_scale,
        r.monotonicity_violations.len(),
        r.runs
    );
    let mut w = create(dir, "threshold.txt")?;
    writeln!(w, "{summary}")?;
    for v in &r.monotonicity_violations {
        writeln!(w, "violation_at={v:e}")?;
    }
    w.flush()?;
    Ok(Report::ok(summary))
}

/// Run one named task; used directly by `sweep`.
pub fn run_task(task: &str, cfg: &RunConfig, dir: &Path, format: FieldFormat) -> Result<Report, CliError> {
    match task {
        "simulate" => simulate(cfg, dir),
        "pde" => pde(cfg, dir, format),
        "dispersion" => dispersion(cfg, dir),
        "turing" => turing(cfg, dir),
        "hopf" => hopf(cfg, dir),
        "threshold" => threshold(cfg, dir),
        other => Err(CliError::Config(format!("unknown sweep task `{other}`"))),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn sweep(cfg: &RunConfig, dir: &Path, ctx: &Context) -> Result<Report, CliError> {
    cfg.require("sweep", &["sweep1", "sweep_task"])?;
    let a = cfg.axis("sweep1").expect("required above").clone();
    let b = cfg.axis("sweep2").cloned();
    let task = cfg.text("sweep_task")?.to_string();
    let pts = sweep::points(&a, b.as_ref());
    let keys: Vec<String> = std::iter::once(a.key.clone()).chain(b.iter().map(|b| b.key.clone())).collect();
    let results: Vec<Result<Report, CliError>> = ctx.pool.install(|| {
        pts.par_iter()
            .enumerate()
            .map(|(i, vals)| {
                let mut c = cfg.clone();
                for (k, v) in keys.iter().zip(vals) {
                    c = c.with_float(k, *v)?;
                }
                run_task(&task, &c, &dir.join(format!("point_{i:04}")), ctx.format)
            })
            .collect()
    });
    let mut w = create(dir, "index.csv")?;
    writeln!(w, "# task={task} sweep1={a}{}", b.as_ref().map_or(String::new(), |b| format!(" sweep2={b}")))?;
    writeln!(w, "index,{},status,summary", keys.join(","))?;
    let (mut numeric, mut errors) = (0, 0);
    for (i, (vals, r)) in pts.iter().zip(&results).enumerate() {
        let vals: Vec<String> = vals.iter().map(|v| format!("{v:e}")).collect();
        let (status, text) = match r {
            Ok(rep) if rep.numerical_failure => {
                numeric += 1;
                ("numerical_failure", rep.summary.clone())
            }
            Ok(rep) => ("ok", rep.summary.clone()),
            Err(e) => {
                if e.exit_code() == 2 {
                    numeric += 1;
                } else {
                    errors += 1;
                }
                ("error", e.to_string())
            }
        };
        writeln!(w, "{i},{},{status},{}", vals.join(","), csv_field(&text))?;
    }
    w.flush()?;
    Ok(Report {
        summary: format!("points={} ok={} numerical_failures={numeric} errors={errors}", pts.len(), pts.len() - numeric - errors),
        numerical_failure: numeric > 0,
    })
}

pub fn k_search(cfg: &RunConfig, dir: &Path, ctx: &Context) -> Result<Report, CliError> {
    cfg.require("k-search", &["capacity_min", "capacity_max", "capacity_count", "t_end"])?;
    let axis = sweep::SweepAxis {
        key: "K".into(),
        start: cfg.float("capacity_min")?,
        stop: cfg.float("capacity_max")?,
        count: cfg.int("capacity_count")?,
        scale: sweep::Scale::Linear,
    };
    if axis.count < 2 || !(axis.stop > axis.start && axis.start > 0.0) {
        return Err(CliError::Config("k-search needs 0 < capacity_min < capacity_max and capacity_count >= 2".into()));
    }
    let nx = cfg.int("nx").unwrap_or(300);
    let (dt, t_end) = (cfg.float("dt")?, cfg.float("t_end")?);
    let caps = axis.values();
    let probes: Vec<_> = ctx.pool.install(|| caps.par_iter().map(|k| probe_pattern(*k, nx, dt, t_end)).collect());
    let mut w = create(dir, "k_search.csv")?;
    writeln!(w, "# pattern-formation set, nx={nx} on [0, pi], dt={dt:e}, t_end={t_end:e}, cos^2(10x) perturbation 0.005")?;
    writeln!(w, "K,x_star,y_star,homogeneous_stable,outcome,nonuniformity,dominant_mode,pattern")?;
    let mut admitting = Vec::new();
    for probe in probes {
        let pr = probe?;
        let (x, y) = pr.equilibrium.map_or((f64::NAN, f64::NAN), |e| (e[0], e[1]));
        let pattern = pr.outcome.is_completed() && pr.nonuniformity > 1e-3;
        if pattern {
            admitting.push(pr.capacity);
        }
        writeln!(
            w,
            "{:e},{x:e},{y:e},{},{},{:e},{},{pattern}",
            pr.capacity,
            pr.homogeneous_stable,
            csv_field(&describe_outcome(&pr.outcome)),
            pr.nonuniformity,
            pr.dominant_mode
        )?;
    }
    w.flush()?;
    let list: Vec<String> = admitting.iter().map(|k| k.to_string()).collect();
    Ok(Report::ok(format!("pattern_admitting_K=[{}]", list.join(" "))))
}
