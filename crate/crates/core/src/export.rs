//! Plain-text writers for trajectories, fields, dispersion curves and Hopf
//! reports. Floats use Rust's shortest round-trip `{:e}` form so repeated
//! runs produce identical bytes.

use std::io::{self, Write};

use crate::integrator::{SimOutcome, Trajectory};
use crate::linear::DispersionSample;
use crate::normal_form::{Direction, HopfReport, OrbitStability, PeriodTrend};
use crate::spatial::{Grid, SpatialField};

/// `t,X,Y` rows.
pub fn write_trajectory_csv<W: Write>(mut w: W, traj: &Trajectory) -> io::Result<()> {
    writeln!(w, "t,X,Y")?;
    for (t, s) in &traj.samples {
        writeln!(w, "{t:e},{:e},{:e}", s.x, s.y)?;
    }
    Ok(())
}

/// One-line human-readable description of an outcome.
pub fn describe_outcome(outcome: &SimOutcome) -> String {
    match outcome {
        SimOutcome::Completed { t_end } => format!("completed t_end={t_end:e}"),
        SimOutcome::BlowUp { t_low, t_high } => format!("blowup t_low={t_low:e} t_high={t_high:e}"),
        SimOutcome::StepFailure { t, reason } => format!("step_failure t={t:e} reason={reason}"),
    }
}

/// Row-major field dump with a `# t=.. nx=.. ny=..` header.
pub fn write_field_csv<W: Write>(mut w: W, field: &SpatialField, grid: &Grid) -> io::Result<()> {
    writeln!(w, "# t={:e} nx={} ny={}", field.t, grid.nx(), grid.ny())?;
    writeln!(w, "iy,ix,X,Y")?;
    for iy in 0..grid.ny() {
        for ix in 0..grid.nx() {
            let i = grid.index(ix, iy);
            writeln!(w, "{iy},{ix},{:e},{:e}", field.prey[i], field.predator[i])?;
        }
    }
    Ok(())
}

/// 8-bit plain PGM of one component, min-max normalized. A constant field
/// maps to 0 and is flagged in the comment line.
pub fn write_field_pgm<W: Write>(mut w: W, values: &[f64], t: f64, grid: &Grid) -> io::Result<()> {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    let zero_range = !(hi > lo);
    writeln!(w, "P2")?;
    writeln!(w, "# t={t:e} min={lo:e} max={hi:e} zero_range={zero_range}")?;
    writeln!(w, "{} {}", grid.nx(), grid.ny())?;
    writeln!(w, "255")?;
    for iy in 0..grid.ny() {
        let mut line = String::new();
        for ix in 0..grid.nx() {
            let v = values[grid.index(ix, iy)];
            let level = if zero_range {
                0
            } else {
                ((v - lo) / (hi - lo) * 255.0).round().clamp(0.0, 255.0) as u8
            };
            let token = level.to_string();
            if !line.is_empty() && line.len() + 1 + token.len() > 70 {
                writeln!(w, "{line}")?;
                line.clear();
            }
            if !line.is_empty() {
                line.push(' ');
            }
            line.push_str(&token);
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn write_dispersion_csv<W: Write>(mut w: W, curve: &[DispersionSample]) -> io::Result<()> {
    writeln!(w, "k,re_lambda_max,im_lambda")?;
    for s in curve {
        writeln!(w, "{:e},{:e},{:e}", s.k, s.re_lambda_max, s.im_lambda)?;
    }
    Ok(())
}

pub const HOPF_CSV_HEADER: &str =
    "omega0,tau_star,re_lambda_prime,im_lambda_prime,re_c1,im_c1,mu2,beta2,t2,direction,stability,period_trend";

fn labels(r: &HopfReport) -> (&'static str, &'static str, &'static str) {
    (
        match r.direction {
            Direction::Supercritical => "supercritical",
            Direction::Subcritical => "subcritical",
        },
        match r.stability {
            OrbitStability::StablePeriodic => "stable",
            OrbitStability::UnstablePeriodic => "unstable",
        },
        match r.period_trend {
            PeriodTrend::Increasing => "increasing",
            PeriodTrend::Decreasing => "decreasing",
        },
    )
}

/// One CSV row matching [`HOPF_CSV_HEADER`].
pub fn hopf_csv_row(r: &HopfReport) -> String {
    let (d, s, p) = labels(r);
    format!(
        "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{d},{s},{p}",
        r.omega0, r.tau_star, r.lambda_prime.re, r.lambda_prime.im, r.c1_0.re, r.c1_0.im, r.mu2, r.beta2, r.t2
    )
}

pub fn write_hopf_text<W: Write>(mut w: W, r: &HopfReport) -> io::Result<()> {
    let (d, s, p) = labels(r);
    writeln!(w, "omega0       {:e}", r.omega0)?;
    writeln!(w, "tau_star     {:e}", r.tau_star)?;
    writeln!(w, "lambda'      {:e} {:+e}i", r.lambda_prime.re, r.lambda_prime.im)?;
    writeln!(w, "c1(0)        {:e} {:+e}i", r.c1_0.re, r.c1_0.im)?;
    writeln!(w, "mu2          {:e}", r.mu2)?;
    writeln!(w, "beta2        {:e}", r.beta2)?;
    writeln!(w, "T2           {:e}", r.t2)?;
    writeln!(w, "direction    {d}")?;
    writeln!(w, "orbits       {s}")?;
    writeln!(w, "period       {p}")?;
    Ok(())
}
