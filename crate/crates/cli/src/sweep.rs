//! Swept configuration keys: `key start stop count linear|log`.

use std::fmt;
use std::str::FromStr;

use crate::config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub key: String,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub scale: Scale,
}

impl SweepAxis {
    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|i| {
                let s = i as f64 / (n - 1) as f64;
                if i == n - 1 {
                    return self.stop;
                }
                match self.scale {
                    Scale::Linear => self.start + (self.stop - self.start) * s,
                    Scale::Log => self.start * (self.stop / self.start).powf(s),
                }
            })
            .collect()
    }
}

impl FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split_whitespace().collect();
        let [key, start, stop, count, scale] = parts[..] else {
            return Err(format!("expected `key start stop count linear|log`, got `{s}`"));
        };
        if !RunConfig::is_numeric(key) || key.starts_with("sweep") {
            return Err(format!("`{key}` is not a numeric key"));
        }
        let num = |v: &str| v.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or(format!("bad number `{v}`"));
        let (start, stop) = (num(start)?, num(stop)?);
        let count: usize = count.parse().map_err(|_| format!("bad count `{count}`"))?;
        if count < 2 {
            return Err(format!("count must be at least 2, got {count}"));
        }
        let scale = match scale {
            "linear" => Scale::Linear,
            "log" if start > 0.0 && stop > 0.0 => Scale::Log,
            "log" => return Err("log sweeps need positive endpoints".into()),
            other => return Err(format!("scale must be linear or log, got `{other}`")),
        };
        Ok(Self { key: key.to_string(), start, stop, count, scale })
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let scale = match self.scale {
            Scale::Linear => "linear",
            Scale::Log => "log",
        };
        write!(f, "{} {} {} {} {scale}", self.key, self.start, self.stop, self.count)
    }
}

/// Sweep points in row-major order over one or two axes.
pub fn points(a: &SweepAxis, b: Option<&SweepAxis>) -> Vec<Vec<f64>> {
    let va = a.values();
    match b {
        None => va.into_iter().map(|x| vec![x]).collect(),
        Some(b) => {
            let vb = b.values();
            va.iter().flat_map(|x| vb.iter().map(move |y| vec![*x, *y])).collect()
        }
    }
}
