//! Classical simulation fidelity bounds for a Gaussian coherent-state prior.
//!
//! The best measure-and-prepare simulation of `|α⟩ ↦ |gα⟩`, `0 ≤ g ≤ 1`,
//! reaches `(1+λ)/(1+λ+g²)`. Under the beam-splitter dynamics the receiving
//! oscillator holds `|−iα sin(γ_g t)⟩`, so `g = |sin(γ_g t)|`.

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use crate::ensemble::PriorEnsemble;
use crate::{Error, Result};

/// Relative bisection tolerance on crossing times.
pub const CROSSING_REL_TOL: f64 = 1e-6;

/// `(1+λ)/(1+λ+g²)` for `0 ≤ g ≤ 1`.
pub fn amplification_bound(lambda: f64, g: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::param("lambda", format!("{lambda} must be positive")));
    }
    if !(0.0..=1.0).contains(&g) {
        return Err(Error::param("g", format!("{g} outside [0, 1]")));
    }
    Ok((1.0 + lambda) / (1.0 + lambda + g * g))
}

/// Teleportation bound `(1+λ)/(2+λ)`, the minimum of [`locc_bound`].
pub fn teleportation_bound(lambda: f64) -> f64 {
    (1.0 + lambda) / (2.0 + lambda)
}

/// `F_cl(t) = (1+λ)/(1+λ+sin²(γ_g t))`. Requires `λ > 0`.
pub fn locc_bound(lambda: f64, gamma_g: f64, t: f64) -> f64 {
    debug_assert!(lambda > 0.0);
    let s = (gamma_g * t).sin();
    (1.0 + lambda) / (1.0 + lambda + s * s)
}

/// Time in `[0, t_s]` at which [`locc_bound`] has dropped to `fidelity`.
pub fn time_to_fidelity(lambda: f64, fidelity: f64, gamma_g: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::param("lambda", format!("{lambda} must be positive")));
    }
    if !(gamma_g > 0.0) {
        return Err(Error::param("gamma_g", format!("{gamma_g} must be positive")));
    }
    let f_min = teleportation_bound(lambda);
    if !(fidelity >= f_min && fidelity <= 1.0) {
        return Err(Error::param(
            "F",
            format!("{fidelity} outside [{f_min}, 1] for lambda = {lambda}"),
        ));
    }
    let arg = ((1.0 + lambda) * (1.0 - fidelity) / fidelity).sqrt().min(1.0);
    Ok(arg.asin() / gamma_g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    /// Single-receiver LOCC bound.
    LoccSingle,
    /// Constant teleportation bound.
    Teleportation,
    /// Loaded from a file.
    External,
    /// A fidelity curve to compare against a bound.
    Fidelity,
}

/// Sampled curve on a strictly increasing time grid, values in `(0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCurve {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub kind: CurveKind,
}

impl BoundCurve {
    pub fn new(times: Vec<f64>, values: Vec<f64>, kind: CurveKind) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: times.len(),
                actual: values.len(),
            });
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("times", "must be strictly increasing"));
        }
        if let Some(v) = values.iter().find(|v| !(**v > 0.0 && **v <= 1.0 + 1e-12)) {
            return Err(Error::param("values", format!("{v} outside (0, 1]")));
        }
        Ok(Self { times, values, kind })
    }

    pub fn locc(lambda: f64, gamma_g: f64, times: &[f64]) -> Result<Self> {
        PriorEnsemble::new(lambda, 0)?;
        let values = times.iter().map(|&t| locc_bound(lambda, gamma_g, t)).collect();
        Self::new(times.to_vec(), values, CurveKind::LoccSingle)
    }

    pub fn teleportation(lambda: f64, times: &[f64]) -> Result<Self> {
        PriorEnsemble::new(lambda, 0)?;
        Self::new(
            times.to_vec(),
            vec![teleportation_bound(lambda); times.len()],
            CurveKind::Teleportation,
        )
    }

    /// Two-column CSV with header `t,F`.
    pub fn load_external(path: impl AsRef<Path>) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)?;
        let headers = reader.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "t" || &headers[1] != "F" {
            return Err(Error::Config(format!(
                "external curve header must be `t,F`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut times = Vec::new();
        let mut values = Vec::new();
        for record in reader.records() {
            let record = record?;
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::Config(format!("external curve value `{s}`: {e}")))
            };
            times.push(parse(&record[0])?);
            values.push(parse(&record[1])?);
        }
        Self::new(times, values, CurveKind::External)
    }

    /// Linear interpolation; `None` outside the grid.
    pub fn interpolate(&self, t: f64) -> Option<f64> {
        let (first, last) = (*self.times.first()?, *self.times.last()?);
        if t < first || t > last {
            return None;
        }
        let i = self.times.partition_point(|&x| x <= t).min(self.times.len() - 1).max(1);
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let (v0, v1) = (self.values[i - 1], self.values[i]);
        Some(v0 + (v1 - v0) * (t - t0) / (t1 - t0))
    }
}

/// Interval `(start, end)` on which a fidelity strictly exceeds a bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingWindow {
    pub start: f64,
    pub end: f64,
}

impl CrossingWindow {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

/// Root of `excess` in `[lo, hi]` where `excess(lo) ≤ 0 < excess(hi)` or the
/// reverse, bisected to `CROSSING_REL_TOL` relative to `hi`.
fn bisect(excess: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let lo_positive = excess(lo) > 0.0;
    let tol = CROSSING_REL_TOL * hi.abs().max(f64::MIN_POSITIVE);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if (excess(mid) > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Longest interval on which `excess(t) > 0`, detected on the grid and
/// refined by bisection between neighbouring grid points.
pub fn crossing_window_fn(excess: impl Fn(f64) -> f64, times: &[f64]) -> Option<CrossingWindow> {
    let positive: Vec<bool> = times.iter().map(|&t| excess(t) > 0.0).collect();
    let mut best: Option<(usize, usize)> = None;
    let mut i = 0;
    while i < positive.len() {
        if !positive[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < positive.len() && positive[i + 1] {
            i += 1;
        }
        let run = (start, i);
        let span = |r: (usize, usize)| {
            let lo = if r.0 == 0 { times[0] } else { times[r.0 - 1] };
            let hi = if r.1 + 1 == times.len() {
                times[r.1]
            } else {
                times[r.1 + 1]
            };
            hi - lo
        };
        if best.is_none_or(|b| span(run) > span(b)) {
            best = Some(run);
        }
        i += 1;
    }
    let (first, last) = best?;
    let start = if first == 0 {
        times[0]
    } else {
        bisect(&excess, times[first - 1], times[first])
    };
    let end = if last + 1 == times.len() {
        times[last]
    } else {
        bisect(&excess, times[last], times[last + 1])
    };
    Some(CrossingWindow { start, end })
}

/// Maximal window where `fidelity > bound` on a shared grid, with the
/// endpoints refined by bisection on the linear interpolants.
pub fn crossing_window(fidelity: &BoundCurve, bound: &BoundCurve) -> Result<Option<CrossingWindow>> {
    let same_grid = fidelity.times.len() == bound.times.len()
        && fidelity
            .times
            .iter()
            .zip(&bound.times)
            .all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0));
    if !same_grid {
        return Err(Error::param("bound", "curves do not share a time grid"));
    }
    if fidelity.times.is_empty() {
        return Ok(None);
    }
    let excess = |t: f64| fidelity.interpolate(t).unwrap_or(0.0) - bound.interpolate(t).unwrap_or(0.0);
    Ok(crossing_window_fn(excess, &fidelity.times))
}
