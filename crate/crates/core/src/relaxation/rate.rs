use serde::{Deserialize, Serialize};

use super::RelaxationTrace;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    /// Negated least-squares slope of `ln P_e` over the window (rad/s).
    pub rate: f64,
    pub samples: usize,
    /// Window starts before `3T`, where backflow transients still matter.
    pub early_window: bool,
}

/// Long-time exponential rate of a trace over `window = (t_lo, t_hi)`.
pub fn effective_rate(trace: &RelaxationTrace, window: (f64, f64)) -> Result<RateFit> {
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(Error::Domain(format!("empty window [{lo:e}, {hi:e}]")));
    }
    let (first, last) = match (trace.times.first(), trace.times.last()) {
        (Some(f), Some(l)) => (*f, *l),
        _ => return Err(Error::InsufficientData("empty trace".into())),
    };
    if lo < first || hi > last * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "window [{lo:e}, {hi:e}] s is not inside the trace span [{first:e}, {last:e}] s"
        )));
    }
    let pts: Vec<(f64, f64)> = trace
        .times
        .iter()
        .zip(&trace.pe)
        .filter(|(t, _)| **t >= lo && **t <= hi)
        .map(|(t, p)| (*t, *p))
        .collect();
    if pts.len() < 5 {
        return Err(Error::InsufficientData(format!("window holds {} samples, need >= 5", pts.len())));
    }
    if let Some((t, p)) = pts.iter().find(|(_, p)| !(*p > 1e-14)) {
        return Err(Error::Domain(format!("population {p:e} at t = {t:e} s underflows the log fit")));
    }
    let n = pts.len() as f64;
    let t_mean = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let y_mean = pts.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, p) in &pts {
        let dt = t - t_mean;
        sxy += dt * (p.ln() - y_mean);
        sxx += dt * dt;
    }
    Ok(RateFit { rate: -sxy / sxx, samples: pts.len(), early_window: lo < 3.0 * trace.delay })
}
