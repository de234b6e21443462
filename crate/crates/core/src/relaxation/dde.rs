//! Method-of-steps integration of the two-point delay equation.
//!
//! The step `h` divides `T` exactly, so every delayed argument `t − T` of a
//! step endpoint is a stored grid point. Stage midpoints use cubic Hermite
//! interpolation on the stored history segment (values plus one-sided
//! derivatives), which keeps the scheme fourth order across the derivative
//! jumps at `t = nT`.

use num_complex::Complex64 as C64;

use super::{RateConvention, RelaxationParams, RelaxationTrace, SolverTag};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DdeOutput {
    pub trace: RelaxationTrace,
    /// Step actually used, `T / steps_per_delay`.
    pub dt: f64,
    pub requested_dt: f64,
    pub steps_per_delay: usize,
}

impl DdeOutput {
    pub fn adjusted(&self) -> bool {
        self.dt != self.requested_dt
    }
}

pub fn dde_integrate(p: &RelaxationParams, t_max: f64, dt: f64, conv: RateConvention) -> Result<DdeOutput> {
    if !(dt > 0.0) {
        return Err(Error::Config(format!("dt must be > 0, got {dt}")));
    }
    if dt > p.delay {
        return Err(Error::Config(format!("dt = {dt:e} s exceeds the delay T = {:e} s", p.delay)));
    }
    if !(t_max >= 0.0) {
        return Err(Error::Domain(format!("t_max must be >= 0, got {t_max}")));
    }
    // round dt down so that T/h is an integer
    let m = ((p.delay / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let h = p.delay / m as f64;
    let n_steps = ((t_max / h) * (1.0 - 1e-12)).ceil() as usize;

    let (k, kin) = p.amplitude_rates(conv);
    let decay = C64::new(k + kin, 0.0);
    let feedback = C64::from_polar(k * p.beta, p.phase());

    let mut b: Vec<C64> = Vec::with_capacity(n_steps + 1);
    // one-sided derivatives at each node: right limit starts a segment, left limit ends one
    let mut d_right: Vec<C64> = Vec::with_capacity(n_steps + 1);
    let mut d_left: Vec<C64> = Vec::with_capacity(n_steps + 1);

    let rhs = |x: C64, delayed: C64| -decay * x - feedback * delayed;

    // delayed value for the node at index i, from the given side
    let node_delayed = |b: &[C64], i: usize, right: bool| -> C64 {
        if i < m {
            C64::new(0.0, 0.0)
        } else if i == m && !right {
            // b(0⁻) = 0
            C64::new(0.0, 0.0)
        } else {
            b[i - m]
        }
    };

    b.push(C64::new(1.0, 0.0));
    d_right.push(rhs(b[0], C64::new(0.0, 0.0)));
    d_left.push(C64::new(0.0, 0.0));

    for j in 0..n_steps {
        let x = b[j];
        // history on segment [(j−m)h, (j−m+1)h]
        let (lag0, lag_mid, lag1) = if j < m {
            let zero = C64::new(0.0, 0.0);
            (zero, zero, zero)
        } else {
            let s = j - m;
            let mid = (b[s] + b[s + 1]) * 0.5 + (d_right[s] - d_left[s + 1]) * (h / 8.0);
            (b[s], mid, b[s + 1])
        };
        let k1 = rhs(x, lag0);
        let k2 = rhs(x + k1 * (h / 2.0), lag_mid);
        let k3 = rhs(x + k2 * (h / 2.0), lag_mid);
        let k4 = rhs(x + k3 * h, lag1);
        let next = x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        b.push(next);
        let i = j + 1;
        d_left.push(rhs(next, node_delayed(&b, i, false)));
        d_right.push(rhs(next, node_delayed(&b, i, true)));
    }

    let times = (0..=n_steps).map(|i| i as f64 * h).collect();
    let pe = b.iter().map(|z| z.norm_sqr()).collect();
    Ok(DdeOutput {
        trace: RelaxationTrace { times, pe, solver: SolverTag::Dde, delay: p.delay },
        dt: h,
        requested_dt: dt,
        steps_per_delay: m,
    })
}
