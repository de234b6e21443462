//! Parameter sweeps, figure presets and their file outputs.
//!
//! Everything is computed in memory first and returned as a [`SweepOutput`];
//! files are written by a single caller afterwards, so a failing run leaves
//! no partial output. Parallel work is collected by grid index, making the
//! bytes independent of the thread count.

mod presets;

pub use presets::run_preset;

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{RangeCfg, RunConfig};
use crate::driven::{dressed_rates, evolve_sampled, default_dt, map_coherence_purity, steady_state, DriveSpec, MasterOptions, Trajectory};
use crate::error::{Error, Result};
use crate::landscape::CouplingLandscape;
use crate::relaxation::{dde_integrate, mode_oracle, pe_series, ModeOracleConfig, RelaxationParams, RelaxationTrace, SolverTag};
use crate::stateops::{sample_tomography, DensityMatrix2};
use crate::units::{self, fmt_f64};

/// One linear sweep axis in display units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Axis {
    pub name: String,
    /// Unit tag: `mhz`, `ghz` (both `ω/2π`) or `ns`.
    pub unit: &'static str,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(name: &str, unit: &'static str, start: f64, stop: f64, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::Config(format!("axis '{name}' needs count >= 1")));
        }
        if !(start <= stop) {
            return Err(Error::Config(format!("axis '{name}': start {start} exceeds stop {stop}")));
        }
        if !matches!(unit, "mhz" | "ghz" | "ns") {
            return Err(Error::Config(format!("axis '{name}': unknown unit '{unit}'")));
        }
        Ok(Self { name: name.to_string(), unit, start, stop, count })
    }

    pub fn from_range(name: &str, unit: &'static str, r: &RangeCfg) -> Result<Self> {
        Self::new(name, unit, r.start, r.stop, r.count)
    }

    pub fn column(&self) -> String {
        format!("{}_{}", self.name, self.unit)
    }

    /// Grid values in display units; the last point is exactly `stop`.
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let n = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| if i + 1 == self.count { self.stop } else { self.start + (self.stop - self.start) * i as f64 / n })
            .collect()
    }

    /// Grid values in SI (rad/s or s).
    pub fn si_values(&self) -> Vec<f64> {
        let conv: fn(f64) -> f64 = match self.unit {
            "mhz" => units::mhz,
            "ghz" => units::ghz,
            _ => units::ns,
        };
        self.values().into_iter().map(conv).collect()
    }
}

/// Result matrices over a product of axes (first axis outermost).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepGrid {
    pub axes: Vec<Axis>,
    pub results: Vec<(String, Vec<f64>)>,
    pub mask: Option<Vec<Option<&'static str>>>,
}

impl SweepGrid {
    pub fn new(axes: Vec<Axis>) -> Self {
        Self { axes, results: Vec::new(), mask: None }
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn insert(&mut self, name: &str, data: Vec<f64>) -> Result<()> {
        if data.len() != self.len() {
            return Err(Error::Validation(format!("'{name}' has {} values for a grid of {}", data.len(), self.len())));
        }
        self.results.push((name.to_string(), data));
        Ok(())
    }

    pub fn set_mask(&mut self, mask: Vec<Option<&'static str>>) -> Result<()> {
        if mask.len() != self.len() {
            return Err(Error::Validation("mask does not match the grid".into()));
        }
        self.mask = Some(mask);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.results.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    pub fn masked(&self) -> usize {
        self.mask.as_ref().map_or(0, |m| m.iter().filter(|c| c.is_some()).count())
    }

    /// Axis coordinates of flat index `k`.
    pub fn coords(&self, k: usize) -> Vec<f64> {
        let mut rem = k;
        let mut out = vec![0.0; self.axes.len()];
        for (j, a) in self.axes.iter().enumerate().rev() {
            out[j] = a.values()[rem % a.count];
            rem /= a.count;
        }
        out
    }

    pub fn to_csv(&self, comments: &[String]) -> String {
        let mut out = String::new();
        for c in comments {
            let _ = writeln!(out, "# {c}");
        }
        let mut header: Vec<String> = self.axes.iter().map(Axis::column).collect();
        header.extend(self.results.iter().map(|(n, _)| n.clone()));
        if self.mask.is_some() {
            header.push("mask_reason".into());
        }
        out.push_str(&header.join(","));
        out.push('\n');
        let axis_vals: Vec<Vec<f64>> = self.axes.iter().map(Axis::values).collect();
        for k in 0..self.len() {
            let mut rem = k;
            let mut idx = vec![0; self.axes.len()];
            for (j, a) in self.axes.iter().enumerate().rev() {
                idx[j] = rem % a.count;
                rem /= a.count;
            }
            let mut row: Vec<String> = idx.iter().enumerate().map(|(j, &i)| fmt_f64(axis_vals[j][i])).collect();
            row.extend(self.results.iter().map(|(_, v)| fmt_f64(v[k])));
            if let Some(m) = &self.mask {
                row.push(m[k].unwrap_or("").to_string());
            }
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFile {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SweepOutput {
    pub files: Vec<OutputFile>,
    pub masked: usize,
}

impl SweepOutput {
    fn push(&mut self, name: impl Into<String>, contents: String) {
        self.files.push(OutputFile { name: name.into(), contents });
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|f| f.name == name).map(|f| f.contents.as_str())
    }

    /// Write every file into `dir`, creating it if needed.
    pub fn write_to(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        for f in &self.files {
            std::fs::write(dir.join(&f.name), &f.contents)?;
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct FileEntry<'a> {
    name: &'a str,
    rows: usize,
}

#[derive(Serialize)]
struct Meta<'a> {
    kind: &'a str,
    name: &'a str,
    crate_version: &'a str,
    config_hash: String,
    seed: u64,
    solvers: Vec<(&'a str, String)>,
    files: Vec<FileEntry<'a>>,
    masked_cells: usize,
    notes: &'a [String],
    config: &'a std::collections::BTreeMap<String, crate::config::Value>,
    config_si: std::collections::BTreeMap<String, crate::config::Value>,
}

fn metadata(kind: &str, name: &str, cfg: &RunConfig, out: &SweepOutput, notes: &[String]) -> String {
    let files = out
        .files
        .iter()
        .map(|f| FileEntry { name: &f.name, rows: f.contents.lines().filter(|l| !l.starts_with('#')).count().saturating_sub(1) })
        .collect();
    let s = &cfg.solver;
    let meta = Meta {
        kind,
        name,
        crate_version: env!("CARGO_PKG_VERSION"),
        config_hash: cfg.hash(),
        seed: s.seed,
        solvers: vec![
            ("relaxation", format!("{} ({} convention)", s.relax_solver, s.convention.as_str())),
            ("dde", "method of steps, RK4 with Hermite midpoints".into()),
            ("mode_oracle", "discretised two-point continuum, RK4".into()),
            ("master", format!("Lindblad RK4, {} dissipator", s.dissipator.as_str())),
            ("steady_state", "Liouvillian null vector via SVD".into()),
            ("tomography", "xoshiro256++ Bernoulli shots, linear inversion".into()),
        ],
        files,
        masked_cells: out.masked,
        notes,
        config: cfg.values(),
        config_si: cfg.si_echo(),
    };
    let mut text = serde_json::to_string_pretty(&meta).expect("metadata serialises");
    text.push('\n');
    text
}

/// Linearly spaced times `0..=t_max`.
pub fn time_grid(t_max: f64, count: usize) -> Vec<f64> {
    let n = (count.max(2) - 1) as f64;
    (0..count.max(2)).map(|i| t_max * i as f64 / n).collect()
}

/// Undriven decay trace at `omega_q` from the configured solver. Grid
/// solvers are decimated to roughly `count` samples.
pub fn relax_trace(cfg: &RunConfig, omega_q: f64, solver: SolverTag, t_max: f64, count: usize) -> Result<RelaxationTrace> {
    let p = RelaxationParams::from_landscape(&cfg.landscape, omega_q)?;
    let conv = cfg.solver.convention;
    match solver {
        SolverTag::Series => pe_series(&p, &time_grid(t_max, count), conv),
        SolverTag::Dde => {
            let dt = cfg.solver.dt.unwrap_or(p.delay / 1000.0);
            let out = dde_integrate(&p, t_max, dt, conv)?;
            if out.adjusted() {
                log::info!("dde step rounded from {:e} s to {:e} s", out.requested_dt, out.dt);
            }
            Ok(resample(&out.trace, count))
        }
        SolverTag::ModeOracle => {
            let mut mc = ModeOracleConfig::for_horizon(cfg.solver.n_modes, t_max);
            if let Some(b) = cfg.solver.bandwidth {
                mc.bandwidth = b;
            }
            if let Some(dt) = cfg.solver.dt {
                mc.dt = dt;
            }
            Ok(resample(&mode_oracle(&p, &mc, t_max, conv)?, count))
        }
    }
}

/// Keep `count` samples of a fine trace, including both ends; an exact
/// stride when the step count allows it.
fn resample(tr: &RelaxationTrace, count: usize) -> RelaxationTrace {
    let n = tr.len();
    let k = count.max(2) - 1;
    if n <= count {
        return tr.clone();
    }
    if (n - 1) % k == 0 {
        return tr.decimate((n - 1) / k);
    }
    let idx: Vec<usize> = (0..=k).map(|i| ((i * (n - 1)) as f64 / k as f64).round() as usize).collect();
    RelaxationTrace {
        times: idx.iter().map(|&i| tr.times[i]).collect(),
        pe: idx.iter().map(|&i| tr.pe[i]).collect(),
        solver: tr.solver,
        delay: tr.delay,
    }
}

/// Driven evolution from the ground state, sampled at `samples` points.
pub fn driven_trajectory(cfg: &RunConfig, drive: &DriveSpec, samples: usize) -> Result<Trajectory> {
    let rates = dressed_rates(drive, &cfg.landscape)?;
    let opts = cfg.solver.master_options();
    let dt = cfg.solver.dt.unwrap_or_else(|| default_dt(drive, &rates, &opts));
    let dt = if dt.is_finite() { dt } else { drive.duration.max(f64::MIN_POSITIVE) };
    evolve_sampled(&DensityMatrix2::ground(), drive, &rates, dt, samples, &opts)
}

/// Steady observables `[pe, sx, sy, sz, purity]` for one drive.
pub fn steady_observables(land: &CouplingLandscape, drive: &DriveSpec, opts: &MasterOptions) -> Result<[f64; 5]> {
    let rates = dressed_rates(drive, land)?;
    let rho = steady_state(drive, &rates, opts)?;
    let b = rho.bloch();
    Ok([rho.excited_population(), b.rx, b.ry, b.rz, rho.purity()])
}

pub fn trajectory_csv(tr: &Trajectory) -> String {
    let mut out = String::from("t_ns,pe,sx,sy,sz,purity\n");
    for (t, s) in tr.times.iter().zip(&tr.states) {
        let b = s.bloch();
        let row = [units::to_ns(*t), s.excited_population(), b.rx, b.ry, b.rz, s.purity()].map(fmt_f64);
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn gamma_eff_grid(land: &CouplingLandscape, axis: Axis) -> Result<SweepGrid> {
    let rows: Vec<std::result::Result<[f64; 4], &'static str>> = axis
        .si_values()
        .par_iter()
        .map(|&w| {
            let c = land.contributions(w)?;
            Ok([land.gamma_eff(w)?, c.gamma_in, c.gamma_idt, c.interference])
        })
        .map(|r: Result<_>| r.map_err(|e| e.reason_code()))
        .collect();
    let mut g = SweepGrid::new(vec![axis]);
    let names = ["gamma_eff_mhz", "gamma_in_mhz", "gamma_idt_mhz", "interference_mhz"];
    for (j, n) in names.iter().enumerate() {
        g.insert(n, rows.iter().map(|r| r.map_or(f64::NAN, |v| units::to_mhz(v[j]))).collect())?;
    }
    g.set_mask(rows.iter().map(|r| r.err()).collect())?;
    Ok(g)
}

fn steady_grid(cfg: &RunConfig, axis: Axis) -> Result<SweepGrid> {
    let opts = cfg.solver.master_options();
    let rows: Vec<std::result::Result<[f64; 6], &'static str>> = axis
        .si_values()
        .par_iter()
        .map(|&wq| {
            let d = DriveSpec::new(cfg.drive.rabi, cfg.drive.detuning, cfg.drive.duration, wq)?;
            let o = steady_observables(&cfg.landscape, &d, &opts)?;
            let ge = cfg.landscape.gamma_eff(wq)?;
            Ok([units::to_mhz(ge), o[0], o[1], o[2], o[3], o[4]])
        })
        .map(|r: Result<_>| r.map_err(|e| e.reason_code()))
        .collect();
    let mut g = SweepGrid::new(vec![axis]);
    for (j, n) in ["gamma_eff_mhz", "pe", "sx", "sy", "sz", "purity"].iter().enumerate() {
        g.insert(n, rows.iter().map(|r| r.map_or(f64::NAN, |v| v[j])).collect())?;
    }
    g.set_mask(rows.iter().map(|r| r.err()).collect())?;
    Ok(g)
}

/// Coherence/purity map over `(Ω, Δ)` at a fixed qubit frequency.
pub fn map_grid(land: &CouplingLandscape, qubit_omega: f64, rabi: Axis, delta: Axis, opts: &MasterOptions) -> Result<SweepGrid> {
    let m = map_coherence_purity(&rabi.si_values(), &delta.si_values(), qubit_omega, land, opts);
    let mut g = SweepGrid::new(vec![rabi, delta]);
    g.insert("sx", m.cells.iter().map(|c| c.sx).collect())?;
    g.insert("sy", m.cells.iter().map(|c| c.sy).collect())?;
    g.insert("sz", m.cells.iter().map(|c| c.sz).collect())?;
    g.insert("pe", m.cells.iter().map(|c| c.pe).collect())?;
    g.insert("purity", m.cells.iter().map(|c| c.purity).collect())?;
    g.set_mask(m.cells.iter().map(|c| c.mask).collect())?;
    Ok(g)
}

pub(crate) fn map_comments(qubit_ghz: f64, g: &SweepGrid, cfg: &RunConfig) -> Vec<String> {
    let mut c = vec![format!("qubit_ghz = {qubit_ghz}")];
    for a in &g.axes {
        c.push(format!("axis {} = linspace({}, {}, {})", a.column(), a.start, a.stop, a.count));
    }
    c.push(format!("dissipator = {}", cfg.solver.dissipator.as_str()));
    c.push(format!("masked_cells = {}", g.masked()));
    c.push(format!("config_hash = {}", cfg.hash()));
    c
}

/// Evaluate every quantity listed in `sweep.quantity`.
pub fn run_sweep(cfg: &RunConfig) -> Result<SweepOutput> {
    let s = &cfg.sweep;
    let mut out = SweepOutput::default();
    let mut notes = Vec::new();
    for q in &s.quantities {
        match q.as_str() {
            "gamma_eff" => {
                let g = gamma_eff_grid(&cfg.landscape, Axis::from_range("omega", "ghz", &s.freq_ghz)?)?;
                out.masked += g.masked();
                out.push("gamma_eff.csv", g.to_csv(&[]));
            }
            "pe_trace" => {
                let tr = relax_trace(cfg, units::ghz(s.qubit_ghz), cfg.solver.relax_solver, units::ns(s.t_max_ns), s.t_count)?;
                out.push("pe_trace.csv", tr.to_csv());
            }
            "evolve" => {
                let d = DriveSpec::new(cfg.drive.rabi, cfg.drive.detuning, cfg.drive.duration, units::ghz(s.qubit_ghz))?;
                let tr = driven_trajectory(cfg, &d, s.samples)?;
                out.push("evolve.csv", trajectory_csv(&tr));
                let est = sample_tomography(tr.last(), cfg.solver.tomography_shots, cfg.solver.seed)?;
                let b = tr.last().bloch();
                let mut t = String::from("axis,exact,estimate,std_err\n");
                for (i, (ax, ex)) in [("x", b.rx), ("y", b.ry), ("z", b.rz)].into_iter().enumerate() {
                    let _ = writeln!(t, "{ax},{},{},{}", fmt_f64(ex), fmt_f64(est.r[i]), fmt_f64(est.std_err[i]));
                }
                let _ = writeln!(t, "purity,{},{},", fmt_f64(tr.last().purity()), fmt_f64(est.purity()));
                out.push("evolve.tomography.csv", t);
                notes.push(format!("evolve: {} RK4 steps of {:e} s", (d.duration / tr.dt).round(), tr.dt));
            }
            "steady_pe" => {
                let g = steady_grid(cfg, Axis::from_range("qubit", "ghz", &s.freq_ghz)?)?;
                out.masked += g.masked();
                out.push("steady_pe.csv", g.to_csv(&[]));
            }
            "map" => {
                let rabi = Axis::from_range("omega", "mhz", &s.rabi_mhz)?;
                let delta = Axis::from_range("delta", "mhz", &s.delta_mhz)?;
                let g = map_grid(&cfg.landscape, units::ghz(s.qubit_ghz), rabi, delta, &cfg.solver.master_options())?;
                out.masked += g.masked();
                out.push("map.csv", g.to_csv(&map_comments(s.qubit_ghz, &g, cfg)));
            }
            other => return Err(Error::Config(format!("unknown quantity '{other}'"))),
        }
    }
    if out.masked > 0 {
        log::warn!("{} grid cells masked", out.masked);
    }
    let meta = metadata("sweep", "sweep", cfg, &out, &notes);
    out.push("sweep.meta.json", meta);
    Ok(out)
}

/// Run `f` on a dedicated pool with `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot build a pool of {threads} threads: {e}")))?;
    Ok(pool.install(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::validate_config;

    #[test]
    fn axis_values() {
        let a = Axis::new("omega", "mhz", 0.0, 40.0, 401).unwrap();
        let v = a.values();
        assert_eq!(v.len(), 401);
        assert_eq!(v[400], 40.0);
        assert!((v[10] - 1.0).abs() < 1e-15);
        assert_eq!(Axis::new("x", "mhz", 3.0, 3.0, 1).unwrap().values(), [3.0]);
        assert!(Axis::new("x", "mhz", 3.0, 1.0, 2).is_err());
        assert!(Axis::new("x", "mhz", 0.0, 1.0, 0).is_err());
        assert!(Axis::new("x", "furlong", 0.0, 1.0, 2).is_err());
    }

    #[test]
    fn grid_layout() {
        let mut g = SweepGrid::new(vec![Axis::new("a", "mhz", 0.0, 1.0, 2).unwrap(), Axis::new("b", "mhz", 0.0, 2.0, 3).unwrap()]);
        assert!(g.insert("v", vec![0.0; 5]).is_err());
        g.insert("v", (0..6).map(f64::from).collect()).unwrap();
        assert_eq!(g.coords(4), [1.0, 1.0]);
        let csv = g.to_csv(&["note".into()]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# note");
        assert_eq!(lines[1], "a_mhz,b_mhz,v");
        assert!(lines[7].starts_with("1.0000000000000000e0,2.0000000000000000e0,5.0"));
    }

    #[test]
    fn single_point_gamma_eff_matches_landscape() {
        let cfg = validate_config("[sweep]\nfreq_start_ghz = 4.89\nfreq_stop_ghz = 4.89\nfreq_count = 1\n").unwrap();
        let out = run_sweep(&cfg).unwrap();
        let csv = out.get("gamma_eff.csv").unwrap();
        let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
        let want = units::to_mhz(cfg.landscape.gamma_eff(units::ghz(4.89)).unwrap());
        assert_eq!(row[1], fmt_f64(want));
        assert!(out.get("sweep.meta.json").unwrap().contains(&cfg.hash()));
    }

    #[test]
    fn out_of_band_cells_are_masked() {
        let cfg = validate_config("[sweep]\nfreq_start_ghz = 5.5\nfreq_stop_ghz = 6.5\nfreq_count = 11\n").unwrap();
        let out = run_sweep(&cfg).unwrap();
        assert_eq!(out.masked, 5);
        assert!(out.get("gamma_eff.csv").unwrap().contains("out_of_band"));
    }

    #[test]
    fn all_quantities_run() {
        let cfg = validate_config(
            "[sweep]\nquantity = [\"gamma_eff\", \"pe_trace\", \"evolve\", \"steady_pe\", \"map\"]\nfreq_count = 5\nrabi_count = 4\nrabi_stop_mhz = 3\ndelta_count = 3\ndelta_start_mhz = -1\ndelta_stop_mhz = 1\nt_count = 11\nsamples = 8\n[drive]\nduration_us = 0.5\n",
        )
        .unwrap();
        let out = run_sweep(&cfg).unwrap();
        let names: Vec<&str> = out.files.iter().map(|f| f.name.as_str()).collect();
        assert_eq!(names, ["gamma_eff.csv", "pe_trace.csv", "evolve.csv", "evolve.tomography.csv", "steady_pe.csv", "map.csv", "sweep.meta.json"]);
        assert_eq!(out.get("pe_trace.csv").unwrap().lines().count(), 12);
        assert_eq!(out.get("evolve.csv").unwrap().lines().count(), 9);
        let map = out.get("map.csv").unwrap();
        assert!(map.lines().any(|l| l == "omega_mhz,delta_mhz,sx,sy,sz,pe,purity,mask_reason"));
        assert_eq!(map.lines().filter(|l| !l.starts_with('#')).count(), 13);
    }

    #[test]
    fn grid_solvers_decimate_to_count() {
        for solver in ["dde", "mode_oracle"] {
            let cfg = validate_config(&format!(
                "[solver]\nrelax_solver = \"{solver}\"\nn_modes = 400\n[sweep]\nquantity = \"pe_trace\"\nt_max_ns = 250\nt_count = 11\n"
            ))
            .unwrap();
            let out = run_sweep(&cfg).unwrap();
            let csv = out.get("pe_trace.csv").unwrap();
            assert_eq!(csv.lines().count(), 12, "{solver}");
            assert!(csv.lines().nth(1).unwrap().ends_with(solver));
        }
    }
}
