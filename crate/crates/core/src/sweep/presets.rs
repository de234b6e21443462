use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;

use super::{driven_trajectory, map_comments, map_grid, metadata, relax_trace, steady_observables, Axis, SweepGrid, SweepOutput};
use crate::config::{RunConfig, PRESETS};
use crate::driven::{steady_pe_resonant, steady_state, weak_drive_pe, weak_drive_valid, DressedRates, DriveSpec};
use crate::error::{Error, Result};
use crate::relaxation::{effective_rate, pe_series, RelaxationParams, SolverTag};
use crate::stateops::sample_tomography;
use crate::units::{self, fmt_f64};

/// Qubit frequencies (GHz) of the four decay traces.
pub const FIG2C_FREQS_GHZ: [f64; 4] = [4.8887, 4.8894, 4.8899, 4.8904];
pub const FIG3B_QUBIT_GHZ: f64 = 4.279;
/// One landscape period centred on 4.640 GHz.
pub const FIG3_SCAN_GHZ: (f64, f64, usize) = (4.636, 4.644, 81);
pub const FIG3D_RABI_MHZ: f64 = 0.2;
pub const FIG3F_RABI_MHZ: f64 = 2.5;
pub const FIG4I_QUBITS_GHZ: [f64; 2] = [4.891, 4.887];
pub const FIG4I_DELTA_MHZ: f64 = -5.0;
pub const FIG4I_RABI_MHZ: (f64, f64, usize) = (0.0, 40.0, 401);
/// Fixed drive duration of the driven experiments (s).
pub const DRIVE_DURATION: f64 = 3.8e-6;

/// Regenerate the data behind one figure. Axes and drive values are fixed;
/// the landscape and solver settings come from `cfg`.
pub fn run_preset(name: &str, cfg: &RunConfig) -> Result<SweepOutput> {
    let mut notes = Vec::new();
    let mut out = match name {
        "fig2b" => fig2b(cfg)?,
        "fig2c" => fig2c(cfg, &mut notes)?,
        "fig3b" => fig3b(cfg)?,
        "fig3d" => fig3_scan(cfg, "fig3d", FIG3D_RABI_MHZ, &mut notes)?,
        "fig3f" => fig3_scan(cfg, "fig3f", FIG3F_RABI_MHZ, &mut notes)?,
        "fig4i" => fig4i(cfg, &mut notes)?,
        other => {
            return Err(Error::Config(format!("unknown preset '{other}' (expected one of {})", PRESETS.join(", "))));
        }
    };
    let meta = metadata("preset", name, cfg, &out, &notes);
    out.push(format!("{name}.meta.json"), meta);
    Ok(out)
}

fn fig2b(cfg: &RunConfig) -> Result<SweepOutput> {
    let axis = Axis::new("omega", "ghz", 4.0, 5.0, 1001)?;
    let land = &cfg.landscape;
    let w = axis.si_values();
    let rows: Vec<[f64; 5]> = w
        .iter()
        .map(|&w| {
            let c = land.contributions(w)?;
            let (lo, hi) = land.envelopes(w)?;
            Ok([land.gamma_eff(w)?, lo, hi, c.gamma_in, c.gamma_idt].map(units::to_mhz))
        })
        .collect::<Result<_>>()?;
    let mut g = SweepGrid::new(vec![axis]);
    for (j, n) in ["gamma_eff_mhz", "lower_mhz", "upper_mhz", "gamma_in_mhz", "gamma_idt_mhz"].iter().enumerate() {
        g.insert(n, rows.iter().map(|r| r[j]).collect())?;
    }
    let mut out = SweepOutput::default();
    out.push("fig2b.csv", g.to_csv(&[]));
    Ok(out)
}

fn fig2c(cfg: &RunConfig, notes: &mut Vec<String>) -> Result<SweepOutput> {
    let t = cfg.landscape.delay;
    let t_max = 10.0 * t;
    let count = 501;
    let conv = cfg.solver.convention;
    let runs: Vec<_> = FIG2C_FREQS_GHZ
        .par_iter()
        .map(|&f| {
            let w = units::ghz(f);
            let dde = relax_trace(cfg, w, SolverTag::Dde, t_max, count)?;
            let p = RelaxationParams::from_landscape(&cfg.landscape, w)?;
            let series = pe_series(&p, &dde.times, conv)?;
            Ok((f, p, series, dde))
        })
        .collect::<Result<_>>()?;

    let mut csv = String::from("omega_ghz,phase_pi,t_ns,pe,solver\n");
    let mut rates = String::from("omega_ghz,phase_pi,gamma_t,early_rate_mhz,eq1_rate_mhz,fit_rate_mhz,dde_max_dev\n");
    for (f, p, series, dde) in &runs {
        let phase = p.phase() / PI;
        for tr in [series, dde] {
            for (tt, pe) in tr.times.iter().zip(&tr.pe) {
                let _ = writeln!(csv, "{},{},{},{},{}", fmt_f64(*f), fmt_f64(phase), fmt_f64(units::to_ns(*tt)), fmt_f64(*pe), tr.solver);
            }
        }
        let fit = effective_rate(series, (3.0 * t, t_max))?;
        let dev = series.max_abs_diff(dde);
        let _ = writeln!(
            rates,
            "{},{},{},{},{},{},{}",
            fmt_f64(*f),
            fmt_f64(phase),
            fmt_f64(p.retardation()),
            fmt_f64(units::to_mhz(p.early_rate(conv))),
            fmt_f64(units::to_mhz(p.markovian_rate())),
            fmt_f64(units::to_mhz(fit.rate)),
            fmt_f64(dev)
        );
        notes.push(format!("{f} GHz: phase {phase:.3} pi, gamma T = {:.3}", p.retardation()));
    }
    let mut out = SweepOutput::default();
    out.push("fig2c.csv", csv);
    out.push("fig2c.rates.csv", rates);
    Ok(out)
}

fn fig3b(cfg: &RunConfig) -> Result<SweepOutput> {
    let wq = units::ghz(FIG3B_QUBIT_GHZ);
    let ge = cfg.landscape.gamma_eff(wq)?;
    let axis = Axis::new("omega", "mhz", 0.0, 4.0, 161)?;
    let opts = cfg.solver.master_options();
    let rows: Vec<[f64; 4]> = axis
        .si_values()
        .par_iter()
        .map(|&o| {
            let d = DriveSpec::new(o, 0.0, DRIVE_DURATION, wq)?;
            // decay rate frozen at ω_q, the closed-form assumption
            let frozen = DressedRates::from_spectrum(&d, |_, _| Ok(ge))?;
            let pe_frozen = steady_state(&d, &frozen, &opts)?.excited_population();
            let pe_dressed = steady_observables(&cfg.landscape, &d, &opts)?[0];
            let pe_evolve = driven_trajectory(cfg, &d, 2)?.last().excited_population();
            Ok([pe_frozen, steady_pe_resonant(o, ge)?, pe_dressed, pe_evolve])
        })
        .collect::<Result<_>>()?;
    let mut g = SweepGrid::new(vec![axis]);
    for (j, n) in ["pe_lindblad", "pe_closed_form", "pe_dressed", "pe_evolve"].iter().enumerate() {
        g.insert(n, rows.iter().map(|r| r[j]).collect())?;
    }
    let mut out = SweepOutput::default();
    let note = format!("qubit_ghz = {FIG3B_QUBIT_GHZ}, delta_mhz = 0, gamma_eff_mhz = {}", units::to_mhz(ge));
    out.push("fig3b.csv", g.to_csv(&[note]));
    Ok(out)
}

fn fig3_scan(cfg: &RunConfig, name: &str, rabi_mhz: f64, notes: &mut Vec<String>) -> Result<SweepOutput> {
    let (lo, hi, n) = FIG3_SCAN_GHZ;
    let axis = Axis::new("qubit", "ghz", lo, hi, n)?;
    let rabi = units::mhz(rabi_mhz);
    let opts = cfg.solver.master_options();
    let samples = cfg.sweep.samples;
    let rows: Vec<_> = axis
        .si_values()
        .par_iter()
        .map(|&wq| {
            let ge = cfg.landscape.gamma_eff(wq)?;
            let d = DriveSpec::new(rabi, 0.0, DRIVE_DURATION, wq)?;
            let steady = steady_observables(&cfg.landscape, &d, &opts)?[0];
            let tr = driven_trajectory(cfg, &d, samples)?;
            let weak = if weak_drive_valid(rabi, ge) { weak_drive_pe(rabi, ge)? } else { f64::NAN };
            Ok(([units::to_mhz(ge), steady, tr.last().excited_population(), steady_pe_resonant(rabi, ge)?, weak], tr))
        })
        .collect::<Result<_>>()?;
    let mut g = SweepGrid::new(vec![axis.clone()]);
    for (j, col) in ["gamma_eff_mhz", "pe_steady", "pe_evolve", "pe_closed_form", "pe_weak"].iter().enumerate() {
        g.insert(col, rows.iter().map(|r| r.0[j]).collect())?;
    }
    let mut dyn_csv = String::from("qubit_ghz,t_ns,pe\n");
    for (f, (_, tr)) in axis.values().iter().zip(&rows) {
        for (t, s) in tr.times.iter().zip(&tr.states) {
            let _ = writeln!(dyn_csv, "{},{},{}", fmt_f64(*f), fmt_f64(units::to_ns(*t)), fmt_f64(s.excited_population()));
        }
    }
    let pe: Vec<f64> = rows.iter().map(|r| r.0[1]).collect();
    let (mn, mx) = pe.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    notes.push(format!("rabi_mhz = {rabi_mhz}, steady pe range [{mn:.6}, {mx:.6}], half amplitude {:.6}", 0.5 * (mx - mn)));
    notes.push(format!("dynamics: {samples} uniform samples over {} us", DRIVE_DURATION * 1e6));
    let mut out = SweepOutput::default();
    out.push(format!("{name}.csv"), g.to_csv(&[format!("rabi_mhz = {rabi_mhz}, delta_mhz = 0")]));
    out.push(format!("{name}.dynamics.csv"), dyn_csv);
    Ok(out)
}

fn fig4i(cfg: &RunConfig, notes: &mut Vec<String>) -> Result<SweepOutput> {
    let (lo, hi, n) = FIG4I_RABI_MHZ;
    let opts = cfg.solver.master_options();
    let mut csv = String::new();
    let mut tomo = String::from("qubit_ghz,omega_mhz,purity,purity_tomo,rx_tomo,ry_tomo,rz_tomo,std_x,std_y,std_z\n");
    let mut masked = 0;
    for (i, &f) in FIG4I_QUBITS_GHZ.iter().enumerate() {
        let rabi = Axis::new("omega", "mhz", lo, hi, n)?;
        let delta = Axis::new("delta", "mhz", FIG4I_DELTA_MHZ, FIG4I_DELTA_MHZ, 1)?;
        let g = map_grid(&cfg.landscape, units::ghz(f), rabi, delta, &opts)?;
        masked += g.masked();
        let body = g.to_csv(&map_comments(f, &g, cfg));
        for line in body.lines() {
            if line.starts_with('#') {
                let _ = writeln!(csv, "{line}");
            } else if line.starts_with("omega_mhz") {
                if i == 0 {
                    let _ = writeln!(csv, "qubit_ghz,{line}");
                }
            } else {
                let _ = writeln!(csv, "{},{line}", fmt_f64(f));
            }
        }
        let opts_rho = g.axes[0].si_values();
        let shots = cfg.solver.tomography_shots;
        let ests: Vec<_> = opts_rho
            .par_iter()
            .enumerate()
            .map(|(k, &o)| {
                let d = DriveSpec::new(o, units::mhz(FIG4I_DELTA_MHZ), DRIVE_DURATION, units::ghz(f))?;
                let rho = steady_state(&d, &crate::driven::dressed_rates(&d, &cfg.landscape)?, &opts)?;
                let seed = cfg.solver.seed.wrapping_add((i * n + k) as u64);
                Ok((rho.purity(), sample_tomography(&rho, shots, seed)?))
            })
            .collect::<Result<_>>()?;
        for ((o, (p, e)), _) in g.axes[0].values().iter().zip(&ests).zip(0..) {
            let vals = [f, *o, *p, e.purity(), e.r[0], e.r[1], e.r[2], e.std_err[0], e.std_err[1], e.std_err[2]].map(fmt_f64);
            let _ = writeln!(tomo, "{}", vals.join(","));
        }
    }
    notes.push(format!("delta_mhz = {FIG4I_DELTA_MHZ}; tomography seeds = seed + row index"));
    let mut out = SweepOutput { masked, ..Default::default() };
    out.push("fig4i.csv", csv);
    out.push("fig4i.tomography.csv", tomo);
    Ok(out)
}
