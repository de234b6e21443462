use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{dressed_rates, steady_state, DriveSpec, MasterOptions};
use crate::landscape::CouplingLandscape;

/// Steady-state observables at one `(Ω, Δ)` point. Masked cells hold NaNs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapCell {
    pub rabi: f64,
    pub detuning: f64,
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
    pub pe: f64,
    pub purity: f64,
    pub mask: Option<&'static str>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoherenceMap {
    pub rabi: Vec<f64>,
    pub detuning: Vec<f64>,
    /// Row-major, Rabi frequency outermost.
    pub cells: Vec<MapCell>,
}

impl CoherenceMap {
    pub fn cell(&self, i_rabi: usize, i_delta: usize) -> &MapCell {
        &self.cells[i_rabi * self.detuning.len() + i_delta]
    }

    pub fn masked(&self) -> usize {
        self.cells.iter().filter(|c| c.mask.is_some()).count()
    }

    /// Purity along the Rabi axis at a fixed detuning index.
    pub fn purity_column(&self, i_delta: usize) -> Vec<f64> {
        (0..self.rabi.len()).map(|i| self.cell(i, i_delta).purity).collect()
    }
}

fn solve_cell(rabi: f64, detuning: f64, qubit_omega: f64, land: &CouplingLandscape, opts: &MasterOptions) -> MapCell {
    let run = || -> crate::Result<_> {
        let d = DriveSpec::new(rabi, detuning, 0.0, qubit_omega)?;
        let r = dressed_rates(&d, land)?;
        steady_state(&d, &r, opts)
    };
    match run() {
        Ok(rho) => {
            let b = rho.bloch();
            MapCell {
                rabi,
                detuning,
                sx: b.rx,
                sy: b.ry,
                sz: b.rz,
                pe: rho.excited_population(),
                purity: rho.purity(),
                mask: None,
            }
        }
        Err(e) => {
            log::debug!("masked cell rabi={rabi:e} delta={detuning:e}: {e}");
            MapCell {
                rabi,
                detuning,
                sx: f64::NAN,
                sy: f64::NAN,
                sz: f64::NAN,
                pe: f64::NAN,
                purity: f64::NAN,
                mask: Some(e.reason_code()),
            }
        }
    }
}

/// Steady-state Bloch components and purity over a Rabi × detuning grid.
/// Cells whose sidebands leave the validity band, or whose steady state is
/// not unique, are masked with a reason code instead of aborting the map.
pub fn map_coherence_purity(
    rabi: &[f64],
    detuning: &[f64],
    qubit_omega: f64,
    land: &CouplingLandscape,
    opts: &MasterOptions,
) -> CoherenceMap {
    let nd = detuning.len();
    let cells = (0..rabi.len() * nd)
        .into_par_iter()
        .map(|k| solve_cell(rabi[k / nd], detuning[k % nd], qubit_omega, land, opts))
        .collect();
    CoherenceMap { rabi: rabi.to_vec(), detuning: detuning.to_vec(), cells }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{ghz, mhz};

    #[test]
    fn flat_map_rows_and_masking() {
        let band = (ghz(4.8), ghz(5.0));
        let l = CouplingLandscape::flat(mhz(1.0), 0.0, band, 125e-9).unwrap();
        let rabi: Vec<f64> = [0.0, 1.0, 2.0, 200.0].iter().map(|&x| mhz(x)).collect();
        let delta: Vec<f64> = [-1.0, 0.0, 1.0].iter().map(|&x| mhz(x)).collect();
        let m = map_coherence_purity(&rabi, &delta, ghz(4.9), &l, &MasterOptions::default());
        assert_eq!(m.cells.len(), 12);
        assert_eq!(m.masked(), 3);
        assert_eq!(m.cell(3, 1).mask, Some("out_of_band"));
        let c = m.cell(0, 1);
        assert!((c.purity - 1.0).abs() < 1e-12 && (c.sz + 1.0).abs() < 1e-12);
        // dispersive σ_x odd in Δ, absorptive σ_y and σ_z even
        let (a, b) = (m.cell(1, 0), m.cell(1, 2));
        assert!((a.sy - b.sy).abs() < 1e-12 && (a.sz - b.sz).abs() < 1e-12, "{a:?} {b:?}");
        assert!((a.sx + b.sx).abs() < 1e-12 && a.sx.abs() > 1e-3);
    }

    #[test]
    fn parallel_matches_serial() {
        let l = CouplingLandscape::device_default();
        let rabi: Vec<f64> = (0..9).map(|i| mhz(i as f64 * 1.5)).collect();
        let delta: Vec<f64> = (0..5).map(|i| mhz(i as f64 - 2.0)).collect();
        let opts = MasterOptions::default();
        let m1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| map_coherence_purity(&rabi, &delta, ghz(4.891), &l, &opts));
        let m8 = rayon::ThreadPoolBuilder::new().num_threads(8).build().unwrap().install(|| map_coherence_purity(&rabi, &delta, ghz(4.891), &l, &opts));
        for (a, b) in m1.cells.iter().zip(&m8.cells) {
            assert_eq!(a.purity.to_bits(), b.purity.to_bits());
            assert_eq!(a.sy.to_bits(), b.sy.to_bits());
        }
    }
}
