//! Figure-preset registry and batch execution: spectrum pairs over a list
//! of detunings, the steady-state-versus-detuning scan, and decomposition
//! traces, evaluated in parallel with deterministic assembly.
//!
//! All presets share g1 = g2 = 10, kappa = 100 and real unit probe
//! projections. The panel families are:
//!
//! * `fig1a`..`fig1f`: omega21 = 100, N = 10, delta in {0, 10, 50, 100,
//!   200, 500}; each run emits an eta = 0 and an eta = 1 trace.
//! * `fig2a`..`fig2f`: the same with N = 20.
//! * `fig3a`..`fig3f`: the same with omega21 = 200 and N = 20.
//! * `fig4`: omega21 = 200, N = 20, eta = 1; steady state swept over
//!   delta in [-700, 700] in steps of 1, recording p1 - p0, p2 - p0 and
//!   Re coh12.
//! * `fig5a`..`fig5d`: omega21 = 200, N = 20, eta = 1, delta in {0, 50,
//!   100, 200}; one trace whose population/coherence split is the payload.
//!
//! Outputs are CSV files named `<preset>_<eta>.csv` (eta printed as 0 or 1)
//! with a JSON provenance sidecar per file. Sidecars carry no timestamp, so
//! repeated runs are byte-identical; the run manifest, not the sidecar, is
//! where wall-clock provenance belongs.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::bloch::{steady_state, AtomState};
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::spectrum::{
    build_coherence_generator, default_grid, spectrum_point, write_trace_csv, SpectrumTrace,
};

/// What a preset computes (and therefore which files it writes).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresetKind {
    /// Spectrum at eta = 0 and eta = 1 on a shared grid.
    SpectrumPair,
    /// Steady-state scan over delta.
    DetuningScan,
    /// Single eta = 1 spectrum; the pop/coh split is the point.
    Decomposition,
}

/// A named parameter set from the registry. `params` carries eta = 1; the
/// eta = 0 variant, where the preset has one, is derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub params: ModelParams,
    pub kind: PresetKind,
}

/// Registry order: spectrum families, the detuning scan, decompositions.
pub const PRESET_NAMES: [&str; 23] = [
    "fig1a", "fig1b", "fig1c", "fig1d", "fig1e", "fig1f", "fig2a", "fig2b", "fig2c", "fig2d",
    "fig2e", "fig2f", "fig3a", "fig3b", "fig3c", "fig3d", "fig3e", "fig3f", "fig4", "fig5a",
    "fig5b", "fig5c", "fig5d",
];

/// Looks a preset up by name.
pub fn preset(name: &str) -> Result<Preset> {
    let base = |delta: f64, omega21: f64, n: f64| {
        ModelParams::symmetric(10.0, 100.0, delta, omega21, n, 1.0)
    };
    let panel_delta = |suffix: u8| -> Option<f64> {
        [0.0, 10.0, 50.0, 100.0, 200.0, 500.0]
            .get((suffix - b'a') as usize)
            .copied()
    };
    let (family, suffix) = match name.as_bytes() {
        [f @ .., s] if !f.is_empty() => (std::str::from_utf8(f).unwrap(), *s),
        _ => ("", 0),
    };
    let unknown = || Error::UnknownPreset {
        name: name.to_string(),
    };
    if name == "fig4" {
        return Ok(Preset {
            name: "fig4",
            params: base(0.0, 200.0, 20.0),
            kind: PresetKind::DetuningScan,
        });
    }
    let idx = PRESET_NAMES
        .iter()
        .position(|&p| p == name)
        .ok_or_else(unknown)?;
    let preset = match family {
        "fig1" => Preset {
            name: PRESET_NAMES[idx],
            params: base(panel_delta(suffix).ok_or_else(unknown)?, 100.0, 10.0),
            kind: PresetKind::SpectrumPair,
        },
        "fig2" => Preset {
            name: PRESET_NAMES[idx],
            params: base(panel_delta(suffix).ok_or_else(unknown)?, 100.0, 20.0),
            kind: PresetKind::SpectrumPair,
        },
        "fig3" => Preset {
            name: PRESET_NAMES[idx],
            params: base(panel_delta(suffix).ok_or_else(unknown)?, 200.0, 20.0),
            kind: PresetKind::SpectrumPair,
        },
        "fig5" => Preset {
            name: PRESET_NAMES[idx],
            params: base(
                [0.0, 50.0, 100.0, 200.0]
                    .get((suffix - b'a') as usize)
                    .copied()
                    .ok_or_else(unknown)?,
                200.0,
                20.0,
            ),
            kind: PresetKind::Decomposition,
        },
        _ => return Err(unknown()),
    };
    Ok(preset)
}

/// Steady-state scan over detuning.
#[derive(Debug, Clone, PartialEq)]
pub struct DetuningScan {
    pub delta: Vec<f64>,
    pub states: Vec<AtomState>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepData {
    SpectrumPair {
        eta0: SpectrumTrace,
        eta1: SpectrumTrace,
    },
    Detuning(DetuningScan),
    Decomposition {
        eta1: SpectrumTrace,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub preset: Preset,
    pub data: SweepData,
}

/// Pointwise and integrated gap between the eta = 0 and eta = 1 traces of a
/// spectrum pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaDeviation {
    pub max_pointwise: f64,
    pub integrated_relative: f64,
}

fn with_pool<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter {
            name: "workers".to_string(),
            message: e.to_string(),
        })?;
    Ok(pool.install(job))
}

/// One spectrum trace with the grid points fanned out over the pool. The
/// steady state and generator are computed once; assembly is index-ordered,
/// so the result is identical for any worker count.
fn parallel_trace(params: &ModelParams, grid: &[f64]) -> Result<SpectrumTrace> {
    let kernel = params.rate_kernel()?;
    let ss = steady_state(params)?;
    let gen = build_coherence_generator(params, &kernel);
    let points = grid
        .par_iter()
        .map(|&w| spectrum_point(params, &ss, &gen, w))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumTrace {
        grid: grid.to_vec(),
        points,
    })
}

/// Executes a preset on `workers` threads (0 means the library default).
pub fn run_preset(name: &str, workers: usize) -> Result<SweepResult> {
    let preset = preset(name)?;
    let data = with_pool(workers, || -> Result<SweepData> {
        match preset.kind {
            PresetKind::SpectrumPair => {
                let grid = default_grid(&preset.params)?;
                Ok(SweepData::SpectrumPair {
                    eta0: parallel_trace(&preset.params.with_eta(0.0), &grid)?,
                    eta1: parallel_trace(&preset.params, &grid)?,
                })
            }
            PresetKind::Decomposition => {
                let grid = default_grid(&preset.params)?;
                Ok(SweepData::Decomposition {
                    eta1: parallel_trace(&preset.params, &grid)?,
                })
            }
            PresetKind::DetuningScan => {
                let delta: Vec<f64> = (-700..=700).map(f64::from).collect();
                let states = delta
                    .par_iter()
                    .map(|&d| steady_state(&preset.params.with_delta(d)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(SweepData::Detuning(DetuningScan { delta, states }))
            }
        }
    })??;
    Ok(SweepResult { preset, data })
}

/// Gap between the two eta variants; `None` for presets that only compute
/// one trace.
pub fn compare_eta(result: &SweepResult) -> Option<EtaDeviation> {
    let (eta0, eta1) = match &result.data {
        SweepData::SpectrumPair { eta0, eta1 } => (eta0, eta1),
        _ => return None,
    };
    let mut max_pointwise = 0.0f64;
    let mut gap_integral = 0.0;
    let mut base_integral = 0.0;
    for k in 0..eta0.points.len() {
        let d = (eta1.points[k].total - eta0.points[k].total).abs();
        max_pointwise = max_pointwise.max(d);
        if k + 1 < eta0.points.len() {
            let h = eta0.grid[k + 1] - eta0.grid[k];
            let d2 = (eta1.points[k + 1].total - eta0.points[k + 1].total).abs();
            gap_integral += 0.5 * (d + d2) * h;
            base_integral +=
                0.5 * (eta0.points[k].total.abs() + eta0.points[k + 1].total.abs()) * h;
        }
    }
    Some(EtaDeviation {
        max_pointwise,
        integrated_relative: gap_integral / base_integral,
    })
}

/// Provenance sidecar written next to each CSV. Deliberately excludes any
/// timestamp so that repeated runs stay byte-identical.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Provenance {
    pub preset: String,
    pub eta: f64,
    pub params: ModelParams,
    pub version: String,
}

fn provenance_bytes(preset: &Preset, eta: f64) -> Result<Vec<u8>> {
    let p = Provenance {
        preset: preset.name.to_string(),
        eta,
        params: if eta == 0.0 {
            preset.params.with_eta(0.0)
        } else {
            preset.params
        },
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    let mut bytes = serde_json::to_vec_pretty(&p)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn spectrum_csv_bytes(trace: &SpectrumTrace) -> Vec<u8> {
    let mut out = Vec::new();
    write_trace_csv(trace, &mut out).expect("in-memory write cannot fail");
    out
}

fn detuning_csv_bytes(scan: &DetuningScan) -> Vec<u8> {
    use std::io::Write;
    let mut out = Vec::new();
    writeln!(out, "delta,p1_minus_p0,p2_minus_p0,re_coh12").unwrap();
    for (d, s) in scan.delta.iter().zip(&scan.states) {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e}",
            d,
            s.p1 - s.p0,
            s.p2 - s.p0,
            s.coh12.re
        )
        .unwrap();
    }
    out
}

/// The files a result serializes to, as (name, bytes) pairs in a fixed
/// order. Separated from disk I/O so determinism tests can compare bytes.
pub fn output_files(result: &SweepResult) -> Result<Vec<(String, Vec<u8>)>> {
    let name = result.preset.name;
    let mut files = Vec::new();
    let push_trace =
        |eta: f64, trace: &SpectrumTrace, files: &mut Vec<(String, Vec<u8>)>| -> Result<()> {
            files.push((
                format!("{name}_{}.csv", eta as u8),
                spectrum_csv_bytes(trace),
            ));
            files.push((
                format!("{name}_{}.json", eta as u8),
                provenance_bytes(&result.preset, eta)?,
            ));
            Ok(())
        };
    match &result.data {
        SweepData::SpectrumPair { eta0, eta1 } => {
            push_trace(0.0, eta0, &mut files)?;
            push_trace(1.0, eta1, &mut files)?;
        }
        SweepData::Decomposition { eta1 } => {
            push_trace(1.0, eta1, &mut files)?;
        }
        SweepData::Detuning(scan) => {
            files.push((format!("{name}_1.csv"), detuning_csv_bytes(scan)));
            files.push((
                format!("{name}_1.json"),
                provenance_bytes(&result.preset, 1.0)?,
            ));
        }
    }
    Ok(files)
}

/// Writes every output file of a result into `dir`, returning the paths.
pub fn write_outputs(result: &SweepResult, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for (file_name, bytes) in output_files(result)? {
        let path = dir.join(file_name);
        std::fs::write(&path, bytes)?;
        paths.push(path);
    }
    Ok(paths)
}
