//! CSV grid export and JSON metadata sidecars.
//!
//! Grid layout: the first row holds the signal axis (after a corner label),
//! the first column holds the idler axis, and the body holds `|phi|`. All
//! numbers are written with 17 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    map_pump_to_photon_coords, FrequencyGrid, Jsa, Marginals, Provenance, SchmidtReport,
    UniformAxis,
};
use crate::error::{Error, Result};
use crate::pump::{DesignTargets, PumpField, PumpRecipe, RecipeDocument};

const CORNER: &str = "omega_i\\omega_s";

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `|phi|` with the axis header row and column.
pub fn write_jsa_csv(jsa: &Jsa, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let grid = jsa.grid();
    let (ns, ni) = grid.shape();
    let mut out = String::with_capacity((ns + 1) * (ni + 1) * 24);
    out.push_str(CORNER);
    for a in 0..ns {
        out.push(',');
        out.push_str(&num(grid.signal.value(a)));
    }
    out.push('\n');
    for b in 0..ni {
        out.push_str(&num(grid.idler.value(b)));
        for a in 0..ns {
            out.push(',');
            out.push_str(&num(jsa.get(a, b).abs()));
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn axis_from_samples(samples: &[f64], name: &str) -> Result<UniformAxis> {
    if samples.len() < 2 {
        return Err(Error::InvalidGrid(format!(
            "{name} axis has too few samples"
        )));
    }
    let n = samples.len();
    let step = (samples[n - 1] - samples[0]) / (n - 1) as f64;
    let axis = UniformAxis::new(samples[0], step, n)?;
    for (k, &s) in samples.iter().enumerate() {
        if (s - axis.value(k)).abs() > 1e-6 * step {
            return Err(Error::InvalidGrid(format!(
                "{name} axis is not uniform at sample {k}"
            )));
        }
    }
    Ok(axis)
}

/// Reads a grid written by [`write_jsa_csv`]. Values come back as magnitudes.
pub fn read_jsa_csv(path: impl AsRef<Path>) -> Result<Jsa> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parse = |cell: &str, row: usize| -> Result<f64> {
        cell.trim().parse::<f64>().map_err(|_| {
            Error::InvalidGrid(format!("row {row}: '{}' is not a number", cell.trim()))
        })
    };
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::InvalidGrid("empty grid file".into()))?;
    let signal = header
        .split(',')
        .skip(1)
        .map(|c| parse(c, 0))
        .collect::<Result<Vec<_>>>()?;
    let ns = signal.len();
    let mut idler = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for (row, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != ns + 1 {
            return Err(Error::InvalidGrid(format!(
                "row {} has {} values, expected {}",
                row + 1,
                cells.len() - 1,
                ns
            )));
        }
        idler.push(parse(cells[0], row + 1)?);
        columns.push(
            cells[1..]
                .iter()
                .map(|c| parse(c, row + 1))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    let grid = FrequencyGrid::new(
        axis_from_samples(&signal, "signal")?,
        axis_from_samples(&idler, "idler")?,
    );
    let ni = idler.len();
    let mut values = vec![0.0; ns * ni];
    for (b, row) in columns.iter().enumerate() {
        for (a, v) in row.iter().enumerate() {
            values[a * ni + b] = *v;
        }
    }
    Jsa::new(grid, values, Provenance::Imported)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginalSummary {
    pub signal_center: f64,
    pub signal_width: f64,
    pub idler_center: f64,
    pub idler_width: f64,
    pub total_power: f64,
}

impl From<&Marginals> for MarginalSummary {
    fn from(m: &Marginals) -> Self {
        Self {
            signal_center: m.signal.mean,
            signal_width: m.signal.std_dev,
            idler_center: m.idler.mean,
            idler_width: m.idler.std_dev,
            total_power: m.total_power,
        }
    }
}

/// Sidecar describing where a grid came from and what it contains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsaMetadata {
    pub provenance: Provenance,
    pub grid: FrequencyGrid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recipe: Option<RecipeDocument>,
    pub schmidt: SchmidtReport,
    pub marginals: MarginalSummary,
}

pub fn write_metadata(meta: &JsaMetadata, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(meta).map_err(|e| Error::json("metadata", e))?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

/// Sampling of the pump envelope for overlays on the joint spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlaySpec {
    pub k_points: usize,
    pub omega_points: usize,
    /// Half-width in units of `A` along omega and `B` along k (plus the shear
    /// excursion).
    pub span: f64,
}

impl Default for OverlaySpec {
    fn default() -> Self {
        Self {
            k_points: 64,
            omega_points: 64,
            span: 3.0,
        }
    }
}

/// Long-format CSV `k,omega,omega_s,omega_i,amplitude`: the pump envelope on
/// its own `(k, omega)` grid with each sample's photon-coordinate image.
pub fn write_pump_overlay_csv<P: PumpField + ?Sized>(
    pump: &P,
    recipe: &PumpRecipe,
    targets: &DesignTargets,
    spec: OverlaySpec,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    if spec.k_points < 2 || spec.omega_points < 2 || !(spec.span > 0.0) {
        return Err(Error::InvalidGrid(
            "overlay needs at least 2x2 samples".into(),
        ));
    }
    let (k0, w0) = recipe.peak();
    let half_w = spec.span * recipe.a;
    let half_k = spec.span * recipe.b + recipe.c.abs() * half_w;
    let mut out = String::from("k,omega,omega_s,omega_i,amplitude\n");
    for i in 0..spec.omega_points {
        let w = w0 - half_w + 2.0 * half_w * i as f64 / (spec.omega_points - 1) as f64;
        for j in 0..spec.k_points {
            let k = k0 - half_k + 2.0 * half_k * j as f64 / (spec.k_points - 1) as f64;
            let (ws, wi) = map_pump_to_photon_coords(recipe, targets, k, w)?;
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                num(k),
                num(w),
                num(ws),
                num(wi),
                num(pump.amplitude(k, w))
            );
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
