//! Schmidt decomposition of a sampled two-photon amplitude.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{FrequencyGrid, Jsa};
use crate::error::{Error, Result};

/// Frequency-correlation summary of a joint spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchmidtReport {
    /// Schmidt eigenvalues, descending, summing to one.
    pub lambdas: Vec<f64>,
    pub purity: f64,
    pub schmidt_number: f64,
    /// Entanglement entropy in bits.
    pub entropy: f64,
    /// Pearson correlation of `|phi|^2` treated as a joint density.
    pub pearson: f64,
}

/// Schmidt analysis of a sampled amplitude.
pub fn schmidt_analysis(jsa: &Jsa) -> Result<SchmidtReport> {
    let grid = jsa.grid();
    let (ns, ni) = grid.shape();
    let mut report = schmidt_from_matrix(jsa.values(), ns, ni, grid.cell_measure())?;
    report.pearson = pearson(jsa.values(), grid);
    Ok(report)
}

/// Schmidt spectrum of a row-major `rows x cols` amplitude matrix. The cell
/// measure only rescales the singular values; it cancels in the
/// normalization. `pearson` is left at zero since no axes are given.
pub fn schmidt_from_matrix(
    values: &[f64],
    rows: usize,
    cols: usize,
    cell_measure: f64,
) -> Result<SchmidtReport> {
    if values.len() != rows * cols || rows == 0 || cols == 0 {
        return Err(Error::InvalidGrid(format!(
            "{} values for a {rows}x{cols} matrix",
            values.len()
        )));
    }
    if values.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateSpectrum(
            "amplitude is zero everywhere on the grid".into(),
        ));
    }
    // rescale by the largest magnitude first so tiny amplitudes don't
    // underflow when squared
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = cell_measure.sqrt() / peak;
    let matrix = DMatrix::from_row_slice(rows, cols, values).map(|v| v * scale);
    let singular = matrix.singular_values();
    let mut lambdas: Vec<f64> = singular.iter().map(|s| s * s).collect();
    let total: f64 = lambdas.iter().sum();
    for l in &mut lambdas {
        *l /= total;
    }
    lambdas.sort_by(|a, b| b.total_cmp(a));
    let purity: f64 = lambdas.iter().map(|l| l * l).sum();
    let entropy = -lambdas
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|l| l * l.log2())
        .sum::<f64>();
    Ok(SchmidtReport {
        lambdas,
        purity,
        schmidt_number: 1.0 / purity,
        entropy: entropy.max(0.0),
        pearson: 0.0,
    })
}

fn pearson(values: &[f64], grid: &FrequencyGrid) -> f64 {
    let (ns, ni) = grid.shape();
    let (sa, ia) = (grid.signal, grid.idler);
    let density = |a: usize, b: usize| {
        let v = values[a * ni + b];
        sa.weight(a) * ia.weight(b) * v * v
    };
    let mut total = 0.0;
    let mut mean_s = 0.0;
    let mut mean_i = 0.0;
    for a in 0..ns {
        for b in 0..ni {
            let p = density(a, b);
            total += p;
            mean_s += p * a as f64;
            mean_i += p * b as f64;
        }
    }
    mean_s /= total;
    mean_i /= total;
    let (mut var_s, mut var_i, mut cov) = (0.0, 0.0, 0.0);
    for a in 0..ns {
        let x = a as f64 - mean_s;
        for b in 0..ni {
            let y = b as f64 - mean_i;
            let p = density(a, b);
            var_s += p * x * x;
            var_i += p * y * y;
            cov += p * x * y;
        }
    }
    if var_s == 0.0 || var_i == 0.0 {
        return 0.0;
    }
    (cov / (var_s * var_i).sqrt()).clamp(-1.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::super::{Provenance, UniformAxis};
    use super::*;

    fn grid(n: usize) -> FrequencyGrid {
        FrequencyGrid::new(
            UniformAxis::new(-1.0, 2.0 / (n - 1) as f64, n).unwrap(),
            UniformAxis::new(-1.0, 2.0 / (n - 1) as f64, n).unwrap(),
        )
    }

    #[test]
    fn outer_product_is_pure() {
        let n = 40;
        let f: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin() + 1.5).collect();
        let g: Vec<f64> = (0..n)
            .map(|i| (-(i as f64 - 20.0).powi(2) / 30.0).exp())
            .collect();
        let values: Vec<f64> = f
            .iter()
            .flat_map(|a| g.iter().map(move |b| a * b))
            .collect();
        let jsa = Jsa::new(grid(n), values, Provenance::Imported).unwrap();
        let r = schmidt_analysis(&jsa).unwrap();
        assert!((r.schmidt_number - 1.0).abs() < 1e-8);
        assert!(r.entropy.abs() < 1e-8);
        assert!(r.pearson.abs() < 1e-8);
        assert!((r.lambdas.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn constant_matrix_is_rank_one_and_identity_is_maximal() {
        let n = 32;
        let constant = schmidt_from_matrix(&vec![0.7; n * n], n, n, 1.0).unwrap();
        assert!((constant.schmidt_number - 1.0).abs() < 1e-10);
        let identity: Vec<f64> = (0..n * n)
            .map(|k| if k / n == k % n { 1.0 } else { 0.0 })
            .collect();
        let diag = schmidt_from_matrix(&identity, n, n, 1.0).unwrap();
        assert!((diag.schmidt_number - n as f64).abs() < 1e-9);
        assert!((diag.entropy - (n as f64).log2()).abs() < 1e-9);
        let jsa = Jsa::new(grid(n), identity, Provenance::Imported).unwrap();
        assert!(schmidt_analysis(&jsa).unwrap().pearson > 0.99);
    }

    #[test]
    fn scaling_invariance() {
        let n = 48;
        let values: Vec<f64> = (0..n * n)
            .map(|k| {
                let (x, y) = ((k / n) as f64 / 8.0 - 3.0, (k % n) as f64 / 8.0 - 3.0);
                (-(x * x + y * y) / 4.0 - 0.4 * x * y).exp()
            })
            .collect();
        let jsa = Jsa::new(grid(n), values, Provenance::Imported).unwrap();
        let base = schmidt_analysis(&jsa).unwrap();
        for factor in [1e-30, 3.7, 1e25] {
            let r = schmidt_analysis(&jsa.scaled(factor)).unwrap();
            assert!((r.schmidt_number - base.schmidt_number).abs() < 1e-12);
            assert!((r.pearson - base.pearson).abs() < 1e-12);
        }
        assert!(base.pearson < 0.0);
        assert!(base.schmidt_number > 1.0);
    }

    #[test]
    fn zero_matrix_is_degenerate() {
        assert!(matches!(
            schmidt_from_matrix(&[0.0; 16], 4, 4, 1.0),
            Err(Error::DegenerateSpectrum(_))
        ));
        assert!(schmidt_from_matrix(&[1.0; 15], 4, 4, 1.0).is_err());
    }
}
