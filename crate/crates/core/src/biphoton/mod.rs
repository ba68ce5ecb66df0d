//! Joint spectral amplitude of the down-converted pair.
//!
//! The pair amplitude is the pump envelope sampled along the phase-matching
//! surface of the waveguide:
//!
//! ```text
//! phi(omega_i, omega_s) = E_p[(beta_i(omega_i) - beta_s(omega_s)) / n_p(omega_i + omega_s),
//!                             omega_i + omega_s]
//! ```
//!
//! [`jsa_from_pump`] evaluates this directly for any [`PumpField`], using
//! either the exact Sellmeier dispersion or its first-order expansion about
//! the design centers. [`jsa_closed_form`] is the separable double Gaussian
//! that an engineered pump produces under the first-order expansion; the two
//! must agree to rounding in linearized mode.

mod export;
mod schmidt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dispersion::{AxisAssignment, Material};
use crate::error::{Error, Result};
use crate::pump::{DesignTargets, PumpField, PumpRecipe};

pub use export::{
    read_jsa_csv, write_jsa_csv, write_metadata, write_pump_overlay_csv, JsaMetadata,
    MarginalSummary, OverlaySpec,
};
pub use schmidt::{schmidt_analysis, schmidt_from_matrix, SchmidtReport};

/// Smallest number of samples accepted per axis.
pub const MIN_AXIS_POINTS: usize = 16;
/// Default samples per axis.
pub const DEFAULT_GRID_SIZE: usize = 256;
/// Default half-width of the grid in units of the photon bandwidth.
pub const DEFAULT_SPAN_SIGMA: f64 = 5.0;

/// Uniformly sampled frequency axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformAxis {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl UniformAxis {
    pub fn new(start: f64, step: f64, len: usize) -> Result<Self> {
        if len < MIN_AXIS_POINTS {
            return Err(Error::InvalidGrid(format!(
                "axis needs at least {MIN_AXIS_POINTS} points, got {len}"
            )));
        }
        if !(step > 0.0 && step.is_finite() && start.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "axis must be strictly increasing with finite spacing (start {start}, step {step})"
            )));
        }
        Ok(Self { start, step, len })
    }

    /// `len` points spanning `center +- half_width` inclusive.
    pub fn centered(center: f64, half_width: f64, len: usize) -> Result<Self> {
        if len < MIN_AXIS_POINTS {
            return Err(Error::InvalidGrid(format!(
                "axis needs at least {MIN_AXIS_POINTS} points, got {len}"
            )));
        }
        Self::new(
            center - half_width,
            2.0 * half_width / (len - 1) as f64,
            len,
        )
    }

    pub fn value(&self, index: usize) -> f64 {
        self.start + index as f64 * self.step
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.value(i)).collect()
    }

    pub fn end(&self) -> f64 {
        self.value(self.len - 1)
    }

    /// Trapezoid quadrature weight of sample `index`.
    pub fn weight(&self, index: usize) -> f64 {
        if index == 0 || index + 1 == self.len {
            0.5 * self.step
        } else {
            self.step
        }
    }
}

/// Tensor-product grid over `(omega_s, omega_i)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub signal: UniformAxis,
    pub idler: UniformAxis,
}

impl FrequencyGrid {
    pub fn new(signal: UniformAxis, idler: UniformAxis) -> Self {
        Self { signal, idler }
    }

    /// `size x size` grid spanning `+- span_sigma` bandwidths around the
    /// target centers.
    pub fn centered(targets: &DesignTargets, size: usize, span_sigma: f64) -> Result<Self> {
        if !(span_sigma > 0.0 && span_sigma.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "span must be a positive number of bandwidths, got {span_sigma}"
            )));
        }
        Ok(Self {
            signal: UniformAxis::centered(targets.omega_s, span_sigma * targets.sigma_s, size)?,
            idler: UniformAxis::centered(targets.omega_i, span_sigma * targets.sigma_i, size)?,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.signal.len, self.idler.len)
    }

    /// Area of one interior cell, rad^2/s^2.
    pub fn cell_measure(&self) -> f64 {
        self.signal.step * self.idler.step
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    OracleFull,
    OracleLinearized,
    ClosedForm,
    Imported,
}

/// Real joint spectral amplitude sampled on a [`FrequencyGrid`], stored
/// row-major with the signal index as the row.
#[derive(Debug, Clone, PartialEq)]
pub struct Jsa {
    grid: FrequencyGrid,
    values: Vec<f64>,
    provenance: Provenance,
}

impl Jsa {
    /// Checks shape, finiteness and that the amplitude is not identically
    /// zero.
    pub fn new(grid: FrequencyGrid, values: Vec<f64>, provenance: Provenance) -> Result<Self> {
        let (ns, ni) = grid.shape();
        if values.len() != ns * ni {
            return Err(Error::InvalidGrid(format!(
                "{} values for a {ns}x{ni} grid",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::DegenerateSpectrum(format!(
                "non-finite amplitude at (signal {}, idler {})",
                pos / ni,
                pos % ni
            )));
        }
        if values.iter().all(|&v| v == 0.0) {
            return Err(Error::DegenerateSpectrum(
                "amplitude is zero everywhere on the grid".into(),
            ));
        }
        Ok(Self {
            grid,
            values,
            provenance,
        })
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn get(&self, signal: usize, idler: usize) -> f64 {
        self.values[signal * self.grid.idler.len + idler]
    }

    /// The same amplitude multiplied by `factor`. A zero factor yields a
    /// degenerate spectrum that the analyses reject.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v * factor).collect(),
            provenance: self.provenance,
        }
    }

    fn require_nonzero(&self) -> Result<()> {
        if self.values.iter().all(|&v| v == 0.0) {
            return Err(Error::DegenerateSpectrum(
                "amplitude is zero everywhere on the grid".into(),
            ));
        }
        Ok(())
    }
}

/// First-order expansion of the photon propagation constants about the
/// design centers, with the pump index frozen at the carrier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Linearization {
    pub omega_s0: f64,
    pub omega_i0: f64,
    pub beta_s0: f64,
    pub beta_i0: f64,
    pub beta1_s: f64,
    pub beta1_i: f64,
    pub n_p: f64,
}

impl Linearization {
    pub fn about(targets: &DesignTargets, material: &Material) -> Result<Self> {
        let b = targets.branches;
        Ok(Self {
            omega_s0: targets.omega_s,
            omega_i0: targets.omega_i,
            beta_s0: material.beta(b.signal, targets.omega_s)?,
            beta_i0: material.beta(b.idler, targets.omega_i)?,
            beta1_s: material.beta_prime(b.signal, targets.omega_s)?,
            beta1_i: material.beta_prime(b.idler, targets.omega_i)?,
            n_p: material.refractive_index(b.pump, targets.omega_s + targets.omega_i)?,
        })
    }
}

/// How photon dispersion enters the amplitude evaluation.
#[derive(Debug, Clone, Copy)]
pub enum PhotonDispersion<'a> {
    /// Exact Sellmeier propagation constants and frequency-dependent pump
    /// index.
    Full {
        material: &'a Material,
        branches: AxisAssignment,
    },
    Linearized(Linearization),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DispersionMode {
    Full,
    Linearized,
}

impl<'a> PhotonDispersion<'a> {
    pub fn for_targets(
        mode: DispersionMode,
        targets: &DesignTargets,
        material: &'a Material,
    ) -> Result<Self> {
        Ok(match mode {
            DispersionMode::Full => PhotonDispersion::Full {
                material,
                branches: targets.branches,
            },
            DispersionMode::Linearized => {
                PhotonDispersion::Linearized(Linearization::about(targets, material)?)
            }
        })
    }

    fn provenance(&self) -> Provenance {
        match self {
            PhotonDispersion::Full { .. } => Provenance::OracleFull,
            PhotonDispersion::Linearized(_) => Provenance::OracleLinearized,
        }
    }
}

fn at_point(omega_s: f64, omega_i: f64, e: Error) -> Error {
    Error::GridPoint {
        omega_s,
        omega_i,
        source: Box::new(e),
    }
}

/// Samples the pair amplitude generated by `pump` on `grid`.
pub fn jsa_from_pump<P: PumpField + ?Sized>(
    pump: &P,
    dispersion: &PhotonDispersion<'_>,
    grid: &FrequencyGrid,
) -> Result<Jsa> {
    let signal = grid.signal.values();
    let idler = grid.idler.values();
    let ni = idler.len();
    let mut values = vec![0.0; signal.len() * ni];

    match *dispersion {
        PhotonDispersion::Full { material, branches } => {
            let beta_s = signal
                .iter()
                .map(|&w| {
                    material
                        .beta(branches.signal, w)
                        .map_err(|e| at_point(w, idler[0], e))
                })
                .collect::<Result<Vec<_>>>()?;
            let beta_i = idler
                .iter()
                .map(|&w| {
                    material
                        .beta(branches.idler, w)
                        .map_err(|e| at_point(signal[0], w, e))
                })
                .collect::<Result<Vec<_>>>()?;
            values
                .par_chunks_mut(ni)
                .enumerate()
                .try_for_each(|(a, row)| -> Result<()> {
                    let ws = signal[a];
                    for (b, out) in row.iter_mut().enumerate() {
                        let wi = idler[b];
                        let omega = ws + wi;
                        let n_p = material
                            .refractive_index(branches.pump, omega)
                            .map_err(|e| at_point(ws, wi, e))?;
                        *out = pump.amplitude((beta_i[b] - beta_s[a]) / n_p, omega);
                    }
                    Ok(())
                })?;
        }
        PhotonDispersion::Linearized(lin) => {
            values.par_chunks_mut(ni).enumerate().for_each(|(a, row)| {
                let ws = signal[a];
                let beta_s = lin.beta_s0 + (ws - lin.omega_s0) * lin.beta1_s;
                for (b, out) in row.iter_mut().enumerate() {
                    let wi = idler[b];
                    let beta_i = lin.beta_i0 + (wi - lin.omega_i0) * lin.beta1_i;
                    *out = pump.amplitude((beta_i - beta_s) / lin.n_p, ws + wi);
                }
            });
        }
    }
    Jsa::new(*grid, values, dispersion.provenance())
}

/// Separable double Gaussian centered on the targets, peak value 1.
pub fn jsa_closed_form(targets: &DesignTargets, grid: &FrequencyGrid) -> Result<Jsa> {
    let ni = grid.idler.len;
    let idler_factor: Vec<f64> = grid
        .idler
        .values()
        .iter()
        .map(|&w| {
            let x = (w - targets.omega_i) / (2.0 * targets.sigma_i);
            x * x
        })
        .collect();
    let mut values = vec![0.0; grid.signal.len * ni];
    for (a, row) in values.chunks_mut(ni).enumerate() {
        let y = (grid.signal.value(a) - targets.omega_s) / (2.0 * targets.sigma_s);
        for (out, x2) in row.iter_mut().zip(&idler_factor) {
            *out = (-x2 - y * y).exp();
        }
    }
    Jsa::new(*grid, values, Provenance::ClosedForm)
}

/// Single-photon intensity spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub axis: UniformAxis,
    /// Intensity density, integrated over the partner frequency.
    pub density: Vec<f64>,
    pub integral: f64,
    pub mean: f64,
    pub std_dev: f64,
}

impl Spectrum {
    fn from_density(axis: UniformAxis, density: Vec<f64>) -> Self {
        let integral: f64 = density
            .iter()
            .enumerate()
            .map(|(k, d)| axis.weight(k) * d)
            .sum();
        // moments in index-offset coordinates to avoid cancellation against
        // the large absolute frequency
        let offset = |k: usize| k as f64 * axis.step;
        let first: f64 = density
            .iter()
            .enumerate()
            .map(|(k, d)| axis.weight(k) * d * offset(k))
            .sum::<f64>()
            / integral;
        let second: f64 = density
            .iter()
            .enumerate()
            .map(|(k, d)| {
                let x = offset(k) - first;
                axis.weight(k) * d * x * x
            })
            .sum::<f64>()
            / integral;
        Self {
            axis,
            density,
            integral,
            mean: axis.start + first,
            std_dev: second.max(0.0).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Marginals {
    pub signal: Spectrum,
    pub idler: Spectrum,
    /// Trapezoid-rule integral of `|phi|^2` over the grid.
    pub total_power: f64,
}

/// Intensity marginals by trapezoid quadrature.
pub fn marginals(jsa: &Jsa) -> Result<Marginals> {
    jsa.require_nonzero()?;
    let grid = jsa.grid;
    let (ns, ni) = grid.shape();
    let mut signal = vec![0.0; ns];
    let mut idler = vec![0.0; ni];
    for a in 0..ns {
        for b in 0..ni {
            let p = jsa.get(a, b).powi(2);
            signal[a] += grid.idler.weight(b) * p;
            idler[b] += grid.signal.weight(a) * p;
        }
    }
    let total_power: f64 = (0..ns)
        .flat_map(|a| (0..ni).map(move |b| (a, b)))
        .map(|(a, b)| grid.signal.weight(a) * grid.idler.weight(b) * jsa.get(a, b).powi(2))
        .sum();
    Ok(Marginals {
        signal: Spectrum::from_density(grid.signal, signal),
        idler: Spectrum::from_density(grid.idler, idler),
        total_power,
    })
}

fn slope_sum(recipe: &PumpRecipe) -> Result<f64> {
    let sum = recipe.beta1_s + recipe.beta1_i;
    if sum == 0.0 || !sum.is_finite() {
        return Err(Error::SingularMapping { sum });
    }
    Ok(sum)
}

/// Photon frequencies `(omega_s, omega_i)` addressed by the pump component
/// at `(k, omega)` under the linearized phase-matching map.
pub fn map_pump_to_photon_coords(
    recipe: &PumpRecipe,
    targets: &DesignTargets,
    k: f64,
    omega: f64,
) -> Result<(f64, f64)> {
    let sum = slope_sum(recipe)?;
    let u = recipe.n_p.mul_add(k, -recipe.k_p);
    let v = omega - recipe.omega_p;
    let d_idler = (u + recipe.beta1_s * v) / sum;
    let d_signal = (recipe.beta1_i * v - u) / sum;
    Ok((targets.omega_s + d_signal, targets.omega_i + d_idler))
}

/// Inverse of [`map_pump_to_photon_coords`]: the pump `(k, omega)` sampled by
/// the photon pair `(omega_s, omega_i)`.
pub fn map_photon_to_pump_coords(
    recipe: &PumpRecipe,
    targets: &DesignTargets,
    omega_s: f64,
    omega_i: f64,
) -> (f64, f64) {
    let d_signal = omega_s - targets.omega_s;
    let d_idler = omega_i - targets.omega_i;
    let u = d_idler * recipe.beta1_i - d_signal * recipe.beta1_s;
    (
        (recipe.k_p + u) / recipe.n_p,
        recipe.omega_p + d_signal + d_idler,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::Branch;
    use crate::pump::{design_recipe, CoherenceConvention};
    use crate::units::SPEED_OF_LIGHT;
    use approx::assert_relative_eq;

    fn table1() -> (Material, DesignTargets, PumpRecipe) {
        let bbo = Material::bbo();
        let t = DesignTargets::from_wavelengths(
            0.8e-6,
            1.5e-6,
            1e-3,
            1e-2,
            CoherenceConvention::TwoPiCOverL,
            AxisAssignment::new(Branch::Extraordinary, Branch::Ordinary, Branch::Ordinary),
        )
        .unwrap();
        let r = design_recipe(&t, &bbo).unwrap();
        (bbo, t, r)
    }

    #[test]
    fn axis_validation() {
        assert!(UniformAxis::new(0.0, 1.0, 15).is_err());
        assert!(UniformAxis::new(0.0, 0.0, 32).is_err());
        assert!(UniformAxis::new(0.0, -1.0, 32).is_err());
        let ax = UniformAxis::centered(10.0, 5.0, 11 + 10).unwrap();
        assert_relative_eq!(ax.start, 5.0);
        assert_relative_eq!(ax.end(), 15.0, max_relative = 1e-15);
    }

    #[test]
    fn closed_form_peak_and_marginals() {
        let (_, t, _) = table1();
        let grid = FrequencyGrid::centered(&t, 257, 5.0).unwrap();
        let jsa = jsa_closed_form(&t, &grid).unwrap();
        assert_eq!(jsa.get(128, 128), 1.0);
        let m = marginals(&jsa).unwrap();
        assert!(((m.signal.mean - t.omega_s) / t.omega_s).abs() < 1e-3);
        assert!(((m.idler.mean - t.omega_i) / t.omega_i).abs() < 1e-3);
        assert!((m.signal.std_dev / t.sigma_s - 1.0).abs() < 0.01);
        assert!((m.idler.std_dev / t.sigma_i - 1.0).abs() < 0.01);
        assert!(((m.signal.integral - m.total_power) / m.total_power).abs() < 1e-10);
        assert!(((m.idler.integral - m.total_power) / m.total_power).abs() < 1e-10);
    }

    #[test]
    fn single_cell_marginals_are_deltas() {
        let grid = FrequencyGrid::new(
            UniformAxis::new(100.0, 1.0, 16).unwrap(),
            UniformAxis::new(200.0, 2.0, 20).unwrap(),
        );
        let mut values = vec![0.0; 16 * 20];
        values[5 * 20 + 7] = 3.0;
        let jsa = Jsa::new(grid, values, Provenance::Imported).unwrap();
        let m = marginals(&jsa).unwrap();
        assert_eq!(m.signal.mean, 105.0);
        assert_eq!(m.idler.mean, 214.0);
        assert_eq!(m.signal.std_dev, 0.0);
        assert_eq!(m.idler.std_dev, 0.0);
        assert_eq!(m.signal.density.iter().filter(|&&d| d != 0.0).count(), 1);
    }

    #[test]
    fn zero_spectrum_is_rejected() {
        let grid = FrequencyGrid::new(
            UniformAxis::new(0.0, 1.0, 16).unwrap(),
            UniformAxis::new(0.0, 1.0, 16).unwrap(),
        );
        assert!(matches!(
            Jsa::new(grid, vec![0.0; 256], Provenance::Imported),
            Err(Error::DegenerateSpectrum(_))
        ));
        let mut v = vec![0.0; 256];
        v[0] = 1.0;
        let zeroed = Jsa::new(grid, v, Provenance::Imported).unwrap().scaled(0.0);
        assert!(matches!(
            marginals(&zeroed),
            Err(Error::DegenerateSpectrum(_))
        ));
        assert!(matches!(
            Jsa::new(grid, vec![0.0; 255], Provenance::Imported),
            Err(Error::InvalidGrid(_))
        ));
    }

    #[test]
    fn linearized_oracle_matches_closed_form() {
        let (bbo, t, r) = table1();
        let grid = FrequencyGrid::centered(&t, 128, 5.0).unwrap();
        let lin = PhotonDispersion::for_targets(DispersionMode::Linearized, &t, &bbo).unwrap();
        let oracle = jsa_from_pump(&r, &lin, &grid).unwrap();
        assert_eq!(oracle.provenance(), Provenance::OracleLinearized);
        let closed = jsa_closed_form(&t, &grid).unwrap();
        let worst = oracle
            .values()
            .iter()
            .zip(closed.values())
            .map(|(a, b)| ((a - b) / b).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-9, "max relative error {worst}");
    }

    #[test]
    fn out_of_range_grid_point_is_identified() {
        let (bbo, t, r) = table1();
        // a grid reaching past the 2.6 um edge of the idler branch
        let grid = FrequencyGrid::new(
            UniformAxis::centered(t.omega_s, 1e12, 16).unwrap(),
            UniformAxis::new(crate::units::omega_from_wavelength(3.0e-6), 1e13, 16).unwrap(),
        );
        let full = PhotonDispersion::Full {
            material: &bbo,
            branches: t.branches,
        };
        let err = jsa_from_pump(&r, &full, &grid).unwrap_err();
        assert!(matches!(err, Error::GridPoint { .. }), "{err}");
        assert_eq!(err.kind(), crate::ErrorKind::Physics);
    }

    #[test]
    fn dispersionless_separable_pump_gives_product_state() {
        let glass = Material::constant_index("glass", 1.5).unwrap();
        let w0 = 2.0e15;
        let sigma = 1e12;
        // with constant index k = (w_i - w_s) / c; a pump separable in
        // (k, omega) with matched widths yields a separable amplitude
        let pump = move |k: f64, omega: f64| {
            let x = (k * SPEED_OF_LIGHT) / (2.0 * sigma * 2.0_f64.sqrt());
            let y = (omega - 2.0 * w0) / (2.0 * sigma * 2.0_f64.sqrt());
            (-(x * x) - y * y).exp()
        };
        let t = DesignTargets::new(
            w0,
            w0,
            sigma,
            sigma,
            AxisAssignment::uniform(Branch::Ordinary),
        )
        .unwrap();
        let grid = FrequencyGrid::centered(&t, 96, 5.0).unwrap();
        let full = PhotonDispersion::Full {
            material: &glass,
            branches: t.branches,
        };
        let jsa = jsa_from_pump(&pump, &full, &grid).unwrap();
        let report = schmidt_analysis(&jsa).unwrap();
        assert!(
            (report.schmidt_number - 1.0).abs() < 1e-6,
            "K = {}",
            report.schmidt_number
        );
    }

    #[test]
    fn coordinate_map_round_trip() {
        let (_, t, r) = table1();
        let (k0, w0) = r.peak();
        let (ws, wi) = map_pump_to_photon_coords(&r, &t, k0, w0).unwrap();
        assert_relative_eq!(ws, t.omega_s, max_relative = 1e-15);
        assert_relative_eq!(wi, t.omega_i, max_relative = 1e-15);
        for (dk, dw) in [(1e3, 2e12), (-5e3, 7e11), (250.0, -3e12)] {
            let (ws, wi) = map_pump_to_photon_coords(&r, &t, k0 + dk, w0 + dw).unwrap();
            let (k, w) = map_photon_to_pump_coords(&r, &t, ws, wi);
            assert_relative_eq!(k, k0 + dk, max_relative = 1e-12);
            assert_relative_eq!(w, w0 + dw, max_relative = 1e-12);
        }
    }

    #[test]
    fn equal_slopes_move_along_antidiagonal() {
        let (_, t, mut r) = table1();
        r.beta1_i = r.beta1_s;
        let (k0, w0) = r.peak();
        let (s1, i1) = map_pump_to_photon_coords(&r, &t, k0 + 2e3, w0).unwrap();
        let (s2, i2) = map_pump_to_photon_coords(&r, &t, k0 - 4e3, w0).unwrap();
        assert_relative_eq!(s1 + i1, s2 + i2, max_relative = 1e-15);
        assert!(s1 != s2);
    }

    #[test]
    fn singular_map_is_rejected() {
        let (_, t, mut r) = table1();
        r.beta1_i = -r.beta1_s;
        assert!(matches!(
            map_pump_to_photon_coords(&r, &t, 0.0, r.omega_p),
            Err(Error::SingularMapping { .. })
        ));
    }
}
