//! Pump-pulse design.
//!
//! Given the center frequencies and amplitude bandwidths requested for the
//! signal and idler photons, this module produces the transverse pump that
//! generates a frequency-uncorrelated pair with exactly those marginals:
//! carrier `omega_p`, longitudinal wavevector `k_p`, spectral and spatial
//! widths `A` and `B`, the k-omega shear `C`, and the external incidence
//! angle `theta`.
//!
//! The envelope can be evaluated in two algebraically identical ways: the
//! two-Gaussian form written directly in terms of the photon bandwidths
//! ([`pump_envelope`]) and the `A, B, C` form ([`pump_envelope_factored`]).

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dispersion::{AxisAssignment, Material};
use crate::error::{Error, Result};
use crate::units::{omega_from_wavelength, SPEED_OF_LIGHT};

/// Anything that can be sampled as a pump envelope `E(k, omega)`.
pub trait PumpField: Sync {
    fn amplitude(&self, k: f64, omega: f64) -> f64;
}

impl<F> PumpField for F
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    fn amplitude(&self, k: f64, omega: f64) -> f64 {
        self(k, omega)
    }
}

/// Convention relating a coherence length `l` to an amplitude bandwidth
/// `sigma = factor * c / l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum CoherenceConvention {
    #[serde(rename = "c/l")]
    COverL,
    #[serde(rename = "2c/l")]
    TwoCOverL,
    #[serde(rename = "pi*c/l")]
    PiCOverL,
    /// Selected by the calibration sweep against the published BBO design.
    #[default]
    #[serde(rename = "2pi*c/l")]
    TwoPiCOverL,
    #[serde(rename = "sqrt2*c/l")]
    Sqrt2COverL,
}

impl CoherenceConvention {
    pub const ALL: [CoherenceConvention; 5] = [
        CoherenceConvention::COverL,
        CoherenceConvention::TwoCOverL,
        CoherenceConvention::PiCOverL,
        CoherenceConvention::TwoPiCOverL,
        CoherenceConvention::Sqrt2COverL,
    ];

    pub fn factor(self) -> f64 {
        match self {
            CoherenceConvention::COverL => 1.0,
            CoherenceConvention::TwoCOverL => 2.0,
            CoherenceConvention::PiCOverL => PI,
            CoherenceConvention::TwoPiCOverL => 2.0 * PI,
            CoherenceConvention::Sqrt2COverL => SQRT_2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            CoherenceConvention::COverL => "c/l",
            CoherenceConvention::TwoCOverL => "2c/l",
            CoherenceConvention::PiCOverL => "pi*c/l",
            CoherenceConvention::TwoPiCOverL => "2pi*c/l",
            CoherenceConvention::Sqrt2COverL => "sqrt2*c/l",
        }
    }
}

impl fmt::Display for CoherenceConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for CoherenceConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .collect::<String>()
            .to_ascii_lowercase()
            .replace('π', "pi")
            .replace('√', "sqrt")
            .replace("l_c", "l")
            .replace("·", "*");
        let found = match key.as_str() {
            "c/l" => CoherenceConvention::COverL,
            "2c/l" | "2*c/l" => CoherenceConvention::TwoCOverL,
            "pi*c/l" | "pic/l" => CoherenceConvention::PiCOverL,
            "2pi*c/l" | "2*pi*c/l" | "2pic/l" => CoherenceConvention::TwoPiCOverL,
            "sqrt2*c/l" | "sqrt(2)*c/l" | "sqrt2c/l" => CoherenceConvention::Sqrt2COverL,
            _ => return Err(Error::UnknownConvention(s.to_string())),
        };
        Ok(found)
    }
}

/// Amplitude bandwidth (rad/s) for a coherence length `l_c` (m).
pub fn bandwidth_from_coherence_length(l_c: f64, convention: CoherenceConvention) -> Result<f64> {
    if !(l_c > 0.0 && l_c.is_finite()) {
        return Err(Error::InvalidTargets(format!(
            "coherence length must be positive, got {l_c}"
        )));
    }
    Ok(convention.factor() * SPEED_OF_LIGHT / l_c)
}

/// Label-driven variant for configuration input.
pub fn bandwidth_from_coherence_label(l_c: f64, convention: &str) -> Result<f64> {
    bandwidth_from_coherence_length(l_c, convention.parse()?)
}

/// Requested photon-pair spectrum: centers and amplitude bandwidths, with
/// the index branch seen by each wave.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignTargets {
    pub omega_s: f64,
    pub omega_i: f64,
    pub sigma_s: f64,
    pub sigma_i: f64,
    pub branches: AxisAssignment,
}

impl DesignTargets {
    pub fn new(
        omega_s: f64,
        omega_i: f64,
        sigma_s: f64,
        sigma_i: f64,
        branches: AxisAssignment,
    ) -> Result<Self> {
        let targets = Self {
            omega_s,
            omega_i,
            sigma_s,
            sigma_i,
            branches,
        };
        targets.check()?;
        Ok(targets)
    }

    /// Targets from vacuum wavelengths (m) and coherence lengths (m).
    pub fn from_wavelengths(
        lambda_s: f64,
        lambda_i: f64,
        coherence_s: f64,
        coherence_i: f64,
        convention: CoherenceConvention,
        branches: AxisAssignment,
    ) -> Result<Self> {
        if !(lambda_s > 0.0 && lambda_i > 0.0) {
            return Err(Error::InvalidTargets("wavelengths must be positive".into()));
        }
        Self::new(
            omega_from_wavelength(lambda_s),
            omega_from_wavelength(lambda_i),
            bandwidth_from_coherence_length(coherence_s, convention)?,
            bandwidth_from_coherence_length(coherence_i, convention)?,
            branches,
        )
    }

    fn check(&self) -> Result<()> {
        let fields = [
            ("omega_s", self.omega_s),
            ("omega_i", self.omega_i),
            ("sigma_s", self.sigma_s),
            ("sigma_i", self.sigma_i),
        ];
        for (name, value) in fields {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidTargets(format!(
                    "{name} must be positive and finite, got {value}"
                )));
            }
        }
        Ok(())
    }

    /// Validity against a material: every wave inside its branch's range.
    pub fn check_material(&self, material: &Material) -> Result<()> {
        self.check()?;
        let b = self.branches;
        material.refractive_index(b.signal, self.omega_s)?;
        material.refractive_index(b.idler, self.omega_i)?;
        material.refractive_index(b.pump, self.omega_s + self.omega_i)?;
        Ok(())
    }

    /// Signal and idler roles exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            omega_s: self.omega_i,
            omega_i: self.omega_s,
            sigma_s: self.sigma_i,
            sigma_i: self.sigma_s,
            branches: self.branches.swapped(),
        }
    }

    pub fn with_branches(&self, branches: AxisAssignment) -> Self {
        Self { branches, ..*self }
    }
}

/// Pump carrier quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenterParams {
    /// rad/s
    pub omega_p: f64,
    /// rad/m
    pub k_p: f64,
    pub n_p: f64,
}

pub fn derive_center_params(targets: &DesignTargets, material: &Material) -> Result<CenterParams> {
    targets.check_material(material)?;
    let b = targets.branches;
    let omega_p = targets.omega_s + targets.omega_i;
    let k_p =
        material.beta(b.idler, targets.omega_i)? - material.beta(b.signal, targets.omega_s)?;
    let n_p = material.refractive_index(b.pump, omega_p)?;
    Ok(CenterParams { omega_p, k_p, n_p })
}

/// Spectral width `A` (rad/s), spatial width `B` (rad/m) and shear `C` (s/m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseWidths {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// `A`, `B`, `C` from the photon group slownesses, bandwidths and the pump
/// index.
pub fn widths_from_slopes(
    beta1_s: f64,
    beta1_i: f64,
    sigma_s: f64,
    sigma_i: f64,
    n_p: f64,
) -> Result<PulseWidths> {
    let slope_sum = beta1_s + beta1_i;
    let (ss2, si2) = (sigma_s * sigma_s, sigma_i * sigma_i);
    let mismatch = beta1_s * ss2 - beta1_i * si2;
    let radicand = (beta1_s / sigma_i).powi(2) + (beta1_i / sigma_s).powi(2)
        - mismatch * mismatch / (ss2 * si2 * (ss2 + si2));
    if !(radicand > 0.0) || slope_sum == 0.0 {
        return Err(Error::DegenerateDesign { radicand });
    }
    let a = slope_sum / radicand.sqrt();
    let b = slope_sum / (n_p * (1.0 / ss2 + 1.0 / si2).sqrt());
    let c = mismatch / (n_p * (ss2 + si2));
    Ok(PulseWidths { a, b, c })
}

pub fn compute_abc(targets: &DesignTargets, material: &Material) -> Result<PulseWidths> {
    let center = derive_center_params(targets, material)?;
    let b = targets.branches;
    widths_from_slopes(
        material.beta_prime(b.signal, targets.omega_s)?,
        material.beta_prime(b.idler, targets.omega_i)?,
        targets.sigma_s,
        targets.sigma_i,
        center.n_p,
    )
}

/// External incidence angle (radians), `asin(k_p c / (n_p omega_p))`.
pub fn incidence_angle(k_p: f64, n_p: f64, omega_p: f64) -> Result<f64> {
    let sin_theta = k_p * SPEED_OF_LIGHT / (n_p * omega_p);
    if !(sin_theta.abs() <= 1.0) {
        return Err(Error::NoRealAngle { sin_theta });
    }
    Ok(sin_theta.asin())
}

/// Everything needed to build the pump for one polarization component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpRecipe {
    pub omega_p: f64,
    pub k_p: f64,
    pub n_p: f64,
    /// Signal group slowness at its center, s/m.
    pub beta1_s: f64,
    /// Idler group slowness at its center, s/m.
    pub beta1_i: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Radians, negative when the pump's longitudinal wavevector points
    /// along -z.
    pub theta: f64,
}

impl PumpRecipe {
    pub fn theta_deg(&self) -> f64 {
        self.theta.to_degrees()
    }

    /// Center of the envelope in `(k, omega)`.
    pub fn peak(&self) -> (f64, f64) {
        (self.k_p / self.n_p, self.omega_p)
    }

    pub fn widths(&self) -> PulseWidths {
        PulseWidths {
            a: self.a,
            b: self.b,
            c: self.c,
        }
    }

    /// The unsheared pulse plus shear that realizes this recipe.
    pub fn shear_plan(&self) -> ShearPlan {
        shear_substitution(
            BasePulse::with_exact_center(self.omega_p, self.k_p, self.n_p, self.a, self.b),
            self.c,
            self.omega_p,
        )
    }
}

/// Full design: center parameters, widths and incidence angle.
pub fn design_recipe(targets: &DesignTargets, material: &Material) -> Result<PumpRecipe> {
    let center = derive_center_params(targets, material)?;
    let b = targets.branches;
    let beta1_s = material.beta_prime(b.signal, targets.omega_s)?;
    let beta1_i = material.beta_prime(b.idler, targets.omega_i)?;
    let widths = widths_from_slopes(
        beta1_s,
        beta1_i,
        targets.sigma_s,
        targets.sigma_i,
        center.n_p,
    )?;
    let theta = incidence_angle(center.k_p, center.n_p, center.omega_p)?;
    Ok(PumpRecipe {
        omega_p: center.omega_p,
        k_p: center.k_p,
        n_p: center.n_p,
        beta1_s,
        beta1_i,
        a: widths.a,
        b: widths.b,
        c: widths.c,
        theta,
    })
}

/// Engineered envelope written in terms of the photon bandwidths. Peak value 1.
pub fn pump_envelope(recipe: &PumpRecipe, targets: &DesignTargets, k: f64, omega: f64) -> f64 {
    let u = recipe.n_p.mul_add(k, -recipe.k_p);
    let v = omega - recipe.omega_p;
    let slope_sum = recipe.beta1_s + recipe.beta1_i;
    let x = (u + v * recipe.beta1_s) / (2.0 * slope_sum * targets.sigma_i);
    let y = (u - v * recipe.beta1_i) / (2.0 * slope_sum * targets.sigma_s);
    (-(x * x) - y * y).exp()
}

/// Same envelope in the `A, B, C` parameterization. Peak value 1.
pub fn pump_envelope_factored(recipe: &PumpRecipe, k: f64, omega: f64) -> f64 {
    // k - k_p/n_p, formed as (n_p k - k_p)/n_p for a single rounding
    let dk = recipe.n_p.mul_add(k, -recipe.k_p) / recipe.n_p;
    let v = omega - recipe.omega_p;
    let x = v / (2.0 * recipe.a);
    let y = (dk + recipe.c * v) / (2.0 * recipe.b);
    (-(x * x) - y * y).exp()
}

/// A recipe bound to its targets, sampled with [`pump_envelope`].
#[derive(Debug, Clone, Copy)]
pub struct EngineeredPump {
    pub recipe: PumpRecipe,
    pub targets: DesignTargets,
}

impl PumpField for EngineeredPump {
    fn amplitude(&self, k: f64, omega: f64) -> f64 {
        pump_envelope(&self.recipe, &self.targets, k, omega)
    }
}

impl PumpField for PumpRecipe {
    fn amplitude(&self, k: f64, omega: f64) -> f64 {
        pump_envelope_factored(self, k, omega)
    }
}

/// Unsheared product-Gaussian pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasePulse {
    pub omega_p: f64,
    /// Longitudinal wavevector at the envelope center, rad/m.
    pub k_center: f64,
    /// Spectral amplitude width, rad/s.
    pub a: f64,
    /// Spatial amplitude width, rad/m.
    pub b: f64,
    /// Low-order part of `k_center` when it is a rounded quotient.
    #[serde(default)]
    pub k_center_lo: f64,
}

impl BasePulse {
    pub fn new(omega_p: f64, k_center: f64, a: f64, b: f64) -> Self {
        Self {
            omega_p,
            k_center,
            a,
            b,
            k_center_lo: 0.0,
        }
    }

    /// Centered on `k_p / n_p`, carrying the quotient's rounding residual so
    /// offsets of order `B` stay accurate next to `|k_p / n_p| >> B`.
    pub fn with_exact_center(omega_p: f64, k_p: f64, n_p: f64, a: f64, b: f64) -> Self {
        let hi = k_p / n_p;
        let lo = (-hi).mul_add(n_p, k_p) / n_p;
        Self {
            omega_p,
            k_center: hi,
            a,
            b,
            k_center_lo: lo,
        }
    }

    fn k_offset(&self, k: f64) -> f64 {
        (k - self.k_center) - self.k_center_lo
    }

    pub fn amplitude(&self, k: f64, omega: f64) -> f64 {
        let x = (omega - self.omega_p) / (2.0 * self.a);
        let y = self.k_offset(k) / (2.0 * self.b);
        (-(x * x) - y * y).exp()
    }
}

/// Pulse-shaping plan: a base pulse followed by the substitution
/// `k -> k + C (omega - omega_p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShearPlan {
    pub base: BasePulse,
    /// s/m
    pub shear: f64,
    pub omega_p: f64,
}

pub fn shear_substitution(base: BasePulse, shear: f64, omega_p: f64) -> ShearPlan {
    ShearPlan {
        base,
        shear,
        omega_p,
    }
}

impl ShearPlan {
    pub fn is_unsheared(&self) -> bool {
        self.shear == 0.0
    }
}

impl PumpField for ShearPlan {
    fn amplitude(&self, k: f64, omega: f64) -> f64 {
        // base(k + C (omega - omega_p)), with the large k_center removed first
        let v = omega - self.omega_p;
        let x = (omega - self.base.omega_p) / (2.0 * self.base.a);
        let y = (self.base.k_offset(k) + self.shear * v) / (2.0 * self.base.b);
        (-(x * x) - y * y).exp()
    }
}

/// Cross-spectrally pure pump at normal incidence, described by its temporal
/// and spatial coherence lengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossSpectrallyPurePump {
    pub center_frequency: f64,
    /// Temporal coherence length, m.
    pub sigma_x: f64,
    /// Spatial coherence length, m.
    pub sigma_z: f64,
}

impl CrossSpectrallyPurePump {
    pub fn new(center_frequency: f64, sigma_x: f64, sigma_z: f64) -> Result<Self> {
        if !(center_frequency > 0.0 && sigma_x > 0.0 && sigma_z > 0.0) {
            return Err(Error::InvalidTargets(format!(
                "cross-spectrally pure pump needs positive frequency and coherence lengths, got ({center_frequency}, {sigma_x}, {sigma_z})"
            )));
        }
        Ok(Self {
            center_frequency,
            sigma_x,
            sigma_z,
        })
    }

    /// Equivalent unsheared pulse centered on `k = 0`; the spatial width is
    /// `factor / sigma_z` under the same convention used for the temporal one.
    pub fn base_pulse(&self, convention: CoherenceConvention) -> BasePulse {
        BasePulse::new(
            self.center_frequency,
            0.0,
            convention.factor() * SPEED_OF_LIGHT / self.sigma_x,
            convention.factor() / self.sigma_z,
        )
    }
}

/// Serialized form of a recipe. Floats are SI; the angle is in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecipeDocument {
    pub omega_p: f64,
    pub k_p: f64,
    pub n_p: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub theta_deg: f64,
    pub convention: CoherenceConvention,
    pub material: String,
    pub branches: AxisAssignment,
    pub beta1_s: f64,
    pub beta1_i: f64,
    pub targets: TargetRecord,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetRecord {
    pub omega_s: f64,
    pub omega_i: f64,
    pub sigma_s: f64,
    pub sigma_i: f64,
}

impl RecipeDocument {
    pub fn new(
        recipe: &PumpRecipe,
        targets: &DesignTargets,
        convention: CoherenceConvention,
        material: &str,
    ) -> Self {
        Self {
            omega_p: recipe.omega_p,
            k_p: recipe.k_p,
            n_p: recipe.n_p,
            a: recipe.a,
            b: recipe.b,
            c: recipe.c,
            theta_deg: recipe.theta_deg(),
            convention,
            material: material.to_string(),
            branches: targets.branches,
            beta1_s: recipe.beta1_s,
            beta1_i: recipe.beta1_i,
            targets: TargetRecord {
                omega_s: targets.omega_s,
                omega_i: targets.omega_i,
                sigma_s: targets.sigma_s,
                sigma_i: targets.sigma_i,
            },
        }
    }

    pub fn recipe(&self) -> PumpRecipe {
        PumpRecipe {
            omega_p: self.omega_p,
            k_p: self.k_p,
            n_p: self.n_p,
            beta1_s: self.beta1_s,
            beta1_i: self.beta1_i,
            a: self.a,
            b: self.b,
            c: self.c,
            theta: self.theta_deg.to_radians(),
        }
    }

    pub fn targets(&self) -> Result<DesignTargets> {
        let t = self.targets;
        DesignTargets::new(t.omega_s, t.omega_i, t.sigma_s, t.sigma_i, self.branches)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::Branch;
    use approx::assert_relative_eq;

    fn table1_targets(branches: AxisAssignment) -> DesignTargets {
        DesignTargets::from_wavelengths(
            0.8e-6,
            1.5e-6,
            1e-3,
            1e-2,
            CoherenceConvention::TwoPiCOverL,
            branches,
        )
        .unwrap()
    }

    fn z_branches() -> AxisAssignment {
        AxisAssignment::new(Branch::Extraordinary, Branch::Ordinary, Branch::Ordinary)
    }

    #[test]
    fn coherence_conventions() {
        let s = bandwidth_from_coherence_length(1e-2, CoherenceConvention::COverL).unwrap();
        assert_relative_eq!(s, 2.998e10, max_relative = 1e-4);
        let s = bandwidth_from_coherence_label(1e-3, "c/l").unwrap();
        assert_relative_eq!(s, 2.998e11, max_relative = 1e-4);
        for conv in CoherenceConvention::ALL {
            assert_eq!(conv.label().parse::<CoherenceConvention>().unwrap(), conv);
        }
        assert!(matches!(
            bandwidth_from_coherence_label(1e-3, "4c/l"),
            Err(Error::UnknownConvention(_))
        ));
        assert!(bandwidth_from_coherence_length(0.0, CoherenceConvention::COverL).is_err());
        assert_eq!(
            "2πc/l_c".parse::<CoherenceConvention>().unwrap(),
            CoherenceConvention::TwoPiCOverL
        );
    }

    #[test]
    fn degenerate_targets_give_zero_kp() {
        let bbo = Material::bbo();
        let t = DesignTargets::new(
            2.0e15,
            2.0e15,
            1e12,
            1e12,
            AxisAssignment::uniform(Branch::Ordinary),
        )
        .unwrap();
        let center = derive_center_params(&t, &bbo).unwrap();
        assert_eq!(center.k_p, 0.0);
        assert_eq!(center.omega_p, 4.0e15);
    }

    #[test]
    fn table1_center_params() {
        let bbo = Material::bbo();
        let center = derive_center_params(&table1_targets(z_branches()), &bbo).unwrap();
        assert_relative_eq!(center.omega_p, 3.61e15, max_relative = 2e-3);
        let lambda_p = crate::units::wavelength_from_omega(center.omega_p);
        assert!((lambda_p - 522e-9).abs() < 0.5e-9);
        assert!(center.k_p < 0.0);
    }

    #[test]
    fn symmetric_degenerate_design_has_no_shear_or_tilt() {
        let w = widths_from_slopes(5.6e-9, 5.6e-9, 1e12, 1e12, 1.67).unwrap();
        assert_eq!(w.c, 0.0);
        assert!(w.a > 0.0 && w.b > 0.0);
        assert_eq!(incidence_angle(0.0, 1.67, 3.6e15).unwrap(), 0.0);
    }

    #[test]
    fn spectral_width_is_root_sum_of_squares() {
        // the radicand simplifies to (beta'_s + beta'_i)^2 / (sigma_s^2 + sigma_i^2)
        for (bs, bi, ss, si) in [
            (5.6e-9, 5.5e-9, 1.9e12, 1.9e11),
            (5.0e-9, 6.0e-9, 3e11, 7e11),
            (5.7e-9, 5.7e-9, 1e12, 1e12),
        ] {
            let w = widths_from_slopes(bs, bi, ss, si, 1.6).unwrap();
            assert_relative_eq!(w.a, (ss * ss + si * si).sqrt(), max_relative = 1e-12);
        }
    }

    #[test]
    fn zero_slope_sum_is_degenerate() {
        assert!(matches!(
            widths_from_slopes(1e-9, -1e-9, 1e12, 1e12, 1.5),
            Err(Error::DegenerateDesign { .. })
        ));
    }

    #[test]
    fn angle_errors_and_sign() {
        let n_p = 1.6;
        let omega_p = 3.6e15;
        let k_p = 1.1 * n_p * omega_p / SPEED_OF_LIGHT;
        assert!(matches!(
            incidence_angle(k_p, n_p, omega_p),
            Err(Error::NoRealAngle { .. })
        ));
        assert!(incidence_angle(-1e6, n_p, omega_p).unwrap() < 0.0);
        assert!(incidence_angle(1e6, n_p, omega_p).unwrap() > 0.0);
    }

    #[test]
    fn table1_z_component() {
        let bbo = Material::bbo();
        let recipe = design_recipe(&table1_targets(z_branches()), &bbo).unwrap();
        assert!((recipe.c / 3.54e-9 - 1.0).abs() < 0.10, "C = {}", recipe.c);
        assert!(
            (recipe.theta_deg() + 20.1).abs() < 2.0,
            "theta = {}",
            recipe.theta_deg()
        );
        assert!((recipe.a / 1.89e12 - 1.0).abs() < 0.15);
        assert!((recipe.b / 1.35e3 - 1.0).abs() < 0.15);
        let plan = recipe.shear_plan();
        assert_eq!(plan.shear, recipe.c);
    }

    #[test]
    fn envelope_peak_is_one() {
        let bbo = Material::bbo();
        let t = table1_targets(z_branches());
        let recipe = design_recipe(&t, &bbo).unwrap();
        let (k, w) = recipe.peak();
        assert_relative_eq!(pump_envelope(&recipe, &t, k, w), 1.0, max_relative = 1e-15);
        assert_relative_eq!(
            pump_envelope_factored(&recipe, k, w),
            1.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            recipe.shear_plan().amplitude(k, w),
            1.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn envelope_forms_agree_on_grid() {
        let bbo = Material::bbo();
        let t = table1_targets(z_branches());
        let recipe = design_recipe(&t, &bbo).unwrap();
        let plan = recipe.shear_plan();
        let (k0, w0) = recipe.peak();
        let mut worst = 0.0f64;
        let mut worst_shear = 0.0f64;
        for i in 0..64 {
            for j in 0..64 {
                let w = w0 + (i as f64 - 31.5) / 31.5 * 3.0 * recipe.a;
                let k = k0 - recipe.c * (w - w0) + (j as f64 - 31.5) / 31.5 * 3.0 * recipe.b;
                let direct = pump_envelope(&recipe, &t, k, w);
                let factored = pump_envelope_factored(&recipe, k, w);
                let sheared = plan.amplitude(k, w);
                assert!(direct > 0.0);
                worst = worst.max(((direct - factored) / factored).abs());
                worst_shear = worst_shear.max(((sheared - factored) / factored).abs());
            }
        }
        assert!(worst < 1e-12, "max relative error {worst}");
        assert!(
            worst_shear < 1e-12,
            "shear max relative error {worst_shear}"
        );
    }

    #[test]
    fn envelope_is_even_about_peak() {
        let bbo = Material::bbo();
        let t = table1_targets(z_branches());
        let recipe = design_recipe(&t, &bbo).unwrap();
        let (k0, w0) = recipe.peak();
        for (dk, dw) in [(300.0, 1e12), (-1200.0, 4e11), (50.0, -2e12)] {
            let plus = pump_envelope_factored(&recipe, k0 + dk, w0 + dw);
            let minus = pump_envelope_factored(&recipe, k0 - dk, w0 - dw);
            assert_relative_eq!(plus, minus, max_relative = 1e-9);
        }
    }

    #[test]
    fn unsheared_recipe_factors() {
        let recipe = PumpRecipe {
            omega_p: 3.6e15,
            k_p: 0.0,
            n_p: 1.6,
            beta1_s: 5.6e-9,
            beta1_i: 5.6e-9,
            a: 1e12,
            b: 1e3,
            c: 0.0,
            theta: 0.0,
        };
        let f = |k, w| pump_envelope_factored(&recipe, k, w);
        // f(k1,w1) f(k2,w2) = f(k1,w2) f(k2,w1) for a product function
        let (k1, k2, w1, w2) = (500.0, -800.0, 3.6e15 + 5e11, 3.6e15 - 1.3e12);
        assert_relative_eq!(
            f(k1, w1) * f(k2, w2),
            f(k1, w2) * f(k2, w1),
            max_relative = 1e-12
        );
        // omega = omega_p slice: Gaussian in k with amplitude width 2B
        assert_relative_eq!(
            f(2.0 * recipe.b, recipe.omega_p),
            (-1.0f64).exp(),
            max_relative = 1e-12
        );
        let plan = recipe.shear_plan();
        assert!(plan.is_unsheared());
        assert_eq!(plan.base.amplitude(k1, w1), plan.amplitude(k1, w1));
    }

    #[test]
    fn swapping_roles_negates_kp_and_theta() {
        let bbo = Material::bbo();
        let t = table1_targets(AxisAssignment::new(
            Branch::Ordinary,
            Branch::Ordinary,
            Branch::Extraordinary,
        ));
        let r = design_recipe(&t, &bbo).unwrap();
        let s = design_recipe(&t.swapped(), &bbo).unwrap();
        assert_eq!(r.k_p, -s.k_p);
        assert_eq!(r.theta, -s.theta);
    }

    #[test]
    fn out_of_range_pump_is_a_physics_error() {
        let bbo = Material::bbo();
        // 0.3 um + 0.3 um photons need a 0.15 um pump
        let t = DesignTargets::from_wavelengths(
            0.3e-6,
            0.3e-6,
            1e-3,
            1e-3,
            CoherenceConvention::default(),
            AxisAssignment::uniform(Branch::Ordinary),
        )
        .unwrap();
        let err = design_recipe(&t, &bbo).unwrap_err();
        assert_eq!(err.kind(), crate::ErrorKind::Physics);
    }

    #[test]
    fn invalid_targets_rejected() {
        let b = AxisAssignment::uniform(Branch::Ordinary);
        assert!(DesignTargets::new(2e15, 2e15, 0.0, 1e12, b).is_err());
        assert!(DesignTargets::new(-2e15, 2e15, 1e12, 1e12, b).is_err());
        assert!(DesignTargets::new(2e15, f64::NAN, 1e12, 1e12, b).is_err());
        assert!(CrossSpectrallyPurePump::new(3e15, 0.0, 1e-3).is_err());
        let pure = CrossSpectrallyPurePump::new(3e15, 1e-3, 1e-3).unwrap();
        let base = pure.base_pulse(CoherenceConvention::COverL);
        assert_eq!(base.k_center, 0.0);
        assert_relative_eq!(base.a, SPEED_OF_LIGHT / 1e-3);
    }

    #[test]
    fn recipe_document_round_trip() {
        let bbo = Material::bbo();
        let t = table1_targets(z_branches());
        let r = design_recipe(&t, &bbo).unwrap();
        let doc = RecipeDocument::new(&r, &t, CoherenceConvention::TwoPiCOverL, "BBO");
        let text = serde_json::to_string(&doc).unwrap();
        assert!(
            text.contains("\"A\"") && text.contains("\"theta_deg\"") && text.contains("2pi*c/l")
        );
        let back: RecipeDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.targets().unwrap(), t);
        assert_relative_eq!(back.recipe().theta, r.theta, max_relative = 1e-15);
    }
}
