//! Polarization-entangled designs from two pump polarization components.
//!
//! A y-polarized pump component drives the `yyy` susceptibility element and
//! a z-polarized component drives `zxx`. Both are designed from the same
//! photon targets but see different dispersion, so each gets its own recipe.
//! Their pair amplitudes add coherently; balancing the pump powers against
//! the unequal tensor elements gives equal two-photon polarization weights.

use serde::{Deserialize, Serialize};

use crate::biphoton::{jsa_from_pump, DispersionMode, FrequencyGrid, Jsa, PhotonDispersion};
use crate::dispersion::{AxisAssignment, Material};
use crate::error::{Error, Result};
use crate::pump::{design_recipe, CoherenceConvention, DesignTargets, PumpRecipe, RecipeDocument};

/// `P_z / P_y` such that `chi_z sqrt(P_z) = chi_y sqrt(P_y)`.
pub fn balance_power_ratio(chi_y: f64, chi_z: f64) -> Result<f64> {
    for (label, chi) in [("yyy", chi_y), ("zxx", chi_z)] {
        if chi == 0.0 || !chi.is_finite() {
            return Err(Error::UnusablePathway {
                label: label.to_string(),
            });
        }
    }
    Ok((chi_y / chi_z).powi(2))
}

/// One susceptibility pathway.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pathway {
    /// Two-photon polarization label, e.g. `"HH"`. Configuration only.
    pub label: String,
    /// Tensor element label looked up in the material, e.g. `"zxx"`.
    pub chi2_label: String,
    pub branches: AxisAssignment,
}

impl Pathway {
    /// The y-polarized pump component, `yyy` element, labeled `VV`.
    pub fn y(branches: AxisAssignment) -> Self {
        Self {
            label: "VV".into(),
            chi2_label: "yyy".into(),
            branches,
        }
    }

    /// The z-polarized pump component, `zxx` element, labeled `HH`.
    pub fn z(branches: AxisAssignment) -> Self {
        Self {
            label: "HH".into(),
            chi2_label: "zxx".into(),
            branches,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathwayDesign {
    pub pathway: Pathway,
    /// m/V
    pub chi2: f64,
    pub targets: DesignTargets,
    pub recipe: PumpRecipe,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntangledDesign {
    pub y: PathwayDesign,
    pub z: PathwayDesign,
    /// `P_z / P_y`
    pub power_ratio: f64,
    /// Relative phase between the two pump components, radians.
    pub phase: f64,
}

fn design_pathway(
    targets: &DesignTargets,
    material: &Material,
    pathway: Pathway,
) -> Result<PathwayDesign> {
    let label = format!("{} ({})", pathway.label, pathway.chi2_label);
    let wrap = |e: Error| Error::Pathway {
        pathway: label.clone(),
        source: Box::new(e),
    };
    let chi2 = material.chi2_element(&pathway.chi2_label).ok_or_else(|| {
        wrap(Error::Config(format!(
            "material {} has no chi2 element '{}'",
            material.name(),
            pathway.chi2_label
        )))
    })?;
    let targets = targets.with_branches(pathway.branches);
    let recipe = design_recipe(&targets, material).map_err(wrap)?;
    Ok(PathwayDesign {
        pathway,
        chi2,
        targets,
        recipe,
    })
}

/// Designs both pump components from the same four photon numbers in
/// `targets` (its branch assignment is ignored in favor of each pathway's).
pub fn entangled_design(
    targets: &DesignTargets,
    material: &Material,
    y: Pathway,
    z: Pathway,
    phase: f64,
) -> Result<EntangledDesign> {
    let y = design_pathway(targets, material, y)?;
    let z = design_pathway(targets, material, z)?;
    let power_ratio = balance_power_ratio(y.chi2, z.chi2)?;
    Ok(EntangledDesign {
        y,
        z,
        power_ratio,
        phase,
    })
}

/// Normalized two-photon polarization weights `(alpha_H, alpha_V)` from
/// tensor elements and pump powers.
pub fn amplitude_weights(chi_h: f64, power_h: f64, chi_v: f64, power_v: f64) -> (f64, f64) {
    let h = (chi_h * power_h.sqrt()).abs();
    let v = (chi_v * power_v.sqrt()).abs();
    let norm = h.hypot(v);
    (h / norm, v / norm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarizationReport {
    pub alpha_h: f64,
    pub alpha_v: f64,
    /// `|<phi_H|phi_V>|` of the normalized pathway spectra.
    pub overlap: f64,
    /// `2 alpha_H alpha_V overlap`
    pub concurrence: f64,
}

/// Polarization report from two pathway spectra on the same grid.
pub fn report_from_spectra(
    jsa_h: &Jsa,
    jsa_v: &Jsa,
    alpha_h: f64,
    alpha_v: f64,
) -> Result<PolarizationReport> {
    if jsa_h.grid() != jsa_v.grid() {
        return Err(Error::InvalidGrid(
            "pathway spectra must share one frequency grid".into(),
        ));
    }
    let grid = jsa_h.grid();
    let (ns, ni) = grid.shape();
    let (mut hh, mut vv, mut hv) = (0.0, 0.0, 0.0);
    for a in 0..ns {
        for b in 0..ni {
            let w = grid.signal.weight(a) * grid.idler.weight(b);
            let (h, v) = (jsa_h.get(a, b), jsa_v.get(a, b));
            hh += w * h * h;
            vv += w * v * v;
            hv += w * h * v;
        }
    }
    if hh == 0.0 || vv == 0.0 {
        return Err(Error::DegenerateSpectrum(
            "a pathway spectrum is zero on the grid".into(),
        ));
    }
    let norm = alpha_h.hypot(alpha_v);
    let (alpha_h, alpha_v) = (alpha_h / norm, alpha_v / norm);
    let overlap = (hv.abs() / (hh * vv).sqrt()).min(1.0);
    Ok(PolarizationReport {
        alpha_h,
        alpha_v,
        overlap,
        concurrence: (2.0 * alpha_h * alpha_v * overlap).clamp(0.0, 1.0),
    })
}

/// Computes both pathway spectra and the resulting polarization report. The
/// `z` pathway carries the H amplitude and the `y` pathway the V amplitude;
/// `P_y` is taken as the unit of power.
pub fn polarization_report(
    design: &EntangledDesign,
    material: &Material,
    grid: &FrequencyGrid,
    mode: DispersionMode,
) -> Result<PolarizationReport> {
    let spectrum = |p: &PathwayDesign| -> Result<Jsa> {
        let dispersion = PhotonDispersion::for_targets(mode, &p.targets, material)?;
        jsa_from_pump(&p.recipe, &dispersion, grid).map_err(|e| Error::Pathway {
            pathway: p.pathway.label.clone(),
            source: Box::new(e),
        })
    };
    let (h, v) = rayon::join(|| spectrum(&design.z), || spectrum(&design.y));
    let (h, v) = (h?, v?);
    let (alpha_h, alpha_v) =
        amplitude_weights(design.z.chi2, design.power_ratio, design.y.chi2, 1.0);
    report_from_spectra(&h, &v, alpha_h, alpha_v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathwayDocument {
    pub label: String,
    pub chi2_label: String,
    pub chi2_pm_per_v: f64,
    pub recipe: RecipeDocument,
}

/// Serialized form of an [`EntangledDesign`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntangledDocument {
    pub material: String,
    pub convention: CoherenceConvention,
    pub y: PathwayDocument,
    pub z: PathwayDocument,
    /// `P_z / P_y`
    pub power_ratio: f64,
    pub phase_rad: f64,
}

impl EntangledDocument {
    pub fn new(design: &EntangledDesign, convention: CoherenceConvention, material: &str) -> Self {
        let pathway = |p: &PathwayDesign| PathwayDocument {
            label: p.pathway.label.clone(),
            chi2_label: p.pathway.chi2_label.clone(),
            chi2_pm_per_v: p.chi2 * 1e12,
            recipe: RecipeDocument::new(&p.recipe, &p.targets, convention, material),
        };
        Self {
            material: material.to_string(),
            convention,
            y: pathway(&design.y),
            z: pathway(&design.z),
            power_ratio: design.power_ratio,
            phase_rad: design.phase,
        }
    }
}
