//! Material dispersion for uniaxial nonlinear media.
//!
//! A [`Material`] carries one Sellmeier curve per index branch and the
//! nonzero second-order susceptibility elements. Propagation constants are
//! bulk values `beta(omega) = n(omega) * omega / c`; waveguide (modal)
//! dispersion is not modeled.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{wavelength_from_omega, SPEED_OF_LIGHT};

const BUILTIN_BBO: &str = include_str!("../data/bbo.json");

/// Environment variable naming the default material database file.
pub const MATERIAL_DB_ENV: &str = "APM_SPDC_MATERIALS";

/// Index branch of a uniaxial crystal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Branch {
    #[serde(rename = "o", alias = "ordinary")]
    Ordinary,
    #[serde(rename = "e", alias = "extraordinary")]
    Extraordinary,
}

impl Branch {
    pub const ALL: [Branch; 2] = [Branch::Ordinary, Branch::Extraordinary];

    pub fn short(self) -> &'static str {
        match self {
            Branch::Ordinary => "o",
            Branch::Extraordinary => "e",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Branch::Ordinary => f.write_str("ordinary"),
            Branch::Extraordinary => f.write_str("extraordinary"),
        }
    }
}

impl FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "o" | "ordinary" => Ok(Branch::Ordinary),
            "e" | "extraordinary" => Ok(Branch::Extraordinary),
            other => Err(Error::Config(format!(
                "unknown index branch '{other}' (expected o or e)"
            ))),
        }
    }
}

/// Which index branch each of the three interacting waves sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AxisAssignment {
    pub pump: Branch,
    pub signal: Branch,
    pub idler: Branch,
}

impl AxisAssignment {
    pub fn new(pump: Branch, signal: Branch, idler: Branch) -> Self {
        Self {
            pump,
            signal,
            idler,
        }
    }

    /// Same branch for all three waves.
    pub fn uniform(branch: Branch) -> Self {
        Self::new(branch, branch, branch)
    }

    /// Signal and idler exchanged.
    pub fn swapped(self) -> Self {
        Self::new(self.pump, self.idler, self.signal)
    }
}

impl fmt::Display for AxisAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{}",
            self.pump.short(),
            self.signal.short(),
            self.idler.short()
        )
    }
}

/// Parses `pump,signal,idler`, e.g. `e,o,o`.
impl FromStr for AxisAssignment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::Config(format!(
                "branch assignment '{s}' must have the form pump,signal,idler"
            )));
        }
        Ok(Self::new(
            parts[0].parse()?,
            parts[1].parse()?,
            parts[2].parse()?,
        ))
    }
}

/// Functional form of a Sellmeier curve (wavelength in micrometres).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SellmeierForm {
    /// `n^2 = A + B / (lambda^2 - C) - D lambda^2`
    Standard,
    /// `n^2 = A`
    Constant,
}

impl SellmeierForm {
    fn coefficient_count(self) -> usize {
        match self {
            SellmeierForm::Standard => 4,
            SellmeierForm::Constant => 1,
        }
    }
}

/// One branch's Sellmeier curve with its validity range.
#[derive(Debug, Clone, PartialEq)]
pub struct SellmeierCoefficients {
    form: SellmeierForm,
    coeffs: Vec<f64>,
    range_um: (f64, f64),
}

impl SellmeierCoefficients {
    /// Validates the curve: positive ordered range, no pole inside it, and
    /// `n^2 > 1` throughout.
    pub fn new(form: SellmeierForm, coeffs: Vec<f64>, range_um: (f64, f64)) -> Result<Self> {
        if coeffs.len() != form.coefficient_count() {
            return Err(Error::InvalidMaterial(format!(
                "{form:?} Sellmeier form takes {} coefficients, got {}",
                form.coefficient_count(),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidMaterial(
                "Sellmeier coefficients must be finite".into(),
            ));
        }
        let (lo, hi) = range_um;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::InvalidMaterial(format!(
                "invalid wavelength range [{lo}, {hi}] um"
            )));
        }
        if form == SellmeierForm::Standard {
            let pole = coeffs[2];
            if pole >= lo * lo && pole <= hi * hi {
                return Err(Error::InvalidMaterial(format!(
                    "Sellmeier pole at {:.4} um lies inside the valid range [{lo}, {hi}] um",
                    pole.sqrt()
                )));
            }
        }
        let curve = Self {
            form,
            coeffs,
            range_um,
        };
        const SAMPLES: usize = 2000;
        for i in 0..=SAMPLES {
            let lambda = lo + (hi - lo) * i as f64 / SAMPLES as f64;
            let n2 = curve.n_squared(lambda);
            if !(n2 > 1.0) {
                return Err(Error::InvalidMaterial(format!(
                    "n^2 = {n2} at {lambda} um; the curve must satisfy n^2 > 1 over its range"
                )));
            }
        }
        Ok(curve)
    }

    pub fn form(&self) -> SellmeierForm {
        self.form
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Validity range in metres.
    pub fn range(&self) -> (f64, f64) {
        (self.range_um.0 / 1e6, self.range_um.1 / 1e6)
    }

    pub fn range_um(&self) -> (f64, f64) {
        self.range_um
    }

    fn n_squared(&self, lambda_um: f64) -> f64 {
        let c = &self.coeffs;
        match self.form {
            SellmeierForm::Standard => {
                let l2 = lambda_um * lambda_um;
                c[0] + c[1] / (l2 - c[2]) - c[3] * l2
            }
            SellmeierForm::Constant => c[0],
        }
    }

    /// d(n^2)/d(lambda) in um^-1.
    fn n_squared_slope(&self, lambda_um: f64) -> f64 {
        let c = &self.coeffs;
        match self.form {
            SellmeierForm::Standard => {
                let l2 = lambda_um * lambda_um;
                let denom = l2 - c[2];
                -2.0 * c[1] * lambda_um / (denom * denom) - 2.0 * c[3] * lambda_um
            }
            SellmeierForm::Constant => 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct BranchRecord {
    form: SellmeierForm,
    coeffs: Vec<f64>,
    range_um: (f64, f64),
    /// Reserved for a waveguide-mode index correction. Only absent or zero is
    /// accepted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    modal_correction: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct MaterialRecord {
    name: String,
    ordinary: BranchRecord,
    extraordinary: BranchRecord,
    /// Tensor elements in pm/V.
    chi2: BTreeMap<String, f64>,
    source: Option<String>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum DatabaseRecord {
    Many(Vec<MaterialRecord>),
    One(Box<MaterialRecord>),
}

/// A uniaxial nonlinear medium.
#[derive(Debug, Clone, PartialEq)]
pub struct Material {
    name: String,
    ordinary: SellmeierCoefficients,
    extraordinary: SellmeierCoefficients,
    /// Tensor elements in m/V keyed by index label, e.g. `"zxx"`.
    chi2: BTreeMap<String, f64>,
    source: String,
}

impl Material {
    pub fn new(
        name: impl Into<String>,
        ordinary: SellmeierCoefficients,
        extraordinary: SellmeierCoefficients,
        chi2: BTreeMap<String, f64>,
        source: impl Into<String>,
    ) -> Result<Self> {
        let name = name.into();
        if chi2.values().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMaterial(format!(
                "{name}: chi2 elements must be finite"
            )));
        }
        if !chi2.values().any(|&v| v != 0.0) {
            return Err(Error::InvalidMaterial(format!(
                "{name}: at least one chi2 element must be nonzero"
            )));
        }
        Ok(Self {
            name,
            ordinary,
            extraordinary,
            chi2,
            source: source.into(),
        })
    }

    /// Dispersionless test medium with `n` on both branches.
    pub fn constant_index(name: impl Into<String>, n: f64) -> Result<Self> {
        let curve = SellmeierCoefficients::new(SellmeierForm::Constant, vec![n * n], (1e-3, 1e3))?;
        let chi2 = BTreeMap::from([("yyy".to_string(), 1e-12), ("zxx".to_string(), 1e-12)]);
        Self::new(name, curve.clone(), curve, chi2, "constant-index fixture")
    }

    /// The bundled BBO entry.
    pub fn bbo() -> Self {
        Self::from_json_str(BUILTIN_BBO)
            .expect("bundled BBO entry is valid")
            .remove(0)
    }

    /// Parses a database document: one material object or an array of them.
    pub fn from_json_str(text: &str) -> Result<Vec<Self>> {
        let record: DatabaseRecord =
            serde_json::from_str(text).map_err(|e| Error::json("material database", e))?;
        let records = match record {
            DatabaseRecord::Many(v) => v,
            DatabaseRecord::One(m) => vec![*m],
        };
        if records.is_empty() {
            return Err(Error::InvalidMaterial(
                "database contains no materials".into(),
            ));
        }
        records.into_iter().map(Self::from_record).collect()
    }

    fn from_record(record: MaterialRecord) -> Result<Self> {
        let source = record
            .source
            .filter(|s| !s.trim().is_empty())
            .ok_or_else(|| {
                Error::InvalidMaterial(format!(
                    "{}: entry is missing the required 'source' citation",
                    record.name
                ))
            })?;
        let branch = |label: &str, b: BranchRecord| -> Result<SellmeierCoefficients> {
            if b.modal_correction.is_some_and(|m| m != 0.0) {
                return Err(Error::InvalidMaterial(format!(
                    "{}: {label} branch sets modal_correction, which is not supported",
                    record.name
                )));
            }
            SellmeierCoefficients::new(b.form, b.coeffs, b.range_um)
                .map_err(|e| Error::InvalidMaterial(format!("{} {label}: {e}", record.name)))
        };
        let ordinary = branch("ordinary", record.ordinary)?;
        let extraordinary = branch("extraordinary", record.extraordinary)?;
        let chi2 = record
            .chi2
            .into_iter()
            .map(|(k, v)| (k, v / 1e12))
            .collect();
        Self::new(record.name, ordinary, extraordinary, chi2, source)
    }

    fn to_record(&self) -> MaterialRecord {
        let branch = |c: &SellmeierCoefficients| BranchRecord {
            form: c.form,
            coeffs: c.coeffs.clone(),
            range_um: c.range_um(),
            modal_correction: None,
        };
        MaterialRecord {
            name: self.name.clone(),
            ordinary: branch(&self.ordinary),
            extraordinary: branch(&self.extraordinary),
            chi2: self
                .chi2
                .iter()
                .map(|(k, v)| (k.clone(), v * 1e12))
                .collect(),
            source: Some(self.source.clone()),
        }
    }

    /// Serializes to the database document format.
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_record()).expect("material record serializes")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn curve(&self, branch: Branch) -> &SellmeierCoefficients {
        match branch {
            Branch::Ordinary => &self.ordinary,
            Branch::Extraordinary => &self.extraordinary,
        }
    }

    /// Tensor elements in m/V.
    pub fn chi2(&self) -> &BTreeMap<String, f64> {
        &self.chi2
    }

    /// Tensor element in m/V, if present.
    pub fn chi2_element(&self, label: &str) -> Option<f64> {
        self.chi2.get(label).copied()
    }

    fn wavelength_um(&self, branch: Branch, omega: f64, strict: bool) -> Result<f64> {
        let curve = self.curve(branch);
        let lambda = wavelength_from_omega(omega) * 1e6;
        let (lo, hi) = curve.range_um;
        let inside = if strict {
            lambda > lo && lambda < hi
        } else {
            lambda >= lo && lambda <= hi
        };
        if !inside {
            return Err(Error::OutOfRange {
                material: self.name.clone(),
                branch,
                wavelength_um: lambda,
                min_um: lo,
                max_um: hi,
            });
        }
        Ok(lambda)
    }

    /// Refractive index `n(omega)` on `branch`.
    pub fn refractive_index(&self, branch: Branch, omega: f64) -> Result<f64> {
        let lambda = self.wavelength_um(branch, omega, false)?;
        Ok(self.curve(branch).n_squared(lambda).sqrt())
    }

    /// Propagation constant `n(omega) omega / c`, rad/m. Zero at `omega = 0`.
    pub fn beta(&self, branch: Branch, omega: f64) -> Result<f64> {
        if omega == 0.0 {
            return Ok(0.0);
        }
        Ok(self.refractive_index(branch, omega)? * omega / SPEED_OF_LIGHT)
    }

    /// Group slowness `d(beta)/d(omega) = (n - lambda dn/dlambda) / c`, s/m.
    pub fn beta_prime(&self, branch: Branch, omega: f64) -> Result<f64> {
        let lambda = self.wavelength_um(branch, omega, true)?;
        let curve = self.curve(branch);
        let n = curve.n_squared(lambda).sqrt();
        let dn_dlambda = curve.n_squared_slope(lambda) / (2.0 * n);
        Ok((n - lambda * dn_dlambda) / SPEED_OF_LIGHT)
    }

    /// Whether `omega` lies inside the branch's range.
    pub fn in_range(&self, branch: Branch, omega: f64) -> bool {
        self.wavelength_um(branch, omega, false).is_ok()
    }
}

/// Reads materials from a database file.
pub fn load_database(path: impl AsRef<Path>) -> Result<Vec<Material>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Material::from_json_str(&text)
}

/// Materials from the file named by [`MATERIAL_DB_ENV`], or the bundled BBO
/// entry when the variable is unset.
pub fn default_database() -> Result<Vec<Material>> {
    match std::env::var_os(MATERIAL_DB_ENV) {
        Some(path) if !path.is_empty() => load_database(path),
        _ => Ok(vec![Material::bbo()]),
    }
}

/// Case-insensitive lookup; a single-entry database matches any name.
pub fn find_material(materials: &[Material], name: Option<&str>) -> Result<Material> {
    match name {
        None if !materials.is_empty() => Ok(materials[0].clone()),
        None => Err(Error::Config("no materials available".into())),
        Some(name) => materials
            .iter()
            .find(|m| m.name.eq_ignore_ascii_case(name))
            .cloned()
            .ok_or_else(|| {
                let known: Vec<&str> = materials.iter().map(|m| m.name()).collect();
                Error::Config(format!(
                    "material '{name}' not found (available: {})",
                    known.join(", ")
                ))
            }),
    }
}
