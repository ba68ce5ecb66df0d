//! Command-line front end.
//!
//! Settings come from an optional JSON config file and from flags; a flag
//! always wins over the same key in the file.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::biphoton::{
    jsa_closed_form, jsa_from_pump, map_photon_to_pump_coords, map_pump_to_photon_coords,
    marginals, read_jsa_csv, schmidt_analysis, write_jsa_csv, write_metadata,
    write_pump_overlay_csv, DispersionMode, FrequencyGrid, Jsa, JsaMetadata, MarginalSummary,
    OverlaySpec, PhotonDispersion, SchmidtReport, DEFAULT_GRID_SIZE, DEFAULT_SPAN_SIGMA,
};
use crate::calibration::{render_recipe_table, reproduce, sig3};
use crate::dispersion::{default_database, find_material, load_database, AxisAssignment, Material};
use crate::error::{Error, ErrorKind, Result};
use crate::polarization::{
    amplitude_weights, entangled_design, report_from_spectra, EntangledDesign, EntangledDocument,
    Pathway, PolarizationReport,
};
use crate::pump::{design_recipe, CoherenceConvention, DesignTargets, PumpRecipe, RecipeDocument};
use crate::units::{parse_length, wavelength_from_omega};

pub const DEFAULT_BRANCHES: &str = "e,o,o";
pub const DEFAULT_Y_BRANCHES: &str = "o,o,o";
pub const DEFAULT_Z_BRANCHES: &str = "e,o,o";

/// Process exit status for an error.
pub fn exit_code(err: &Error) -> u8 {
    match err.kind() {
        ErrorKind::Validation => 2,
        ErrorKind::Physics => 3,
        ErrorKind::Io => 4,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "apm-spdc",
    version,
    about = "Pump-pulse design and joint-spectrum analysis for transverse-pumped SPDC waveguides"
)]
pub struct Cli {
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Material database file (defaults to $APM_SPDC_MATERIALS, then the
    /// bundled BBO entry).
    #[arg(long, global = true)]
    pub material: Option<PathBuf>,
    /// Entry to use from the database.
    #[arg(long, global = true)]
    pub material_name: Option<String>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the materials in the database.
    Materials,
    /// Compute a pump recipe, or a two-component entangled design.
    Design(DesignArgs),
    /// Sample the joint spectrum and write CSV plus metadata.
    Jsa(JsaArgs),
    /// Schmidt and marginal analysis of a grid CSV.
    Analyze { input: PathBuf },
    /// Map between pump (k, omega) and photon (omega_s, omega_i) coordinates.
    MapCoords(MapArgs),
    /// Run the convention and branch calibration against the published BBO design.
    #[command(name = "reproduce-table1")]
    ReproduceTable1,
}

#[derive(Debug, Clone, Default, Args)]
pub struct TargetArgs {
    /// Signal vacuum wavelength with unit, e.g. 800nm or 0.8um.
    #[arg(long)]
    pub signal_wavelength: Option<String>,
    #[arg(long)]
    pub idler_wavelength: Option<String>,
    /// Signal coherence length with unit, e.g. 1mm.
    #[arg(long)]
    pub signal_coherence: Option<String>,
    #[arg(long)]
    pub idler_coherence: Option<String>,
    /// Signal center frequency, rad/s.
    #[arg(long)]
    pub signal_omega: Option<f64>,
    #[arg(long)]
    pub idler_omega: Option<f64>,
    /// Signal amplitude bandwidth, rad/s.
    #[arg(long)]
    pub signal_sigma: Option<f64>,
    #[arg(long)]
    pub idler_sigma: Option<f64>,
    /// Index branches as pump,signal,idler, e.g. e,o,o.
    #[arg(long)]
    pub branches: Option<String>,
    /// Coherence-length convention: c/l, 2c/l, pi*c/l, 2pi*c/l or sqrt2*c/l.
    #[arg(long)]
    pub convention: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct EntangledArgs {
    /// Design both pump polarization components.
    #[arg(long)]
    pub entangled: bool,
    /// Branches for the y-polarized (yyy) pathway.
    #[arg(long)]
    pub y_branches: Option<String>,
    /// Branches for the z-polarized (zxx) pathway.
    #[arg(long)]
    pub z_branches: Option<String>,
    /// Relative phase of the two components, radians.
    #[arg(long, allow_hyphen_values = true)]
    pub phase: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct DesignArgs {
    #[command(flatten)]
    pub targets: TargetArgs,
    #[command(flatten)]
    pub entangled: EntangledArgs,
}

#[derive(Debug, Clone, Args)]
pub struct JsaArgs {
    #[command(flatten)]
    pub targets: TargetArgs,
    #[command(flatten)]
    pub entangled: EntangledArgs,
    /// Use a recipe document instead of targets.
    #[arg(long, conflicts_with = "entangled")]
    pub recipe: Option<PathBuf>,
    /// Samples per axis.
    #[arg(long)]
    pub grid_size: Option<usize>,
    /// Grid half-width in units of each photon bandwidth.
    #[arg(long)]
    pub span_sigma: Option<f64>,
    /// full, linearized or closed-form.
    #[arg(long)]
    pub mode: Option<String>,
    /// Also write the pump envelope sampled in pump coordinates with its
    /// photon-coordinate image.
    #[arg(long)]
    pub overlay: bool,
}

#[derive(Debug, Clone, Args)]
pub struct MapArgs {
    /// Recipe document written by `design`.
    #[arg(long)]
    pub recipe: PathBuf,
    /// Pump transverse wavenumber, rad/m.
    #[arg(long, allow_hyphen_values = true, requires = "omega")]
    pub k: Option<f64>,
    /// Pump frequency, rad/s.
    #[arg(long, requires = "k")]
    pub omega: Option<f64>,
    /// Signal frequency, rad/s (inverse map).
    #[arg(long, requires = "omega_i", conflicts_with = "k")]
    pub omega_s: Option<f64>,
    #[arg(long, requires = "omega_s")]
    pub omega_i: Option<f64>,
}

/// A length given either as metres or as text with a unit suffix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LengthValue {
    Metres(f64),
    Text(String),
}

impl LengthValue {
    fn metres(&self, name: &str) -> Result<f64> {
        match self {
            LengthValue::Metres(v) => Ok(*v),
            LengthValue::Text(t) => parse_length(t)
                .ok_or_else(|| Error::Config(format!("{name}: cannot parse length '{t}'"))),
        }
    }
}

/// Contents of a `--config` file. Every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub material: Option<PathBuf>,
    pub material_name: Option<String>,
    pub out: Option<PathBuf>,
    pub signal_wavelength: Option<LengthValue>,
    pub idler_wavelength: Option<LengthValue>,
    pub signal_coherence: Option<LengthValue>,
    pub idler_coherence: Option<LengthValue>,
    pub signal_omega: Option<f64>,
    pub idler_omega: Option<f64>,
    pub signal_sigma: Option<f64>,
    pub idler_sigma: Option<f64>,
    pub branches: Option<String>,
    pub convention: Option<String>,
    pub grid_size: Option<usize>,
    pub span_sigma: Option<f64>,
    pub mode: Option<String>,
    pub entangled: Option<bool>,
    pub y_branches: Option<String>,
    pub z_branches: Option<String>,
    pub phase: Option<f64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))
    }

    fn overlay_targets(&mut self, t: &TargetArgs) {
        let text = |v: &Option<String>| v.clone().map(LengthValue::Text);
        set(&mut self.signal_wavelength, text(&t.signal_wavelength));
        set(&mut self.idler_wavelength, text(&t.idler_wavelength));
        set(&mut self.signal_coherence, text(&t.signal_coherence));
        set(&mut self.idler_coherence, text(&t.idler_coherence));
        set(&mut self.signal_omega, t.signal_omega);
        set(&mut self.idler_omega, t.idler_omega);
        set(&mut self.signal_sigma, t.signal_sigma);
        set(&mut self.idler_sigma, t.idler_sigma);
        set(&mut self.branches, t.branches.clone());
        set(&mut self.convention, t.convention.clone());
    }

    fn overlay_entangled(&mut self, e: &EntangledArgs) {
        if e.entangled {
            self.entangled = Some(true);
        }
        set(&mut self.y_branches, e.y_branches.clone());
        set(&mut self.z_branches, e.z_branches.clone());
        set(&mut self.phase, e.phase);
    }

    pub fn convention(&self) -> Result<CoherenceConvention> {
        self.convention
            .as_deref()
            .map_or(Ok(CoherenceConvention::default()), str::parse)
    }

    fn assignment(value: &Option<String>, default: &str) -> Result<AxisAssignment> {
        value.as_deref().unwrap_or(default).parse()
    }

    /// Targets from exactly one of the two input styles.
    pub fn targets(&self) -> Result<DesignTargets> {
        let branches = Self::assignment(&self.branches, DEFAULT_BRANCHES)?;
        let lengths = [
            &self.signal_wavelength,
            &self.idler_wavelength,
            &self.signal_coherence,
            &self.idler_coherence,
        ];
        let direct = [
            self.signal_omega,
            self.idler_omega,
            self.signal_sigma,
            self.idler_sigma,
        ];
        let n_lengths = lengths.iter().filter(|v| v.is_some()).count();
        let n_direct = direct.iter().filter(|v| v.is_some()).count();
        match (n_lengths, n_direct) {
            (4, 0) => {
                let get = |v: &Option<LengthValue>, name| v.as_ref().unwrap().metres(name);
                DesignTargets::from_wavelengths(
                    get(&self.signal_wavelength, "signal_wavelength")?,
                    get(&self.idler_wavelength, "idler_wavelength")?,
                    get(&self.signal_coherence, "signal_coherence")?,
                    get(&self.idler_coherence, "idler_coherence")?,
                    self.convention()?,
                    branches,
                )
            }
            (0, 4) => DesignTargets::new(
                direct[0].unwrap(),
                direct[1].unwrap(),
                direct[2].unwrap(),
                direct[3].unwrap(),
                branches,
            ),
            (0, 0) => Err(Error::Config(
                "no targets given: supply wavelengths and coherence lengths, or omegas and sigmas".into(),
            )),
            _ => Err(Error::Config(
                "targets need exactly one complete style: all of signal/idler wavelength and coherence, or all of signal/idler omega and sigma".into(),
            )),
        }
    }

    pub fn mode(&self) -> Result<JsaMode> {
        self.mode.as_deref().map_or(Ok(JsaMode::Full), str::parse)
    }

    fn grid_for(&self, targets: &DesignTargets) -> Result<FrequencyGrid> {
        FrequencyGrid::centered(
            targets,
            self.grid_size.unwrap_or(DEFAULT_GRID_SIZE),
            self.span_sigma.unwrap_or(DEFAULT_SPAN_SIGMA),
        )
    }

    fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    fn material(&self) -> Result<Material> {
        let db = match &self.material {
            Some(path) => load_database(path)?,
            None => default_database()?,
        };
        find_material(&db, self.material_name.as_deref())
    }

    fn entangled_design(&self, material: &Material) -> Result<EntangledDesign> {
        entangled_design(
            &self.targets()?,
            material,
            Pathway::y(Self::assignment(&self.y_branches, DEFAULT_Y_BRANCHES)?),
            Pathway::z(Self::assignment(&self.z_branches, DEFAULT_Z_BRANCHES)?),
            self.phase.unwrap_or(0.0),
        )
    }
}

fn set<T>(slot: &mut Option<T>, flag: Option<T>) {
    if flag.is_some() {
        *slot = flag;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JsaMode {
    Full,
    Linearized,
    ClosedForm,
}

impl FromStr for JsaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "full" => Ok(JsaMode::Full),
            "linearized" | "linearised" => Ok(JsaMode::Linearized),
            "closed-form" | "closed" => Ok(JsaMode::ClosedForm),
            _ => Err(Error::Config(format!(
                "unknown mode '{s}' (expected full, linearized or closed-form)"
            ))),
        }
    }
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .map_err(|e| Error::io("<stdout>", e))
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::json(path.display().to_string(), e))?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Runs a parsed command line, writing human-readable output to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    set(&mut config.material, cli.material);
    set(&mut config.material_name, cli.material_name);
    set(&mut config.out, cli.out);

    match cli.command {
        Command::Materials => cmd_materials(&config, out),
        Command::Design(args) => {
            config.overlay_targets(&args.targets);
            config.overlay_entangled(&args.entangled);
            cmd_design(&config, out)
        }
        Command::Jsa(args) => {
            config.overlay_targets(&args.targets);
            config.overlay_entangled(&args.entangled);
            set(&mut config.grid_size, args.grid_size);
            set(&mut config.span_sigma, args.span_sigma);
            set(&mut config.mode, args.mode);
            cmd_jsa(&config, args.recipe.as_deref(), args.overlay, out)
        }
        Command::Analyze { input } => cmd_analyze(&config, &input, out),
        Command::MapCoords(args) => cmd_map_coords(&args, out),
        Command::ReproduceTable1 => cmd_reproduce_table1(&config, out),
    }
}

fn cmd_materials(config: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let db = match &config.material {
        Some(path) => load_database(path)?,
        None => default_database()?,
    };
    let mut text = String::new();
    for m in &db {
        text += &format!("{}\n  source: {}\n", m.name(), m.source());
        for branch in crate::dispersion::Branch::ALL {
            let (lo, hi) = m.curve(branch).range_um();
            text += &format!("  {branch}: {lo}-{hi} um\n");
        }
        for (label, value) in m.chi2() {
            text += &format!("  chi2 {label}: {} pm/V\n", value * 1e12);
        }
    }
    write_out(out, &text)
}

fn design_summary(targets: &DesignTargets) -> String {
    format!(
        "signal {} nm, sigma {:.4e} rad/s; idler {} nm, sigma {:.4e} rad/s\n",
        sig3(wavelength_from_omega(targets.omega_s) * 1e9),
        targets.sigma_s,
        sig3(wavelength_from_omega(targets.omega_i) * 1e9),
        targets.sigma_i,
    )
}

fn cmd_design(config: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let material = config.material()?;
    let convention = config.convention()?;
    let dir = config.out_dir();
    if config.entangled.unwrap_or(false) {
        let design = config.entangled_design(&material)?;
        let mut text = design_summary(&design.y.targets);
        text += &format!(
            "material {}, convention {}, z pathway {}, y pathway {}\n\n",
            material.name(),
            convention,
            design.z.pathway.branches,
            design.y.pathway.branches
        );
        text += &render_recipe_table(&[("E_p^z", &design.z.recipe), ("E_p^y", &design.y.recipe)]);
        text += &format!(
            "\npower ratio P_z/P_y = {:.6}, phase = {} rad\n",
            design.power_ratio, design.phase
        );
        ensure_dir(&dir)?;
        let path = dir.join("entangled.json");
        write_json(
            &EntangledDocument::new(&design, convention, material.name()),
            &path,
        )?;
        text += &format!("wrote {}\n", path.display());
        return write_out(out, &text);
    }
    let targets = config.targets()?;
    let recipe = design_recipe(&targets, &material)?;
    let mut text = design_summary(&targets);
    text += &format!(
        "material {}, convention {}, branches {}\n\n",
        material.name(),
        convention,
        targets.branches
    );
    text += &render_recipe_table(&[("E_p", &recipe)]);
    text += &format!(
        "\nomega_p = {:.6e} rad/s, k_p = {:.6e} rad/m, n_p = {:.6}\n",
        recipe.omega_p, recipe.k_p, recipe.n_p
    );
    ensure_dir(&dir)?;
    let path = dir.join("recipe.json");
    write_json(
        &RecipeDocument::new(&recipe, &targets, convention, material.name()),
        &path,
    )?;
    text += &format!("wrote {}\n", path.display());
    write_out(out, &text)
}

fn compute_jsa(
    mode: JsaMode,
    recipe: &PumpRecipe,
    targets: &DesignTargets,
    material: &Material,
    grid: &FrequencyGrid,
) -> Result<Jsa> {
    let dispersion_mode = match mode {
        JsaMode::ClosedForm => return jsa_closed_form(targets, grid),
        JsaMode::Full => DispersionMode::Full,
        JsaMode::Linearized => DispersionMode::Linearized,
    };
    let dispersion = PhotonDispersion::for_targets(dispersion_mode, targets, material)?;
    jsa_from_pump(recipe, &dispersion, grid)
}

fn report_text(name: &str, schmidt: &SchmidtReport, m: &MarginalSummary) -> String {
    format!(
        "{name}: K = {:.8}, purity = {:.8}, entropy = {:.6e} bits, pearson = {:.3e}\n  \
         signal center {:.9e} rad/s, width {:.6e} rad/s\n  \
         idler center {:.9e} rad/s, width {:.6e} rad/s\n",
        schmidt.schmidt_number,
        schmidt.purity,
        schmidt.entropy,
        schmidt.pearson,
        m.signal_center,
        m.signal_width,
        m.idler_center,
        m.idler_width
    )
}

fn write_spectrum(
    jsa: &Jsa,
    recipe: Option<RecipeDocument>,
    dir: &Path,
    stem: &str,
) -> Result<(SchmidtReport, MarginalSummary)> {
    let schmidt = schmidt_analysis(jsa)?;
    let summary = MarginalSummary::from(&marginals(jsa)?);
    write_jsa_csv(jsa, dir.join(format!("{stem}.csv")))?;
    let meta = JsaMetadata {
        provenance: jsa.provenance(),
        grid: *jsa.grid(),
        recipe,
        schmidt: schmidt.clone(),
        marginals: summary,
    };
    write_metadata(&meta, dir.join(format!("{stem}.json")))?;
    Ok((schmidt, summary))
}

fn cmd_jsa(
    config: &RunConfig,
    recipe_path: Option<&Path>,
    overlay: bool,
    out: &mut dyn Write,
) -> Result<()> {
    let material = config.material()?;
    let convention = config.convention()?;
    let mode = config.mode()?;
    let dir = config.out_dir();

    if config.entangled.unwrap_or(false) {
        let design = config.entangled_design(&material)?;
        let grid = config.grid_for(&design.y.targets)?;
        let (h, v) = rayon::join(
            || compute_jsa(mode, &design.z.recipe, &design.z.targets, &material, &grid),
            || compute_jsa(mode, &design.y.recipe, &design.y.targets, &material, &grid),
        );
        let (h, v) = (h?, v?);
        ensure_dir(&dir)?;
        let doc = EntangledDocument::new(&design, convention, material.name());
        let (sh, mh) = write_spectrum(&h, Some(doc.z.recipe.clone()), &dir, "jsa_hh")?;
        let (sv, mv) = write_spectrum(&v, Some(doc.y.recipe.clone()), &dir, "jsa_vv")?;
        let (ah, av) = amplitude_weights(design.z.chi2, design.power_ratio, design.y.chi2, 1.0);
        let report: PolarizationReport = report_from_spectra(&h, &v, ah, av)?;
        write_json(&report, &dir.join("polarization.json"))?;
        let mut text = report_text("HH (zxx)", &sh, &mh);
        text += &report_text("VV (yyy)", &sv, &mv);
        text += &format!(
            "polarization: alpha_H = {:.12}, alpha_V = {:.12}, overlap = {:.12}, concurrence = {:.12}\n",
            report.alpha_h, report.alpha_v, report.overlap, report.concurrence
        );
        text += &format!("wrote {}\n", dir.display());
        return write_out(out, &text);
    }

    let (recipe, targets, doc) = match recipe_path {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let doc: RecipeDocument = serde_json::from_str(&text)
                .map_err(|e| Error::json(path.display().to_string(), e))?;
            (doc.recipe(), doc.targets()?, doc)
        }
        None => {
            let targets = config.targets()?;
            let recipe = design_recipe(&targets, &material)?;
            let doc = RecipeDocument::new(&recipe, &targets, convention, material.name());
            (recipe, targets, doc)
        }
    };
    let grid = config.grid_for(&targets)?;
    let jsa = compute_jsa(mode, &recipe, &targets, &material, &grid)?;
    ensure_dir(&dir)?;
    let (schmidt, summary) = write_spectrum(&jsa, Some(doc), &dir, "jsa")?;
    let mut text = report_text("jsa", &schmidt, &summary);
    if overlay {
        let path = dir.join("pump_overlay.csv");
        write_pump_overlay_csv(&recipe, &recipe, &targets, OverlaySpec::default(), &path)?;
        text += &format!("wrote {}\n", path.display());
    }
    text += &format!(
        "wrote {} and {}\n",
        dir.join("jsa.csv").display(),
        dir.join("jsa.json").display()
    );
    write_out(out, &text)
}

#[derive(Debug, Serialize)]
struct Analysis {
    schmidt: SchmidtReport,
    marginals: MarginalSummary,
}

fn cmd_analyze(config: &RunConfig, input: &Path, out: &mut dyn Write) -> Result<()> {
    let jsa = read_jsa_csv(input)?;
    let analysis = Analysis {
        schmidt: schmidt_analysis(&jsa)?,
        marginals: MarginalSummary::from(&marginals(&jsa)?),
    };
    let mut text = report_text(
        &input.display().to_string(),
        &analysis.schmidt,
        &analysis.marginals,
    );
    if let Some(dir) = &config.out {
        ensure_dir(dir)?;
        let path = dir.join("analysis.json");
        write_json(&analysis, &path)?;
        text += &format!("wrote {}\n", path.display());
    }
    write_out(out, &text)
}

fn cmd_map_coords(args: &MapArgs, out: &mut dyn Write) -> Result<()> {
    let path = &args.recipe;
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let doc: RecipeDocument =
        serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))?;
    let recipe = doc.recipe();
    let targets = doc.targets()?;
    let line = match (args.k, args.omega, args.omega_s, args.omega_i) {
        (Some(k), Some(omega), None, None) => {
            let (ws, wi) = map_pump_to_photon_coords(&recipe, &targets, k, omega)?;
            format!("omega_s = {ws:.16e} rad/s\nomega_i = {wi:.16e} rad/s\n")
        }
        (None, None, Some(ws), Some(wi)) => {
            let (k, omega) = map_photon_to_pump_coords(&recipe, &targets, ws, wi);
            format!("k = {k:.16e} rad/m\nomega = {omega:.16e} rad/s\n")
        }
        _ => {
            return Err(Error::Config(
                "give either --k and --omega, or --omega-s and --omega-i".into(),
            ))
        }
    };
    write_out(out, &line)
}

fn cmd_reproduce_table1(config: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let material = config.material()?;
    let rep = reproduce(&material)?;
    let dir = config.out_dir();
    ensure_dir(&dir)?;
    let path = dir.join("calibration.json");
    write_json(&rep.record, &path)?;
    let mut text = rep.render();
    text += &format!("wrote {}\n", path.display());
    write_out(out, &text)?;
    let failed = rep.record.rows.iter().filter(|r| !r.pass).count();
    if failed > 0 {
        return Err(Error::CalibrationMismatch {
            failed,
            total: rep.record.rows.len(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("apm-spdc").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.json");
        fs::write(
            &cfg,
            r#"{"signal_wavelength": "0.8um", "idler_wavelength": 1.5e-6,
                "signal_coherence": "1mm", "idler_coherence": "1cm", "grid_size": 32}"#,
        )
        .unwrap();
        let mut config = RunConfig::load(&cfg).unwrap();
        let cli = parse(&["design", "--signal-wavelength", "810nm"]);
        let Command::Design(args) = cli.command else {
            panic!()
        };
        config.overlay_targets(&args.targets);
        let t = config.targets().unwrap();
        assert!((wavelength_from_omega(t.omega_s) - 810e-9).abs() < 1e-18);
        assert!((wavelength_from_omega(t.omega_i) - 1.5e-6).abs() < 1e-18);
        assert_eq!(config.grid_size, Some(32));
    }

    #[test]
    fn mixed_target_styles_rejected() {
        let config = RunConfig {
            signal_wavelength: Some(LengthValue::Metres(0.8e-6)),
            signal_omega: Some(2e15),
            ..Default::default()
        };
        assert_eq!(config.targets().unwrap_err().kind(), ErrorKind::Validation);
        assert!(RunConfig::default().targets().is_err());
    }

    #[test]
    fn unknown_config_keys_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.json");
        fs::write(&cfg, r#"{"grid": 3}"#).unwrap();
        assert!(matches!(RunConfig::load(&cfg), Err(Error::Json { .. })));
    }

    #[test]
    fn modes_parse() {
        assert_eq!(
            "closed-form".parse::<JsaMode>().unwrap(),
            JsaMode::ClosedForm
        );
        assert_eq!("Full".parse::<JsaMode>().unwrap(), JsaMode::Full);
        assert!("exact".parse::<JsaMode>().is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), 2);
        assert_eq!(exit_code(&Error::NoRealAngle { sin_theta: 1.2 }), 3);
        assert_eq!(exit_code(&Error::io("x", std::io::Error::other("boom"))), 4);
    }
}
