//! C ABI over `apm_spdc`.
//!
//! Objects are opaque handles created by `apm_*_new`/`apm_design`/... and
//! released with the matching `apm_*_free`. Every fallible call returns an
//! [`ApmStatus`]; on failure `apm_last_error()` describes it. Results are
//! written through out-pointers only on success.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use apm_spdc::biphoton::{
    jsa_closed_form, jsa_from_pump, schmidt_analysis, write_jsa_csv, DispersionMode, FrequencyGrid,
    Jsa, PhotonDispersion,
};
use apm_spdc::dispersion::{find_material, load_database, AxisAssignment, Branch, Material};
use apm_spdc::polarization::balance_power_ratio;
use apm_spdc::pump::{design_recipe, CoherenceConvention, DesignTargets, PumpField, PumpRecipe};
use apm_spdc::{Error, ErrorKind};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApmStatus {
    Ok = 0,
    NullPointer = 1,
    Validation = 2,
    Physics = 3,
    Io = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApmBranch {
    Ordinary = 0,
    Extraordinary = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApmConvention {
    COverL = 0,
    TwoCOverL = 1,
    PiCOverL = 2,
    TwoPiCOverL = 3,
    Sqrt2COverL = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApmMode {
    Full = 0,
    Linearized = 1,
    ClosedForm = 2,
}

/// Photon targets in SI units.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApmTargets {
    pub omega_s: f64,
    pub omega_i: f64,
    pub sigma_s: f64,
    pub sigma_i: f64,
    pub pump: ApmBranch,
    pub signal: ApmBranch,
    pub idler: ApmBranch,
}

/// Pump recipe in SI units; the angle is in radians.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApmRecipeParams {
    pub omega_p: f64,
    pub k_p: f64,
    pub n_p: f64,
    pub beta1_s: f64,
    pub beta1_i: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub theta: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApmSchmidt {
    pub schmidt_number: f64,
    pub purity: f64,
    pub entropy: f64,
    pub pearson: f64,
}

pub struct ApmMaterial {
    inner: Material,
}

pub struct ApmRecipe {
    recipe: PumpRecipe,
    targets: DesignTargets,
}

pub struct ApmJsa {
    inner: Jsa,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(err: Error) -> ApmStatus {
    set_error(err.to_string());
    match err.kind() {
        ErrorKind::Validation => ApmStatus::Validation,
        ErrorKind::Physics => ApmStatus::Physics,
        ErrorKind::Io => ApmStatus::Io,
    }
}

fn null(what: &str) -> ApmStatus {
    set_error(format!("null pointer passed for {what}"));
    ApmStatus::NullPointer
}

fn guard(f: impl FnOnce() -> ApmStatus) -> ApmStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| {
        set_error("internal panic".into());
        ApmStatus::Panic
    })
}

fn branch(b: ApmBranch) -> Branch {
    match b {
        ApmBranch::Ordinary => Branch::Ordinary,
        ApmBranch::Extraordinary => Branch::Extraordinary,
    }
}

fn apm_branch(b: Branch) -> ApmBranch {
    match b {
        Branch::Ordinary => ApmBranch::Ordinary,
        Branch::Extraordinary => ApmBranch::Extraordinary,
    }
}

fn convention(c: ApmConvention) -> CoherenceConvention {
    match c {
        ApmConvention::COverL => CoherenceConvention::COverL,
        ApmConvention::TwoCOverL => CoherenceConvention::TwoCOverL,
        ApmConvention::PiCOverL => CoherenceConvention::PiCOverL,
        ApmConvention::TwoPiCOverL => CoherenceConvention::TwoPiCOverL,
        ApmConvention::Sqrt2COverL => CoherenceConvention::Sqrt2COverL,
    }
}

fn targets_from(t: &ApmTargets) -> Result<DesignTargets, Error> {
    DesignTargets::new(
        t.omega_s,
        t.omega_i,
        t.sigma_s,
        t.sigma_i,
        AxisAssignment::new(branch(t.pump), branch(t.signal), branch(t.idler)),
    )
}

unsafe fn utf8<'a>(s: *const c_char, what: &str) -> Result<&'a str, ApmStatus> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        ApmStatus::Validation
    })
}

macro_rules! deref {
    ($p:expr, $what:literal) => {
        match $p.as_ref() {
            Some(v) => v,
            None => return null($what),
        }
    };
}

macro_rules! check_out {
    ($p:expr, $what:literal) => {
        if $p.is_null() {
            return null($what);
        }
    };
}

macro_rules! try_status {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) => return fail(e),
        }
    };
}

/// Message for the most recent failure on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn apm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// The bundled BBO entry.
#[no_mangle]
pub unsafe extern "C" fn apm_material_bbo(out: *mut *mut ApmMaterial) -> ApmStatus {
    guard(|| {
        check_out!(out, "out");
        *out = Box::into_raw(Box::new(ApmMaterial {
            inner: Material::bbo(),
        }));
        ApmStatus::Ok
    })
}

/// Loads `name` (or the first entry when NULL) from a database file.
#[no_mangle]
pub unsafe extern "C" fn apm_material_load(
    path: *const c_char,
    name: *const c_char,
    out: *mut *mut ApmMaterial,
) -> ApmStatus {
    guard(|| {
        check_out!(out, "out");
        let path = match utf8(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        let name = if name.is_null() {
            None
        } else {
            match utf8(name, "name") {
                Ok(n) => Some(n),
                Err(s) => return s,
            }
        };
        let db = try_status!(load_database(Path::new(path)));
        let material = try_status!(find_material(&db, name));
        *out = Box::into_raw(Box::new(ApmMaterial { inner: material }));
        ApmStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn apm_material_free(material: *mut ApmMaterial) {
    if !material.is_null() {
        drop(Box::from_raw(material));
    }
}

#[no_mangle]
pub unsafe extern "C" fn apm_refractive_index(
    material: *const ApmMaterial,
    b: ApmBranch,
    omega: f64,
    out: *mut f64,
) -> ApmStatus {
    guard(|| {
        let m = deref!(material, "material");
        check_out!(out, "out");
        *out = try_status!(m.inner.refractive_index(branch(b), omega));
        ApmStatus::Ok
    })
}

/// Group slowness d(beta)/d(omega), s/m.
#[no_mangle]
pub unsafe extern "C" fn apm_beta_prime(
    material: *const ApmMaterial,
    b: ApmBranch,
    omega: f64,
    out: *mut f64,
) -> ApmStatus {
    guard(|| {
        let m = deref!(material, "material");
        check_out!(out, "out");
        *out = try_status!(m.inner.beta_prime(branch(b), omega));
        ApmStatus::Ok
    })
}

/// Targets from vacuum wavelengths and coherence lengths, all in metres.
#[no_mangle]
pub unsafe extern "C" fn apm_targets_from_wavelengths(
    lambda_s: f64,
    lambda_i: f64,
    coherence_s: f64,
    coherence_i: f64,
    conv: ApmConvention,
    pump: ApmBranch,
    signal: ApmBranch,
    idler: ApmBranch,
    out: *mut ApmTargets,
) -> ApmStatus {
    guard(|| {
        check_out!(out, "out");
        let t = try_status!(DesignTargets::from_wavelengths(
            lambda_s,
            lambda_i,
            coherence_s,
            coherence_i,
            convention(conv),
            AxisAssignment::new(branch(pump), branch(signal), branch(idler)),
        ));
        *out = ApmTargets {
            omega_s: t.omega_s,
            omega_i: t.omega_i,
            sigma_s: t.sigma_s,
            sigma_i: t.sigma_i,
            pump: apm_branch(t.branches.pump),
            signal: apm_branch(t.branches.signal),
            idler: apm_branch(t.branches.idler),
        };
        ApmStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn apm_design(
    material: *const ApmMaterial,
    targets: *const ApmTargets,
    out: *mut *mut ApmRecipe,
) -> ApmStatus {
    guard(|| {
        let m = deref!(material, "material");
        let t = deref!(targets, "targets");
        check_out!(out, "out");
        let targets = try_status!(targets_from(t));
        let recipe = try_status!(design_recipe(&targets, &m.inner));
        *out = Box::into_raw(Box::new(ApmRecipe { recipe, targets }));
        ApmStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn apm_recipe_params(
    recipe: *const ApmRecipe,
    out: *mut ApmRecipeParams,
) -> ApmStatus {
    guard(|| {
        let r = &deref!(recipe, "recipe").recipe;
        check_out!(out, "out");
        *out = ApmRecipeParams {
            omega_p: r.omega_p,
            k_p: r.k_p,
            n_p: r.n_p,
            beta1_s: r.beta1_s,
            beta1_i: r.beta1_i,
            a: r.a,
            b: r.b,
            c: r.c,
            theta: r.theta,
        };
        ApmStatus::Ok
    })
}

/// Engineered pump envelope at transverse wavenumber `k` (rad/m) and
/// frequency `omega` (rad/s); 1 at the peak.
#[no_mangle]
pub unsafe extern "C" fn apm_pump_amplitude(
    recipe: *const ApmRecipe,
    k: f64,
    omega: f64,
    out: *mut f64,
) -> ApmStatus {
    guard(|| {
        let r = deref!(recipe, "recipe");
        check_out!(out, "out");
        *out = r.recipe.amplitude(k, omega);
        ApmStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn apm_recipe_free(recipe: *mut ApmRecipe) {
    if !recipe.is_null() {
        drop(Box::from_raw(recipe));
    }
}

/// Joint spectral amplitude on a square grid of `grid_size` points per axis
/// spanning `span_sigma` bandwidths either side of each target center.
#[no_mangle]
pub unsafe extern "C" fn apm_jsa_compute(
    recipe: *const ApmRecipe,
    material: *const ApmMaterial,
    mode: ApmMode,
    grid_size: usize,
    span_sigma: f64,
    out: *mut *mut ApmJsa,
) -> ApmStatus {
    guard(|| {
        let r = deref!(recipe, "recipe");
        let m = deref!(material, "material");
        check_out!(out, "out");
        let grid = try_status!(FrequencyGrid::centered(&r.targets, grid_size, span_sigma));
        let jsa = match mode {
            ApmMode::ClosedForm => jsa_closed_form(&r.targets, &grid),
            ApmMode::Full | ApmMode::Linearized => {
                let dm = if mode == ApmMode::Full {
                    DispersionMode::Full
                } else {
                    DispersionMode::Linearized
                };
                PhotonDispersion::for_targets(dm, &r.targets, &m.inner)
                    .and_then(|d| jsa_from_pump(&r.recipe, &d, &grid))
            }
        };
        *out = Box::into_raw(Box::new(ApmJsa {
            inner: try_status!(jsa),
        }));
        ApmStatus::Ok
    })
}

/// Rows follow the signal axis, columns the idler axis.
#[no_mangle]
pub unsafe extern "C" fn apm_jsa_shape(
    jsa: *const ApmJsa,
    rows: *mut usize,
    cols: *mut usize,
) -> ApmStatus {
    guard(|| {
        let j = deref!(jsa, "jsa");
        check_out!(rows, "rows");
        check_out!(cols, "cols");
        let (r, c) = j.inner.grid().shape();
        *rows = r;
        *cols = c;
        ApmStatus::Ok
    })
}

/// Copies the row-major amplitude into `buf`, which must hold `rows*cols`
/// values.
#[no_mangle]
pub unsafe extern "C" fn apm_jsa_values(
    jsa: *const ApmJsa,
    buf: *mut f64,
    len: usize,
) -> ApmStatus {
    guard(|| {
        let j = deref!(jsa, "jsa");
        check_out!(buf, "buf");
        let values = j.inner.values();
        if len != values.len() {
            set_error(format!(
                "buffer holds {len} values, grid has {}",
                values.len()
            ));
            return ApmStatus::Validation;
        }
        ptr::copy_nonoverlapping(values.as_ptr(), buf, len);
        ApmStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn apm_jsa_schmidt(jsa: *const ApmJsa, out: *mut ApmSchmidt) -> ApmStatus {
    guard(|| {
        let j = deref!(jsa, "jsa");
        check_out!(out, "out");
        let s = try_status!(schmidt_analysis(&j.inner));
        *out = ApmSchmidt {
            schmidt_number: s.schmidt_number,
            purity: s.purity,
            entropy: s.entropy,
            pearson: s.pearson,
        };
        ApmStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn apm_jsa_write_csv(jsa: *const ApmJsa, path: *const c_char) -> ApmStatus {
    guard(|| {
        let j = deref!(jsa, "jsa");
        let path = match utf8(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        try_status!(write_jsa_csv(&j.inner, path));
        ApmStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn apm_jsa_free(jsa: *mut ApmJsa) {
    if !jsa.is_null() {
        drop(Box::from_raw(jsa));
    }
}

/// `P_z / P_y` equalizing the two pathway amplitudes.
#[no_mangle]
pub unsafe extern "C" fn apm_balance_power_ratio(
    chi_y: f64,
    chi_z: f64,
    out: *mut f64,
) -> ApmStatus {
    guard(|| {
        check_out!(out, "out");
        *out = try_status!(balance_power_ratio(chi_y, chi_z));
        ApmStatus::Ok
    })
}
