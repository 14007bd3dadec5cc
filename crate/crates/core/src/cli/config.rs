//! TOML run configuration.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::couplings::{CouplingModel, Geometry, LambdaForm, DEFAULT_DELTA_MIN};
use crate::dynamics::{IntegrateOptions, SystemParams, Tolerances, DEFAULT_SAMPLES};
use crate::error::{Error, Result};
use crate::pulses::{pulse_from_spectrum, spectrum_from_csv, PulseFamily, PulseSpec, PulseTable, TimeGrid};
use crate::sweep::{default_omegas, log_grid, CellSettings, SweepPlan, DEFAULT_R12S};

use super::output::Format;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PulseSection {
    pub family: String,
    pub omega: f64,
    /// Two-column `t, xi` file for the tabulated family.
    pub table: Option<PathBuf>,
    /// Three-column spectrum file; transformed into a tabulated pulse.
    pub spectrum: Option<PathBuf>,
    /// Time window for the spectrum transform, default `±40/Ω`.
    pub spectrum_window: Option<[f64; 2]>,
    pub spectrum_samples: usize,
}

impl Default for PulseSection {
    fn default() -> Self {
        Self {
            family: "rising".into(),
            omega: 1.77,
            table: None,
            spectrum: None,
            spectrum_window: None,
            spectrum_samples: 4096,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AtomsSection {
    pub r12: f64,
    pub alpha: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

impl Default for AtomsSection {
    fn default() -> Self {
        Self { r12: 0.2, alpha: std::f64::consts::FRAC_PI_2, gamma1: 1.0, gamma2: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FocusSection {
    pub offset: f64,
    pub gamma0: f64,
    /// Overrides of the geometric drive rates; zero switches a drive off.
    pub gamma10: Option<f64>,
    pub gamma20: Option<f64>,
}

impl Default for FocusSection {
    fn default() -> Self {
        Self { offset: 0.0, gamma0: 1.0, gamma10: None, gamma20: None }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorSection {
    pub rtol: f64,
    pub atol: f64,
    pub t_start: Option<f64>,
    pub t_end: Option<f64>,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        let t = Tolerances::default();
        Self { rtol: t.rel, atol: t.abs, t_start: None, t_end: None }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub format: Format,
    pub samples: usize,
    pub path: Option<PathBuf>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { format: Format::Csv, samples: DEFAULT_SAMPLES, path: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LambdaFormKey {
    #[default]
    AsPrinted,
    Uncorrected,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CouplingsSection {
    pub delta_min: f64,
    pub lambda_form: LambdaFormKey,
}

impl Default for CouplingsSection {
    fn default() -> Self {
        Self { delta_min: DEFAULT_DELTA_MIN, lambda_form: LambdaFormKey::AsPrinted }
    }
}

/// Grids for `sweep`. An explicit `omegas` list wins over the log range.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub omegas: Option<Vec<f64>>,
    pub omega_min: f64,
    pub omega_max: f64,
    pub omega_points: usize,
    pub r12s: Vec<f64>,
    pub workers: Option<usize>,
}

impl Default for SweepSection {
    fn default() -> Self {
        let (lo, hi, n) = crate::sweep::DEFAULT_OMEGA_RANGE;
        Self { omegas: None, omega_min: lo, omega_max: hi, omega_points: n, r12s: DEFAULT_R12S.to_vec(), workers: None }
    }
}

/// Separation range for `couplings`; the lower end defaults to the cutoff.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSection {
    pub r12_min: Option<f64>,
    pub r12_max: f64,
    pub points: usize,
}

impl Default for ScanSection {
    fn default() -> Self {
        Self { r12_min: None, r12_max: 2.0, points: 500 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub pulse: PulseSection,
    pub atoms: AtomsSection,
    pub focus: FocusSection,
    pub integrator: IntegratorSection,
    pub output: OutputSection,
    pub couplings: CouplingsSection,
    pub sweep: SweepSection,
    pub scan: ScanSection,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(bad(format!("{key} must be finite and > 0, got {v}")))
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| bad(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| bad(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| bad(format!("{}: {e}", path.display())))
    }

    pub fn family(&self) -> Result<PulseFamily> {
        self.pulse.family.parse()
    }

    /// Checks every key that does not need file I/O.
    pub fn validate(&self) -> Result<()> {
        self.family()?;
        positive("pulse.omega", self.pulse.omega)?;
        positive("atoms.gamma1", self.atoms.gamma1)?;
        positive("atoms.gamma2", self.atoms.gamma2)?;
        positive("focus.gamma0", self.focus.gamma0)?;
        positive("integrator.rtol", self.integrator.rtol)?;
        positive("integrator.atol", self.integrator.atol)?;
        positive("couplings.delta_min", self.couplings.delta_min)?;
        positive("scan.r12_max", self.scan.r12_max)?;
        if !(0.0..=std::f64::consts::PI).contains(&self.atoms.alpha) {
            return Err(bad(format!("atoms.alpha must lie in [0, pi], got {}", self.atoms.alpha)));
        }
        if !self.atoms.r12.is_finite() || !self.focus.offset.is_finite() {
            return Err(bad("atoms.r12 and focus.offset must be finite"));
        }
        if self.output.samples < 2 || self.scan.points < 2 || self.pulse.spectrum_samples < 2 {
            return Err(bad("output.samples, scan.points and pulse.spectrum_samples must be >= 2"));
        }
        if self.pulse.table.is_some() && self.pulse.spectrum.is_some() {
            return Err(bad("pulse.table and pulse.spectrum are mutually exclusive"));
        }
        if self.family()? == PulseFamily::Tabulated && self.pulse.table.is_none() && self.pulse.spectrum.is_none() {
            return Err(bad("pulse.family = \"tabulated\" needs pulse.table or pulse.spectrum"));
        }
        if self.sweep.workers == Some(0) {
            return Err(bad("sweep.workers must be >= 1"));
        }
        Ok(())
    }

    pub fn coupling_model(&self) -> CouplingModel<f64> {
        CouplingModel {
            delta_min: self.couplings.delta_min,
            lambda_form: match self.couplings.lambda_form {
                LambdaFormKey::AsPrinted => LambdaForm::AsPrinted,
                LambdaFormKey::Uncorrected => LambdaForm::Uncorrected,
            },
        }
    }

    pub fn tolerances(&self) -> Tolerances<f64> {
        Tolerances { rel: self.integrator.rtol, abs: self.integrator.atol }
    }

    pub fn geometry(&self) -> Geometry<f64> {
        Geometry::new(self.atoms.r12, self.atoms.alpha).with_focus_offset(self.focus.offset)
    }

    /// Builds the pulse, reading table or spectrum files. Returns a note for
    /// the user when a spectrum had to be made real.
    pub fn pulse(&self) -> Result<(PulseSpec<f64>, Option<String>)> {
        let om = self.pulse.omega;
        if let Some(path) = &self.pulse.table {
            let file = std::fs::File::open(path).map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
            return Ok((PulseSpec::tabulated(om, PulseTable::from_csv(file)?)?, None));
        }
        if let Some(path) = &self.pulse.spectrum {
            let file = std::fs::File::open(path).map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
            let samples = spectrum_from_csv(file)?;
            let [t0, t1] = self.pulse.spectrum_window.unwrap_or([-40.0 / om, 40.0 / om]);
            let grid = TimeGrid::new(t0, t1, self.pulse.spectrum_samples)?;
            let sp = pulse_from_spectrum(&samples, self.focus.gamma0, &grid, om)?;
            let note = format!(
                "spectrum pulse: renormalization {:.6e}, imaginary residual {:.3e}",
                sp.renormalization, sp.imaginary_residual
            );
            return Ok((sp.pulse, Some(note)));
        }
        Ok((PulseSpec::from_family(self.family()?, om)?, None))
    }

    pub fn system(&self) -> Result<(SystemParams<f64>, Option<String>)> {
        let geom = self.geometry();
        let mut rates =
            self.coupling_model().build_rates((self.atoms.gamma1, self.atoms.gamma2), &geom, self.focus.gamma0)?;
        if let Some(g) = self.focus.gamma10 {
            rates.gamma10 = g;
        }
        if let Some(g) = self.focus.gamma20 {
            rates.gamma20 = g;
        }
        let (pulse, note) = self.pulse()?;
        Ok((SystemParams::new(rates, pulse, geom)?, note))
    }

    pub fn integrate_options(&self) -> Result<IntegrateOptions<f64>> {
        let t_span = match (self.integrator.t_start, self.integrator.t_end) {
            (None, None) => None,
            (Some(a), Some(b)) => Some((a, b)),
            _ => return Err(bad("integrator.t_start and integrator.t_end must be given together")),
        };
        Ok(IntegrateOptions { t_span, tol: self.tolerances(), samples: self.output.samples })
    }

    pub fn sweep_plan(&self) -> Result<SweepPlan> {
        let omegas = match &self.sweep.omegas {
            Some(v) => v.clone(),
            None if self.sweep == SweepSection::default() => default_omegas(),
            None => log_grid(self.sweep.omega_min, self.sweep.omega_max, self.sweep.omega_points)?,
        };
        let plan = SweepPlan {
            settings: CellSettings {
                family: self.family()?,
                alpha: self.atoms.alpha,
                gammas: (self.atoms.gamma1, self.atoms.gamma2),
                gamma0: self.focus.gamma0,
                focus_offset: self.focus.offset,
                coupling: self.coupling_model(),
                tol: self.tolerances(),
                samples: self.output.samples,
            },
            omegas,
            r12s: self.sweep.r12s.clone(),
        };
        plan.validate()?;
        Ok(plan)
    }

    /// Linear separation grid for `couplings`.
    pub fn scan_grid(&self) -> Result<Vec<f64>> {
        let cutoff = self.couplings.delta_min / std::f64::consts::TAU;
        // nudged so rounding cannot push 2π r below the cutoff
        let lo = self.scan.r12_min.unwrap_or(cutoff * (1.0 + 1e-12));
        let hi = self.scan.r12_max;
        if !(hi > lo && lo > 0.0) {
            return Err(bad(format!("scan range [{lo}, {hi}] is empty")));
        }
        let n = self.scan.points;
        Ok((0..n).map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect())
    }
}
