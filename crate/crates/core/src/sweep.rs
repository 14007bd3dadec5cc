//! Peak entanglement over a grid of pulse bandwidths and separations.

use rayon::prelude::*;
use serde::Serialize;

use crate::couplings::{CouplingModel, Geometry};
use crate::dynamics::{integrate, IntegrateOptions, SystemParams, Tolerances, DEFAULT_SAMPLES};
use crate::error::{Error, Result};
use crate::optimize::golden_section_max;
use crate::pulses::{PulseFamily, PulseSpec};
use crate::tomography::{entanglement_series, Peak};

/// Default separations, in units of λ.
pub const DEFAULT_R12S: [f64; 6] = [0.05, 0.1, 0.15, 0.2, 0.3, 0.5];

/// Default bandwidth range `[lo, hi]` and point count.
pub const DEFAULT_OMEGA_RANGE: (f64, f64, usize) = (0.3, 8.0, 60);

/// `n` log-spaced points on `[lo, hi]`, end points exact.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) || n < 2 {
        return Err(Error::InvalidInput(format!("log grid needs 0 < lo < hi and n >= 2, got [{lo}, {hi}], n = {n}")));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..n)
        .map(|i| match i {
            0 => lo,
            _ if i == n - 1 => hi,
            _ => (a + (b - a) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect())
}

pub fn default_omegas() -> Vec<f64> {
    let (lo, hi, n) = DEFAULT_OMEGA_RANGE;
    log_grid(lo, hi, n).expect("default grid is valid")
}

/// Everything one cell needs besides `(Ω, r12)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSettings {
    pub family: PulseFamily,
    pub alpha: f64,
    pub gammas: (f64, f64),
    pub gamma0: f64,
    pub focus_offset: f64,
    pub coupling: CouplingModel<f64>,
    pub tol: Tolerances<f64>,
    pub samples: usize,
}

impl Default for CellSettings {
    fn default() -> Self {
        Self {
            family: PulseFamily::Rising,
            alpha: std::f64::consts::FRAC_PI_2,
            gammas: (1.0, 1.0),
            gamma0: 1.0,
            focus_offset: 0.0,
            coupling: CouplingModel::default(),
            tol: Tolerances::default(),
            samples: DEFAULT_SAMPLES,
        }
    }
}

impl CellSettings {
    pub fn params(&self, omega: f64, r12: f64) -> Result<SystemParams<f64>> {
        let geom = Geometry::new(r12, self.alpha).with_focus_offset(self.focus_offset);
        let rates = self.coupling.build_rates(self.gammas, &geom, self.gamma0)?;
        SystemParams::new(rates, PulseSpec::from_family(self.family, omega)?, geom)
    }

    /// Peak EoF of one full trajectory.
    pub fn peak(&self, omega: f64, r12: f64) -> Result<Peak<f64>> {
        let p = self.params(omega, r12)?;
        let opts = IntegrateOptions { t_span: None, tol: self.tol, samples: self.samples };
        Ok(entanglement_series(&integrate(&p, &opts)?)?.peak)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub settings: CellSettings,
    pub omegas: Vec<f64>,
    pub r12s: Vec<f64>,
}

fn check_grid(name: &str, g: &[f64]) -> Result<()> {
    if g.is_empty() {
        return Err(Error::InvalidInput(format!("{name} grid is empty")));
    }
    if g.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::InvalidInput(format!("{name} grid has non-positive or non-finite entries")));
    }
    if g.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput(format!("{name} grid is not strictly increasing")));
    }
    Ok(())
}

impl SweepPlan {
    /// Default grids for one family.
    pub fn default_for(family: PulseFamily) -> Self {
        Self {
            settings: CellSettings { family, ..Default::default() },
            omegas: default_omegas(),
            r12s: DEFAULT_R12S.to_vec(),
        }
    }

    /// Grid shape checks. Separations below the cutoff are not rejected here;
    /// those cells come back poisoned.
    pub fn validate(&self) -> Result<()> {
        check_grid("omega", &self.omegas)?;
        check_grid("r12", &self.r12s)?;
        if self.settings.family == PulseFamily::Tabulated {
            return Err(Error::InvalidInput("sweeps support the rising and gaussian families only".into()));
        }
        if self.settings.samples < 2 {
            return Err(Error::InvalidInput("samples must be >= 2".into()));
        }
        Ok(())
    }
}

/// One grid cell; `error` is set for poisoned cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub peak_eof: f64,
    pub peak_time: f64,
    pub error: Option<String>,
}

impl Cell {
    fn from_result(r: Result<Peak<f64>>) -> Self {
        match r {
            Ok(p) => Cell { peak_eof: p.eof, peak_time: p.time, error: None },
            Err(e) => Cell { peak_eof: f64::NAN, peak_time: f64::NAN, error: Some(e.to_string()) },
        }
    }

    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }

    pub fn status(&self) -> String {
        match &self.error {
            None => "ok".into(),
            Some(e) => format!("error: {e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub family: PulseFamily,
    pub omegas: Vec<f64>,
    pub r12s: Vec<f64>,
    /// `cells[i][j]` for `r12s[i]`, `omegas[j]`.
    pub cells: Vec<Vec<Cell>>,
}

/// Long-format row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub family: String,
    pub r12: f64,
    pub omega: f64,
    pub peak_eof: f64,
    pub peak_time: f64,
    pub status: String,
}

/// Best bandwidth along one separation row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowOptimum {
    pub index: usize,
    pub omega: f64,
    pub peak_eof: f64,
    /// Neither end of the bandwidth grid.
    pub interior: bool,
}

impl SweepResult {
    pub fn peak_matrix(&self) -> Vec<Vec<f64>> {
        self.cells.iter().map(|row| row.iter().map(|c| c.peak_eof).collect()).collect()
    }

    pub fn poisoned(&self) -> usize {
        self.cells.iter().flatten().filter(|c| !c.is_ok()).count()
    }

    /// Argmax over Ω for row `i`, ignoring poisoned cells.
    pub fn row_optimum(&self, i: usize) -> Option<RowOptimum> {
        let row = self.cells.get(i)?;
        let (index, cell) =
            row.iter().enumerate().filter(|(_, c)| c.is_ok()).fold(None, |best: Option<(usize, &Cell)>, (j, c)| {
                match best {
                    Some((_, b)) if b.peak_eof >= c.peak_eof => best,
                    _ => Some((j, c)),
                }
            })?;
        Some(RowOptimum {
            index,
            omega: self.omegas[index],
            peak_eof: cell.peak_eof,
            interior: index > 0 && index + 1 < row.len(),
        })
    }

    pub fn optima(&self) -> Vec<Option<RowOptimum>> {
        (0..self.r12s.len()).map(|i| self.row_optimum(i)).collect()
    }

    pub fn records(&self) -> Vec<SweepRecord> {
        let mut out = Vec::with_capacity(self.r12s.len() * self.omegas.len());
        for (i, &r12) in self.r12s.iter().enumerate() {
            for (j, &omega) in self.omegas.iter().enumerate() {
                let c = &self.cells[i][j];
                out.push(SweepRecord {
                    family: self.family.name().into(),
                    r12,
                    omega,
                    peak_eof: c.peak_eof,
                    peak_time: c.peak_time,
                    status: c.status(),
                });
            }
        }
        out
    }
}

/// Evaluates every cell, in parallel on `workers` threads (`None`: all
/// available). Results do not depend on the worker count.
pub fn run_sweep(plan: &SweepPlan, workers: Option<usize>) -> Result<SweepResult> {
    plan.validate()?;
    let (nr, no) = (plan.r12s.len(), plan.omegas.len());
    let work = || -> Vec<Cell> {
        (0..nr * no)
            .into_par_iter()
            .map(|k| Cell::from_result(plan.settings.peak(plan.omegas[k % no], plan.r12s[k / no])))
            .collect()
    };
    let flat = match workers {
        Some(0) => return Err(Error::InvalidInput("workers must be >= 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };
    let cells = flat.chunks(no).map(<[Cell]>::to_vec).collect();
    Ok(SweepResult { family: plan.settings.family, omegas: plan.omegas.clone(), r12s: plan.r12s.clone(), cells })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalBandwidth {
    pub omega: f64,
    pub peak_eof: f64,
    /// Set when the maximum sits on the bracket edge.
    pub warning: Option<String>,
}

/// Relative tolerance on Ω for [`find_optimal_bandwidth`].
pub const OMEGA_REL_TOL: f64 = 1e-3;

/// Golden-section maximisation of any objective over a bracket.
pub fn maximize_over_bracket<F>(mut objective: F, bracket: (f64, f64), rel_tol: f64) -> Result<OptimalBandwidth>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (lo, hi) = bracket;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::InvalidInput(format!("bad bracket [{lo}, {hi}]")));
    }
    let mut first_err = None;
    let m = golden_section_max(
        |x| match objective(x) {
            Ok(v) => v,
            Err(e) => {
                first_err.get_or_insert(e);
                f64::NEG_INFINITY
            }
        },
        lo,
        hi,
        rel_tol,
    );
    if let Some(e) = first_err {
        return Err(e);
    }
    let warning = m.on_boundary.then(|| format!("maximum at bracket boundary omega = {} (bracket [{lo}, {hi}])", m.x));
    Ok(OptimalBandwidth { omega: m.x, peak_eof: m.value, warning })
}

/// Bandwidth maximising the peak EoF at separation `r12`.
pub fn find_optimal_bandwidth(settings: &CellSettings, r12: f64, bracket: (f64, f64)) -> Result<OptimalBandwidth> {
    maximize_over_bracket(|om| Ok(settings.peak(om, r12)?.eof), bracket, OMEGA_REL_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_plan() -> SweepPlan {
        SweepPlan {
            settings: CellSettings { samples: 400, ..Default::default() },
            omegas: vec![1.0, 2.0],
            r12s: vec![0.1, 0.2],
        }
    }

    #[test]
    fn log_grid_endpoints() {
        let g = default_omegas();
        assert_eq!(g.len(), 60);
        assert_eq!(g[0], 0.3);
        assert_eq!(g[59], 8.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert!(log_grid(1.0, 1.0, 3).is_err());
    }

    #[test]
    fn plan_validation() {
        let mut p = small_plan();
        p.omegas = vec![2.0, 1.0];
        assert!(p.validate().is_err());
        p.omegas = vec![];
        assert!(p.validate().is_err());
        let mut p = small_plan();
        p.settings.family = PulseFamily::Tabulated;
        assert!(p.validate().is_err());
    }

    #[test]
    fn single_cell_matches_direct_call() {
        let p = SweepPlan { omegas: vec![1.77], r12s: vec![0.2], ..small_plan() };
        let r = run_sweep(&p, Some(1)).unwrap();
        let direct = p.settings.peak(1.77, 0.2).unwrap();
        assert_eq!(r.cells[0][0].peak_eof, direct.eof);
        assert_eq!(r.cells[0][0].peak_time, direct.time);
    }

    #[test]
    fn independent_of_worker_count() {
        let p = small_plan();
        assert_eq!(run_sweep(&p, Some(1)).unwrap(), run_sweep(&p, Some(3)).unwrap());
        assert!(run_sweep(&p, Some(0)).is_err());
    }

    #[test]
    fn below_cutoff_cell_is_poisoned() {
        let p = SweepPlan { r12s: vec![1e-5, 0.2], ..small_plan() };
        let r = run_sweep(&p, None).unwrap();
        assert_eq!(r.poisoned(), 2);
        assert!(r.cells[0].iter().all(|c| c.status().starts_with("error: ") && c.status().contains("delta_min")));
        assert!(r.cells[1].iter().all(Cell::is_ok));
        assert!(r.row_optimum(0).is_none());
        assert_eq!(r.records().len(), 4);
    }

    #[test]
    fn monotone_objective_warns() {
        let m = maximize_over_bracket(Ok, (0.5, 5.0), 1e-3).unwrap();
        assert_eq!(m.omega, 5.0);
        assert!(m.warning.is_some());
        let m = maximize_over_bracket(|x| Ok(-(x - 2.0).powi(2)), (0.5, 5.0), 1e-6).unwrap();
        assert!((m.omega - 2.0).abs() < 1e-5);
        assert!(m.warning.is_none());
    }

    #[test]
    fn objective_error_propagates() {
        let r = maximize_over_bracket(|_| Err(Error::Domain("x".into())), (0.5, 5.0), 1e-3);
        assert!(r.is_err());
    }
}
