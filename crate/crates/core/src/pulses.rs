//! Single-photon waveforms ξ(t) and the spectrum → waveform transform.
//!
//! Time is measured in units of 1/γ and the bandwidth Ω in units of γ. Both
//! analytic families are referenced to `t = 0` (rising edge, Gaussian peak)
//! and normalised so that `∫ |ξ|² dt = 1`.

use std::io::Read;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{FftNum, FftPlanner};

use crate::error::{Error, Result};
use crate::num::{lit, Real};
use crate::quad::{integrate_lower, integrate_real_line, QuadOptions};

/// Allowed deviation of a tabulated pulse from unit norm.
pub const TABLE_NORM_TOL: f64 = 1e-6;
/// Minimum number of table samples per `1/Ω`.
pub const SAMPLES_PER_INVERSE_BANDWIDTH: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PulseFamily {
    Rising,
    Gaussian,
    Tabulated,
}

impl PulseFamily {
    pub fn name(self) -> &'static str {
        match self {
            PulseFamily::Rising => "rising",
            PulseFamily::Gaussian => "gaussian",
            PulseFamily::Tabulated => "tabulated",
        }
    }
}

impl std::fmt::Display for PulseFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for PulseFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rising" => Ok(PulseFamily::Rising),
            "gaussian" => Ok(PulseFamily::Gaussian),
            "tabulated" => Ok(PulseFamily::Tabulated),
            other => Err(Error::InvalidInput(format!("unknown pulse family '{other}'"))),
        }
    }
}

/// Sampled real waveform, linearly interpolated and zero outside its support.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseTable<T> {
    times: Arc<[T]>,
    values: Arc<[T]>,
}

impl<T: Real> PulseTable<T> {
    pub fn new(times: Vec<T>, values: Vec<T>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::InvalidInput(format!(
                "pulse table has {} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.len() < 2 {
            return Err(Error::InvalidInput("pulse table needs at least two samples".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("pulse table times must be strictly increasing".into()));
        }
        if values.iter().chain(times.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("pulse table contains non-finite entries".into()));
        }
        Ok(Self { times: times.into(), values: values.into() })
    }

    /// Reads a two-column `t, xi` CSV; a header row is optional.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let rows = read_numeric_csv(reader, 2)?;
        let (times, values) = rows.into_iter().map(|r| (lit::<T>(r[0]), lit::<T>(r[1]))).unzip();
        Self::new(times, values)
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn support(&self) -> (T, T) {
        (self.times[0], self.times[self.times.len() - 1])
    }

    pub fn max_spacing(&self) -> T {
        self.times.windows(2).map(|w| w[1] - w[0]).fold(T::zero(), T::max)
    }

    pub fn interpolate(&self, t: T) -> T {
        let (lo, hi) = self.support();
        if t < lo || t > hi {
            return T::zero();
        }
        let idx = self.times.partition_point(|&x| x <= t);
        if idx == 0 {
            return self.values[0];
        }
        if idx >= self.times.len() {
            return self.values[self.values.len() - 1];
        }
        let (t0, t1) = (self.times[idx - 1], self.times[idx]);
        let (v0, v1) = (self.values[idx - 1], self.values[idx]);
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    /// Exact `∫ |ξ|² dt` of the piecewise-linear interpolant.
    pub fn norm(&self) -> T {
        let third = T::one() / lit(3.0);
        self.times
            .windows(2)
            .zip(self.values.windows(2))
            .fold(T::zero(), |acc, (t, v)| acc + (t[1] - t[0]) * (v[0] * v[0] + v[0] * v[1] + v[1] * v[1]) * third)
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self { times: self.times.clone(), values: self.values.iter().map(|&v| v * factor).collect() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Waveform<T> {
    /// `√Ω e^{Ωt/2}` for `t ≤ 0`, zero afterwards.
    Rising,
    /// `(Ω²/2π)^{1/4} e^{-Ω²t²/4}`.
    Gaussian,
    Tabulated(PulseTable<T>),
}

/// Waveform family plus bandwidth.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSpec<T> {
    pub bandwidth: T,
    pub waveform: Waveform<T>,
}

impl<T: Real> PulseSpec<T> {
    pub fn rising(bandwidth: T) -> Result<Self> {
        Self::analytic(bandwidth, Waveform::Rising)
    }

    pub fn gaussian(bandwidth: T) -> Result<Self> {
        Self::analytic(bandwidth, Waveform::Gaussian)
    }

    pub fn from_family(family: PulseFamily, bandwidth: T) -> Result<Self> {
        match family {
            PulseFamily::Rising => Self::rising(bandwidth),
            PulseFamily::Gaussian => Self::gaussian(bandwidth),
            PulseFamily::Tabulated => {
                Err(Error::InvalidInput("tabulated pulses need a table; use PulseSpec::tabulated".into()))
            }
        }
    }

    fn analytic(bandwidth: T, waveform: Waveform<T>) -> Result<Self> {
        check_bandwidth(bandwidth)?;
        Ok(Self { bandwidth, waveform })
    }

    /// Tabulated pulse; the table must resolve the bandwidth and carry unit norm.
    pub fn tabulated(bandwidth: T, table: PulseTable<T>) -> Result<Self> {
        check_bandwidth(bandwidth)?;
        let max_dt = T::one() / (lit::<T>(SAMPLES_PER_INVERSE_BANDWIDTH) * bandwidth);
        if table.max_spacing() > max_dt * (T::one() + lit(1e-9)) {
            return Err(Error::Nyquist(format!(
                "table spacing {} exceeds 1/(20 Omega) = {}",
                table.max_spacing().as_f64(),
                max_dt.as_f64()
            )));
        }
        let spec = Self { bandwidth, waveform: Waveform::Tabulated(table) };
        norm_check(&spec)?;
        Ok(spec)
    }

    pub fn family(&self) -> PulseFamily {
        match self.waveform {
            Waveform::Rising => PulseFamily::Rising,
            Waveform::Gaussian => PulseFamily::Gaussian,
            Waveform::Tabulated(_) => PulseFamily::Tabulated,
        }
    }

    /// ξ(t). The rising family is left-continuous at its edge.
    pub fn amplitude(&self, t: T) -> T {
        let om = self.bandwidth;
        match &self.waveform {
            Waveform::Rising => {
                if t <= T::zero() {
                    om.sqrt() * (om * t / lit(2.0)).exp()
                } else {
                    T::zero()
                }
            }
            Waveform::Gaussian => (om * om / T::TAU()).powf(lit(0.25)) * (-(om * om * t * t) / lit(4.0)).exp(),
            Waveform::Tabulated(table) => table.interpolate(t),
        }
    }

    /// Right-hand limit of ξ at `t`; differs from [`amplitude`](Self::amplitude)
    /// only at the rising edge.
    pub fn amplitude_from_right(&self, t: T) -> T {
        match self.waveform {
            Waveform::Rising if t >= T::zero() => T::zero(),
            _ => self.amplitude(t),
        }
    }

    /// Times at which ξ has a derivative discontinuity.
    pub fn breakpoints(&self) -> Vec<T> {
        match self.waveform {
            Waveform::Rising => vec![T::zero()],
            _ => Vec::new(),
        }
    }

    /// Start time at which the drive mass is negligible (rising: `-40/Ω`,
    /// Gaussian: `-10/Ω`, table: first sample).
    pub fn default_start(&self) -> T {
        match &self.waveform {
            Waveform::Rising => lit::<T>(-40.0) / self.bandwidth,
            Waveform::Gaussian => lit::<T>(-10.0) / self.bandwidth,
            Waveform::Tabulated(table) => table.support().0,
        }
    }

    /// Time after which the drive vanishes or is negligible.
    pub fn drive_end(&self) -> T {
        match &self.waveform {
            Waveform::Rising | Waveform::Gaussian => T::zero(),
            Waveform::Tabulated(table) => table.support().1,
        }
    }
}

fn check_bandwidth<T: Real>(bandwidth: T) -> Result<()> {
    if !(bandwidth > T::zero()) || !bandwidth.is_finite() {
        return Err(Error::InvalidInput(format!("bandwidth must be finite and > 0, got {}", bandwidth.as_f64())));
    }
    Ok(())
}

/// `∫ |ξ(t)|² dt`: adaptive quadrature for the analytic families, the exact
/// interpolant integral for tables (erroring when off by more than 1e-6).
pub fn norm_check<T: Real>(spec: &PulseSpec<T>) -> Result<T> {
    let om = spec.bandwidth;
    let opts = QuadOptions::new(lit(1e-15), lit(1e-13));
    // Integrate in the scaled time tau = Omega t.
    match &spec.waveform {
        Waveform::Rising => {
            let q = integrate_lower(|tau: T| spec.amplitude(tau / om).powi(2), T::zero(), opts)?;
            Ok(q.value / om)
        }
        Waveform::Gaussian => {
            let q = integrate_real_line(|tau: T| spec.amplitude(tau / om).powi(2), T::zero(), opts)?;
            Ok(q.value / om)
        }
        Waveform::Tabulated(table) => {
            let norm = table.norm();
            if (norm - T::one()).abs() > lit(TABLE_NORM_TOL) {
                return Err(Error::Normalization { norm: norm.as_f64(), tol: TABLE_NORM_TOL });
            }
            Ok(norm)
        }
    }
}

/// One sample `(ω_k - ω, f(ω_k))` of the spectral amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumSample<T> {
    pub detuning: T,
    pub value: Complex<T>,
}

/// Reads a three-column `omega_detuning, f_real, f_imag` CSV.
pub fn spectrum_from_csv<T: Real, R: Read>(reader: R) -> Result<Vec<SpectrumSample<T>>> {
    Ok(read_numeric_csv(reader, 3)?
        .into_iter()
        .map(|r| SpectrumSample { detuning: lit(r[0]), value: Complex::new(lit(r[1]), lit(r[2])) })
        .collect())
}

/// Uniform time grid, both ends included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid<T> {
    pub start: T,
    pub end: T,
    pub samples: usize,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(start: T, end: T, samples: usize) -> Result<Self> {
        if samples < 2 || !(end > start) {
            return Err(Error::InvalidInput(format!(
                "time grid needs end > start and >= 2 samples (got [{}, {}], {samples})",
                start.as_f64(),
                end.as_f64()
            )));
        }
        Ok(Self { start, end, samples })
    }

    pub fn step(&self) -> T {
        (self.end - self.start) / lit((self.samples - 1) as f64)
    }

    pub fn points(&self) -> Vec<T> {
        let dt = self.step();
        (0..self.samples)
            .map(|i| if i + 1 == self.samples { self.end } else { self.start + dt * lit(i as f64) })
            .collect()
    }
}

const MAX_FFT_LEN: usize = 1 << 24;

/// Evaluates `ξ(t) = (√γ₀/2π) ∫ f(Δ) e^{-iΔt} dΔ` (trapezoidal rule on the
/// uniform spectral grid) at the points of `grid`.
///
/// The discrete transform is periodic in `t` with period `2π/dΔ`; a grid
/// reaching beyond half that period is rejected.
pub fn spectrum_waveform<T: Real + FftNum>(
    samples: &[SpectrumSample<T>],
    gamma0: T,
    grid: &TimeGrid<T>,
) -> Result<Vec<Complex<T>>> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("empty spectrum".into()));
    }
    if !(gamma0 > T::zero()) {
        return Err(Error::InvalidInput("gamma0 must be > 0".into()));
    }
    let pref = gamma0.sqrt() / T::TAU();
    if samples.len() == 1 {
        // A lone sample is a single plane wave; use unit spectral weight.
        let s = samples[0];
        return Ok(grid
            .points()
            .into_iter()
            .map(|t| s.value * Complex::new(T::zero(), -s.detuning * t).exp() * pref)
            .collect());
    }
    let d_det = samples[1].detuning - samples[0].detuning;
    if !(d_det > T::zero()) {
        return Err(Error::InvalidInput("spectral detunings must be increasing".into()));
    }
    let uniform_tol = lit::<T>(1e-6) * d_det;
    if samples.windows(2).any(|w| ((w[1].detuning - w[0].detuning) - d_det).abs() > uniform_tol) {
        return Err(Error::InvalidInput("spectral grid must be uniform".into()));
    }
    let half_period = T::PI() / d_det;
    let reach = grid.start.abs().max(grid.end.abs());
    if reach >= half_period {
        return Err(Error::Nyquist(format!(
            "spectral spacing {} aliases beyond |t| = {}; requested times reach {}",
            d_det.as_f64(),
            half_period.as_f64(),
            reach.as_f64()
        )));
    }

    // FFT length: at least the sample count and fine enough that linear
    // interpolation onto the requested grid is accurate.
    let target_dt = grid.step() / lit(8.0);
    let needed = (T::TAU() / (d_det * target_dt)).ceil().to_usize().unwrap_or(usize::MAX);
    let n = needed.max(samples.len()).next_power_of_two();
    if n > MAX_FFT_LEN {
        return Err(Error::InvalidInput(format!("transform would need {n} points (limit {MAX_FFT_LEN})")));
    }
    let mut buf = vec![Complex::new(T::zero(), T::zero()); n];
    let last = samples.len() - 1;
    for (k, s) in samples.iter().enumerate() {
        let w = if k == 0 || k == last { lit(0.5) } else { T::one() };
        buf[k] = s.value * w;
    }
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let det0 = samples[0].detuning;
    let dt = T::TAU() / (lit::<T>(n as f64) * d_det);
    let node = |idx: i64| -> Complex<T> {
        let wrapped = idx.rem_euclid(n as i64) as usize;
        let t = dt * lit(idx as f64);
        buf[wrapped] * Complex::new(T::zero(), -det0 * t).exp() * (pref * d_det)
    };
    Ok(grid
        .points()
        .into_iter()
        .map(|t| {
            let pos = t / dt;
            let i0 = pos.floor();
            let frac = pos - i0;
            let i0 = i0.to_i64().unwrap_or(0);
            node(i0) * (T::one() - frac) + node(i0 + 1) * frac
        })
        .collect())
}

/// Tabulated pulse obtained from a spectral amplitude.
#[derive(Debug, Clone)]
pub struct SpectrumPulse<T> {
    pub pulse: PulseSpec<T>,
    /// Factor applied to reach unit norm.
    pub renormalization: T,
    /// Raw complex waveform on the grid, before phase removal and rescaling.
    pub waveform: Vec<Complex<T>>,
    /// `‖Im ξ‖ / ‖ξ‖` after removing the global phase.
    pub imaginary_residual: T,
}

/// Transforms a spectrum into a real tabulated [`PulseSpec`]: the global phase
/// (the phase at peak `|ξ|`) is removed, the real part kept, and the result
/// renormalised.
pub fn pulse_from_spectrum<T: Real + FftNum>(
    samples: &[SpectrumSample<T>],
    gamma0: T,
    grid: &TimeGrid<T>,
    bandwidth: T,
) -> Result<SpectrumPulse<T>> {
    let waveform = spectrum_waveform(samples, gamma0, grid)?;
    let peak =
        waveform
            .iter()
            .copied()
            .fold(Complex::new(T::zero(), T::zero()), |acc, z| if z.norm() > acc.norm() { z } else { acc });
    if peak.norm() == T::zero() {
        return Err(Error::InvalidInput("spectrum transforms to a zero waveform".into()));
    }
    let unphase = peak.conj() / peak.norm();
    let rotated: Vec<Complex<T>> = waveform.iter().map(|&z| z * unphase).collect();
    let (im2, tot2) = rotated.iter().fold((T::zero(), T::zero()), |(a, b), z| (a + z.im * z.im, b + z.norm_sqr()));
    let raw = PulseTable::new(grid.points(), rotated.iter().map(|z| z.re).collect())?;
    let renormalization = T::one() / raw.norm().sqrt();
    let table = raw.scaled(renormalization);
    let pulse = PulseSpec::tabulated(bandwidth, table)?;
    Ok(SpectrumPulse { pulse, renormalization, waveform, imaginary_residual: (im2 / tot2).sqrt() })
}

fn read_numeric_csv<R: Read>(reader: R, columns: usize) -> Result<Vec<Vec<f64>>> {
    let mut rdr =
        csv::ReaderBuilder::new().has_headers(false).comment(Some(b'#')).trim(csv::Trim::All).from_reader(reader);
    let mut rows = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
        if record.len() < columns {
            return Err(Error::InvalidInput(format!(
                "csv row {} has {} columns, expected {columns}",
                line + 1,
                record.len()
            )));
        }
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().take(columns).map(str::parse::<f64>).collect();
        match parsed {
            Ok(v) => rows.push(v),
            Err(_) if line == 0 => continue, // header
            Err(e) => return Err(Error::InvalidInput(format!("csv row {}: {e}", line + 1))),
        }
    }
    Ok(rows)
}
