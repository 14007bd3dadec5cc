#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

//! End-to-end acceptance checks, one report line per criterion.
//!
//! Runs without the libtest harness so the report is always printed; the
//! process exits non-zero when any criterion fails.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::time::{Duration, Instant};

use entsim::couplings::{build_rates, CouplingModel, Geometry};
use entsim::dynamics::{integrate, DynamicState, IntegrateOptions, SystemParams, Trajectory};
use entsim::oracle::complex::{spurious_imaginary, to_real};
use entsim::oracle::{integrate_complex, min_eigenvalue, rate_integral_quadrature, single_atom_analytic, to_matrix};
use entsim::oracle::{FixedStep, RateKind};
use entsim::pulses::{norm_check, PulseFamily, PulseSpec};
use entsim::sweep::{default_omegas, find_optimal_bandwidth, run_sweep, CellSettings, SweepPlan};
use entsim::tomography::{concurrence, entanglement_series, reconstruct};

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

const R12: f64 = 0.2;
const OMEGA_RISING: f64 = 1.77;
const OMEGA_GAUSSIAN: f64 = 2.55;

fn params(family: PulseFamily, omega: f64, r12: f64) -> SystemParams<f64> {
    let geom = Geometry::new(r12, FRAC_PI_2);
    let rates = build_rates((1.0, 1.0), &geom, 1.0).expect("rates");
    SystemParams::new(rates, PulseSpec::from_family(family, omega).expect("pulse"), geom).expect("params")
}

fn fig1_configs() -> [(PulseFamily, f64); 2] {
    [(PulseFamily::Rising, OMEGA_RISING), (PulseFamily::Gaussian, OMEGA_GAUSSIAN)]
}

fn run(p: &SystemParams<f64>) -> Trajectory<f64> {
    integrate(p, &IntegrateOptions::default()).expect("integration")
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c1_pulse_norm() -> Outcome {
    let mut worst = 0.0_f64;
    for family in [PulseFamily::Rising, PulseFamily::Gaussian] {
        for om in [0.1, 1.0, 10.0] {
            let n: f64 = norm_check(&PulseSpec::from_family(family, om).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            worst = worst.max((n - 1.0).abs());
        }
    }
    check(worst <= 1e-10, format!("max |norm - 1| = {worst:.2e}"))
}

fn c2_rate_oracle() -> Outcome {
    let mut worst = 0.0_f64;
    for delta in [0.5, 1.0, 2.0, 5.0] {
        for alpha in [0.0, FRAC_PI_4, FRAC_PI_2] {
            let m = CouplingModel::default();
            let pairs = [
                (m.gamma_cross(1.0, 1.0, delta, alpha), RateKind::GammaCross),
                (m.lambda_cross(1.0, 1.0, delta, alpha), RateKind::LambdaCross),
            ];
            for (closed, kind) in pairs {
                let closed = closed.map_err(|e| e.to_string())?;
                let quad = rate_integral_quadrature(kind, 1.0, 1.0, delta, alpha).map_err(|e| e.to_string())?.value;
                worst = worst.max((closed - quad).abs() / closed.abs().max(1e-12));
            }
        }
    }
    check(worst <= 1e-6, format!("max relative deviation {worst:.2e} over 12 (delta, alpha) points x 2 rates"))
}

fn c3_small_separation() -> Outcome {
    let m = CouplingModel { delta_min: 1e-5, ..Default::default() };
    let mut worst = 0.0_f64;
    for alpha in [0.0, FRAC_PI_4, FRAC_PI_2] {
        worst = worst.max((m.gamma_cross(1.0, 1.0, 1e-4, alpha).map_err(|e| e.to_string())? - 1.0).abs());
    }
    check(worst <= 1e-6, format!("max |gamma12/gamma - 1| = {worst:.2e} at delta = 1e-4 (cutoff lowered to 1e-5)"))
}

fn c4_stationarity() -> Outcome {
    let mut p = params(PulseFamily::Rising, 1.0, R12);
    p.rates.gamma10 = 0.0;
    p.rates.gamma20 = 0.0;
    let tr = integrate(&p, &IntegrateOptions { t_span: Some((0.0, 30.0)), ..Default::default() })
        .map_err(|e| e.to_string())?;
    let g = DynamicState::ground();
    let worst = tr.states.iter().map(|s| s.max_abs_diff(&g)).fold(0.0, f64::max);
    check(worst <= 1e-10, format!("max deviation from ground {worst:.2e}"))
}

fn c5_single_excitation() -> Outcome {
    let tr = run(&params(PulseFamily::Rising, OMEGA_RISING, R12));
    let (mut defect, mut rho11) = (0.0_f64, 0.0_f64);
    for s in &tr.states {
        defect = defect.max(s.double_excitation_defect().abs());
        rho11 = rho11.max(reconstruct(s).map_err(|e| e.to_string())?.populations()[0]);
    }
    check(
        defect <= 1e-8 && rho11 <= 1e-8,
        format!("max |1+m1+m2+zz| = {defect:.2e}, max rho11 = {rho11:.2e} over {} samples", tr.len()),
    )
}

fn c6_physicality() -> Outcome {
    let (mut tr_dev, mut min_eig) = (0.0_f64, f64::INFINITY);
    for (family, om) in fig1_configs() {
        for s in &run(&params(family, om, R12)).states {
            let rho = reconstruct(s).map_err(|e| e.to_string())?;
            tr_dev = tr_dev.max((rho.trace().re - 1.0).abs()).max(rho.trace().im.abs());
            min_eig = min_eig.min(min_eigenvalue(&to_matrix(&rho)));
        }
    }
    check(tr_dev <= 1e-9 && min_eig >= -1e-9, format!("max |tr - 1| = {tr_dev:.2e}, min eigenvalue = {min_eig:.2e}"))
}

fn c7_single_atom() -> Outcome {
    let mut worst = 0.0_f64;
    let mut perfect = f64::NAN;
    for (om, g10) in [(1.0, 1.0), (1.0, 0.5), (0.5, 0.9), (3.0, 0.7)] {
        let geom = Geometry::new(R12, FRAC_PI_2);
        let mut rates = build_rates((1.0, 1.0), &geom, 1.0).map_err(|e| e.to_string())?.decoupled();
        rates.gamma10 = g10;
        rates.gamma20 = 0.0;
        let p = SystemParams::new(rates, PulseSpec::rising(om).map_err(|e| e.to_string())?, geom)
            .map_err(|e| e.to_string())?;
        let tr =
            integrate(&p, &IntegrateOptions { t_span: Some((-40.0 / om, 0.0)), samples: 801, ..Default::default() })
                .map_err(|e| e.to_string())?;
        for (t, s) in tr.times.iter().zip(&tr.states) {
            if *t >= -20.0 / om {
                let want = single_atom_analytic(om, 1.0, g10, 1.0, *t).map_err(|e| e.to_string())?;
                worst = worst.max((0.5 * (1.0 + s.m1) - want).abs());
            }
        }
        if om == 1.0 && g10 == 1.0 {
            perfect = 0.5 * (1.0 + tr.states.last().expect("samples").m1);
        }
    }
    check(
        worst <= 1e-7 && (perfect - 1.0).abs() <= 1e-6,
        format!("max |P_e - analytic| = {worst:.2e} on t in [-20/Omega, 0]; perfect-excitation peak {perfect:.10}"),
    )
}

fn c8_complex_equivalence() -> Outcome {
    let (mut worst, mut spurious) = (0.0_f64, 0.0_f64);
    for (k, om) in [1.0, OMEGA_RISING, 4.0].into_iter().enumerate() {
        for r12 in [0.1, 0.2, 0.3] {
            let family = if k % 2 == 0 { PulseFamily::Rising } else { PulseFamily::Gaussian };
            let p = params(family, om, r12);
            let real = run(&p);
            let cx = integrate_complex(&p, &FixedStep::default()).map_err(|e| e.to_string())?;
            spurious = spurious.max(cx.max_spurious_imaginary());
            for (t, y) in cx.times.iter().zip(&cx.states).step_by(7) {
                worst = worst.max(to_real(y).max_abs_diff(&real.state_at(*t)));
                spurious = spurious.max(spurious_imaginary(y));
            }
        }
    }
    check(
        worst <= 1e-8 && spurious <= 1e-8,
        format!("max component deviation {worst:.2e}, max spurious imaginary part {spurious:.2e} on 3x3 (Omega, r12)"),
    )
}

/// Single interior maximum; later samples fall below `1e-4` by the end.
fn single_peak(eof: &[f64]) -> (bool, f64) {
    let imax = (0..eof.len()).max_by(|&a, &b| eof[a].total_cmp(&eof[b])).unwrap_or(0);
    let slack = 1e-12;
    let rising = eof[..=imax].windows(2).all(|w| w[1] >= w[0] - slack);
    let falling = eof[imax..].windows(2).all(|w| w[1] <= w[0] + slack);
    let tail = *eof.last().unwrap_or(&f64::NAN);
    (rising && falling && imax > 0 && imax + 1 < eof.len(), tail)
}

fn c9_fig1() -> Outcome {
    let mut peaks = Vec::new();
    let mut shapes = true;
    let mut tails = Vec::new();
    for (family, om) in fig1_configs() {
        let p = params(family, om, R12);
        let s = entanglement_series(&run(&p)).map_err(|e| e.to_string())?;
        // the default window ends 30/gamma after the drive
        let eof: Vec<f64> = s.points.iter().map(|q| q.eof).collect();
        let (single, tail) = single_peak(&eof);
        shapes &= single && tail < 1e-4;
        tails.push(tail);
        peaks.push(s.peak.eof);
    }
    check(
        peaks[0] > peaks[1] && peaks[1] > 0.0 && shapes,
        format!(
            "peak EoF rising {:.6} > gaussian {:.6}; single peak: {shapes}; EoF at t = 30: {:.1e}, {:.1e}",
            peaks[0], peaks[1], tails[0], tails[1]
        ),
    )
}

fn c10_fig2() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for (family, target) in fig1_configs() {
        let plan = SweepPlan {
            settings: CellSettings { family, samples: 1000, ..Default::default() },
            omegas: default_omegas(),
            r12s: vec![0.1, 0.2, 0.3],
        };
        let res = run_sweep(&plan, None).map_err(|e| e.to_string())?;
        ok &= res.poisoned() == 0;
        for (r12, opt) in res.r12s.iter().zip(res.optima()) {
            let opt = opt.ok_or("row without valid cells")?;
            ok &= opt.interior;
            if *r12 == R12 {
                let refined = find_optimal_bandwidth(&plan.settings, R12, (0.5, 6.0)).map_err(|e| e.to_string())?;
                let rel = (refined.omega - target).abs() / target;
                let grid_rel = (opt.omega - target).abs() / target;
                ok &= rel <= 0.15 && grid_rel <= 0.15 && refined.warning.is_none();
                lines.push(format!(
                    "{family} r12=0.2 optimum grid {:.3} refined {:.4} (target {target}, off {:.1}%)",
                    opt.omega,
                    refined.omega,
                    100.0 * rel
                ));
            }
        }
        lines.push(format!(
            "{family} interior maxima at omega {:?}",
            res.optima().iter().map(|o| o.map(|o| (o.omega * 1e3).round() / 1e3)).collect::<Vec<_>>()
        ));
    }
    check(ok, lines.join("; "))
}

fn c11_distance() -> Outcome {
    let mut favourable = Vec::new();
    let mut lines = Vec::new();
    for family in [PulseFamily::Rising, PulseFamily::Gaussian] {
        let near = entanglement_series(&run(&params(family, 4.0, 0.1))).map_err(|e| e.to_string())?.peak.eof;
        let far = entanglement_series(&run(&params(family, 4.0, 0.2))).map_err(|e| e.to_string())?.peak.eof;
        if far > near {
            favourable.push(family.name());
        }
        lines.push(format!("{family}: r12=0.2 {far:.6} vs r12=0.1 {near:.6}"));
    }
    check(!favourable.is_empty(), format!("{}; holds for [{}]", lines.join(", "), favourable.join(", ")))
}

fn c12_concurrence_identity() -> Outcome {
    let mut worst = 0.0_f64;
    let mut n = 0;
    for (family, om) in [
        (PulseFamily::Rising, OMEGA_RISING),
        (PulseFamily::Gaussian, OMEGA_GAUSSIAN),
        (PulseFamily::Rising, 4.0),
        (PulseFamily::Gaussian, 0.5),
    ] {
        for r12 in [0.1, 0.2, 0.5] {
            for s in &run(&params(family, om, r12)).states {
                let c = concurrence(&reconstruct(s).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
                worst = worst.max((c - s.xx.hypot(s.xy)).abs());
                n += 1;
            }
        }
    }
    check(worst <= 1e-8, format!("max |C - sqrt(xx^2 + xy^2)| = {worst:.2e} over {n} samples, 12 trajectories"))
}

fn c13_convergence() -> Outcome {
    let mut worst = 0.0_f64;
    for (family, om) in fig1_configs() {
        let p = params(family, om, R12);
        let base = entanglement_series(&run(&p)).map_err(|e| e.to_string())?.peak.eof;
        let tight = IntegrateOptions { tol: IntegrateOptions::<f64>::default().tol.halved(), ..Default::default() };
        let halved = entanglement_series(&integrate(&p, &tight).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?
            .peak
            .eof;
        worst = worst.max((base - halved).abs());
    }
    check(worst < 1e-6, format!("max peak EoF change on halving tolerances {worst:.2e}"))
}

fn main() {
    let criteria: [Criterion; 13] = [
        ("pulse normalization", Duration::from_secs(1), c1_pulse_norm),
        ("rate-constant oracle", Duration::from_secs(30), c2_rate_oracle),
        ("small-separation limit", Duration::from_secs(1), c3_small_separation),
        ("stationarity", Duration::from_secs(1), c4_stationarity),
        ("single-excitation constraint", Duration::from_secs(5), c5_single_excitation),
        ("density-matrix physicality", Duration::from_secs(10), c6_physicality),
        ("single-atom analytic", Duration::from_secs(2), c7_single_atom),
        ("real/complex equivalence", Duration::from_secs(60), c8_complex_equivalence),
        ("pulse-shape ordering", Duration::from_secs(10), c9_fig1),
        ("optimal bandwidth", Duration::from_secs(300), c10_fig2),
        ("distance non-monotonicity", Duration::from_secs(60), c11_distance),
        ("concurrence identity", Duration::from_secs(5), c12_concurrence_identity),
        ("tolerance convergence", Duration::from_secs(20), c13_convergence),
    ];
    let mut failed = 0;
    for (i, (name, budget, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let in_time = elapsed <= *budget;
        let (pass, detail) = match outcome {
            Ok(d) => (in_time, d),
            Err(d) => (false, d),
        };
        failed += usize::from(!pass);
        println!(
            "criterion {:2} {} {name}: {detail} [{:.2} s, budget {} s{}]",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs(),
            if in_time { "" } else { ", over budget" }
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
