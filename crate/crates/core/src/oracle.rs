//! Direct time-dependent propagation used to check the asymptotic theory.
//!
//! Symmetric split-step Fourier on a periodic grid: half a potential step,
//! an exact kinetic step in k-space, half a potential step. The potential is
//! the cell average of `V` over each grid cell. The domain is chosen large
//! enough that no probability reaches the periodic boundary.

use std::f64::consts::PI;
use std::sync::Arc;

use log::debug;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::channels::{Scenario, Side};
use crate::error::{Error, Result};
use crate::potential::{transfer_matrix, Barrier, ScatterCoeffs};
use crate::timing::{completed_flags, ChannelSummary};

/// Largest tolerated relative drift of the norm.
const NORM_DRIFT: f64 = 1e-6;
/// Largest tolerated probability in the edge bands of the domain.
const LEAKAGE: f64 = 1e-8;
/// Largest tolerated relative drift of `<H>`; beyond it the step is too coarse.
const ENERGY_DRIFT: f64 = 1e-6;
/// Fraction of the domain at each end treated as the boundary band.
const EDGE_BAND: f64 = 0.02;
/// Packet widths kept between any packet centre and the domain ends.
pub const MARGIN_WIDTHS: f64 = 8.0;
/// Amplitudes below this are not propagated through the S-matrix.
const NEGLIGIBLE: f64 = 1e-300;

/// Uniform periodic grid `x_j = x_min + j dx`, `j < n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Domain {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl Domain {
    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + self.dx() * j as f64
    }

    /// Angular wavenumber of FFT bin `m`.
    pub fn k(&self, m: usize) -> f64 {
        let l = self.x_max - self.x_min;
        let m = if m < self.n / 2 { m as f64 } else { m as f64 - self.n as f64 };
        2.0 * PI * m / l
    }

    /// Domain that holds every packet of the scenario up to `t_final` with a
    /// margin of [`MARGIN_WIDTHS`] packet widths, at a spacing of at most
    /// `dx_max`. The barrier edges fall on cell boundaries: `dx` divides the
    /// barrier width and the cell centred on each grid point ends exactly at
    /// `a`. The point count is a product of small primes.
    pub fn auto(barrier: &Barrier, scenario: &Scenario, t_final: f64, dx_max: f64) -> Self {
        let (k0, l0) = (scenario.k0(), scenario.l0());
        let sigma_k = 1.0 / (2.0 * l0);
        let spread = (l0 * l0 + (sigma_k * t_final).powi(2)).sqrt();
        let margin = MARGIN_WIDTHS * spread;
        let travel = k0 * t_final;
        let (lo, hi) = match scenario.side() {
            Side::Left => (0.0f64.min(barrier.a() - travel), barrier.b().max(travel)),
            Side::Right => {
                let x_r = scenario.x_r().unwrap_or(barrier.b());
                (barrier.a().min(x_r - travel), x_r.max(barrier.b() + travel))
            }
        };
        let (lo, hi) = (lo - margin, hi + margin);
        let width = barrier.width();
        let dx = if width > 0.0 { width / (width / dx_max).ceil() } else { dx_max };
        let n = fft_size(((hi - lo) / dx).ceil().max(64.0) as usize);
        let spare = n as f64 * dx - (hi - lo);
        let cells_left = ((barrier.a() - lo + 0.5 * spare) / dx).floor();
        let x_min = barrier.a() - (cells_left + 0.5) * dx;
        Domain { x_min, x_max: x_min + n as f64 * dx, n }
    }

    /// `dt k_max^2 / 2`, the largest kinetic phase per step. Split-step
    /// results degrade once it exceeds a few radians.
    pub fn kinetic_phase(&self, dt: f64) -> f64 {
        let k_max = PI / self.dx();
        0.5 * dt * k_max * k_max
    }
}

/// Smallest `2^a 3^b 5^c >= n`.
fn fft_size(n: usize) -> usize {
    let mut best = n.next_power_of_two();
    let mut p5 = 1;
    while p5 < best {
        let mut p35 = p5;
        while p35 < best {
            let mut m = p35;
            while m < n {
                m *= 2;
            }
            best = best.min(m);
            p35 *= 3;
        }
        p5 *= 5;
    }
    best
}

/// Wavefunction on a [`Domain`] at time `t`.
#[derive(Debug, Clone)]
pub struct GridState {
    pub domain: Domain,
    pub psi: Vec<Complex64>,
    pub t: f64,
}

impl GridState {
    pub fn norm(&self) -> f64 {
        self.psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.domain.dx()
    }

    /// Probability, centre of mass and variance over `lo <= x < hi`
    /// (grid points snapped).
    pub fn window(&self, lo: f64, hi: f64) -> WindowStats {
        let dx = self.domain.dx();
        let (mut p, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for (j, z) in self.psi.iter().enumerate() {
            let x = self.domain.x(j);
            if x >= lo && x < hi {
                let w = z.norm_sqr() * dx;
                p += w;
                m1 += w * x;
                m2 += w * x * x;
            }
        }
        let cm = if p > 0.0 { m1 / p } else { f64::NAN };
        let var = if p > 0.0 { (m2 / p - cm * cm).max(0.0) } else { f64::NAN };
        WindowStats { norm: p, cm, var }
    }

    /// `<φ|ψ>` with `φ` given on the same grid.
    pub fn inner(&self, phi: &[Complex64]) -> Complex64 {
        self.psi.iter().zip(phi).map(|(a, b)| b.conj() * a).sum::<Complex64>() * self.domain.dx()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowStats {
    pub norm: f64,
    pub cm: f64,
    pub var: f64,
}

/// One recorded instant of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub left: WindowStats,
    pub barrier: WindowStats,
    pub right: WindowStats,
    /// Probability in `[a - l0, b + l0]`.
    pub occupancy: f64,
    /// Probability in the edge bands of the domain.
    pub edge: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub final_state: GridState,
    pub norm_drift: f64,
    pub energy_drift: f64,
    pub max_edge: f64,
}

/// Split-step propagator for one barrier on one domain.
pub struct Propagator {
    domain: Domain,
    potential: Vec<f64>,
    dt: f64,
    half_potential: Vec<Complex64>,
    kinetic: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl Propagator {
    pub fn new(barrier: &Barrier, domain: Domain, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::StepSize(format!("dt must be positive, got {dt}")));
        }
        if domain.n < 16 || !(domain.x_max > domain.x_min) {
            return Err(Error::Domain(format!("degenerate domain {domain:?}")));
        }
        let dx = domain.dx();
        let potential: Vec<f64> = (0..domain.n)
            .map(|j| {
                let x = domain.x(j);
                barrier.cell_average(x - 0.5 * dx, x + 0.5 * dx)
            })
            .collect();
        let half_potential = potential
            .iter()
            .map(|v| Complex64::from_polar(1.0, -0.5 * v * dt))
            .collect();
        let kinetic = (0..domain.n)
            .map(|m| {
                let k = domain.k(m);
                Complex64::from_polar(1.0 / domain.n as f64, -0.5 * k * k * dt)
            })
            .collect();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(domain.n);
        let inverse = planner.plan_fft_inverse(domain.n);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Ok(Propagator {
            domain,
            potential,
            dt,
            half_potential,
            kinetic,
            forward,
            inverse,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
        })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `ψ(x) = (2π)^{-1/2} ∫ f(k) exp(ikx) dk` sampled on the grid, with `f`
    /// evaluated at the FFT wavenumbers.
    pub fn synthesize(&mut self, f: impl Fn(f64) -> Complex64) -> Vec<Complex64> {
        let bins = (0..self.domain.n).map(|m| f(self.domain.k(m))).collect();
        self.synthesize_bins(bins)
    }

    /// As [`Propagator::synthesize`], with `f` already given per FFT bin.
    pub fn synthesize_bins(&mut self, mut bins: Vec<Complex64>) -> Vec<Complex64> {
        let d = self.domain;
        let dk = 2.0 * PI / (d.x_max - d.x_min);
        let scale = dk / (2.0 * PI).sqrt();
        for (m, z) in bins.iter_mut().enumerate() {
            *z *= Complex64::from_polar(scale, d.k(m) * d.x_min);
        }
        self.inverse.process_with_scratch(&mut bins, &mut self.scratch);
        bins
    }

    /// `<H>` of a grid state.
    pub fn energy(&mut self, psi: &[Complex64]) -> f64 {
        let d = self.domain;
        let dx = d.dx();
        let mut buf = psi.to_vec();
        self.forward.process_with_scratch(&mut buf, &mut self.scratch);
        // Parseval: sum |ψ|² dx = sum |ψ̂|² dx / n
        let kinetic: f64 = buf
            .iter()
            .enumerate()
            .map(|(m, z)| 0.5 * d.k(m).powi(2) * z.norm_sqr())
            .sum::<f64>()
            * dx
            / d.n as f64;
        let potential: f64 = psi
            .iter()
            .zip(&self.potential)
            .map(|(z, v)| v * z.norm_sqr())
            .sum::<f64>()
            * dx;
        kinetic + potential
    }

    /// Advance by `steps` full steps.
    pub fn advance(&mut self, psi: &mut [Complex64], steps: usize) {
        for _ in 0..steps {
            for (z, p) in psi.iter_mut().zip(&self.half_potential) {
                *z *= p;
            }
            self.forward.process_with_scratch(psi, &mut self.scratch);
            for (z, k) in psi.iter_mut().zip(&self.kinetic) {
                *z *= k;
            }
            self.inverse.process_with_scratch(psi, &mut self.scratch);
            for (z, p) in psi.iter_mut().zip(&self.half_potential) {
                *z *= p;
            }
        }
    }
}

/// Run the scenario from `t = 0` to `t_final`, recording about `records`
/// samples.
pub fn propagate(
    barrier: &Barrier,
    scenario: &Scenario,
    t_final: f64,
    dt: f64,
    domain: Domain,
    records: usize,
) -> Result<Trajectory> {
    if !(t_final > 0.0) {
        return Err(Error::StepSize(format!("t_final must be positive, got {t_final}")));
    }
    let mut prop = Propagator::new(barrier, domain, dt)?;
    let steps = (t_final / dt).round().max(1.0) as usize;
    let dt_eff = t_final / steps as f64;
    if (dt_eff - dt).abs() > 1e-12 * dt {
        prop = Propagator::new(barrier, domain, dt_eff)?;
    }
    let stride = (steps / records.max(1)).max(1);
    let mut psi = prop.synthesize(|k| scenario.amplitude_at(k));
    let norm0 = GridState { domain, psi: psi.clone(), t: 0.0 }.norm();
    let energy0 = prop.energy(&psi);
    let l0 = scenario.l0();
    let band = EDGE_BAND * (domain.x_max - domain.x_min);
    let record = |psi: &[Complex64], t: f64| -> Sample {
        let state = GridState { domain, psi: psi.to_vec(), t };
        let (a, b) = (barrier.a(), barrier.b());
        let edge = state.window(f64::NEG_INFINITY, domain.x_min + band).norm
            + state.window(domain.x_max - band, f64::INFINITY).norm;
        Sample {
            t,
            left: state.window(f64::NEG_INFINITY, a),
            barrier: state.window(a, b),
            right: state.window(b, f64::INFINITY),
            occupancy: state.window(a - l0, b + l0).norm,
            edge,
        }
    };
    let mut samples = vec![record(&psi, 0.0)];
    let mut done = 0;
    while done < steps {
        let chunk = stride.min(steps - done);
        prop.advance(&mut psi, chunk);
        done += chunk;
        samples.push(record(&psi, done as f64 * dt_eff));
    }
    let final_state = GridState { domain, psi, t: done as f64 * dt_eff };
    let norm_drift = (final_state.norm() - norm0).abs() / norm0;
    let energy_drift = (prop.energy(&final_state.psi) - energy0).abs() / energy0.abs().max(1e-300);
    let max_edge = samples.iter().map(|s| s.edge).fold(0.0, f64::max);
    debug!("oracle: {steps} steps, n = {}, norm drift {norm_drift:e}, energy drift {energy_drift:e}, edge {max_edge:e}", domain.n);
    if norm_drift > NORM_DRIFT {
        return Err(Error::StepSize(format!("norm drift {norm_drift:e} exceeds {NORM_DRIFT:e}")));
    }
    if energy_drift > ENERGY_DRIFT {
        return Err(Error::StepSize(format!(
            "energy drift {energy_drift:e} exceeds {ENERGY_DRIFT:e} (kinetic phase per step {:.2} rad); reduce dt",
            domain.kinetic_phase(dt_eff)
        )));
    }
    if max_edge > LEAKAGE {
        return Err(Error::Domain(format!(
            "probability {max_edge:e} reached the domain boundary; enlarge the domain"
        )));
    }
    Ok(Trajectory { samples, final_state, norm_drift, energy_drift, max_edge })
}

/// Combined out-asymptote at time `t` on the propagator's grid.
pub fn out_asymptote_state(
    prop: &mut Propagator,
    barrier: &Barrier,
    scenario: &Scenario,
    t: f64,
) -> Result<Vec<Complex64>> {
    let d = *prop.domain();
    let mut f = vec![Complex64::new(0.0, 0.0); d.n];
    for (m, slot) in f.iter_mut().enumerate() {
        let k = d.k(m);
        if k == 0.0 {
            continue;
        }
        let (here, mirror) = (scenario.amplitude_at(k), scenario.amplitude_at(-k));
        if here.norm() < NEGLIGIBLE && mirror.norm() < NEGLIGIBLE {
            continue;
        }
        let y = transfer_matrix(barrier, k.abs())?;
        let cross = if k > 0.0 { y.s12() } else { y.s21() };
        *slot = (y.s11() * here + cross * mirror) * Complex64::from_polar(1.0, -0.5 * k * k * t);
    }
    Ok(prop.synthesize_bins(f))
}

/// Analytic values against the propagated ones.
#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub name: &'static str,
    pub analytic: f64,
    pub oracle: f64,
    /// `|oracle - analytic|`, divided by `max(|analytic|, 1)` when relative.
    pub deviation: f64,
    pub tolerance: f64,
    pub relative: bool,
    pub passed: bool,
}

impl Comparison {
    fn new(name: &'static str, analytic: f64, oracle: f64, tolerance: f64, relative: bool) -> Self {
        let abs = (oracle - analytic).abs();
        let deviation = if relative { abs / analytic.abs().max(1.0) } else { abs };
        Comparison { name, analytic, oracle, deviation, tolerance, relative, passed: deviation <= tolerance }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Validation {
    pub domain: Domain,
    pub dt: f64,
    pub t_final: f64,
    pub norm_drift: f64,
    pub energy_drift: f64,
    pub max_edge: f64,
    pub overlap: f64,
    pub overlap_passed: bool,
    pub completed: bool,
    pub fit_window: (f64, f64),
    pub comparisons: Vec<Comparison>,
    pub passed: bool,
}

/// Settings of a validation run.
#[derive(Debug, Clone, Copy)]
pub struct OracleConfig {
    pub t_final: f64,
    pub dt: f64,
    pub dx_max: f64,
    pub domain: Option<Domain>,
    pub records: usize,
    /// Start of the late-time fit window as a fraction of `t_final`.
    pub fit_from: f64,
    pub tolerance: f64,
    pub min_overlap: f64,
}

impl OracleConfig {
    pub fn new(t_final: f64, dt: f64) -> Self {
        OracleConfig {
            t_final,
            dt,
            dx_max: 0.0625,
            domain: None,
            records: 400,
            fit_from: 0.7,
            tolerance: 1e-3,
            min_overlap: 0.999,
        }
    }
}

/// Least-squares line through `(t, y)`: `(intercept, slope)`.
fn fit_line(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mt = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let slope = sxy / sxx;
    (my - slope * mt, slope)
}

/// Propagate the scenario and compare norms, centre-of-mass laws, widths and
/// the out-asymptote overlap with the analytic channel description.
pub fn validate(
    barrier: &Barrier,
    scenario: &Scenario,
    coeffs: &ScatterCoeffs,
    config: &OracleConfig,
) -> Result<Validation> {
    let summary = ChannelSummary::new(scenario, coeffs)?;
    let domain = config
        .domain
        .unwrap_or_else(|| Domain::auto(barrier, scenario, config.t_final, config.dx_max));
    let run = propagate(barrier, scenario, config.t_final, config.dt, domain, config.records)?;
    let last = run.samples.last().copied().ok_or(Error::Consistency("empty trajectory".into()))?;
    let t_fit = config.fit_from * config.t_final;
    let late: Vec<&Sample> = run.samples.iter().filter(|s| s.t >= t_fit).collect();
    if late.len() < 3 {
        return Err(Error::Consistency("too few samples in the fit window".into()));
    }
    let tol = config.tolerance;
    // transmitted packet ends up beyond the far edge, reflected one before the near edge
    type Pick = fn(&Sample) -> WindowStats;
    let (tr_of, ref_of): (Pick, Pick) = match scenario.side() {
        Side::Left => (|s| s.right, |s| s.left),
        Side::Right => (|s| s.left, |s| s.right),
    };
    let mut comparisons = vec![
        Comparison::new("t_bar", summary.t_bar, tr_of(&last).norm, tol, false),
        Comparison::new("r_bar", summary.r_bar, ref_of(&last).norm, tol, false),
    ];
    for (label, moments, pick) in [
        ("tr", summary.tr, tr_of),
        ("ref", summary.re, ref_of),
    ] {
        let Some(m) = moments else { continue };
        let pts: Vec<(f64, f64)> = late.iter().map(|s| (s.t, pick(s).cm)).collect();
        let (intercept, slope) = fit_line(&pts);
        let (ni, ns, nv) = match label {
            "tr" => ("cm_intercept_tr", "cm_slope_tr", "variance_tr"),
            _ => ("cm_intercept_ref", "cm_slope_ref", "variance_ref"),
        };
        comparisons.push(Comparison::new(ni, m.x0, intercept, tol, true));
        comparisons.push(Comparison::new(ns, m.v, slope, tol, true));
        comparisons.push(Comparison::new(nv, m.x_variance(last.t), pick(&last).var, tol, true));
    }
    let mut prop = Propagator::new(barrier, domain, config.dt)?;
    let asym = out_asymptote_state(&mut prop, barrier, scenario, run.final_state.t)?;
    let asym_norm: f64 = asym.iter().map(|z| z.norm_sqr()).sum::<f64>() * domain.dx();
    let overlap = run.final_state.inner(&asym).norm_sqr() / (asym_norm * run.final_state.norm());
    let completed = completed_flags(&summary).iter().all(|c| *c);
    let overlap_passed = !completed || overlap >= config.min_overlap;
    let passed = overlap_passed && comparisons.iter().all(|c| c.passed);
    Ok(Validation {
        domain,
        dt: config.dt,
        t_final: config.t_final,
        norm_drift: run.norm_drift,
        energy_drift: run.energy_drift,
        max_edge: run.max_edge,
        overlap,
        overlap_passed,
        completed,
        fit_window: (t_fit, config.t_final),
        comparisons,
        passed,
    })
}
