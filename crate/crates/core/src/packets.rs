//! Spectral wave packets and their moments.
//!
//! A packet is `f(k, t) = M(k) exp(i ξ(k, 0)) exp(-i k² t / 2)` sampled on the
//! two-sided layout of a [`KGrid`]. Channel packets carry `M'` and `ξ'(k, 0)`
//! in closed form (from the tabulated `T'`, `J'`, `F'`), so the position
//! moments never differentiate the complex amplitude numerically:
//!
//! ```text
//! <x>(t)      = -<ξ'> + t <k>
//! <(δx)²>(t)  = σ - 2 χ t + <(δk)²> t²
//! σ = <(M')²>/norm + <(δξ')²>,   χ = <(δξ')(δk)>
//! ```

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::channels::{Scenario, Side};
use crate::error::{Error, Result};
use crate::grid::KGrid;
use crate::potential::ScatterCoeffs;

/// Points with `M` below this fraction of its maximum are left out of the
/// `<(M')²>` quadrature.
const MODULUS_FLOOR: f64 = 1e-12;
/// Fewer resolved points than this cannot represent a packet.
const MIN_RESOLVED: usize = 8;
/// Channel norms below this are treated as empty.
pub(crate) const EMPTY_CHANNEL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    InTotal,
    InTr,
    InRef,
    OutTr,
    OutRef,
    ReverseG1,
    ReverseG2,
}

impl Role {
    pub fn name(self) -> &'static str {
        match self {
            Role::InTotal => "in_total",
            Role::InTr => "in_tr",
            Role::InRef => "in_ref",
            Role::OutTr => "out_tr",
            Role::OutRef => "out_ref",
            Role::ReverseG1 => "reverse_g1",
            Role::ReverseG2 => "reverse_g2",
        }
    }
}

/// Closed-form modulus and phase slope of a packet at `t = 0`.
#[derive(Debug, Clone)]
struct Shape {
    modulus: Vec<f64>,
    modulus_slope: Vec<f64>,
    phase_slope: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SpectralPacket {
    grid: Arc<KGrid>,
    amp: Vec<Complex64>,
    role: Role,
    side: Side,
    shape: Option<Shape>,
}

/// Moments of one packet. Position laws are `x0 + v t` and
/// `sigma - 2 chi t + dk2 t²` (`ħ = m = 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentSet {
    pub norm: f64,
    pub k_mean: f64,
    pub k2_mean: f64,
    pub dk2: f64,
    pub x0: f64,
    pub v: f64,
    pub sigma: f64,
    pub chi: f64,
}

impl MomentSet {
    pub fn x_mean(&self, t: f64) -> f64 {
        self.x0 + self.v * t
    }

    pub fn x_variance(&self, t: f64) -> f64 {
        self.sigma - 2.0 * self.chi * t + self.dk2 * t * t
    }

    /// Minimum over `t` of the variance, `sigma - chi²/dk2`.
    pub fn min_variance(&self) -> f64 {
        if self.dk2 > 0.0 {
            self.sigma - self.chi * self.chi / self.dk2
        } else {
            self.sigma
        }
    }
}

impl SpectralPacket {
    /// Packet `M exp(iφ)` with known `M'` and `φ'`, all in the two-sided layout.
    pub fn from_parts(
        grid: Arc<KGrid>,
        role: Role,
        side: Side,
        modulus: Vec<f64>,
        modulus_slope: Vec<f64>,
        phase: &[f64],
        phase_slope: Vec<f64>,
    ) -> Result<Self> {
        let n = grid.two_sided_len();
        for (name, len) in [
            ("modulus", modulus.len()),
            ("modulus_slope", modulus_slope.len()),
            ("phase", phase.len()),
            ("phase_slope", phase_slope.len()),
        ] {
            if len != n {
                return Err(Error::GridMismatch(format!("{name} has {len} samples, grid has {n}")));
            }
        }
        let amp = modulus
            .iter()
            .zip(phase)
            .map(|(&m, &p)| Complex64::from_polar(m, p))
            .collect();
        Ok(SpectralPacket {
            grid,
            amp,
            role,
            side,
            shape: Some(Shape { modulus, modulus_slope, phase_slope }),
        })
    }

    /// Packet given only by its amplitude; it has no closed-form position law.
    pub fn from_amplitude(grid: Arc<KGrid>, role: Role, side: Side, amp: Vec<Complex64>) -> Result<Self> {
        if amp.len() != grid.two_sided_len() {
            return Err(Error::GridMismatch(format!(
                "amplitude has {} samples, grid has {}",
                amp.len(),
                grid.two_sided_len()
            )));
        }
        Ok(SpectralPacket { grid, amp, role, side, shape: None })
    }

    pub fn grid(&self) -> &Arc<KGrid> {
        &self.grid
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// Amplitude at `t = 0` in the two-sided layout.
    pub fn amp(&self) -> &[Complex64] {
        &self.amp
    }

    /// Signed wavenumbers matching [`SpectralPacket::amp`].
    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.amp.len()).map(|j| self.grid.signed_node(j)).collect()
    }

    pub fn amp_at(&self, t: f64) -> Vec<Complex64> {
        self.amp
            .iter()
            .enumerate()
            .map(|(j, a)| {
                let k = self.grid.signed_node(j);
                a * Complex64::from_polar(1.0, -0.5 * k * k * t)
            })
            .collect()
    }

    pub fn has_position_law(&self) -> bool {
        self.shape.is_some()
    }

    /// `|f|` at two-sided node `j`.
    pub fn modulus(&self, j: usize) -> f64 {
        match &self.shape {
            Some(s) => s.modulus[j],
            None => self.amp[j].norm(),
        }
    }

    fn density(&self, j: usize) -> f64 {
        match &self.shape {
            Some(s) => s.modulus[j] * s.modulus[j],
            None => self.amp[j].norm_sqr(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.grid.integrate((0..self.amp.len()).map(|j| self.density(j)))
    }

    /// Conditional expectation `∫ M² g dk / ∫ M² dk`.
    pub fn expect(&self, g: impl Fn(usize) -> f64) -> f64 {
        let num = self
            .grid
            .integrate((0..self.amp.len()).map(|j| self.density(j) * g(j)));
        num / self.norm()
    }

    pub fn k_moment(&self, n: u32) -> f64 {
        let n = n as i32;
        self.expect(|j| self.grid.signed_node(j).powi(n))
    }

    pub fn moments(&self) -> Result<MomentSet> {
        let shape = self
            .shape
            .as_ref()
            .ok_or(Error::NoPositionLaw { role: self.role.name() })?;
        let norm = self.norm();
        if !(norm > 0.0) {
            return Err(Error::EmptyPacket);
        }
        let len = self.amp.len();
        let m_max = shape.modulus.iter().fold(0.0f64, |a, &b| a.max(b));
        let cut = MODULUS_FLOOR * m_max;
        let resolved = shape.modulus.iter().filter(|m| **m >= cut).count();
        if resolved < MIN_RESOLVED {
            return Err(Error::DegenerateModulus {
                fraction: 1.0 - resolved as f64 / len as f64,
            });
        }
        let g = &self.grid;
        let k = |j| g.signed_node(j);
        let k_mean = self.expect(k);
        let k2_mean = self.expect(|j| k(j) * k(j));
        let dk2 = self.expect(|j| (k(j) - k_mean).powi(2));
        let xi_mean = self.expect(|j| shape.phase_slope[j]);
        let chi = self.expect(|j| (shape.phase_slope[j] - xi_mean) * (k(j) - k_mean));
        let phase_spread = self.expect(|j| (shape.phase_slope[j] - xi_mean).powi(2));
        let slope2 = g.integrate((0..len).map(|j| {
            if shape.modulus[j] >= cut {
                shape.modulus_slope[j].powi(2)
            } else {
                0.0
            }
        })) / norm;
        let sigma = slope2 + phase_spread;
        if sigma < 0.0 {
            return Err(Error::NegativeVariance(sigma));
        }
        Ok(MomentSet {
            norm,
            k_mean,
            k2_mean,
            dk2,
            x0: -xi_mean,
            v: k_mean,
            sigma,
            chi,
        })
    }

    pub fn x_mean(&self, t: f64) -> Result<f64> {
        Ok(self.moments()?.x_mean(t))
    }

    pub fn x_variance(&self, t: f64) -> Result<f64> {
        Ok(self.moments()?.x_variance(t))
    }

    /// `(sigma, chi, dk2)`.
    pub fn variance_coeffs(&self) -> Result<(f64, f64, f64)> {
        let m = self.moments()?;
        Ok((m.sigma, m.chi, m.dk2))
    }
}

/// Normalised Gaussian `(2 l0²/π)^{1/4} exp(-l0² (k - k0)²)` incident from the
/// left, centred at `x = 0`.
pub fn gaussian_packet(k0: f64, l0: f64, grid: Arc<KGrid>) -> Result<SpectralPacket> {
    gaussian_source(k0, l0, grid, Side::Left, 0.0)
}

/// Incident Gaussian for either side. A right-side packet starts at `x_s`
/// and moves to the left: `f(k) = g(-k) exp(-i k x_s)`.
pub(crate) fn gaussian_source(
    k0: f64,
    l0: f64,
    grid: Arc<KGrid>,
    side: Side,
    x_s: f64,
) -> Result<SpectralPacket> {
    if !(k0 > 0.0 && l0 > 0.0 && k0.is_finite() && l0.is_finite()) {
        return Err(Error::InvalidScenario(format!("need k0 > 0 and l0 > 0 (k0={k0}, l0={l0})")));
    }
    check_coverage(k0, l0, &grid)?;
    let c = (2.0 * l0 * l0 / PI).powf(0.25);
    let sign = match side {
        Side::Left => 1.0,
        Side::Right => -1.0,
    };
    let n = grid.two_sided_len();
    let mut modulus = Vec::with_capacity(n);
    let mut slope = Vec::with_capacity(n);
    let mut phase = Vec::with_capacity(n);
    for j in 0..n {
        let k = grid.signed_node(j);
        let u = sign * k - k0;
        let g = c * (-l0 * l0 * u * u).exp();
        modulus.push(g);
        slope.push(-2.0 * l0 * l0 * u * g * sign);
        phase.push(sign * k * x_s);
    }
    SpectralPacket::from_parts(grid, Role::InTotal, side, modulus, slope, &phase, vec![sign * x_s; n])
}

/// The grid must reach six spectral widths `1/(2 l0)` on both sides of `k0`,
/// or start close to the origin when the Gaussian straddles `k = 0`.
fn check_coverage(k0: f64, l0: f64, grid: &KGrid) -> Result<()> {
    let width = 6.0 / (2.0 * l0);
    let nodes = grid.nodes();
    let slack = 1e-9 * (1.0 + k0);
    if grid.kmax() < k0 + width - slack {
        return Err(Error::Coverage(format!(
            "kmax = {} < k0 + 6 sigma_k = {}",
            grid.kmax(),
            k0 + width
        )));
    }
    if k0 - width > 0.0 {
        if grid.kmin() > k0 - width + slack {
            return Err(Error::Coverage(format!(
                "kmin = {} > k0 - 6 sigma_k = {}",
                grid.kmin(),
                k0 - width
            )));
        }
    } else {
        let step = nodes[1] - nodes[0];
        if grid.kmin() > 2.0 * step + slack {
            return Err(Error::Coverage(format!(
                "packet straddles k = 0 but the grid starts at {} (step {step})",
                grid.kmin()
            )));
        }
    }
    Ok(())
}

/// Which of `T`, `R` scales the channel density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Weight {
    T,
    R,
}

/// Channel packet built from an incident packet:
///
/// `f(k) = sqrt(W(k)) f_in(±k) exp(i (cj J + cf F + lin k + c0))`,
///
/// with `f_in(-k)` when `mirror` is set.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ChannelForm {
    pub role: Role,
    pub weight: Weight,
    pub mirror: bool,
    pub cj: f64,
    pub cf: f64,
    pub lin: f64,
    pub c0: f64,
}

pub(crate) fn channel_packet(
    incident: &SpectralPacket,
    coeffs: &ScatterCoeffs,
    form: ChannelForm,
) -> Result<SpectralPacket> {
    let grid = incident.grid();
    if !grid.same_nodes(coeffs.grid()) {
        return Err(Error::GridMismatch("incident packet and coefficients use different grids".into()));
    }
    let src = incident
        .shape
        .as_ref()
        .ok_or(Error::NoPositionLaw { role: incident.role.name() })?;
    let n = grid.two_sided_len();
    let mut amp = Vec::with_capacity(n);
    let mut modulus = Vec::with_capacity(n);
    let mut slope = Vec::with_capacity(n);
    let mut phase_slope = Vec::with_capacity(n);
    for j in 0..n {
        let c = coeffs.at_node(j);
        let (w, dw) = match form.weight {
            Weight::T => (c.t, c.t_prime),
            Weight::R => (c.r, -c.t_prime),
        };
        let (s, dir) = if form.mirror { (n - 1 - j, -1.0) } else { (j, 1.0) };
        let root = w.sqrt();
        let envelope = if root > 0.0 { dw / (2.0 * root) } else { 0.0 };
        let rot = form.cj * c.j + form.cf * c.f + form.lin * c.k + form.c0;
        amp.push(incident.amp[s] * root * Complex64::from_polar(1.0, rot));
        modulus.push(root * src.modulus[s]);
        slope.push(envelope * src.modulus[s] + root * dir * src.modulus_slope[s]);
        phase_slope.push(
            dir * src.phase_slope[s] + form.cj * c.j_prime + form.cf * c.f_prime + form.lin,
        );
    }
    Ok(SpectralPacket {
        grid: grid.clone(),
        amp,
        role: form.role,
        side: incident.side,
        shape: Some(Shape { modulus, modulus_slope: slope, phase_slope }),
    })
}

/// Gaussian momentum shifts of the channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentumShifts {
    /// `<T'>_in / (4 l0² T̄)`.
    pub dk_tr: f64,
    /// `-<T'>_in / (4 l0² R̄)`.
    pub dk_ref: f64,
    /// `<k>_tr - k0` by direct quadrature.
    pub direct_tr: f64,
    /// `<-k>_ref - k0` by direct quadrature.
    pub direct_ref: f64,
    pub t_bar: f64,
    pub r_bar: f64,
}

pub fn gwp_momentum_shifts(scenario: &Scenario, coeffs: &ScatterCoeffs) -> Result<MomentumShifts> {
    if scenario.side() != Side::Left {
        return Err(Error::RightSideUnsupported("gwp_momentum_shifts"));
    }
    let incident = scenario.incident();
    if !incident.grid().same_nodes(coeffs.grid()) {
        return Err(Error::GridMismatch("scenario and coefficients use different grids".into()));
    }
    let t_bar = incident.expect(|j| coeffs.at_node(j).t);
    let r_bar = incident.expect(|j| coeffs.at_node(j).r);
    if t_bar < EMPTY_CHANNEL {
        return Err(Error::ChannelEmpty { channel: "transmission", norm: t_bar });
    }
    if r_bar < EMPTY_CHANNEL {
        return Err(Error::ChannelEmpty { channel: "reflection", norm: r_bar });
    }
    let t_prime = incident.expect(|j| coeffs.at_node(j).t_prime);
    let l0 = scenario.l0();
    let k0 = scenario.k0();
    let grid = incident.grid();
    let k_tr = incident.expect(|j| coeffs.at_node(j).t * grid.signed_node(j)) / t_bar;
    let k_ref = incident.expect(|j| coeffs.at_node(j).r * grid.signed_node(j)) / r_bar;
    Ok(MomentumShifts {
        dk_tr: t_prime / (4.0 * l0 * l0 * t_bar),
        dk_ref: -t_prime / (4.0 * l0 * l0 * r_bar),
        direct_tr: k_tr - k0,
        direct_ref: k_ref - k0,
        t_bar,
        r_bar,
    })
}
