//! Characteristic times of a scattering event.
//!
//! Every time here follows from the affine centre-of-mass laws and the
//! quadratic variance laws of the channel packets, so the module only needs
//! [`MomentSet`]s and a few channel averages of `J'` and `F'`.

use log::warn;
use serde::Serialize;

use crate::channels::{out_asymptotes, Scenario, Side};
use crate::error::{Error, Result};
use crate::packets::{MomentSet, SpectralPacket, EMPTY_CHANNEL};
use crate::potential::ScatterCoeffs;
use crate::units::Units;

/// SWPA offsets below this many `l0` are rejected.
const MIN_OFFSET: f64 = 5.0;
/// ... and below this many draw a warning.
const WARN_OFFSET: f64 = 10.0;
/// `sqrt(<δk²>)/k0` above this makes the narrow-packet limit doubtful.
const NARROW_LIMIT: f64 = 0.05;

/// Moments and phase averages of every packet of one scenario.
#[derive(Debug, Clone)]
pub struct ChannelSummary {
    pub side: Side,
    pub incident: MomentSet,
    pub tr: Option<MomentSet>,
    pub re: Option<MomentSet>,
    pub t_bar: f64,
    pub r_bar: f64,
    /// `<J'>` over the transmitted packet.
    pub jp_tr: Option<f64>,
    /// `<J' - F'>` over the reflected packet.
    pub jf_minus: Option<f64>,
    /// `<J' + F'>` over the reflected packet.
    pub jf_plus: Option<f64>,
}

fn channel(packet: &SpectralPacket) -> Result<Option<MomentSet>> {
    if packet.norm() < EMPTY_CHANNEL {
        return Ok(None);
    }
    packet.moments().map(Some)
}

impl ChannelSummary {
    pub fn new(scenario: &Scenario, coeffs: &ScatterCoeffs) -> Result<Self> {
        let (out_tr, out_ref) = out_asymptotes(scenario, coeffs)?;
        let incident = scenario.incident().moments()?;
        let tr = channel(&out_tr)?;
        let re = channel(&out_ref)?;
        let avg = |p: &SpectralPacket, g: &dyn Fn(usize) -> f64| p.expect(g);
        let jp = |j: usize| coeffs.at_node(j).j_prime;
        let fp = |j: usize| coeffs.at_node(j).f_prime;
        Ok(ChannelSummary {
            side: scenario.side(),
            incident,
            t_bar: out_tr.norm(),
            r_bar: out_ref.norm(),
            jp_tr: tr.map(|_| avg(&out_tr, &jp)),
            jf_minus: re.map(|_| avg(&out_ref, &|j| jp(j) - fp(j))),
            jf_plus: re.map(|_| avg(&out_ref, &|j| jp(j) + fp(j))),
            tr,
            re,
        })
    }

    /// `<J' ∓ F'>` for the reflection delay of this side (minus on the left).
    pub fn jf_side(&self) -> Option<f64> {
        match self.side {
            Side::Left => self.jf_minus,
            Side::Right => self.jf_plus,
        }
    }
}

/// Time at which `<x>(t) = z`.
fn arrival(m: &MomentSet, z: f64) -> f64 {
    (z - m.x0) / m.v
}

fn check_offset(name: &str, value: f64, l0: f64) -> Result<()> {
    if !(value >= MIN_OFFSET * l0) {
        return Err(Error::Geometry(format!(
            "{name} = {value} must be at least {MIN_OFFSET} l0 (l0 = {l0})"
        )));
    }
    if value < WARN_OFFSET * l0 {
        warn!("{name} = {value} is less than {WARN_OFFSET} l0");
    }
    Ok(())
}

/// Arrival-time differences of the centres of mass: incident packet at the
/// near observation point, transmitted packet at distance `l2` beyond the far
/// edge, reflected packet back at the near point (distance `l1` before the
/// near edge).
pub fn swpa_times(
    scenario: &Scenario,
    coeffs: &ScatterCoeffs,
    l1: f64,
    l2: f64,
) -> Result<(Option<f64>, Option<f64>)> {
    let summary = ChannelSummary::new(scenario, coeffs)?;
    swpa_from(&summary, scenario, coeffs, l1, l2)
}

fn swpa_from(
    s: &ChannelSummary,
    scenario: &Scenario,
    coeffs: &ScatterCoeffs,
    l1: f64,
    l2: f64,
) -> Result<(Option<f64>, Option<f64>)> {
    let l0 = scenario.l0();
    let (z1, z2, run_up) = match scenario.side() {
        Side::Left => (coeffs.a() - l1, coeffs.b() + l2, coeffs.a() - l1),
        Side::Right => {
            let x_r = scenario.x_r().unwrap_or(f64::NAN);
            (coeffs.b() + l1, coeffs.a() - l2, x_r - coeffs.b() - l1)
        }
    };
    check_offset("L1", l1, l0)?;
    check_offset("L2", l2, l0)?;
    check_offset("distance from source to the first observation point", run_up, l0)?;
    let t1 = arrival(&s.incident, z1);
    let tr = s.tr.map(|m| arrival(&m, z2) - t1);
    let re = s.re.map(|m| arrival(&m, z1) - t1);
    Ok((tr, re))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DelayTimes {
    pub tau_tr: Option<f64>,
    pub tau_ref_minus: Option<f64>,
    pub tau_ref_plus: Option<f64>,
    pub spatial_tr: Option<f64>,
    pub spatial_ref: Option<f64>,
}

/// Channel delays relative to free transmission and to reflection by an
/// ideal wall at the barrier midpoint. An empty channel gives `None`.
pub fn delay_times(scenario: &Scenario, coeffs: &ScatterCoeffs) -> Result<DelayTimes> {
    let s = ChannelSummary::new(scenario, coeffs)?;
    delays_from(&s, coeffs)
}

fn delays_from(s: &ChannelSummary, coeffs: &ScatterCoeffs) -> Result<DelayTimes> {
    if s.tr.is_none() && s.re.is_none() {
        return Err(Error::ChannelEmpty { channel: "transmission", norm: s.t_bar });
    }
    let d = coeffs.width();
    let spatial_tr = s.jp_tr.map(|j| j - d);
    let tau_tr = s.tr.zip(spatial_tr).map(|(m, x)| x / m.v.abs());
    let speed_ref = s.re.map(|m| m.v.abs());
    let tau = |jf: Option<f64>| jf.zip(speed_ref).map(|(j, v)| (j - d) / v);
    Ok(DelayTimes {
        tau_tr,
        tau_ref_minus: tau(s.jf_minus),
        tau_ref_plus: tau(s.jf_plus),
        spatial_tr,
        spatial_ref: s.jf_side().map(|j| j - d),
    })
}

/// Roots of `(v t - c)² = sigma - 2 chi t + dk2 t²` as `(early, late)`:
/// the branches `(B ∓ sqrt(D)) / A` with `A = v² - dk2`, `B = c v - chi`.
/// The early branch stays finite as `A -> 0`; the late one then diverges and
/// is reported as infinite. `None` when the discriminant is negative.
pub fn crossing_roots(v: f64, c: f64, m: &MomentSet) -> Option<(f64, f64)> {
    let a = v * v - m.dk2;
    let b = c * v - m.chi;
    let cc = c * c - m.sigma;
    let disc = b * b - a * cc;
    if disc < 0.0 {
        return None;
    }
    let root = disc.sqrt();
    let (plus, minus) = (b + root, b - root);
    if b >= 0.0 {
        let late = if a == 0.0 { f64::INFINITY } else { plus / a };
        Some((cc / plus, late))
    } else {
        let early = if a == 0.0 { f64::NEG_INFINITY } else { minus / a };
        Some((early, cc / minus))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatteringTime {
    pub t_start: Option<f64>,
    pub t_end_tr: Option<f64>,
    pub t_end_ref: Option<f64>,
    pub t_end: Option<f64>,
    pub tau_scatt: Option<f64>,
    pub completed: [bool; 3],
}

/// Onset and end of the scattering event (left-side incidence only).
pub fn scattering_time(scenario: &Scenario, coeffs: &ScatterCoeffs) -> Result<ScatteringTime> {
    if scenario.side() != Side::Left {
        return Err(Error::RightSideUnsupported("scattering_time"));
    }
    let s = ChannelSummary::new(scenario, coeffs)?;
    Ok(scattering_from(&s, coeffs))
}

/// Conditions for a completed scattering: each packet's mean speed exceeds
/// its spectral width. An empty channel satisfies its condition.
pub(crate) fn completed_flags(s: &ChannelSummary) -> [bool; 3] {
    let inc = &s.incident;
    let exceeds = |m: &Option<MomentSet>| m.is_none_or(|m| m.v.abs() > m.dk2.sqrt());
    [inc.v.abs() > inc.dk2.sqrt(), exceeds(&s.tr), exceeds(&s.re)]
}

fn scattering_from(s: &ChannelSummary, coeffs: &ScatterCoeffs) -> ScatteringTime {
    let (a, b) = (coeffs.a(), coeffs.b());
    let mut completed = completed_flags(s);
    let inc = &s.incident;
    let t_start = crossing_roots(inc.v, a - inc.x0, inc)
        .map(|r| r.0)
        .filter(|t| t.is_finite());
    let t_end_tr = s
        .tr
        .and_then(|m| crossing_roots(m.v, b - m.x0, &m))
        .map(|r| r.1)
        .filter(|t| t.is_finite());
    // L_ref = a - <x>_ref = |v| t - (x0 - a)
    let t_end_ref = s
        .re
        .and_then(|m| crossing_roots(-m.v, m.x0 - a, &m))
        .map(|r| r.1)
        .filter(|t| t.is_finite());
    completed[0] &= t_start.is_some();
    completed[1] &= s.tr.is_none() || t_end_tr.is_some();
    completed[2] &= s.re.is_none() || t_end_ref.is_some();
    let t_end = match (t_end_tr, t_end_ref) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, y) => x.or(y),
    };
    let tau_scatt = t_start.zip(t_end).map(|(s, e)| e - s);
    ScatteringTime { t_start, t_end_tr, t_end_ref, t_end, tau_scatt, completed }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatteringLength {
    pub l1: Option<f64>,
    pub l2: Option<f64>,
    pub tau_narrow: f64,
}

/// Narrow-packet scattering lengths `l0 + <J'>_tr + sqrt(sigma_1)` and
/// `l0 + <J' ∓ F'>_ref + sqrt(sigma_2)`.
pub fn scattering_length(scenario: &Scenario, coeffs: &ScatterCoeffs) -> Result<ScatteringLength> {
    let s = ChannelSummary::new(scenario, coeffs)?;
    length_from(&s, scenario)
}

fn length_from(s: &ChannelSummary, scenario: &Scenario) -> Result<ScatteringLength> {
    let (k0, l0) = (scenario.k0(), scenario.l0());
    if s.incident.dk2.sqrt() / k0 > NARROW_LIMIT {
        warn!(
            "spectral width {:.3e} is not small against k0 = {k0}; narrow-packet lengths are approximate",
            s.incident.dk2.sqrt()
        );
    }
    let length = |m: Option<MomentSet>, shift: Option<f64>| -> Result<Option<f64>> {
        match (m, shift) {
            (Some(m), Some(j)) => {
                if m.sigma < 0.0 {
                    return Err(Error::NegativeVariance(m.sigma));
                }
                Ok(Some(l0 + j + m.sigma.sqrt()))
            }
            _ => Ok(None),
        }
    };
    let l1 = length(s.tr, s.jp_tr)?;
    let l2 = length(s.re, s.jf_side())?;
    let longest = match (l1, l2) {
        (Some(x), Some(y)) => x.max(y),
        (x, y) => x.or(y).unwrap_or(f64::NAN),
    };
    Ok(ScatteringLength { l1, l2, tau_narrow: longest / k0 })
}

/// All characteristic times of one scenario, in `ħ = m = 1` units until
/// converted with [`TimeReport::in_units`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeReport {
    pub side: Side,
    pub k0: f64,
    pub l0: f64,
    pub a: f64,
    pub b: f64,
    #[serde(rename = "L1")]
    pub l1: f64,
    #[serde(rename = "L2")]
    pub l2: f64,
    pub t_bar: f64,
    pub r_bar: f64,
    pub swpa_tr: Option<f64>,
    pub swpa_ref: Option<f64>,
    pub delay_tr: Option<f64>,
    pub delay_ref_minus: Option<f64>,
    pub delay_ref_plus: Option<f64>,
    pub spatial_delay_tr: Option<f64>,
    pub spatial_delay_ref: Option<f64>,
    pub t_start: Option<f64>,
    pub t_end_tr: Option<f64>,
    pub t_end_ref: Option<f64>,
    pub t_end: Option<f64>,
    pub tau_scatt: Option<f64>,
    pub completed: [bool; 3],
    pub scat_length_tr: Option<f64>,
    pub scat_length_ref: Option<f64>,
    pub tau_scatt_narrow: Option<f64>,
}

impl TimeReport {
    pub fn all_completed(&self) -> bool {
        self.completed.iter().all(|c| *c)
    }

    /// Convert every time field from `ħ = m = 1` to the given units.
    pub fn in_units(mut self, units: &Units) -> Self {
        let conv = |t: &mut Option<f64>| *t = t.map(|v| units.time_from_internal(v));
        for t in [
            &mut self.swpa_tr,
            &mut self.swpa_ref,
            &mut self.delay_tr,
            &mut self.delay_ref_minus,
            &mut self.delay_ref_plus,
            &mut self.t_start,
            &mut self.t_end_tr,
            &mut self.t_end_ref,
            &mut self.t_end,
            &mut self.tau_scatt,
            &mut self.tau_scatt_narrow,
        ] {
            conv(t);
        }
        self
    }
}

/// Full report. The scattering-time fields stay empty for right-side
/// incidence; the completed-scattering flags are reported for both sides.
pub fn time_report(
    scenario: &Scenario,
    coeffs: &ScatterCoeffs,
    l1: f64,
    l2: f64,
    narrow: bool,
) -> Result<TimeReport> {
    let s = ChannelSummary::new(scenario, coeffs)?;
    let (swpa_tr, swpa_ref) = swpa_from(&s, scenario, coeffs, l1, l2)?;
    let delays = delays_from(&s, coeffs)?;
    let scat = match scenario.side() {
        Side::Left => scattering_from(&s, coeffs),
        Side::Right => ScatteringTime {
            t_start: None,
            t_end_tr: None,
            t_end_ref: None,
            t_end: None,
            tau_scatt: None,
            completed: completed_flags(&s),
        },
    };
    let lengths = if narrow { Some(length_from(&s, scenario)?) } else { None };
    Ok(TimeReport {
        side: scenario.side(),
        k0: scenario.k0(),
        l0: scenario.l0(),
        a: coeffs.a(),
        b: coeffs.b(),
        l1,
        l2,
        t_bar: s.t_bar,
        r_bar: s.r_bar,
        swpa_tr,
        swpa_ref,
        delay_tr: delays.tau_tr,
        delay_ref_minus: delays.tau_ref_minus,
        delay_ref_plus: delays.tau_ref_plus,
        spatial_delay_tr: delays.spatial_tr,
        spatial_delay_ref: delays.spatial_ref,
        t_start: scat.t_start,
        t_end_tr: scat.t_end_tr,
        t_end_ref: scat.t_end_ref,
        t_end: scat.t_end,
        tau_scatt: scat.tau_scatt,
        completed: scat.completed,
        scat_length_tr: lengths.and_then(|l| l.l1),
        scat_length_ref: lengths.and_then(|l| l.l2),
        tau_scatt_narrow: lengths.map(|l| l.tau_narrow),
    })
}
