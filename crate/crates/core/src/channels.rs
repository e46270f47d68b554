//! Scattering matrix, its split into transmission and reflection channels,
//! and the channel-resolved in/out asymptotes.
//!
//! For a state with incoming amplitude `φ(k)` on the whole axis (`k > 0`
//! arriving from the left, `k < 0` from the right) the outgoing amplitude is
//!
//! ```text
//! k > 0:  S11(k) φ(k) + S12(k) φ(-k)
//! k < 0:  S22(|k|) φ(k) + S21(|k|) φ(-k)
//! ```

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use log::warn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::KGrid;
use crate::packets::{channel_packet, gaussian_source, ChannelForm, Role, SpectralPacket, Weight};
use crate::potential::ScatterCoeffs;

pub type Mat2 = [[Complex64; 2]; 2];

const DECOMPOSITION_TOL: f64 = 1e-8;
/// `a / l0` (or `(x_r - b) / l0`) below this is rejected.
const MIN_SEPARATION: f64 = 10.0;
/// ... and below this draws a warning.
const WARN_SEPARATION: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl std::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "left" => Ok(Side::Left),
            "right" => Ok(Side::Right),
            other => Err(Error::InvalidScenario(format!("unknown side '{other}'"))),
        }
    }
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn matmul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[zero(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn adjoint(a: &Mat2) -> Mat2 {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

/// `max |A†A - I|` over the entries.
pub fn unitarity_residual(a: &Mat2) -> f64 {
    let p = matmul(&adjoint(a), a);
    let mut worst = 0.0f64;
    for (i, row) in p.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((v - target).norm());
        }
    }
    worst
}

/// `S(k)` on the positive grid nodes.
#[derive(Debug, Clone)]
pub struct SMatrix {
    grid: Arc<KGrid>,
    entries: Vec<Mat2>,
}

impl SMatrix {
    pub fn grid(&self) -> &Arc<KGrid> {
        &self.grid
    }

    pub fn entries(&self) -> &[Mat2] {
        &self.entries
    }

    pub fn at(&self, i: usize) -> &Mat2 {
        &self.entries[i]
    }

    pub fn max_unitarity_residual(&self) -> f64 {
        self.entries.iter().map(unitarity_residual).fold(0.0, f64::max)
    }

    /// Outgoing amplitude for the incoming amplitude `phi` (two-sided layout).
    pub fn scatter(&self, phi: &[Complex64]) -> Vec<Complex64> {
        let n = self.grid.two_sided_len();
        assert_eq!(phi.len(), n, "amplitude must match the grid");
        (0..n)
            .map(|j| {
                let (i, neg) = self.grid.split(j);
                let s = &self.entries[i];
                let mirror = phi[n - 1 - j];
                if neg {
                    s[1][1] * phi[j] + s[1][0] * mirror
                } else {
                    s[0][0] * phi[j] + s[0][1] * mirror
                }
            })
            .collect()
    }
}

pub fn assemble_smatrix(coeffs: &ScatterCoeffs) -> SMatrix {
    let (a, b, d) = (coeffs.a(), coeffs.b(), coeffs.width());
    let entries = (0..coeffs.len())
        .map(|i| {
            let c = coeffs.sample(i);
            let k = c.k;
            let (st, sr) = (c.t.sqrt(), c.r.sqrt());
            let diag = Complex64::from_polar(st, c.j - k * d);
            let s12 = Complex64::from_polar(sr, c.j + c.f - FRAC_PI_2 - 2.0 * k * b);
            let s21 = Complex64::from_polar(sr, c.j - c.f - FRAC_PI_2 + 2.0 * k * a);
            [[diag, s12], [s21, diag]]
        })
        .collect();
    SMatrix { grid: coeffs.grid().clone(), entries }
}

/// `S = Π_tr + Π_ref` with `Π = S_channel P_channel`.
#[derive(Debug, Clone)]
pub struct ChannelDecomposition {
    pub s_tr: Vec<Mat2>,
    pub s_ref: Vec<Mat2>,
    pub p_tr: Vec<f64>,
    pub p_ref: Vec<f64>,
    pub s0_ref: Vec<Mat2>,
    pub delta_tr: Vec<Mat2>,
    pub delta_ref: Vec<Mat2>,
    /// `max |Π_tr + Π_ref - S|` over entries and grid points.
    pub residual: f64,
}

impl ChannelDecomposition {
    pub fn s0_tr() -> Mat2 {
        let one = Complex64::new(1.0, 0.0);
        [[one, zero()], [zero(), one]]
    }

    pub fn pi_tr(&self, i: usize) -> Mat2 {
        scale(&self.s_tr[i], self.p_tr[i])
    }

    pub fn pi_ref(&self, i: usize) -> Mat2 {
        scale(&self.s_ref[i], self.p_ref[i])
    }

    pub fn max_channel_unitarity_residual(&self) -> f64 {
        self.s_tr
            .iter()
            .chain(&self.s_ref)
            .map(unitarity_residual)
            .fold(0.0, f64::max)
    }
}

fn scale(a: &Mat2, s: f64) -> Mat2 {
    [[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]]
}

fn diag(x: Complex64, y: Complex64) -> Mat2 {
    [[x, zero()], [zero(), y]]
}

pub fn decompose(smatrix: &SMatrix, coeffs: &ScatterCoeffs) -> Result<ChannelDecomposition> {
    if !smatrix.grid.same_nodes(coeffs.grid()) {
        return Err(Error::GridMismatch("S-matrix and coefficients use different grids".into()));
    }
    let (d, s) = (coeffs.width(), coeffs.s());
    let n = coeffs.len();
    let mut out = ChannelDecomposition {
        s_tr: Vec::with_capacity(n),
        s_ref: Vec::with_capacity(n),
        p_tr: Vec::with_capacity(n),
        p_ref: Vec::with_capacity(n),
        s0_ref: Vec::with_capacity(n),
        delta_tr: Vec::with_capacity(n),
        delta_ref: Vec::with_capacity(n),
        residual: 0.0,
    };
    for i in 0..n {
        let c = coeffs.sample(i);
        let k = c.k;
        let phase_tr = Complex64::from_polar(1.0, c.j - k * d);
        let delta_tr = diag(phase_tr, phase_tr);
        let base = Complex64::from_polar(1.0, c.j + FRAC_PI_2 - k * d);
        let delta_ref = diag(
            base * Complex64::from_polar(1.0, c.f),
            base * Complex64::from_polar(1.0, -c.f),
        );
        let s0_ref = [
            [zero(), -Complex64::from_polar(1.0, -k * s)],
            [-Complex64::from_polar(1.0, k * s), zero()],
        ];
        let s_tr = matmul(&delta_tr, &ChannelDecomposition::s0_tr());
        let s_ref = matmul(&delta_ref, &s0_ref);
        let (pt, pr) = (c.t.sqrt(), c.r.sqrt());
        let target = smatrix.at(i);
        for r in 0..2 {
            for col in 0..2 {
                let sum = s_tr[r][col] * pt + s_ref[r][col] * pr;
                out.residual = out.residual.max((sum - target[r][col]).norm());
            }
        }
        out.s_tr.push(s_tr);
        out.s_ref.push(s_ref);
        out.p_tr.push(pt);
        out.p_ref.push(pr);
        out.s0_ref.push(s0_ref);
        out.delta_tr.push(delta_tr);
        out.delta_ref.push(delta_ref);
    }
    if out.residual > DECOMPOSITION_TOL {
        return Err(Error::Consistency(format!(
            "channel decomposition residual {:e} exceeds {DECOMPOSITION_TOL:e}",
            out.residual
        )));
    }
    Ok(out)
}

/// Incident Gaussian packet and where it starts.
#[derive(Debug, Clone)]
pub struct Scenario {
    side: Side,
    k0: f64,
    l0: f64,
    x_r: Option<f64>,
    incident: SpectralPacket,
}

impl Scenario {
    /// Gaussian starting at the origin and moving to the right.
    pub fn left(k0: f64, l0: f64, grid: Arc<KGrid>) -> Result<Self> {
        let incident = gaussian_source(k0, l0, grid, Side::Left, 0.0)?;
        Ok(Scenario { side: Side::Left, k0, l0, x_r: None, incident })
    }

    /// Gaussian starting at `x_r` and moving to the left.
    pub fn right(k0: f64, l0: f64, x_r: f64, grid: Arc<KGrid>) -> Result<Self> {
        if !x_r.is_finite() {
            return Err(Error::InvalidScenario(format!("x_r must be finite, got {x_r}")));
        }
        let incident = gaussian_source(k0, l0, grid, Side::Right, x_r)?;
        Ok(Scenario { side: Side::Right, k0, l0, x_r: Some(x_r), incident })
    }

    pub fn new(side: Side, k0: f64, l0: f64, x_r: Option<f64>, grid: Arc<KGrid>) -> Result<Self> {
        match (side, x_r) {
            (Side::Left, _) => Self::left(k0, l0, grid),
            (Side::Right, Some(x)) => Self::right(k0, l0, x, grid),
            (Side::Right, None) => {
                Err(Error::InvalidScenario("right-side scenario needs x_r".into()))
            }
        }
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn k0(&self) -> f64 {
        self.k0
    }

    pub fn l0(&self) -> f64 {
        self.l0
    }

    pub fn x_r(&self) -> Option<f64> {
        self.x_r
    }

    /// Incident amplitude at an arbitrary wavenumber (closed form).
    pub fn amplitude_at(&self, k: f64) -> Complex64 {
        let (sign, x_s) = match self.side {
            Side::Left => (1.0, 0.0),
            Side::Right => (-1.0, self.x_r.unwrap_or(0.0)),
        };
        let l0 = self.l0;
        let u = sign * k - self.k0;
        let g = (2.0 * l0 * l0 / std::f64::consts::PI).powf(0.25) * (-l0 * l0 * u * u).exp();
        Complex64::from_polar(g, sign * k * x_s)
    }

    /// Total in-asymptote at `t = 0`.
    pub fn incident(&self) -> &SpectralPacket {
        &self.incident
    }

    /// Check that the packet starts well away from the barrier. Returns
    /// warnings for marginal separations.
    pub fn check_geometry(&self, coeffs: &ScatterCoeffs) -> Result<Vec<String>> {
        if !self.incident.grid().same_nodes(coeffs.grid()) {
            return Err(Error::GridMismatch("scenario and coefficients use different grids".into()));
        }
        let (gap, what) = match self.side {
            Side::Left => (coeffs.a(), "a"),
            Side::Right => (self.x_r.unwrap_or(f64::NAN) - coeffs.b(), "x_r - b"),
        };
        let ratio = gap / self.l0;
        if !(ratio >= MIN_SEPARATION) {
            return Err(Error::InvalidScenario(format!(
                "{what} = {gap} must be at least {MIN_SEPARATION} l0 (l0 = {})",
                self.l0
            )));
        }
        let mut warnings = Vec::new();
        if ratio < WARN_SEPARATION {
            let msg = format!("{what}/l0 = {ratio:.2} is small; asymptotic formulas may be inaccurate");
            warn!("{msg}");
            warnings.push(msg);
        }
        Ok(warnings)
    }
}

fn out_forms(side: Side, coeffs: &ScatterCoeffs) -> (ChannelForm, ChannelForm) {
    let d = coeffs.width();
    match side {
        Side::Left => (
            ChannelForm { role: Role::OutTr, weight: Weight::T, mirror: false, cj: 1.0, cf: 0.0, lin: -d, c0: 0.0 },
            ChannelForm {
                role: Role::OutRef,
                weight: Weight::R,
                mirror: true,
                cj: -1.0,
                cf: 1.0,
                lin: -2.0 * coeffs.a(),
                c0: FRAC_PI_2,
            },
        ),
        Side::Right => (
            ChannelForm { role: Role::OutTr, weight: Weight::T, mirror: false, cj: -1.0, cf: 0.0, lin: d, c0: 0.0 },
            ChannelForm {
                role: Role::OutRef,
                weight: Weight::R,
                mirror: true,
                cj: 1.0,
                cf: 1.0,
                lin: -2.0 * coeffs.b(),
                c0: -FRAC_PI_2,
            },
        ),
    }
}

/// Transmitted and reflected out-asymptotes at `t = 0`. An empty channel
/// yields a packet of zero norm.
pub fn out_asymptotes(scenario: &Scenario, coeffs: &ScatterCoeffs) -> Result<(SpectralPacket, SpectralPacket)> {
    scenario.check_geometry(coeffs)?;
    let (tr, re) = out_forms(scenario.side, coeffs);
    Ok((
        channel_packet(&scenario.incident, coeffs, tr)?,
        channel_packet(&scenario.incident, coeffs, re)?,
    ))
}

/// Channel in-asymptotes `sqrt(T) f_in` and `sqrt(R) f_in`.
pub fn in_asymptotes(scenario: &Scenario, coeffs: &ScatterCoeffs) -> Result<(SpectralPacket, SpectralPacket)> {
    scenario.check_geometry(coeffs)?;
    let form = |role, weight| ChannelForm { role, weight, mirror: false, cj: 0.0, cf: 0.0, lin: 0.0, c0: 0.0 };
    Ok((
        channel_packet(&scenario.incident, coeffs, form(Role::InTr, Weight::T))?,
        channel_packet(&scenario.incident, coeffs, form(Role::InRef, Weight::R))?,
    ))
}

/// Reverse motion of the channel out-asymptotes. `combined` is the out
/// asymptote of the summed reverse in-states, `[g1(-k) + g2(-k)]*`.
#[derive(Debug, Clone)]
pub struct ReverseMotion {
    pub g1: SpectralPacket,
    pub g2: SpectralPacket,
    pub combined: SpectralPacket,
}

impl ReverseMotion {
    /// `2 Re ∫ g1* g2 dk`, so that `|g1 + g2|² = |g1|² + |g2|² + cross`.
    pub fn cross_term(&self) -> f64 {
        let grid = self.g1.grid();
        let (a, b) = (self.g1.amp(), self.g2.amp());
        2.0 * grid.integrate((0..a.len()).map(|j| (a[j].conj() * b[j]).re))
    }
}

fn reversed(amp: &[Complex64]) -> Vec<Complex64> {
    amp.iter().rev().map(|z| z.conj()).collect()
}

pub fn reverse_motion(
    out_tr: &SpectralPacket,
    out_ref: &SpectralPacket,
    coeffs: &ScatterCoeffs,
) -> Result<ReverseMotion> {
    let grid = out_tr.grid();
    if !grid.same_nodes(out_ref.grid()) || !grid.same_nodes(coeffs.grid()) {
        return Err(Error::GridMismatch("reverse motion inputs use different grids".into()));
    }
    let s = assemble_smatrix(coeffs);
    // in-state [f(-k)]*, scattered, then mapped back as g(k) = [out(-k)]*
    let g = |p: &SpectralPacket| reversed(&s.scatter(&reversed(p.amp())));
    let g1 = g(out_tr);
    let g2 = g(out_ref);
    let sum: Vec<Complex64> = g1.iter().zip(&g2).map(|(x, y)| x + y).collect();
    let side = out_tr.side();
    Ok(ReverseMotion {
        g1: SpectralPacket::from_amplitude(grid.clone(), Role::ReverseG1, side, g1)?,
        g2: SpectralPacket::from_amplitude(grid.clone(), Role::ReverseG2, side, g2)?,
        combined: SpectralPacket::from_amplitude(grid.clone(), Role::InTotal, side, reversed(&sum))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{scatter_coeffs, transfer_matrix, Barrier};

    fn coeffs(barrier: &Barrier, grid: Arc<KGrid>) -> ScatterCoeffs {
        scatter_coeffs(barrier, grid).unwrap()
    }

    #[test]
    fn zero_barrier_smatrix() {
        let grid = Arc::new(KGrid::uniform(0.5, 3.0, 64).unwrap());
        let c = coeffs(&Barrier::new(2.0, [(1.0, 0.0)]).unwrap(), grid);
        let s = assemble_smatrix(&c);
        for m in s.entries() {
            assert!((m[0][0] - 1.0).norm() < 1e-13);
            assert!(m[0][1].norm() < 1e-13 && m[1][0].norm() < 1e-13);
        }
        let dec = decompose(&s, &c).unwrap();
        for i in 0..c.len() {
            assert!((dec.p_tr[i] - 1.0).abs() < 1e-14);
            assert!(dec.p_ref[i] < 1e-14);
            assert!(unitarity_residual(&dec.s_tr[i]) < 1e-13);
            assert!((dec.s_tr[i][0][0] - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn matches_transfer_matrix_entries() {
        let grid = Arc::new(KGrid::uniform(0.3, 4.0, 512).unwrap());
        let b = Barrier::new(1.5, [(0.4, 2.0), (0.3, -1.0), (0.6, 0.7)]).unwrap();
        let c = coeffs(&b, grid);
        let s = assemble_smatrix(&c);
        for i in 0..c.len() {
            let y = transfer_matrix(&b, c.kgrid()[i]).unwrap();
            let m = s.at(i);
            assert!((m[0][0] - y.s11()).norm() < 1e-10);
            assert!((m[0][1] - y.s12()).norm() < 1e-10);
            assert!((m[1][0] - y.s21()).norm() < 1e-10);
        }
        assert!(s.max_unitarity_residual() < 1e-12);
    }

    #[test]
    fn opaque_wall_is_ideal_reflection() {
        let grid = Arc::new(KGrid::uniform(1.2, 1.6, 64).unwrap());
        let c = coeffs(&Barrier::new(1.0, [(1.0, 200.0)]).unwrap(), grid);
        let dec = decompose(&assemble_smatrix(&c), &c).unwrap();
        for i in 0..c.len() {
            assert!((dec.p_ref[i] - 1.0).abs() < 1e-12);
            let expect = matmul(&dec.delta_ref[i], &dec.s0_ref[i]);
            for (row, want) in dec.pi_ref(i).iter().zip(&expect) {
                for (x, y) in row.iter().zip(want) {
                    assert!((x - y).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn side_parses() {
        assert_eq!("Left".parse::<Side>().unwrap(), Side::Left);
        assert_eq!("right".parse::<Side>().unwrap(), Side::Right);
        assert!("up".parse::<Side>().is_err());
    }

    #[test]
    fn geometry_is_checked() {
        let grid = Arc::new(KGrid::centered(1.0, 2.0, 256).unwrap());
        let c = coeffs(&Barrier::new(10.0, [(1.0, 1.0)]).unwrap(), grid.clone());
        assert!(Scenario::left(1.0, 2.0, grid.clone()).unwrap().check_geometry(&c).is_err());
        let c = coeffs(&Barrier::new(30.0, [(1.0, 1.0)]).unwrap(), grid.clone());
        let warnings = Scenario::left(1.0, 2.0, grid.clone()).unwrap().check_geometry(&c).unwrap();
        assert_eq!(warnings.len(), 1);
        let right = Scenario::right(1.0, 2.0, 40.0, grid.clone()).unwrap();
        assert!(right.check_geometry(&c).is_err());
        assert!(Scenario::new(Side::Right, 1.0, 2.0, None, grid).is_err());
    }
}
