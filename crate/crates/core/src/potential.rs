//! Piecewise-constant barriers, their transfer matrix and the scattering
//! functions `T(k)`, `R(k)`, `J(k)`, `F(k)`.
//!
//! The transfer matrix relates the plane-wave amplitudes on both sides of the
//! barrier,
//!
//! ```text
//! (A_in(+), A_out(-))ᵀ = Y (A_out(+), A_in(-))ᵀ,   Y = [[q, p], [p*, q*]],
//! q = T^{-1/2} exp(-i(J - kd)),   p = (R/T)^{1/2} exp(i(π/2 + F - ks)).
//! ```
//!
//! `Y` is obtained by propagating `(ψ, ψ')` through the segments with real
//! unimodular 2×2 matrices and changing basis to plane waves at `x = a` and
//! `x = b`. A segment whose height equals the energy uses the exact `κ → 0`
//! limit of the propagation step.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fs;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{reduce, KGrid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub width: f64,
    pub height: f64,
}

/// Potential `V(x)` on `[a, b]`, zero elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct Barrier {
    a: f64,
    segments: Vec<Segment>,
    d: f64,
}

impl Barrier {
    pub fn new(a: f64, segments: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::InvalidBarrier(format!("left edge a must be > 0, got {a}")));
        }
        let segments: Vec<Segment> = segments
            .into_iter()
            .map(|(width, height)| Segment { width, height })
            .collect();
        if segments.is_empty() {
            return Err(Error::InvalidBarrier("no segments".into()));
        }
        for (i, s) in segments.iter().enumerate() {
            if !(s.width.is_finite() && s.width > 0.0) {
                return Err(Error::InvalidBarrier(format!(
                    "segment {i} has non-positive width {}",
                    s.width
                )));
            }
            if !s.height.is_finite() {
                return Err(Error::InvalidBarrier(format!("segment {i} has non-finite height")));
            }
        }
        let d = segments.iter().map(|s| s.width).sum();
        Ok(Barrier { a, segments, d })
    }

    /// Parse the text format: a header `a <value>` followed by one
    /// `<width> <height>` line per segment. Blank lines and `#` comments are
    /// ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut a = None;
        let mut segments = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let parse = |s: &str| -> Result<f64> {
                s.parse::<f64>().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("cannot parse '{s}' as a number"),
                })
            };
            match a {
                None => {
                    if fields.len() != 2 || fields[0] != "a" {
                        return Err(Error::Parse {
                            line: line_no,
                            msg: "expected header 'a <value>'".into(),
                        });
                    }
                    a = Some(parse(fields[1])?);
                }
                Some(_) => {
                    if fields.len() != 2 {
                        return Err(Error::Parse {
                            line: line_no,
                            msg: format!("expected '<width> <height>', found {} fields", fields.len()),
                        });
                    }
                    let w = parse(fields[0])?;
                    let h = parse(fields[1])?;
                    if !(w > 0.0) {
                        return Err(Error::Parse {
                            line: line_no,
                            msg: format!("segment width must be positive, got {w}"),
                        });
                    }
                    segments.push((w, h));
                }
            }
        }
        let a = a.ok_or(Error::Parse { line: 1, msg: "missing header 'a <value>'".into() })?;
        if segments.is_empty() {
            return Err(Error::Parse {
                line: text.lines().count().max(1),
                msg: "no segments".into(),
            });
        }
        Barrier::new(a, segments)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    /// Text form accepted by [`Barrier::parse`].
    pub fn to_spec_string(&self) -> String {
        let mut out = format!("a {}\n", self.a);
        for s in &self.segments {
            out.push_str(&format!("{} {}\n", s.width, s.height));
        }
        out
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.a + self.d
    }

    pub fn width(&self) -> f64 {
        self.d
    }

    /// `s = a + b`.
    pub fn s(&self) -> f64 {
        self.a + self.b()
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * self.s()
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Same profile with the left edge moved to `a`.
    pub fn shifted_to(&self, a: f64) -> Result<Self> {
        Barrier::new(a, self.segments.iter().map(|s| (s.width, s.height)))
    }

    /// Same geometry with every height multiplied by `factor`.
    pub fn scaled_heights(&self, factor: f64) -> Self {
        Barrier {
            a: self.a,
            d: self.d,
            segments: self
                .segments
                .iter()
                .map(|s| Segment { width: s.width, height: s.height * factor })
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.segments.iter().all(|s| s.height == 0.0)
    }

    /// Mirror-symmetric about the midpoint within `tol` (after merging
    /// adjacent equal-height segments).
    pub fn is_symmetric(&self, tol: f64) -> bool {
        let merged = self.merged();
        let n = merged.len();
        (0..n / 2 + 1).all(|i| {
            let (l, r) = (merged[i], merged[n - 1 - i]);
            (l.width - r.width).abs() <= tol && (l.height - r.height).abs() <= tol
        })
    }

    fn merged(&self) -> Vec<Segment> {
        let mut out: Vec<Segment> = Vec::new();
        for s in &self.segments {
            match out.last_mut() {
                Some(last) if last.height == s.height => last.width += s.width,
                _ => out.push(*s),
            }
        }
        out
    }

    pub fn potential_at(&self, x: f64) -> f64 {
        if x < self.a || x > self.b() {
            return 0.0;
        }
        let mut edge = self.a;
        for s in &self.segments {
            edge += s.width;
            if x <= edge {
                return s.height;
            }
        }
        self.segments.last().map_or(0.0, |s| s.height)
    }

    /// Mean of `V` over `[lo, hi]`.
    pub fn cell_average(&self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return self.potential_at(lo);
        }
        let mut acc = 0.0;
        let mut left = self.a;
        for s in &self.segments {
            let right = left + s.width;
            let overlap = hi.min(right) - lo.max(left);
            if overlap > 0.0 {
                acc += overlap * s.height;
            }
            left = right;
        }
        acc / (hi - lo)
    }
}

/// Entries `q`, `p` of the transfer matrix `Y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub q: Complex64,
    pub p: Complex64,
}

impl TransferMatrix {
    /// `|q|² - |p|² - 1`, relative to `|q|²`.
    pub fn flux_residual(&self) -> f64 {
        let q2 = self.q.norm_sqr();
        (q2 - self.p.norm_sqr() - 1.0) / q2
    }

    pub fn transmission(&self) -> f64 {
        1.0 / self.q.norm_sqr()
    }

    /// `S11 = S22 = 1/q`.
    pub fn s11(&self) -> Complex64 {
        self.q.inv()
    }

    /// `S12 = -p/q`.
    pub fn s12(&self) -> Complex64 {
        -self.p / self.q
    }

    /// `S21 = p*/q`.
    pub fn s21(&self) -> Complex64 {
        self.p.conj() / self.q
    }
}

/// Real `(ψ, ψ')` propagation matrix across a segment with `κ² = z`.
fn segment_step(z: f64, w: f64) -> [[f64; 2]; 2] {
    let (c, s) = if z > 0.0 {
        let kap = z.sqrt();
        ((kap * w).cos(), (kap * w).sin() / kap)
    } else if z < 0.0 {
        let g = (-z).sqrt();
        ((g * w).cosh(), (g * w).sinh() / g)
    } else {
        (1.0, w)
    };
    [[c, s], [-z * s, c]]
}

fn mat_mul(l: [[f64; 2]; 2], r: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [
        [l[0][0] * r[0][0] + l[0][1] * r[1][0], l[0][0] * r[0][1] + l[0][1] * r[1][1]],
        [l[1][0] * r[0][0] + l[1][1] * r[1][0], l[1][0] * r[0][1] + l[1][1] * r[1][1]],
    ]
}

pub fn transfer_matrix(barrier: &Barrier, k: f64) -> Result<TransferMatrix> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::NonPositiveWavenumber(k));
    }
    let k2 = k * k;
    let mut m = [[1.0, 0.0], [0.0, 1.0]];
    for seg in barrier.segments() {
        m = mat_mul(segment_step(k2 - 2.0 * seg.height, seg.width), m);
    }
    // inverse of a unimodular matrix
    let (n11, n12, n21, n22) = (m[1][1], -m[0][1], -m[1][0], m[0][0]);
    let d = barrier.width();
    let s = barrier.s();
    let q = Complex64::from_polar(0.5, k * d)
        * Complex64::new(n11 + n22, k * n12 - n21 / k);
    let p = Complex64::from_polar(0.5, -k * s)
        * Complex64::new(n11 - n22, -(k * n12 + n21 / k));
    Ok(TransferMatrix { q, p })
}

/// Anchor tolerance for treating the barrier as transparent at the first node.
const TRANSPARENT_T: f64 = 1.0 - 1e-9;
/// Adjacent raw steps of `J` beyond this are ambiguous.
const MAX_J_STEP: f64 = 0.9 * PI;
/// Below this `R`, `arg p` carries no information and `F` is continued.
const F_UNDEFINED_R: f64 = 1e-28;

/// One grid point of the coefficient tables, possibly mapped to `-k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoeffSample {
    pub k: f64,
    pub t: f64,
    pub r: f64,
    pub j: f64,
    pub f: f64,
    pub j_prime: f64,
    pub f_prime: f64,
    pub t_prime: f64,
}

/// `T`, `R`, `J`, `F` and their `k`-derivatives tabulated on a positive grid.
#[derive(Debug, Clone)]
pub struct ScatterCoeffs {
    grid: Arc<KGrid>,
    a: f64,
    d: f64,
    pub t: Vec<f64>,
    pub r: Vec<f64>,
    pub j: Vec<f64>,
    pub f: Vec<f64>,
    pub j_prime: Vec<f64>,
    pub f_prime: Vec<f64>,
    pub t_prime: Vec<f64>,
}

impl ScatterCoeffs {
    pub fn grid(&self) -> &Arc<KGrid> {
        &self.grid
    }

    pub fn kgrid(&self) -> &[f64] {
        self.grid.nodes()
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.a + self.d
    }

    pub fn width(&self) -> f64 {
        self.d
    }

    pub fn s(&self) -> f64 {
        2.0 * self.a + self.d
    }

    pub fn sample(&self, i: usize) -> CoeffSample {
        CoeffSample {
            k: self.grid.nodes()[i],
            t: self.t[i],
            r: self.r[i],
            j: self.j[i],
            f: self.f[i],
            j_prime: self.j_prime[i],
            f_prime: self.f_prime[i],
            t_prime: self.t_prime[i],
        }
    }

    /// Sample at `-k_i` when `negative`: `T`, `R`, `J'`, `F'` are even,
    /// `T'` and `J` odd, and `F(-k) = π - F(k)`.
    pub fn sample_signed(&self, i: usize, negative: bool) -> CoeffSample {
        let s = self.sample(i);
        if !negative {
            return s;
        }
        CoeffSample {
            k: -s.k,
            j: -s.j,
            f: PI - s.f,
            t_prime: -s.t_prime,
            ..s
        }
    }

    /// Sample at two-sided node `j` of the grid.
    pub fn at_node(&self, j: usize) -> CoeffSample {
        let (i, neg) = self.grid.split(j);
        self.sample_signed(i, neg)
    }
}

pub fn scatter_coeffs(barrier: &Barrier, grid: Arc<KGrid>) -> Result<ScatterCoeffs> {
    let ks = grid.nodes();
    let n = ks.len();
    let d = barrier.width();
    let s = barrier.s();

    let mut t = Vec::with_capacity(n);
    let mut r = Vec::with_capacity(n);
    let mut j_raw = Vec::with_capacity(n);
    let mut f_raw: Vec<Option<f64>> = Vec::with_capacity(n);
    for &k in ks {
        let y = transfer_matrix(barrier, k)?;
        let q2 = y.q.norm_sqr();
        let p2 = y.p.norm_sqr();
        let tk = 1.0 / q2;
        let rk = p2 / q2;
        let sum = tk + rk;
        t.push(tk / sum);
        r.push(rk / sum);
        j_raw.push(k * d - y.q.arg());
        f_raw.push((rk / sum > F_UNDEFINED_R).then(|| y.p.arg() - FRAC_PI_2 + k * s));
    }

    let mut j = Vec::with_capacity(n);
    j.push(if t[0] > TRANSPARENT_T {
        let free = ks[0] * d;
        j_raw[0] + 2.0 * PI * ((free - j_raw[0]) / (2.0 * PI)).round()
    } else {
        reduce(j_raw[0], 2.0 * PI)
    });
    for i in 1..n {
        let step = reduce(j_raw[i] - j_raw[i - 1], 2.0 * PI);
        if step.abs() > MAX_J_STEP {
            return Err(Error::PhaseUnwrap { lo: ks[i - 1], hi: ks[i], step });
        }
        j.push(j[i - 1] + step);
    }

    // F follows nearest-branch continuation; steps near ±π are the sign
    // changes of p at reflection zeros and are kept.
    let mut f = Vec::with_capacity(n);
    let mut prev_raw: Option<f64> = None;
    let first = f_raw.iter().flatten().next().copied().unwrap_or(ks[0] * s - FRAC_PI_2);
    for raw in &f_raw {
        match (raw, prev_raw) {
            (Some(v), Some(pr)) => {
                let last = *f.last().unwrap_or(&first);
                f.push(last + reduce(v - pr, 2.0 * PI));
                prev_raw = Some(*v);
            }
            (Some(v), None) => {
                // first defined value anchors the branch
                let base = match f.last() {
                    Some(last) => last + reduce(v - last, 2.0 * PI),
                    None => reduce(*v, 2.0 * PI),
                };
                f.push(base);
                prev_raw = Some(*v);
            }
            (None, _) => {
                f.push(*f.last().unwrap_or(&first));
            }
        }
    }

    let j_prime = grid.derivative(&j);
    let f_prime = grid.derivative_modulo(&f, PI);
    let t_prime = grid.derivative(&t);

    Ok(ScatterCoeffs {
        grid,
        a: barrier.a(),
        d,
        t,
        r,
        j,
        f,
        j_prime,
        f_prime,
        t_prime,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(v0: f64, d: f64) -> Barrier {
        Barrier::new(1.0, [(d, v0)]).unwrap()
    }

    /// Textbook rectangular-barrier transmission, `ħ = m = 1`.
    fn analytic_t(v0: f64, d: f64, k: f64) -> f64 {
        let e = 0.5 * k * k;
        if e < v0 {
            let kap = (2.0 * (v0 - e)).sqrt();
            1.0 / (1.0 + v0 * v0 * (kap * d).sinh().powi(2) / (4.0 * e * (v0 - e)))
        } else if e > v0 {
            let kk = (2.0 * (e - v0)).sqrt();
            1.0 / (1.0 + v0 * v0 * (kk * d).sin().powi(2) / (4.0 * e * (e - v0)))
        } else {
            1.0 / (1.0 + v0 * d * d / 2.0)
        }
    }

    #[test]
    fn derived_geometry() {
        let b = Barrier::new(1.0, [(1.0, 0.0)]).unwrap();
        assert_eq!(b.b(), 2.0);
        assert_eq!(b.width(), 1.0);
        assert_eq!(b.s(), 3.0);
        assert_eq!(b.midpoint(), 1.5);
    }

    #[test]
    fn construction_errors() {
        assert!(Barrier::new(0.0, [(1.0, 1.0)]).is_err());
        assert!(Barrier::new(-1.0, [(1.0, 1.0)]).is_err());
        assert!(Barrier::new(1.0, [(0.0, 1.0)]).is_err());
        assert!(Barrier::new(1.0, [(-0.5, 1.0)]).is_err());
        assert!(Barrier::new(1.0, Vec::<(f64, f64)>::new()).is_err());
    }

    #[test]
    fn split_segment_is_same_physics() {
        let one = rect(2.0, 1.0);
        let two = Barrier::new(1.0, [(0.5, 2.0), (0.5, 2.0)]).unwrap();
        for k in [0.3, 1.0, 1.9, 2.0, 2.7] {
            let (y1, y2) = (transfer_matrix(&one, k).unwrap(), transfer_matrix(&two, k).unwrap());
            assert!((y1.transmission() - y2.transmission()).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_barrier_is_identity() {
        let b = Barrier::new(3.0, [(0.4, 0.0), (1.1, 0.0)]).unwrap();
        for k in [0.1, 1.0, 7.3] {
            let y = transfer_matrix(&b, k).unwrap();
            assert!((y.q - 1.0).norm() < 1e-13);
            assert!(y.p.norm() < 1e-13);
        }
    }

    #[test]
    fn rectangular_matches_analytic_at_unit_energy() {
        // E = 1 => k = sqrt(2)
        let k = 2f64.sqrt();
        let y = transfer_matrix(&rect(2.0, 1.0), k).unwrap();
        assert!((y.transmission() - analytic_t(2.0, 1.0, k)).abs() < 1e-12);
        let y = transfer_matrix(&rect(2.0, 1.0), 1.0).unwrap();
        assert!((y.transmission() - analytic_t(2.0, 1.0, 1.0)).abs() < 1e-10);
    }

    #[test]
    fn energy_equal_to_height_uses_limit() {
        // V0 = 2 => E = V0 at k = 2
        let y = transfer_matrix(&rect(2.0, 1.0), 2.0).unwrap();
        assert!((y.transmission() - 1.0 / (1.0 + 2.0 * 0.5)).abs() < 1e-14);
        assert!(y.flux_residual().abs() < 1e-14);
    }

    #[test]
    fn rejects_non_positive_k() {
        assert!(transfer_matrix(&rect(1.0, 1.0), 0.0).is_err());
        assert!(transfer_matrix(&rect(1.0, 1.0), -1.0).is_err());
    }

    #[test]
    fn zero_barrier_coefficients() {
        let grid = Arc::new(KGrid::uniform(0.5, 3.0, 64).unwrap());
        let b = Barrier::new(2.0, [(1.5, 0.0)]).unwrap();
        let c = scatter_coeffs(&b, grid).unwrap();
        for i in 0..c.len() {
            assert!((c.t[i] - 1.0).abs() < 1e-14);
            assert!(c.r[i] < 1e-28);
            assert!((c.j[i] - c.kgrid()[i] * 1.5).abs() < 1e-12);
            assert!((c.j_prime[i] - 1.5).abs() < 1e-10);
        }
    }

    #[test]
    fn symmetric_barrier_has_flat_f() {
        let grid = Arc::new(KGrid::uniform(0.2, 5.0, 1024).unwrap());
        let b = Barrier::new(1.0, [(0.3, 2.0), (0.4, -1.0), (0.3, 2.0)]).unwrap();
        let c = scatter_coeffs(&b, grid).unwrap();
        let worst = c.f_prime.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(worst < 1e-6, "max |F'| = {worst}");
    }

    #[test]
    fn coefficient_table_matches_analytic() {
        let grid = Arc::new(KGrid::uniform(0.5, 3.5, 301).unwrap());
        let c = scatter_coeffs(&rect(2.0, 1.0), grid).unwrap();
        for i in 0..c.len() {
            let k = c.kgrid()[i];
            assert!((c.t[i] - analytic_t(2.0, 1.0, k)).abs() < 1e-10);
            assert!((c.t[i] + c.r[i] - 1.0).abs() < 1e-14);
        }
        // k = 1 is a node (0.5 + 50 * 0.01)
        let i = 50;
        assert!((c.kgrid()[i] - 1.0).abs() < 1e-12);
        assert!((c.t[i] - analytic_t(2.0, 1.0, 1.0)).abs() < 1e-10);
    }

    #[test]
    fn parity_accessor() {
        let grid = Arc::new(KGrid::uniform(0.5, 3.5, 31).unwrap());
        let c = scatter_coeffs(&Barrier::new(1.0, [(0.5, 1.0), (0.7, 3.0)]).unwrap(), grid).unwrap();
        for i in 0..c.len() {
            let p = c.sample(i);
            let m = c.sample_signed(i, true);
            assert_eq!(m.k, -p.k);
            assert_eq!(m.t, p.t);
            assert_eq!(m.j, -p.j);
            assert_eq!(m.f, PI - p.f);
            assert_eq!(m.j_prime, p.j_prime);
            assert_eq!(m.f_prime, p.f_prime);
            assert_eq!(m.t_prime, -p.t_prime);
        }
    }

    #[test]
    fn parse_round_trip_and_errors() {
        let b = Barrier::parse("# demo\na 2.5\n0.5 1.25\n\n0.25 -3 # well\n").unwrap();
        assert_eq!(b.a(), 2.5);
        assert_eq!(b.segments().len(), 2);
        assert_eq!(Barrier::parse(&b.to_spec_string()).unwrap(), b);

        let err = Barrier::parse("a 1\n1.0 2.0\n1.0 x\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = Barrier::parse("b 1\n1 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = Barrier::parse("a 1\n1 2 3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(Barrier::parse("a 1\n").is_err());
        assert!(Barrier::parse("a 0\n1 1\n").is_err());
    }

    #[test]
    fn symmetry_detection() {
        assert!(Barrier::new(1.0, [(0.5, 2.0), (0.5, 2.0)]).unwrap().is_symmetric(1e-12));
        assert!(Barrier::new(1.0, [(0.3, 2.0), (0.4, 1.0), (0.3, 2.0)]).unwrap().is_symmetric(1e-12));
        assert!(!Barrier::new(1.0, [(0.5, 2.0), (0.5, 1.0)]).unwrap().is_symmetric(1e-12));
    }

    #[test]
    fn cell_average_of_step() {
        let b = Barrier::new(1.0, [(1.0, 2.0)]).unwrap();
        assert_eq!(b.cell_average(0.5, 1.5), 1.0);
        assert_eq!(b.cell_average(1.2, 1.4), 2.0);
        assert_eq!(b.cell_average(2.5, 3.0), 0.0);
    }
}
