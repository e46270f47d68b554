//! Wavenumber grids, two-sided trapezoid quadrature and finite differences.
//!
//! A [`KGrid`] stores strictly positive nodes `k_0 < … < k_{N-1}`. Packets
//! live on the mirrored node set `-k_{N-1}, …, -k_0, k_0, …, k_{N-1}` so that
//! amplitudes such as `A(-k)` are evaluated through the parity rules of the
//! barrier coefficients instead of being stored twice. Index `j < N` of the
//! two-sided layout is the node `-k_{N-1-j}`; index `j >= N` is `k_{j-N}`.

use crate::error::{Error, Result};

/// Stencil width of the finite-difference derivative.
const STENCIL: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct KGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl KGrid {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < STENCIL {
            return Err(Error::InvalidGrid(format!(
                "need at least {STENCIL} nodes, got {}",
                nodes.len()
            )));
        }
        if let Some(bad) = nodes.iter().find(|k| !(k.is_finite() && **k > 0.0)) {
            return Err(Error::InvalidGrid(format!("node {bad} is not a positive wavenumber")));
        }
        if let Some(w) = nodes.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(format!(
                "nodes not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        let weights = half_weights(&nodes);
        Ok(KGrid { nodes, weights })
    }

    /// `n` equally spaced nodes on `[kmin, kmax]`.
    pub fn uniform(kmin: f64, kmax: f64, n: usize) -> Result<Self> {
        if !(kmax > kmin) || n < 2 {
            return Err(Error::InvalidGrid(format!(
                "need kmax > kmin and n >= 2 (kmin={kmin}, kmax={kmax}, n={n})"
            )));
        }
        let h = (kmax - kmin) / (n - 1) as f64;
        Self::new((0..n).map(|i| kmin + h * i as f64).collect())
    }

    /// Default grid for a packet centred at `k0` with half-width `l0`:
    /// `n` uniform nodes on `[k0 - 6/l0, k0 + 6/l0]`.
    ///
    /// When the lower end would reach `k <= 0` the grid becomes
    /// `k_i = (i + 1/2) h` up to `k0 + 6/l0`, which makes the two-sided node
    /// set uniform across the origin.
    pub fn centered(k0: f64, l0: f64, n: usize) -> Result<Self> {
        if !(k0 > 0.0 && l0 > 0.0) {
            return Err(Error::InvalidGrid(format!("need k0 > 0 and l0 > 0 (k0={k0}, l0={l0})")));
        }
        let lo = k0 - 6.0 / l0;
        let hi = k0 + 6.0 / l0;
        if lo > 0.0 {
            Self::uniform(lo, hi, n)
        } else {
            let h = hi / (n as f64 - 0.5);
            Self::new((0..n).map(|i| (i as f64 + 0.5) * h).collect())
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn kmin(&self) -> f64 {
        self.nodes[0]
    }

    pub fn kmax(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Number of nodes in the two-sided layout.
    pub fn two_sided_len(&self) -> usize {
        2 * self.nodes.len()
    }

    /// Positive-grid index of two-sided node `j` and whether the node is `-k`.
    #[inline]
    pub fn split(&self, j: usize) -> (usize, bool) {
        let n = self.nodes.len();
        if j < n {
            (n - 1 - j, true)
        } else {
            (j - n, false)
        }
    }

    /// Signed wavenumber of two-sided node `j`.
    #[inline]
    pub fn signed_node(&self, j: usize) -> f64 {
        let (i, neg) = self.split(j);
        if neg {
            -self.nodes[i]
        } else {
            self.nodes[i]
        }
    }

    /// Trapezoid weight of two-sided node `j` (the layout is symmetric).
    #[inline]
    pub fn weight(&self, j: usize) -> f64 {
        self.weights[self.split(j).0]
    }

    /// Trapezoid integral over the whole real axis of samples given in the
    /// two-sided layout.
    pub fn integrate(&self, values: impl IntoIterator<Item = f64>) -> f64 {
        values
            .into_iter()
            .enumerate()
            .map(|(j, v)| self.weight(j) * v)
            .sum()
    }

    /// Trapezoid integral over the positive nodes only.
    pub fn integrate_positive(&self, values: &[f64]) -> f64 {
        let n = self.nodes.len();
        let mut acc = 0.0;
        for i in 0..n.saturating_sub(1) {
            acc += 0.5 * (self.nodes[i + 1] - self.nodes[i]) * (values[i] + values[i + 1]);
        }
        acc
    }

    pub fn same_nodes(&self, other: &KGrid) -> bool {
        self.nodes == other.nodes
    }

    /// First derivative of tabulated values (fourth order, 5-point stencils,
    /// one-sided at the ends).
    pub fn derivative(&self, values: &[f64]) -> Vec<f64> {
        self.derivative_impl(values, None)
    }

    /// First derivative of a phase that is only defined modulo `period`:
    /// stencil differences are reduced into `(-period/2, period/2]` first.
    pub fn derivative_modulo(&self, values: &[f64], period: f64) -> Vec<f64> {
        self.derivative_impl(values, Some(period))
    }

    fn derivative_impl(&self, values: &[f64], period: Option<f64>) -> Vec<f64> {
        let n = self.nodes.len();
        assert_eq!(values.len(), n, "values must match the grid");
        (0..n)
            .map(|i| {
                let start = i.saturating_sub(STENCIL / 2).min(n - STENCIL);
                let xs = &self.nodes[start..start + STENCIL];
                let w = fd_weights(self.nodes[i], xs);
                xs.iter()
                    .enumerate()
                    .map(|(m, _)| {
                        let mut dv = values[start + m] - values[i];
                        if let Some(p) = period {
                            dv = reduce(dv, p);
                        }
                        w[m] * dv
                    })
                    .sum()
            })
            .collect()
    }
}

/// Reduce `x` into `(-period/2, period/2]`.
pub(crate) fn reduce(x: f64, period: f64) -> f64 {
    let r = x - period * (x / period).round();
    if r <= -0.5 * period {
        r + period
    } else if r > 0.5 * period {
        r - period
    } else {
        r
    }
}

fn half_weights(k: &[f64]) -> Vec<f64> {
    let n = k.len();
    (0..n)
        .map(|i| {
            let left = if i == 0 { 2.0 * k[0] } else { k[i] - k[i - 1] };
            let right = if i + 1 == n { 0.0 } else { k[i + 1] - k[i] };
            0.5 * (left + right)
        })
        .collect()
}

/// Fornberg weights for the first derivative at `x0` on stencil `xs`.
fn fd_weights(x0: f64, xs: &[f64]) -> Vec<f64> {
    const M: usize = 1;
    let n = xs.len();
    let mut c = vec![[0.0f64; M + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(M);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|row| row[M]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_nodes() {
        assert!(KGrid::new(vec![1.0, 2.0, 3.0]).is_err());
        assert!(KGrid::new(vec![0.0, 1.0, 2.0, 3.0, 4.0]).is_err());
        assert!(KGrid::new(vec![1.0, 2.0, 2.0, 3.0, 4.0]).is_err());
        assert!(KGrid::uniform(2.0, 1.0, 10).is_err());
    }

    #[test]
    fn centered_grid_clips_at_origin() {
        let g = KGrid::centered(0.1, 1.0, 64).unwrap();
        let h = g.nodes()[1] - g.nodes()[0];
        assert!((g.kmin() - 0.5 * h).abs() < 1e-15);
        assert!((g.kmax() - 6.1).abs() < 1e-12);
        let g = KGrid::centered(5.0, 2.0, 64).unwrap();
        assert!((g.kmin() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn two_sided_layout_is_ascending() {
        let g = KGrid::uniform(0.5, 2.0, 7).unwrap();
        let ks: Vec<f64> = (0..g.two_sided_len()).map(|j| g.signed_node(j)).collect();
        assert!(ks.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(ks[0], -2.0);
        assert_eq!(ks[13], 2.0);
    }

    #[test]
    fn two_sided_trapezoid_matches_polynomial_integral() {
        // trapezoid is exact for linear integrands; f(k) = 3 + k over [-2, 2]
        let g = KGrid::uniform(0.25, 2.0, 8).unwrap();
        let v = (0..g.two_sided_len()).map(|j| 3.0 + g.signed_node(j));
        assert!((g.integrate(v) - 12.0).abs() < 1e-13);
    }

    #[test]
    fn derivative_is_fourth_order_exact_on_quartics() {
        let g = KGrid::new(vec![0.3, 0.45, 0.7, 0.8, 1.1, 1.3, 1.75]).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|k| k.powi(4) - 2.0 * k * k + k).collect();
        let d = g.derivative(&f);
        for (k, dk) in g.nodes().iter().zip(&d) {
            let exact = 4.0 * k.powi(3) - 4.0 * k + 1.0;
            assert!((dk - exact).abs() < 1e-10, "{k}: {dk} vs {exact}");
        }
    }

    #[test]
    fn modular_derivative_ignores_branch_jumps() {
        let g = KGrid::uniform(0.0 + 0.1, 2.0, 40).unwrap();
        let f: Vec<f64> = g
            .nodes()
            .iter()
            .map(|k| 0.3 * k + if *k > 1.0 { std::f64::consts::PI } else { 0.0 })
            .collect();
        for d in g.derivative_modulo(&f, std::f64::consts::PI) {
            assert!((d - 0.3).abs() < 1e-12);
        }
    }

    #[test]
    fn reduce_range() {
        let p = std::f64::consts::PI;
        assert!((reduce(3.0 * p + 0.1, 2.0 * p) - (p + 0.1 - 2.0 * p)).abs() < 1e-12);
        assert!((reduce(-0.2, p) + 0.2).abs() < 1e-15);
        assert_eq!(reduce(0.5 * p, p), 0.5 * p);
    }
}
