#![allow(dead_code)]

use std::sync::Arc;

use qscatter::channels::Scenario;
use qscatter::packets::MomentSet;
use qscatter::potential::{scatter_coeffs, Barrier, ScatterCoeffs};
use qscatter::KGrid;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rect(a: f64, d: f64, v0: f64) -> Barrier {
    Barrier::new(a, [(d, v0)]).unwrap()
}

pub fn zero_barrier(a: f64, d: f64) -> Barrier {
    Barrier::new(a, [(d, 0.0)]).unwrap()
}

/// Textbook transmission of a rectangular barrier, `ħ = m = 1`.
pub fn rect_transmission(v0: f64, d: f64, k: f64) -> f64 {
    let e = 0.5 * k * k;
    if v0 == 0.0 {
        return 1.0;
    }
    let diff = v0 - e;
    if diff > 0.0 {
        let kappa = (2.0 * diff).sqrt();
        1.0 / (1.0 + v0 * v0 * (kappa * d).sinh().powi(2) / (4.0 * e * diff))
    } else if diff < 0.0 {
        let q = (-2.0 * diff).sqrt();
        1.0 / (1.0 + v0 * v0 * (q * d).sin().powi(2) / (4.0 * e * -diff))
    } else {
        1.0 / (1.0 + e * d * d / 2.0)
    }
}

/// `n` segments with widths in `[0.2, 1.2]` and heights in `[-3, 5]`.
pub fn random_barrier(rng: &mut impl Rng, a: f64, n: usize) -> Barrier {
    let segs: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.gen_range(0.2..1.2), rng.gen_range(-3.0..5.0)))
        .collect();
    Barrier::new(a, segs).unwrap()
}

pub fn left(barrier: &Barrier, k0: f64, l0: f64, n: usize) -> (Scenario, ScatterCoeffs) {
    let grid = Arc::new(KGrid::centered(k0, l0, n).unwrap());
    let sc = Scenario::left(k0, l0, grid.clone()).unwrap();
    (sc, scatter_coeffs(barrier, grid).unwrap())
}

pub fn right(barrier: &Barrier, k0: f64, l0: f64, x_r: f64, n: usize) -> (Scenario, ScatterCoeffs) {
    let grid = Arc::new(KGrid::centered(k0, l0, n).unwrap());
    let sc = Scenario::right(k0, l0, x_r, grid.clone()).unwrap();
    (sc, scatter_coeffs(barrier, grid).unwrap())
}

/// Transmission of `barrier` at `k` by RK4 integration of
/// `ψ'' = 2 (V - E) ψ` from a pure outgoing wave at `b` back to `a`.
pub fn shooting_transmission(barrier: &Barrier, k: f64, steps_per_unit: usize) -> f64 {
    use num_complex::Complex64 as C;
    let e = 0.5 * k * k;
    let b = barrier.b();
    let mut psi = C::from_polar(1.0, k * b);
    let mut dpsi = C::new(0.0, k) * psi;
    for seg in barrier.segments().iter().rev() {
        let n = ((seg.width * steps_per_unit as f64).ceil() as usize).max(1);
        let h = -seg.width / n as f64;
        let w = 2.0 * (seg.height - e);
        for _ in 0..n {
            let f = |p: C, dp: C| (dp, p * w);
            let (k1a, k1b) = f(psi, dpsi);
            let (k2a, k2b) = f(psi + k1a * (h / 2.0), dpsi + k1b * (h / 2.0));
            let (k3a, k3b) = f(psi + k2a * (h / 2.0), dpsi + k2b * (h / 2.0));
            let (k4a, k4b) = f(psi + k3a * h, dpsi + k3b * h);
            psi += (k1a + k2a * 2.0 + k3a * 2.0 + k4a) * (h / 6.0);
            dpsi += (k1b + k2b * 2.0 + k3b * 2.0 + k4b) * (h / 6.0);
        }
    }
    let a = barrier.a();
    let incoming = (psi + dpsi / C::new(0.0, k)) * 0.5 * C::from_polar(1.0, -k * a);
    1.0 / incoming.norm_sqr()
}

pub fn max_abs(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Residuals of the probabilistic and momentum sum rules for a left-side
/// scenario, labelled for reporting.
pub fn sum_rule_residuals(sc: &Scenario, c: &ScatterCoeffs) -> Vec<(String, f64)> {
    use qscatter::channels::{in_asymptotes, out_asymptotes};
    let (out_tr, out_ref) = out_asymptotes(sc, c).unwrap();
    let (in_tr, in_ref) = in_asymptotes(sc, c).unwrap();
    let inc = sc.incident();
    let (tb, rb) = (out_tr.norm(), out_ref.norm());
    let grid = inc.grid().clone();
    let mut out = vec![
        ("T+R=1".to_string(), (tb + rb - 1.0).abs()),
        ("in norms add up".into(), (in_tr.norm() + in_ref.norm() - inc.norm()).abs()),
        ("tr norm in=out".into(), (in_tr.norm() - tb).abs()),
        ("ref norm in=out".into(), (in_ref.norm() - rb).abs()),
        ("tr norm = <T>".into(), (tb - inc.expect(|j| c.at_node(j).t)).abs()),
        ("tr momentum in=out".into(), (in_tr.k_moment(1) - out_tr.k_moment(1)).abs()),
        ("ref momentum in=-out".into(), (in_ref.k_moment(1) + out_ref.k_moment(1)).abs()),
    ];
    for n in 1..=3u32 {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let k_in = inc.k_moment(n);
        out.push((
            format!("<k^{n}> from in channels"),
            (k_in - tb * in_tr.k_moment(n) - rb * in_ref.k_moment(n)).abs(),
        ));
        out.push((
            format!("<k^{n}> from out channels"),
            (k_in - tb * out_tr.k_moment(n) - rb * sign * out_ref.k_moment(n)).abs(),
        ));
        let weighted = inc.expect(|j| c.at_node(j).t * grid.signed_node(j).powi(n as i32));
        out.push((format!("<T k^{n}> = T<k^{n}>_tr"), (weighted - tb * out_tr.k_moment(n)).abs()));
    }
    for t in [0.0, -10.0] {
        let x = inc.x_mean(t).unwrap();
        let split = tb * in_tr.x_mean(t).unwrap() + rb * in_ref.x_mean(t).unwrap();
        out.push((format!("<x> from in channels at t={t}"), (x - split).abs()));
    }
    out
}

pub fn bisect(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// All sign changes of `f` on `[lo, hi]`, refined by bisection.
pub fn roots(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let h = (hi - lo) / n as f64;
    let mut out = Vec::new();
    let mut prev = f(lo);
    for i in 1..=n {
        let t = lo + h * i as f64;
        let cur = f(t);
        if (cur > 0.0) != (prev > 0.0) {
            out.push(bisect(f, t - h, t));
        }
        prev = cur;
    }
    out
}

pub fn std_at(m: &MomentSet, t: f64) -> f64 {
    m.x_variance(t).max(0.0).sqrt()
}
