mod common;

use std::sync::Arc;

use common::*;
use proptest::prelude::*;
use qscatter::potential::{scatter_coeffs, transfer_matrix, Barrier};
use qscatter::KGrid;
use rand::Rng;

#[test]
fn random_rectangles_match_textbook_formula() {
    let mut rng = rng(11);
    for _ in 0..20 {
        let v0 = rng.gen_range(-3.0..5.0);
        let d = rng.gen_range(0.2..3.0);
        let b = rect(rng.gen_range(1.0..50.0), d, v0);
        for _ in 0..50 {
            let k = rng.gen_range(0.05..5.0);
            let t = transfer_matrix(&b, k).unwrap().transmission();
            let want = rect_transmission(v0, d, k);
            assert!((t - want).abs() < 1e-10, "V0={v0} d={d} k={k}: {t} vs {want}");
        }
    }
}

#[test]
fn two_segment_barriers_match_shooting() {
    let mut rng = rng(12);
    for _ in 0..10 {
        let b = random_barrier(&mut rng, 10.0, 2);
        for _ in 0..10 {
            let k = rng.gen_range(0.3..3.0);
            let t = transfer_matrix(&b, k).unwrap().transmission();
            let shot = shooting_transmission(&b, k, 4000);
            assert!((t - shot).abs() < 1e-6, "{b:?} k={k}: {t} vs {shot}");
        }
    }
}

#[test]
fn coefficient_table_on_dense_grid() {
    let b = rect(100.0, 1.0, 2.0);
    let grid = Arc::new(KGrid::uniform(0.01, 4.0, 4096).unwrap());
    let c = scatter_coeffs(&b, grid).unwrap();
    for i in 0..c.len() {
        let s = c.sample(i);
        assert!((s.t - rect_transmission(2.0, 1.0, s.k)).abs() < 1e-10);
        assert!((s.t + s.r - 1.0).abs() < 1e-12);
    }
    for w in c.j.windows(2).chain(c.f.windows(2)) {
        assert!((w[1] - w[0]).abs() < std::f64::consts::PI);
    }
}

#[test]
fn phase_derivatives_converge_under_refinement() {
    let b = Barrier::new(20.0, [(0.7, 3.0), (0.5, -1.0), (0.4, 1.5)]).unwrap();
    let coarse = scatter_coeffs(&b, Arc::new(KGrid::uniform(0.5, 2.5, 401).unwrap())).unwrap();
    let fine = scatter_coeffs(&b, Arc::new(KGrid::uniform(0.5, 2.5, 801).unwrap())).unwrap();
    for i in 10..391 {
        let (c, f) = (coarse.sample(i), fine.sample(2 * i));
        assert_eq!(c.k, f.k);
        assert!((c.j_prime - f.j_prime).abs() < 1e-6 * (1.0 + f.j_prime.abs()));
        assert!((c.f_prime - f.f_prime).abs() < 1e-6 * (1.0 + f.f_prime.abs()));
    }
}

fn segments() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.1f64..1.5, -3.0f64..5.0), 1..5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flux_is_conserved(segs in segments(), a in 0.5f64..50.0, k in 0.02f64..6.0) {
        let b = Barrier::new(a, segs).unwrap();
        let y = transfer_matrix(&b, k).unwrap();
        prop_assert!(y.flux_residual() < 1e-10);
    }

    #[test]
    fn splitting_a_segment_changes_nothing(
        segs in segments(),
        which in 0usize..4,
        frac in 0.05f64..0.95,
        k in 0.05f64..5.0,
    ) {
        let which = which % segs.len();
        let mut split = Vec::new();
        for (i, &(w, h)) in segs.iter().enumerate() {
            if i == which {
                split.push((w * frac, h));
                split.push((w * (1.0 - frac), h));
            } else {
                split.push((w, h));
            }
        }
        let y1 = transfer_matrix(&Barrier::new(5.0, segs).unwrap(), k).unwrap();
        let y2 = transfer_matrix(&Barrier::new(5.0, split).unwrap(), k).unwrap();
        let scale = 1.0 + y1.q.norm();
        prop_assert!((y1.q - y2.q).norm() < 1e-12 * scale);
        prop_assert!((y1.p - y2.p).norm() < 1e-12 * scale);
    }

    #[test]
    fn shifting_the_barrier_only_moves_phases(segs in segments(), shift in 0.1f64..30.0, k in 0.1f64..4.0) {
        let b1 = Barrier::new(1.0, segs.clone()).unwrap();
        let b2 = Barrier::new(1.0 + shift, segs).unwrap();
        let y1 = transfer_matrix(&b1, k).unwrap();
        let y2 = transfer_matrix(&b2, k).unwrap();
        prop_assert!((y1.transmission() - y2.transmission()).abs() < 1e-12);
        // J is translation invariant, p picks up exp(-2ik shift) through s
        let scale = 1.0 + y1.q.norm();
        prop_assert!((y1.q - y2.q).norm() < 1e-12 * scale);
    }
}
