mod common;

use common::{bound_violations, oracle_errors, random_instance};
use lbfgsm::direction::{dense_h, two_loop};
use lbfgsm::{SecantPair, Space};
use rand::rngs::StdRng;
use rand::SeedableRng;

#[test]
fn two_loop_matches_dense_inverse() {
    let mut rng = StdRng::seed_from_u64(100);
    for i in 0..300 {
        let e = oracle_errors(&random_instance(&mut rng));
        assert!(e.direction <= 1e-12, "instance {i}: {:e}", e.direction);
        assert!(e.inverse <= 1e-10, "instance {i}: {:e}", e.inverse);
    }
}

#[test]
fn bounds_hold_on_random_instances() {
    let mut rng = StdRng::seed_from_u64(101);
    for _ in 0..300 {
        let inst = random_instance(&mut rng);
        assert_eq!(bound_violations(&inst, &mut rng), 0);
    }
}

#[test]
fn weighted_space_is_scaled_euclidean() {
    // Scaling the product by w maps pairs (s, y) to the Euclidean pairs
    // (s, w y) under the coordinate identification; directions agree.
    let w = 0.01;
    let ws = Space::weighted(3, w).unwrap();
    let es = Space::euclidean(3);
    let s = vec![1.0, 0.5, -0.2];
    let y = vec![2.0, 0.3, 0.1];
    let g = vec![0.3, -1.0, 2.0];
    let wp = SecantPair::new(&ws, s.clone(), y.clone(), 0).unwrap();
    let ep = SecantPair::new(&es, s, y.iter().map(|v| w * v).collect(), 0).unwrap();
    let dw = two_loop(&ws, &[&wp], 0.7, &g).unwrap();
    let de = two_loop(&es, &[&ep], 0.7 / w, &g.iter().map(|v| w * v).collect::<Vec<_>>()).unwrap();
    for (a, b) in dw.iter().zip(&de) {
        assert!((a - b).abs() <= 1e-13 * a.abs().max(1.0), "{a} vs {b}");
    }
}

#[test]
fn dense_operator_is_self_adjoint_and_secant() {
    let mut rng = StdRng::seed_from_u64(102);
    for _ in 0..100 {
        let inst = random_instance(&mut rng);
        let Some(last) = inst.pairs.last() else { continue };
        let refs: Vec<&SecantPair> = inst.pairs.iter().collect();
        let h = dense_h(&inst.space, &refs, inst.gamma, inst.space.dim()).unwrap();
        let hy = h.apply(&last.y);
        let scale = last.s.iter().map(|v| v.abs()).fold(0.0, f64::max);
        for (a, b) in hy.iter().zip(&last.s) {
            assert!((a - b).abs() <= 1e-9 * scale.max(1.0));
        }
        let probes = vec![(last.s.clone(), last.y.clone()), (inst.grad.clone(), last.s.clone())];
        assert!(h.self_adjoint_defect(&probes) < 1e-12);
    }
}
