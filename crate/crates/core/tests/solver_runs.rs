use lbfgsm::harness::{ProblemSpec, ReferenceCache};
use lbfgsm::problems::{Ocp, PwQuad, Rosenbrock};
use lbfgsm::solver::{compare_traces, TraceComparison};
use lbfgsm::{minimize, LineSearchKind, Mode, Problem, SolverConfig, Status};

const KINDS: [LineSearchKind; 4] = [
    LineSearchKind::Armijo,
    LineSearchKind::Wolfe,
    LineSearchKind::MoreThuente,
    LineSearchKind::Gll,
];

#[test]
fn trace_invariants_on_rosenbrock() {
    for m in 0..=4 {
        for ls in KINDS {
            let r = minimize(&Rosenbrock, &Rosenbrock::START, &SolverConfig::defaults(m).with_linesearch(ls)).unwrap();
            assert_eq!(r.status, Status::Converged, "{ls} m={m}");
            for (k, t) in r.trace.iter().enumerate() {
                assert_eq!(t.k, k);
                assert!(t.omega <= t.gamma && t.gamma <= 1.0 / t.omega);
                assert!(t.n_active <= t.n_stored && t.n_stored <= m);
                assert!(t.alpha > 0.0 && t.n_feval_ls >= 1);
            }
            let f = r.f_values();
            if ls != LineSearchKind::Gll {
                assert!(f.windows(2).all(|w| w[1] < w[0]), "{ls} m={m} not monotone");
            }
            let c = r.counters;
            assert_eq!(c.f_evals, r.trace.iter().map(|t| t.n_feval_ls).sum::<usize>());
            assert!(c.g_evals > c.iterations);
        }
    }
}

#[test]
fn runs_are_deterministic() {
    let pw = PwQuad::new(20).unwrap();
    let cfg = SolverConfig::defaults(5).with_linesearch(LineSearchKind::Wolfe).with_tol(1e-8);
    let a = minimize(&pw, pw.b(), &cfg).unwrap();
    let b = minimize(&pw, pw.b(), &cfg).unwrap();
    assert_eq!(compare_traces(&a, &b), TraceComparison::Identical);
}

#[test]
fn classical_mode_diverges_from_cautious_with_aggressive_threshold() {
    let mut cfg = SolverConfig::defaults(2);
    cfg.cautious.c0 = 1.0;
    cfg.cautious.c1 = 1e3;
    let a = minimize(&Rosenbrock, &Rosenbrock::START, &cfg).unwrap();
    let b = minimize(&Rosenbrock, &Rosenbrock::START, &cfg.clone().with_mode(Mode::Classical)).unwrap();
    assert!(matches!(compare_traces(&a, &b), TraceComparison::DivergesAt(_)));
    assert_eq!(a.status, Status::Converged);
}

#[test]
fn optimal_control_converges_on_coarse_grid() {
    let ocp = Ocp::standard(3).unwrap();
    let x0 = vec![0.0; ocp.space().dim()];
    for ls in [LineSearchKind::Armijo, LineSearchKind::MoreThuente] {
        let r = minimize(&ocp, &x0, &SolverConfig::defaults(5).with_linesearch(ls)).unwrap();
        assert_eq!(r.status, Status::Converged);
        assert!(r.grad_norm_final <= 1e-9);
        // Optimality: ν u + p = 0, so the residual of the gradient equation vanishes.
        let (_, g) = ocp.value_grad(&r.x_final).unwrap();
        assert!(ocp.space().norm(&g).unwrap() <= 1e-9);
    }
}

#[test]
fn reference_solution_is_cached() {
    let spec = ProblemSpec::Rosenbrock;
    let built = spec.build().unwrap();
    let mut cache = ReferenceCache::new();
    let a = cache.get(&spec, &built).unwrap();
    let b = cache.get(&spec, &built).unwrap();
    assert_eq!(a.x_star, vec![1.0, 1.0]);
    assert_eq!(a.f_star, 0.0);
    assert_eq!(a.x_star, b.x_star);
}

#[test]
fn max_iter_is_reported() {
    let cfg = SolverConfig {
        max_iter: 5,
        ..SolverConfig::defaults(0)
    };
    let r = minimize(&Rosenbrock, &Rosenbrock::START, &cfg).unwrap();
    assert_eq!(r.status, Status::MaxIter);
    assert_eq!(r.counters.iterations, 5);
}
