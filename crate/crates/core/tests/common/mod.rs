#![allow(dead_code)]

use lbfgsm::direction::{check_bounds, check_cautious_bounds, curvature_constants, dense_b, dense_h, two_loop};
use lbfgsm::linesearch::{search, LineSearchKind, LineSearchParams, ScalarLine};
use lbfgsm::{SecantPair, Space};
use rand::rngs::StdRng;
use rand::Rng;

/// Standard normal sample by Box–Muller.
pub fn normal(rng: &mut StdRng) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn normal_vec(rng: &mut StdRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| normal(rng)).collect()
}

pub fn log_uniform(rng: &mut StdRng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

pub struct Instance {
    pub space: Space,
    pub pairs: Vec<SecantPair>,
    pub gamma: f64,
    pub grad: Vec<f64>,
}

/// Dimension ≤ 8, up to 5 pairs with `y = A s` for a fresh SPD `A` per pair,
/// `γ ∈ [0.1, 10]`, Euclidean or weighted product.
pub fn random_instance(rng: &mut StdRng) -> Instance {
    let dim = rng.gen_range(1..=8);
    let space = if rng.gen_bool(0.5) {
        Space::euclidean(dim)
    } else {
        Space::weighted(dim, log_uniform(rng, 1e-3, 1.0)).unwrap()
    };
    let n_pairs = rng.gen_range(0..=5);
    let pairs = (0..n_pairs)
        .map(|i| {
            let s = normal_vec(rng, dim);
            let shift = log_uniform(rng, 0.2, 5.0);
            let b: Vec<f64> = normal_vec(rng, dim * dim).iter().map(|v| 0.5 * v).collect();
            let mut y = vec![0.0; dim];
            // y = (shift·I + BᵀB) s
            let bs: Vec<f64> = (0..dim).map(|r| (0..dim).map(|c| b[r * dim + c] * s[c]).sum()).collect();
            for c in 0..dim {
                y[c] = shift * s[c] + (0..dim).map(|r| b[r * dim + c] * bs[r]).sum::<f64>();
            }
            SecantPair::new(&space, s, y, i).unwrap()
        })
        .collect();
    Instance {
        space,
        pairs,
        gamma: log_uniform(rng, 0.1, 10.0),
        grad: normal_vec(rng, dim),
    }
}

pub struct OracleErrors {
    pub direction: f64,
    pub inverse: f64,
}

/// Relative mismatch of the two-loop direction against `−H g` and the largest
/// entry of `HB − I`.
pub fn oracle_errors(inst: &Instance) -> OracleErrors {
    let refs: Vec<&SecantPair> = inst.pairs.iter().collect();
    let dim = inst.space.dim();
    let d = two_loop(&inst.space, &refs, inst.gamma, &inst.grad).unwrap();
    let h = dense_h(&inst.space, &refs, inst.gamma, dim).unwrap();
    let b = dense_b(&inst.space, &refs, inst.gamma, dim).unwrap();
    let hg = h.apply(&inst.grad);
    let num: f64 = d.iter().zip(&hg).map(|(a, b)| (a + b).powi(2)).sum::<f64>().sqrt();
    let den: f64 = hg.iter().map(|v| v * v).sum::<f64>().sqrt();
    let prod = &h.matrix * &b.matrix;
    let mut inverse = 0.0f64;
    for r in 0..dim {
        for c in 0..dim {
            let e = prod[(r, c)] - if r == c { 1.0 } else { 0.0 };
            inverse = inverse.max(e.abs());
        }
    }
    OracleErrors {
        direction: num / den,
        inverse,
    }
}

/// Audits the generic update bounds and, for a random threshold `ω`, the
/// cautious bounds of the filtered operator. Returns the number of violations.
pub fn bound_violations(inst: &Instance, rng: &mut StdRng) -> usize {
    let dim = inst.space.dim();
    let refs: Vec<&SecantPair> = inst.pairs.iter().collect();
    let h = dense_h(&inst.space, &refs, inst.gamma, dim).unwrap();
    let (k1, k2) = curvature_constants(&refs);
    let mut bad = usize::from(!check_bounds(&h, inst.gamma, k1, k2, refs.len()).passed());

    let omega = log_uniform(rng, 1e-3, 0.9);
    let active: Vec<&SecantPair> = inst.pairs.iter().filter(|p| p.q >= omega).collect();
    let gamma = log_uniform(rng, omega, 1.0 / omega);
    let h = dense_h(&inst.space, &active, gamma, dim).unwrap();
    let (hn, hin) = h.norms();
    bad += usize::from(!check_cautious_bounds(hn, hin, omega, inst.pairs.len()).passed());
    bad
}

/// `φ(α) = Σ cᵢαⁱ (i ≤ 4) + a sin(wα)` with `c₄ > 0` and `φ'(0) < 0`.
#[derive(Debug, Clone, Copy)]
pub struct Quartic {
    pub c: [f64; 5],
    pub a: f64,
    pub w: f64,
}

impl Quartic {
    pub fn random(rng: &mut StdRng) -> Self {
        let c1 = -log_uniform(rng, 1e-2, 10.0);
        let w = log_uniform(rng, 0.1, 20.0);
        let a = rng.gen_range(-0.4..0.4) * c1.abs() / w;
        Quartic {
            c: [
                rng.gen_range(-5.0..5.0),
                c1,
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-3.0..3.0),
                log_uniform(rng, 1e-3, 10.0),
            ],
            a,
            w,
        }
    }

    pub fn phi(&self, t: f64) -> f64 {
        let c = &self.c;
        c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * c[4]))) + self.a * (self.w * t).sin()
    }

    pub fn dphi(&self, t: f64) -> f64 {
        let c = &self.c;
        c[1] + t * (2.0 * c[2] + t * (3.0 * c[3] + t * 4.0 * c[4])) + self.a * self.w * (self.w * t).cos()
    }
}

#[derive(Debug, Default, Clone, Copy)]
pub struct CertificateTally {
    pub accepted: usize,
    /// Failed searches per kind, in the order armijo, wolfe, mt, gll.
    pub failed: [usize; 4],
    pub violations: usize,
    pub nonpositive_sy: usize,
}

/// Runs every search on `n` random quartics and re-verifies each accepted
/// step from fresh evaluations.
pub fn certificate_tally(rng: &mut StdRng, n: usize) -> CertificateTally {
    let params = LineSearchParams::default();
    let mut t = CertificateTally::default();
    for _ in 0..n {
        let q = Quartic::random(rng);
        let (phi0, dphi0) = (q.phi(0.0), q.dphi(0.0));
        let history: Vec<f64> = (0..rng.gen_range(1..=10)).map(|i| phi0 + if i == 0 { 0.0 } else { rng.gen_range(0.0..2.0) }).collect();
        let kinds = [LineSearchKind::Armijo, LineSearchKind::Wolfe, LineSearchKind::MoreThuente, LineSearchKind::Gll];
        for (i, kind) in kinds.into_iter().enumerate() {
            let mut line = ScalarLine(|a: f64| (q.phi(a), q.dphi(a)));
            let Ok(out) = search(kind, &mut line, phi0, dphi0, &history, &params) else {
                t.failed[i] += 1;
                continue;
            };
            t.accepted += 1;
            let a = out.alpha;
            let (phi, slope) = (q.phi(a), q.dphi(a));
            let reference = match kind {
                LineSearchKind::Gll => history.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                _ => phi0,
            };
            let mut ok = a > 0.0 && phi <= reference + params.sigma * a * dphi0;
            ok &= match kind {
                LineSearchKind::Wolfe => slope >= params.eta * dphi0,
                LineSearchKind::MoreThuente => slope.abs() <= params.eta * dphi0.abs(),
                _ => true,
            };
            if !ok {
                t.violations += 1;
            }
            if kind.enforces_curvature() && !(a * (slope - dphi0) > 0.0) {
                t.nonpositive_sy += 1;
            }
        }
    }
    t
}
