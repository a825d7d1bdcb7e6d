//! Solver for `(A + diag(c))x = b` where `A` is the Dirichlet 5-point
//! Laplacian on the interior of a uniform `M×M` grid (`M = 2ʲ`) and `c > 0`.
//!
//! Conjugate gradients preconditioned by one symmetric V-cycle
//! (forward Gauss–Seidel before, backward after, full weighting, bilinear
//! interpolation, rediscretized coarse operators).

use crate::{Error, Result};

/// `out = A y` with `A = h⁻²(4I − shifts)`, zero Dirichlet data.
pub(crate) fn apply_laplacian(m: usize, y: &[f64], out: &mut [f64]) {
    let n = m - 1;
    let s = (m * m) as f64;
    for i in 0..n {
        for j in 0..n {
            let k = i * n + j;
            let mut nb = 0.0;
            if i > 0 {
                nb += y[k - n];
            }
            if i + 1 < n {
                nb += y[k + n];
            }
            if j > 0 {
                nb += y[k - 1];
            }
            if j + 1 < n {
                nb += y[k + 1];
            }
            out[k] = s * (4.0 * y[k] - nb);
        }
    }
}

struct Level {
    m: usize,
    c: Vec<f64>,
}

impl Level {
    fn n(&self) -> usize {
        self.m - 1
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        apply_laplacian(self.m, x, out);
        for ((o, ci), xi) in out.iter_mut().zip(&self.c).zip(x) {
            *o += ci * xi;
        }
    }

    fn neighbours(&self, x: &[f64], i: usize, j: usize) -> f64 {
        let n = self.n();
        let k = i * n + j;
        let mut nb = 0.0;
        if i > 0 {
            nb += x[k - n];
        }
        if i + 1 < n {
            nb += x[k + n];
        }
        if j > 0 {
            nb += x[k - 1];
        }
        if j + 1 < n {
            nb += x[k + 1];
        }
        nb
    }

    fn gs_sweep(&self, b: &[f64], x: &mut [f64], forward: bool) {
        let n = self.n();
        let s = (self.m * self.m) as f64;
        let relax = |i: usize, j: usize, x: &mut [f64]| {
            let k = i * n + j;
            x[k] = (b[k] + s * self.neighbours(x, i, j)) / (4.0 * s + self.c[k]);
        };
        if forward {
            for i in 0..n {
                for j in 0..n {
                    relax(i, j, x);
                }
            }
        } else {
            for i in (0..n).rev() {
                for j in (0..n).rev() {
                    relax(i, j, x);
                }
            }
        }
    }
}

/// Full weighting from an `(M−1)²` grid onto the `(M/2−1)²` grid.
fn restrict(m_fine: usize, fine: &[f64]) -> Vec<f64> {
    let nf = m_fine - 1;
    let nc = m_fine / 2 - 1;
    let mut coarse = vec![0.0; nc * nc];
    for ci in 0..nc {
        for cj in 0..nc {
            let (fi, fj) = (2 * ci + 1, 2 * cj + 1);
            let mut acc = 0.0;
            for di in [-1i64, 0, 1] {
                for dj in [-1i64, 0, 1] {
                    let w = (if di == 0 { 2.0 } else { 1.0 }) * (if dj == 0 { 2.0 } else { 1.0 });
                    let (i, j) = ((fi as i64 + di) as usize, (fj as i64 + dj) as usize);
                    acc += w * fine[i * nf + j];
                }
            }
            coarse[ci * nc + cj] = acc / 16.0;
        }
    }
    coarse
}

/// Bilinear interpolation added onto `fine`.
fn prolong_add(m_fine: usize, coarse: &[f64], fine: &mut [f64]) {
    let nf = m_fine - 1;
    let nc = m_fine / 2 - 1;
    for ci in 0..nc {
        for cj in 0..nc {
            let v = coarse[ci * nc + cj];
            let (fi, fj) = (2 * ci + 1, 2 * cj + 1);
            for di in [-1i64, 0, 1] {
                for dj in [-1i64, 0, 1] {
                    let w = (if di == 0 { 1.0 } else { 0.5 }) * (if dj == 0 { 1.0 } else { 0.5 });
                    let (i, j) = ((fi as i64 + di) as usize, (fj as i64 + dj) as usize);
                    fine[i * nf + j] += w * v;
                }
            }
        }
    }
}

pub(crate) struct Multigrid {
    levels: Vec<Level>,
}

const SMOOTHING_STEPS: usize = 2;

impl Multigrid {
    /// `m` must be a power of two, at least 2; `c` has `(m−1)²` entries.
    pub fn new(m: usize, c: Vec<f64>) -> Self {
        debug_assert!(m >= 2 && m.is_power_of_two());
        let mut levels = vec![Level { m, c }];
        while levels.last().unwrap().m > 2 {
            let fine = levels.last().unwrap();
            let c = restrict(fine.m, &fine.c);
            levels.push(Level { m: fine.m / 2, c });
        }
        Multigrid { levels }
    }

    fn vcycle(&self, level: usize, b: &[f64]) -> Vec<f64> {
        let lv = &self.levels[level];
        let n = lv.n();
        if n == 1 {
            let s = (lv.m * lv.m) as f64;
            return vec![b[0] / (4.0 * s + lv.c[0])];
        }
        let mut x = vec![0.0; n * n];
        for _ in 0..SMOOTHING_STEPS {
            lv.gs_sweep(b, &mut x, true);
        }
        let mut r = vec![0.0; n * n];
        lv.apply(&x, &mut r);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        let rc = restrict(lv.m, &r);
        let ec = self.vcycle(level + 1, &rc);
        prolong_add(lv.m, &ec, &mut x);
        for _ in 0..SMOOTHING_STEPS {
            lv.gs_sweep(b, &mut x, false);
        }
        x
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        self.levels[0].apply(x, out);
    }

    /// Preconditioned CG from a zero initial guess until
    /// `‖r‖ ≤ rtol‖b‖` (Euclidean norms of the recursive residual).
    pub fn solve(&self, b: &[f64], rtol: f64, max_iter: usize) -> Result<Vec<f64>> {
        let dim = b.len();
        let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
        let bnorm = dot(b, b).sqrt();
        let mut x = vec![0.0; dim];
        if bnorm == 0.0 {
            return Ok(x);
        }
        let mut r = b.to_vec();
        let mut z = self.vcycle(0, &r);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut ap = vec![0.0; dim];
        for _ in 0..max_iter {
            self.apply(&p, &mut ap);
            let pap = dot(&p, &ap);
            if !(pap > 0.0) {
                return Err(Error::LinearSolve(format!("operator not positive definite (pᵀAp = {pap:e})")));
            }
            let a = rz / pap;
            for k in 0..dim {
                x[k] += a * p[k];
                r[k] -= a * ap[k];
            }
            if dot(&r, &r).sqrt() <= rtol * bnorm {
                return Ok(x);
            }
            z = self.vcycle(0, &r);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..dim {
                p[k] = z[k] + beta * p[k];
            }
        }
        Err(Error::LinearSolve(format!(
            "preconditioned CG did not reach relative residual {rtol:e} in {max_iter} iterations"
        )))
    }
}
