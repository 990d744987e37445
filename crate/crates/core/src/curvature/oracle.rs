//! Finite-difference Ricci oracle.
//!
//! Builds the full coordinate metric of the warped product over round-sphere
//! fibers (hyperspherical angles), differentiates it numerically to get
//! Christoffel symbols, contracts for the Ricci tensor, and reads off the
//! eigenvalue in each block. Completely independent of the closed forms in
//! the parent module: the two paths are cross-checked in tests and in the
//! acceptance suite.

use super::RicciEval;

/// Warp profile seen by the oracle: only values are needed, derivatives are
/// taken numerically.
pub trait WarpFn {
    fn value(&self, r: f64) -> f64;
}

impl<F: Fn(f64) -> f64> WarpFn for F {
    fn value(&self, r: f64) -> f64 {
        self(r)
    }
}

pub struct OracleResult {
    pub eval: RicciEval,
    /// Set when the requested step is too coarse to resolve second
    /// derivatives at this radius.
    pub step_warning: bool,
}

/// Diagonal metric of `dr² + Σ f_i(r)² g_{S^{d_i}}` in hyperspherical angles.
/// Coordinate layout: x[0] = r, then d_i angles per fiber in order.
fn metric_diag(dims: &[u32], profiles: &[&dyn WarpFn], x: &[f64], out: &mut [f64]) {
    out[0] = 1.0;
    let mut k = 1;
    for (fi, &d) in dims.iter().enumerate() {
        let f = profiles[fi].value(x[0]);
        let f2 = f * f;
        let mut sin_prod = 1.0;
        for j in 0..d as usize {
            out[k + j] = f2 * sin_prod;
            let s = x[k + j].sin();
            sin_prod *= s * s;
        }
        k += d as usize;
    }
}

struct Chart<'a> {
    dims: &'a [u32],
    profiles: &'a [&'a dyn WarpFn],
    dim: usize,
}

impl Chart<'_> {
    fn g(&self, x: &[f64], out: &mut [f64]) {
        metric_diag(self.dims, self.profiles, x, out);
    }

    /// dg_aa/dx_b by central differences.
    fn dg(&self, x: &[f64], b: usize, h: f64, out: &mut [f64]) {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[b] += h;
        xm[b] -= h;
        let mut gp = vec![0.0; self.dim];
        let mut gm = vec![0.0; self.dim];
        self.g(&xp, &mut gp);
        self.g(&xm, &mut gm);
        for a in 0..self.dim {
            out[a] = (gp[a] - gm[a]) / (2.0 * h);
        }
    }

    /// Christoffel symbols of a diagonal metric.
    fn christoffel(&self, x: &[f64], h: f64) -> Vec<f64> {
        let n = self.dim;
        let mut g = vec![0.0; n];
        self.g(x, &mut g);
        // dg[b][a] = d g_aa / d x_b
        let mut dg = vec![vec![0.0; n]; n];
        for (b, row) in dg.iter_mut().enumerate() {
            self.dg(x, b, h, row);
        }
        let mut gamma = vec![0.0; n * n * n];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    // diagonal metric: Γ^a_bc = (δ_ab ∂_c g_aa + δ_ac ∂_b g_aa − δ_bc ∂_a g_bb) / (2 g_aa)
                    let mut t = 0.0;
                    if a == b {
                        t += dg[c][a];
                    }
                    if a == c {
                        t += dg[b][a];
                    }
                    if b == c {
                        t -= dg[a][b];
                    }
                    gamma[(a * n + b) * n + c] = t / (2.0 * g[a]);
                }
            }
        }
        gamma
    }

    /// Ricci tensor diagonal entries by differentiating Christoffel symbols.
    fn ricci_diag(&self, x: &[f64], h: f64) -> Vec<f64> {
        let n = self.dim;
        let gamma0 = self.christoffel(x, h);
        // ∂_a Γ at x, central differences over the Christoffel field
        let mut dgamma = vec![vec![0.0; n * n * n]; n];
        for a in 0..n {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[a] += h;
            xm[a] -= h;
            let gp = self.christoffel(&xp, h);
            let gm = self.christoffel(&xm, h);
            for i in 0..n * n * n {
                dgamma[a][i] = (gp[i] - gm[i]) / (2.0 * h);
            }
        }
        let idx = |a: usize, b: usize, c: usize| (a * n + b) * n + c;
        let mut ric = vec![0.0; n];
        for b in 0..n {
            let c = b;
            let mut val = 0.0;
            for a in 0..n {
                val += dgamma[a][idx(a, b, c)];
                val -= dgamma[c][idx(a, b, a)];
            }
            for a in 0..n {
                for d in 0..n {
                    val += gamma0[idx(a, a, d)] * gamma0[idx(d, b, c)];
                    val -= gamma0[idx(a, c, d)] * gamma0[idx(d, b, a)];
                }
            }
            ric[b] = val;
        }
        ric
    }
}

fn eigenvalues(dims: &[u32], profiles: &[&dyn WarpFn], r: f64, h: f64) -> Vec<f64> {
    let total: usize = 1 + dims.iter().map(|&d| d as usize).sum::<usize>();
    let chart = Chart { dims, profiles, dim: total };
    // generic angles, away from poles and from each other
    let mut x = vec![0.0; total];
    x[0] = r;
    for (j, xi) in x.iter_mut().enumerate().skip(1) {
        *xi = 1.03 + 0.11 * (j as f64 % 5.0);
    }
    let mut g = vec![0.0; total];
    chart.g(&x, &mut g);
    let ric = chart.ricci_diag(&x, h);
    ric.iter().zip(&g).map(|(rc, gg)| rc / gg).collect()
}

fn per_fiber(dims: &[u32], vals: &[f64]) -> RicciEval {
    let mut fiber_vals = Vec::with_capacity(dims.len());
    let mut k = 1;
    for &d in dims {
        fiber_vals.push(vals[k]);
        k += d as usize;
    }
    RicciEval { ric_radial: vals[0], ric_fiber: fiber_vals }
}

/// Single-step evaluation with truncation error O(step²); used to observe
/// the convergence order directly.
pub fn ricci_fd_multi_raw(
    dims: &[u32],
    profiles: &[&dyn WarpFn],
    r: f64,
    step: f64,
) -> RicciEval {
    assert_eq!(dims.len(), profiles.len());
    per_fiber(dims, &eigenvalues(dims, profiles, r, step))
}

/// Ricci components for an N-fold round-sphere warped product, computed from
/// first principles at radius `r` with differencing step `h`, then Richardson
/// extrapolated over {h, h/2}.
pub fn ricci_fd_multi(dims: &[u32], profiles: &[&dyn WarpFn], r: f64, step: f64) -> OracleResult {
    assert_eq!(dims.len(), profiles.len());
    let e1 = eigenvalues(dims, profiles, r, step);
    let e2 = eigenvalues(dims, profiles, r, step / 2.0);
    // order-2 truncation: Richardson combine
    let ext: Vec<f64> = e1.iter().zip(&e2).map(|(a, b)| (4.0 * b - a) / 3.0).collect();
    let step_warning = step > 0.05 * r.max(1.0);
    OracleResult { eval: per_fiber(dims, &ext), step_warning }
}

/// Triple-product raw evaluation.
pub fn ricci_fd_triple_raw(
    m: u32,
    n: u32,
    phi: &dyn WarpFn,
    psi: &dyn WarpFn,
    rho: &dyn WarpFn,
    r: f64,
    step: f64,
) -> RicciEval {
    ricci_fd_multi_raw(&[m, n, 2], &[phi, psi, rho], r, step)
}

/// Triple warped product oracle (S^m x S^n x S² fibers).
pub fn ricci_fd_triple(
    m: u32,
    n: u32,
    phi: &dyn WarpFn,
    psi: &dyn WarpFn,
    rho: &dyn WarpFn,
    r: f64,
    step: f64,
) -> OracleResult {
    ricci_fd_multi(&[m, n, 2], &[phi, psi, rho], r, step)
}

/// Default differencing step used by callers that do not override it.
pub fn default_step(r: f64) -> f64 {
    (1e-4f64).max(1e-4 * r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::{ricci_triple, triple_as_fibers, ricci_multi};

    #[test]
    fn flat_example_within_1e6() {
        let phi = |r: f64| r;
        let psi = |_: f64| 1.0;
        let rho = |_: f64| 1.0;
        for (m, n) in [(2u32, 2u32), (3, 2)] {
            let o = ricci_fd_triple(m, n, &phi, &psi, &rho, 1.3, default_step(1.3));
            assert!(o.eval.ric_radial.abs() < 1e-6, "ric00 {}", o.eval.ric_radial);
            assert!(o.eval.ric_fiber[0].abs() < 1e-6);
            assert!((o.eval.ric_fiber[1] - (n - 1) as f64).abs() < 1e-6);
            assert!((o.eval.ric_fiber[2] - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn smooth_profiles_match_closed_form() {
        let phi = |r: f64| r + 0.1 * r.sin();
        let psi = |r: f64| 2.0 + r.cos();
        let rho = |r: f64| 3.0 + 0.5 * (2.0 * r).sin();
        let r = 1.7;
        let o = ricci_fd_triple(2, 2, &phi, &psi, &rho, r, default_step(r));
        let jets = [
            [phi(r), 1.0 + 0.1 * r.cos(), -0.1 * r.sin()],
            [psi(r), -r.sin(), -r.cos()],
            [rho(r), (2.0 * r).cos(), -2.0 * (2.0 * r).sin()],
        ];
        let exact = ricci_triple(2, 2, jets[0], jets[1], jets[2], r).unwrap();
        let ev = exact.components();
        let ov = o.eval.components();
        for (a, b) in ev.iter().zip(&ov) {
            let denom = a.abs().max(1.0);
            assert!((a - b).abs() / denom < 1e-4, "{a} vs {b}");
        }
    }

    #[test]
    fn four_fiber_oracle_matches_multi() {
        let dims = [2u32, 2, 2, 2];
        let f0 = |r: f64| r + 0.05 * r.sin();
        let f1 = |r: f64| 1.5 + 0.2 * r.cos();
        let f2 = |r: f64| 2.0 + 0.1 * (0.5 * r).sin();
        let f3 = |r: f64| 0.8 + 0.05 * r.cos();
        let r = 2.3;
        let o = ricci_fd_multi(&dims, &[&f0, &f1, &f2, &f3], r, default_step(r));
        let fibers: Vec<_> = dims.iter().map(|&d| crate::curvature::FiberDescriptor::sphere(d)).collect();
        let jets = [
            [f0(r), 1.0 + 0.05 * r.cos(), -0.05 * r.sin()],
            [f1(r), -0.2 * r.sin(), -0.2 * r.cos()],
            [f2(r), 0.05 * (0.5 * r).cos(), -0.025 * (0.5 * r).sin()],
            [f3(r), -0.05 * r.sin(), -0.05 * r.cos()],
        ];
        let exact = ricci_multi(&fibers, &jets, r).unwrap();
        for (a, b) in exact.components().iter().zip(&o.eval.components()) {
            let denom = a.abs().max(1.0);
            assert!((a - b).abs() / denom < 1e-4, "{a} vs {b}");
        }
        let _ = triple_as_fibers(2, 2);
    }

    #[test]
    fn warns_on_coarse_step() {
        let phi = |r: f64| r;
        let one = |_: f64| 1.0;
        let o = ricci_fd_triple(2, 2, &phi, &one, &one, 1.0, 0.2);
        assert!(o.step_warning);
    }
}
