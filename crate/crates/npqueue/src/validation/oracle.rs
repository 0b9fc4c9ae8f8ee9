//! Independent stationary-distribution oracle from a truncated
//! continuous-time Markov chain.
//!
//! Because the wait-conditional law does not depend on the number of
//! servers, a single-server chain suffices. Its states are `idle` plus
//! the queue contents `(n, m)` with `0 <= n, m <= K`; transitions are
//! low arrivals at rate `r_lo` (`(n,m) -> (n+1,m)`), high arrivals at
//! rate `r_hi` (`(n,m) -> (n,m+1)`), and service completions at rate 1
//! which admit the highest waiting priority
//! (`(n,m) -> (n,m-1)` if `m > 0`, else `(n-1,m)` if `n > 0`, else idle;
//! `idle -> (0,0)` on any arrival). Arrivals that would leave the
//! truncation box are dropped.
//!
//! Grouping states by the low-priority count `n` makes the balance
//! equations block tridiagonal with a rank-one upward coupling (only
//! `(n+1, 0)` feeds level `n`), so the stationary vector follows from a
//! sweep of tridiagonal solves with Sherman-Morrison corrections —
//! `O(K^2)` work overall. None of this shares code with the production
//! engines: it is plain linear algebra on the literal generator.

use crate::dist::{JointPmf, Method};
use crate::model::ModelParams;
use crate::{Error, Result};

/// Hard cap on the truncation level.
pub const MAX_TRUNCATION: usize = 400;

/// Smallest `K` with `r^K` below the default tail target `1e-14`,
/// capped at [`MAX_TRUNCATION`].
pub fn default_truncation(r: f64) -> usize {
    let k = ((1e-14f64).ln() / r.ln()).ceil() as usize;
    k.clamp(2, MAX_TRUNCATION)
}

/// Stationary solve output.
#[derive(Debug, Clone)]
pub struct OracleResult {
    pub truncation: usize,
    /// Wait-conditional joint PMF on `[0, K]^2`.
    pub joint: JointPmf,
    /// Unconditional probability of the empty system in the truncated
    /// chain.
    pub idle_probability: f64,
    /// Geometric estimate `r^(K+1)` of the stationary mass the truncation
    /// discards.
    pub tail_bound: f64,
    /// Relative residual of the one balance equation that the solve drops
    /// as redundant; a direct a-posteriori correctness check.
    pub residual: f64,
}

/// Tridiagonal matrix in three diagonals; `sub[0]` and `sup[len-1]` are
/// unused.
#[derive(Debug, Clone)]
struct Tridiag {
    diag: Vec<f64>,
    sub: Vec<f64>,
    sup: Vec<f64>,
}

struct TriLu {
    lower: Vec<f64>,
    pivot: Vec<f64>,
    sup: Vec<f64>,
}

impl Tridiag {
    fn transpose(&self) -> Tridiag {
        let l = self.diag.len();
        let mut sub = vec![0.0; l];
        let mut sup = vec![0.0; l];
        for i in 1..l {
            sub[i] = self.sup[i - 1];
        }
        for i in 0..l - 1 {
            sup[i] = self.sub[i + 1];
        }
        Tridiag { diag: self.diag.clone(), sub, sup }
    }

    fn factor(&self) -> Result<TriLu> {
        let l = self.diag.len();
        let mut lower = vec![0.0; l];
        let mut pivot = vec![0.0; l];
        pivot[0] = self.diag[0];
        for i in 1..l {
            if pivot[i - 1].abs() < 1e-300 {
                return Err(Error::IllConditioned(format!(
                    "vanishing pivot {} at row {i} of the tridiagonal factorization",
                    pivot[i - 1]
                )));
            }
            lower[i] = self.sub[i] / pivot[i - 1];
            pivot[i] = self.diag[i] - lower[i] * self.sup[i - 1];
        }
        if pivot[l - 1].abs() < 1e-300 {
            return Err(Error::IllConditioned("vanishing final pivot".into()));
        }
        Ok(TriLu { lower, pivot, sup: self.sup.clone() })
    }
}

impl TriLu {
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let l = self.pivot.len();
        let mut x = vec![0.0; l];
        x[0] = b[0];
        for i in 1..l {
            x[i] = b[i] - self.lower[i] * x[i - 1];
        }
        x[l - 1] /= self.pivot[l - 1];
        for i in (0..l - 1).rev() {
            x[i] = (x[i] - self.sup[i] * x[i + 1]) / self.pivot[i];
        }
        x
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves the truncated chain and returns the wait-conditional joint PMF.
///
/// `truncation` defaults to [`default_truncation`]. The solve fails with
/// [`Error::IllConditioned`] if a pivot or a Sherman-Morrison denominator
/// collapses, reporting the offending magnitude.
pub fn ctmc_oracle(params: &ModelParams, truncation: Option<usize>) -> Result<OracleResult> {
    let r = params.r();
    let (r_lo, r_hi) = (params.r_lo(), params.r_hi());
    let k = truncation.unwrap_or_else(|| default_truncation(r));
    if !(1..=MAX_TRUNCATION).contains(&k) {
        return Err(Error::Domain(format!(
            "truncation must lie in 1..={MAX_TRUNCATION}; got {k}"
        )));
    }
    let width = k + 1;

    // Within-level balance matrix for interior levels n < K: row m holds
    // the coefficients of x(n, .) in the balance equation of state (n, m).
    let interior = {
        let mut diag = vec![0.0; width];
        let mut sub = vec![0.0; width];
        let mut sup = vec![0.0; width];
        for m in 0..width {
            let out = r_lo + if m < k { r_hi } else { 0.0 } + 1.0;
            diag[m] = -out;
            if m >= 1 {
                sub[m] = r_hi;
            }
            if m < k {
                sup[m] = 1.0;
            }
        }
        Tridiag { diag, sub, sup }
    };
    // Top level n = K: no low-arrival outflow.
    let top = {
        let mut t = interior.clone();
        for d in t.diag.iter_mut() {
            *d += r_lo;
        }
        t
    };

    let lu_interior = interior.factor()?;
    let lu_interior_t = interior.transpose().factor()?;
    let lu_top = top.factor()?;
    let lu_top_t = top.transpose().factor()?;

    let mut e0 = vec![0.0; width];
    e0[0] = 1.0;
    // Row 0 of the effective inverses, marched downward from the top
    // level: g_K from the top matrix, then
    // g_n = row0((T - r_lo e0 g_(n+1)^T)^(-1)) by Sherman-Morrison.
    let a_vec = lu_interior_t.solve(&e0);
    let mut g: Vec<Vec<f64>> = vec![Vec::new(); width];
    if k >= 1 {
        g[k] = lu_top_t.solve(&e0);
        for n in (1..k).rev() {
            let w = lu_interior_t.solve(&g[n + 1]);
            let denom = 1.0 - r_lo * w[0];
            if denom.abs() < 1e-10 {
                return Err(Error::IllConditioned(format!(
                    "Sherman-Morrison denominator {denom} at level {n}"
                )));
            }
            let scale = r_lo * a_vec[0] / denom;
            g[n] = a_vec.iter().zip(&w).map(|(a, wi)| a + scale * wi).collect();
        }
    }

    // Level 0: rows m >= 1 are plain interior rows; x(0,0) is pinned to 1
    // and its (redundant) balance row is dropped.
    let mut x = vec![vec![0.0; width]; width];
    x[0][0] = 1.0;
    if k >= 1 {
        let reduced = Tridiag {
            diag: interior.diag[1..].to_vec(),
            sub: {
                let mut s = vec![0.0; k];
                for i in 1..k {
                    s[i] = interior.sub[i + 1];
                }
                s
            },
            sup: {
                let mut s = vec![0.0; k];
                for (i, v) in s.iter_mut().enumerate().take(k - 1) {
                    *v = interior.sup[i + 1];
                }
                s
            },
        };
        let mut rhs = vec![0.0; k];
        rhs[0] = -r_hi * x[0][0];
        let tail = reduced.factor()?.solve(&rhs);
        x[0][1..].copy_from_slice(&tail);

        // Forward substitution: x_n = -r_lo M_n^(-1) x_(n-1).
        let t0 = lu_interior.solve(&e0);
        for n in 1..=k {
            let prev = std::mem::take(&mut x[n - 1]);
            let xn = if n < k {
                let w = lu_interior.solve(&prev);
                let v = &g[n + 1];
                let denom = 1.0 - r_lo * dot(v, &t0);
                if denom.abs() < 1e-10 {
                    return Err(Error::IllConditioned(format!(
                        "forward denominator {denom} at level {n}"
                    )));
                }
                let scale = r_lo * dot(v, &w) / denom;
                w.iter().zip(&t0).map(|(wi, ti)| -r_lo * (wi + scale * ti)).collect()
            } else {
                lu_top.solve(&prev).iter().map(|wi| -r_lo * wi).collect()
            };
            x[n - 1] = prev;
            x[n] = xn;
        }
    }

    // The idle equation r pi_idle = x(0,0) determines the idle weight; the
    // dropped balance row of (0,0) becomes an a-posteriori residual.
    let idle = x[0][0] / r;
    let residual_raw = x[0].get(1).copied().unwrap_or(0.0)
        + x.get(1).map_or(0.0, |row| row[0])
        - r * x[0][0];
    let residual = residual_raw.abs() / (r * x[0][0]);

    let busy_mass: f64 = x.iter().map(|row| row.iter().sum::<f64>()).sum();
    let total = busy_mass + idle;
    let mut values = Vec::with_capacity(width * width);
    for row in &x {
        for &v in row {
            values.push(v / busy_mass);
        }
    }
    let joint = JointPmf::from_raw(k, k, values, true, Method::CtmcOracle);
    Ok(OracleResult {
        truncation: k,
        joint,
        idle_probability: idle / total,
        tail_bound: r.powi(k as i32 + 1),
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{agg_exact, hi_marginal_exact, ModelParams};
    use crate::quadratic;

    fn params(r: f64, nu: f64) -> ModelParams {
        ModelParams::new(r, nu).unwrap()
    }

    #[test]
    fn default_truncation_tracks_the_tail_target() {
        assert_eq!(default_truncation(0.5), 47);
        assert_eq!(default_truncation(0.9), 306);
        assert_eq!(default_truncation(0.99), MAX_TRUNCATION);
    }

    #[test]
    fn single_class_low_reduces_to_geometric() {
        let p = params(0.5, 0.0);
        let out = ctmc_oracle(&p, Some(60)).unwrap();
        assert!(out.residual < 1e-12, "residual {}", out.residual);
        for n in 0..=20usize {
            let want = agg_exact(0.5, n);
            let got = out.joint.get(n, 0);
            assert!(
                (got - want).abs() < 1e-12,
                "M/M/1 reduction at n={n}: {got} vs {want}"
            );
        }
        for m in 1..=5 {
            assert!(out.joint.get(3, m).abs() < 1e-14);
        }
    }

    #[test]
    fn single_class_high_reduces_to_geometric() {
        let p = params(0.6, 1.0);
        let out = ctmc_oracle(&p, Some(80)).unwrap();
        for m in 0..=20usize {
            let want = agg_exact(0.6, m);
            let got = out.joint.get(0, m);
            assert!((got - want).abs() < 1e-12, "at m={m}: {got} vs {want}");
        }
        for n in 1..=5 {
            assert_eq!(out.joint.get(n, 2), 0.0);
        }
    }

    #[test]
    fn oracle_matches_recurrence_engine() {
        let p = params(0.5, 0.5);
        let out = ctmc_oracle(&p, Some(60)).unwrap();
        let qr = quadratic::joint_qr(&p, 20, 20);
        let mut worst = 0.0f64;
        for n in 0..=20usize {
            for m in 0..=20usize {
                worst = worst.max((out.joint.get(n, m) - qr.get(n, m)).abs());
            }
        }
        assert!(worst <= 1e-10, "max |oracle - qr| = {worst}");
    }

    #[test]
    fn oracle_high_marginal_is_geometric() {
        let p = params(0.75, 0.6);
        let out = ctmc_oracle(&p, None).unwrap();
        assert_eq!(out.truncation, default_truncation(0.75));
        for m in 0..=10usize {
            let got: f64 = (0..=out.truncation).map(|n| out.joint.get(n, m)).sum();
            let want = hi_marginal_exact(&p, m);
            assert!(
                (got - want).abs() < 1e-11,
                "high marginal at m={m}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn aggregate_is_class_blind_at_even_split() {
        // The joint law is not symmetric under class relabeling, but the
        // pooled distribution must stay geometric.
        let p = params(0.8, 0.5);
        let out = ctmc_oracle(&p, Some(150)).unwrap();
        for k in 0..=25usize {
            let got = out.joint.anti_diagonal_sum(k);
            let want = agg_exact(0.8, k);
            assert!((got - want).abs() < 1e-10, "aggregate at k={k}: {got} vs {want}");
        }
    }

    #[test]
    fn mass_and_positivity() {
        let p = params(0.9, 0.25);
        let out = ctmc_oracle(&p, Some(306)).unwrap();
        assert_eq!(out.joint.gross_negatives, 0);
        let total = out.joint.total_mass();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(out.idle_probability > 0.0 && out.idle_probability < 1.0);
        assert!(out.tail_bound < 1e-13);
        // Empty-system mass matches the exact closed form despite the
        // truncation (the discarded tail is ~1e-14).
        let p_with_n = params(0.9, 0.25).with_servers(1).unwrap();
        let want = crate::model::empty_system_probability(p_with_n.r(), 1).unwrap();
        assert!((out.idle_probability - want).abs() < 1e-12);
    }

    #[test]
    fn truncation_bounds_are_enforced() {
        let p = params(0.5, 0.5);
        assert!(ctmc_oracle(&p, Some(0)).is_err());
        assert!(ctmc_oracle(&p, Some(401)).is_err());
    }
}
