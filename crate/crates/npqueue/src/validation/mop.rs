//! The measure-of-performance core and the named consistency tests.

use super::{joint_by_method, lo_marginal_by_method, qualifying_extent, xlo_by_method};
use crate::dist::{JointPmf, Method};
use crate::model::{agg_exact, xhi_exact, ModelParams};
use crate::{Error, Result};
use serde::Serialize;

/// Default maximum queue index examined by the battery.
pub const DEFAULT_N_LIM: usize = 1000;
/// Default probability floor below which points do not qualify.
pub const DEFAULT_P_LIM: f64 = 1e-20;
/// The exclusively-high test probes much deeper into the tail.
pub const DEFAULT_P_LIM_XHI: f64 = 1e-30;
/// Decimal places of agreement required for a pass.
pub const DEFAULT_THRESHOLD: f64 = 8.0;
/// Cap on the reported decimal places.
const XI_CAP: f64 = 16.0;

/// Result of one worst-case comparison.
#[derive(Debug, Clone, Serialize)]
pub struct MopReport {
    pub test_name: String,
    pub method: String,
    pub r: f64,
    pub nu: f64,
    /// Decimal places of agreement at the worst qualifying point, capped
    /// at 16. Zero with `passed = false` flags a nonpositive computed
    /// value at a qualifying point.
    pub xi: f64,
    /// `(n, m)` of the worst point (`m = 0` for one-dimensional tests).
    pub worst_point: (usize, usize),
    pub n_lim: usize,
    pub p_lim: f64,
    /// Number of qualifying points examined.
    pub points: usize,
    pub threshold: f64,
    pub passed: bool,
}

struct MopAccumulator {
    p_lim: f64,
    max_log_diff: f64,
    worst: (usize, usize),
    points: usize,
    nonpositive: Option<(usize, usize)>,
}

impl MopAccumulator {
    fn new(p_lim: f64) -> Self {
        MopAccumulator {
            p_lim,
            max_log_diff: 0.0,
            worst: (0, 0),
            points: 0,
            nonpositive: None,
        }
    }

    /// Feeds one `(point, computed, reference)` triple; the point
    /// qualifies when `reference > p_lim`.
    fn push(&mut self, point: (usize, usize), computed: f64, reference: f64) {
        if !(reference > self.p_lim) {
            return;
        }
        self.points += 1;
        if computed <= 0.0 {
            if self.nonpositive.is_none() {
                self.nonpositive = Some(point);
            }
            return;
        }
        // Probabilities are clamped at the floor before taking logs.
        let diff = (computed.max(self.p_lim).ln() - reference.ln()).abs();
        if diff > self.max_log_diff {
            self.max_log_diff = diff;
            self.worst = point;
        }
    }

    fn finish(
        self,
        test_name: &str,
        method: Method,
        params: &ModelParams,
        n_lim: usize,
        threshold: f64,
    ) -> Result<MopReport> {
        if self.points == 0 {
            return Err(Error::EmptyComparison(format!(
                "{test_name} at r={}, nu={} with p_lim={}",
                params.r(),
                params.nu(),
                self.p_lim
            )));
        }
        let (xi, worst, passed) = if let Some(pt) = self.nonpositive {
            (0.0, pt, false)
        } else {
            let xi = if self.max_log_diff == 0.0 {
                XI_CAP
            } else {
                (-self.max_log_diff.log10()).min(XI_CAP)
            };
            (xi, self.worst, xi >= threshold)
        };
        Ok(MopReport {
            test_name: test_name.to_string(),
            method: method.tag().to_string(),
            r: params.r(),
            nu: params.nu(),
            xi,
            worst_point: worst,
            n_lim,
            p_lim: self.p_lim,
            points: self.points,
            threshold,
            passed,
        })
    }
}

/// Worst-case comparison of two one-dimensional tables; index `i`
/// qualifies when `reference[i] > p_lim`.
pub fn mop_vectors(
    test_name: &str,
    method: Method,
    params: &ModelParams,
    computed: &[f64],
    reference: &[f64],
    p_lim: f64,
    n_lim: usize,
    threshold: f64,
) -> Result<MopReport> {
    let mut acc = MopAccumulator::new(p_lim);
    for i in 0..computed.len().min(reference.len()).min(n_lim + 1) {
        acc.push((i, 0), computed[i], reference[i]);
    }
    acc.finish(test_name, method, params, n_lim, threshold)
}

/// Worst-case comparison of two joint PMFs over `[0, n_lim]^2`.
pub fn mop_joint(
    test_name: &str,
    method: Method,
    params: &ModelParams,
    computed: &JointPmf,
    reference: &JointPmf,
    p_lim: f64,
    n_lim: usize,
    threshold: f64,
) -> Result<MopReport> {
    let n_hi = computed.n_max.min(reference.n_max).min(n_lim);
    let m_hi = computed.m_max.min(reference.m_max).min(n_lim);
    let mut acc = MopAccumulator::new(p_lim);
    for n in 0..=n_hi {
        for m in 0..=m_hi {
            acc.push((n, m), computed.get(n, m), reference.get(n, m));
        }
    }
    acc.finish(test_name, method, params, n_lim, threshold)
}

/// Aggregation test: anti-diagonal sums of the computed joint PMF against
/// the exact pooled geometric law `(1-r) r^k`.
pub fn aggregation_test(
    params: &ModelParams,
    method: Method,
    n_lim: usize,
    p_lim: f64,
) -> Result<MopReport> {
    let extent = qualifying_extent(params.r(), p_lim, n_lim);
    let joint = joint_by_method(params, extent, extent, method)?;
    let mut acc = MopAccumulator::new(p_lim);
    for k in 0..=extent {
        acc.push((k, 0), joint.anti_diagonal_sum(k), agg_exact(params.r(), k));
    }
    acc.finish("agg", method, params, n_lim, DEFAULT_THRESHOLD)
}

/// Exclusively-high test: the computed `f(0, m)` against the exact
/// `(1-r)(r_hi/z2)^m`.
pub fn xhi_test(
    params: &ModelParams,
    method: Method,
    n_lim: usize,
    p_lim: f64,
) -> Result<MopReport> {
    // Reference decays by a factor r_hi/z2 < r per step, so the aggregate
    // envelope extent is generous.
    let extent = qualifying_extent(params.r(), p_lim, n_lim);
    let joint = joint_by_method(params, 0, extent, method)?;
    let mut acc = MopAccumulator::new(p_lim);
    for m in 0..=extent {
        acc.push((0, m), joint.get(0, m), xhi_exact(params, m));
    }
    acc.finish("xhi", method, params, n_lim, DEFAULT_THRESHOLD)
}

/// Exclusively-low test: `f(n, 0)` against `r_lo f_lo(n-1)` for
/// `n >= 1`, both sides computed by the same engine.
pub fn xlo_test(
    params: &ModelParams,
    method: Method,
    n_lim: usize,
    p_lim: f64,
) -> Result<MopReport> {
    if params.nu() == 1.0 {
        // No low-priority mass beyond n = 0: the comparison set is empty
        // by construction.
        return Err(Error::EmptyComparison("xlo test at nu = 1".into()));
    }
    let extent = qualifying_extent(params.r(), p_lim, n_lim);
    let xlo = xlo_by_method(params, extent, method)?;
    let marginal_method = if method == Method::Chebyshev { Method::QuadraticRecurrence } else { method };
    let lo = lo_marginal_by_method(params, extent.saturating_sub(1), marginal_method)?;
    let r_lo = params.r_lo();
    let mut acc = MopAccumulator::new(p_lim);
    for n in 1..=extent {
        acc.push((n, 0), xlo.values[n], r_lo * lo.values[n - 1]);
    }
    acc.finish("xlo", method, params, n_lim, DEFAULT_THRESHOLD)
}

/// Nearest-neighbour test: at interior points, `f(n, m)` must be the
/// positively weighted combination
/// `(f(n, m+1) + r_lo f(n-1, m) + r_hi f(n, m-1)) / (1 + r)`.
pub fn nn_test(
    params: &ModelParams,
    method: Method,
    n_lim: usize,
    p_lim: f64,
) -> Result<MopReport> {
    if params.is_degenerate() {
        // All interior points carry zero mass at the endpoints.
        return Err(Error::EmptyComparison(format!("nn test at nu = {}", params.nu())));
    }
    let extent = qualifying_extent(params.r(), p_lim, n_lim);
    let joint = joint_by_method(params, extent, extent + 1, method)?;
    let (r, r_lo, r_hi) = (params.r(), params.r_lo(), params.r_hi());
    let mut acc = MopAccumulator::new(p_lim);
    for n in 1..=extent.min(n_lim) {
        for m in 1..=extent.min(n_lim) {
            let combo = (joint.get(n, m + 1)
                + r_lo * joint.get(n - 1, m)
                + r_hi * joint.get(n, m - 1))
                / (1.0 + r);
            acc.push((n, m), combo, joint.get(n, m));
        }
    }
    acc.finish("nn", method, params, n_lim, DEFAULT_THRESHOLD)
}

/// Cross-engine comparison plus the occupancy summary used by the
/// accuracy table: the smallest rectangle `[0, n_lo] x [0, n_hi]`
/// containing every point with probability above `p_lim`, and the least
/// qualifying probability.
#[derive(Debug, Clone, Serialize)]
pub struct QuadraticTestReport {
    pub mop: MopReport,
    /// Largest qualifying high-priority index `m`.
    pub n_hi: usize,
    /// Largest qualifying low-priority index `n`.
    pub n_lo: usize,
    /// Smallest probability among qualifying points.
    pub p_min: f64,
}

/// Compares the joint PMF from both engines over `[0, n_lim]^2`
/// (qualification on the recurrence engine's values, boundary rows
/// included so the single-class edge cases remain measurable).
pub fn quadratic_test(params: &ModelParams, n_lim: usize, p_lim: f64) -> Result<QuadraticTestReport> {
    let extent = qualifying_extent(params.r(), p_lim, n_lim);
    let qr = joint_by_method(params, extent, extent, Method::QuadraticRecurrence)?;
    let ri = joint_by_method(params, extent, extent, Method::RIntegral)?;
    let mut acc = MopAccumulator::new(p_lim);
    let mut n_hi = 0usize;
    let mut n_lo = 0usize;
    let mut p_min = f64::INFINITY;
    for n in 0..=extent {
        for m in 0..=extent {
            let reference = qr.get(n, m);
            if reference > p_lim {
                n_lo = n_lo.max(n);
                n_hi = n_hi.max(m);
                p_min = p_min.min(reference);
            }
            acc.push((n, m), ri.get(n, m), reference);
        }
    }
    let mop = acc.finish("qr", Method::RIntegral, params, n_lim, DEFAULT_THRESHOLD)?;
    Ok(QuadraticTestReport { mop, n_hi, n_lo, p_min })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::PmfKind;
    use crate::model::ModelParams;

    fn params(r: f64, nu: f64) -> ModelParams {
        ModelParams::new(r, nu).unwrap()
    }

    #[test]
    fn identical_inputs_hit_the_cap() {
        let p = params(0.9, 0.5);
        let v = vec![0.5, 0.25, 0.125];
        let rep = mop_vectors("agg", Method::Exact, &p, &v, &v, 1e-20, 10, 8.0).unwrap();
        assert_eq!(rep.xi, 16.0);
        assert!(rep.passed);
        assert_eq!(rep.points, 3);
    }

    #[test]
    fn relative_perturbation_reads_in_decimal_places() {
        let p = params(0.9, 0.5);
        let reference: Vec<f64> = (0..30).map(|k| 0.5f64.powi(k + 1)).collect();
        let computed: Vec<f64> = reference.iter().map(|v| v * (1.0 + 1e-8)).collect();
        let rep =
            mop_vectors("agg", Method::Exact, &p, &computed, &reference, 1e-20, 40, 8.0).unwrap();
        assert!((rep.xi - 8.0).abs() < 0.05, "xi = {}", rep.xi);
    }

    #[test]
    fn nonpositive_computed_fails_loudly() {
        let p = params(0.9, 0.5);
        let reference = vec![0.5, 0.25];
        let computed = vec![0.5, 0.0];
        let rep =
            mop_vectors("agg", Method::Exact, &p, &computed, &reference, 1e-20, 10, 8.0).unwrap();
        assert_eq!(rep.xi, 0.0);
        assert!(!rep.passed);
        assert_eq!(rep.worst_point, (1, 0));
    }

    #[test]
    fn empty_qualifying_set_is_an_error() {
        let p = params(0.9, 0.5);
        let v = vec![1e-30, 1e-31];
        assert!(matches!(
            mop_vectors("agg", Method::Exact, &p, &v, &v, 1e-20, 10, 8.0),
            Err(Error::EmptyComparison(_))
        ));
    }

    #[test]
    fn battery_on_a_midrange_point() {
        let p = params(0.9, 0.5);
        for method in [Method::QuadraticRecurrence, Method::RIntegral] {
            let agg = aggregation_test(&p, method, 1000, 1e-20).unwrap();
            assert!(agg.passed, "agg {method:?}: xi = {}", agg.xi);
            let xhi = xhi_test(&p, method, 1000, 1e-30).unwrap();
            assert!(xhi.passed, "xhi {method:?}: xi = {}", xhi.xi);
            let xlo = xlo_test(&p, method, 1000, 1e-20).unwrap();
            assert!(xlo.passed, "xlo {method:?}: xi = {}", xlo.xi);
            let nn = nn_test(&p, method, 1000, 1e-20).unwrap();
            assert!(nn.passed, "nn {method:?}: xi = {}", nn.xi);
        }
    }

    #[test]
    fn quadratic_test_reports_occupancy_rectangle() {
        let p = params(0.9, 0.5);
        let rep = quadratic_test(&p, 1000, 1e-20).unwrap();
        assert!(rep.mop.xi >= 8.0, "xi = {}", rep.mop.xi);
        // r = 0.9: the aggregate envelope dies at k = 437, so both extents
        // sit strictly inside [0, 1000].
        assert!(rep.n_lo < 1000 && rep.n_hi < 1000);
        assert!(rep.p_min >= 1e-20 && rep.p_min < 2e-20);
    }

    #[test]
    fn quadratic_test_at_nu_one_is_exact() {
        let p = params(0.99, 1.0);
        let rep = quadratic_test(&p, 1000, 1e-20).unwrap();
        // Both engines short-circuit to the same analytic reduction.
        assert_eq!(rep.mop.xi, 16.0);
        assert_eq!(rep.n_lo, 0);
        assert_eq!(rep.n_hi, 1000);
        let want = 0.01 * 0.99f64.powi(1000);
        assert!((rep.p_min - want).abs() <= 1e-12 * want);
    }

    #[test]
    fn xi_never_exceeds_cap() {
        let p = params(0.5, 0.3);
        let rep = quadratic_test(&p, 60, 1e-20).unwrap();
        assert!(rep.mop.xi <= 16.0);
        let _ = PmfKind::LoMarginal;
    }
}
