//! Worst-case agreement tests, an independent truncated-CTMC oracle and a
//! Monte-Carlo simulator.
//!
//! Every test reduces to the same measure of performance: the number of
//! decimal places of agreement, in log space, at the worst qualifying
//! point,
//!
//! ```text
//! Xi = -max log10 |ln f - ln f_ref|,
//! ```
//!
//! capped at 16 and taken over points whose reference probability exceeds
//! a floor `p_lim`. Four internal/external consistency tests (aggregate,
//! exclusively-high, exclusively-low, nearest-neighbour) plus the
//! cross-engine comparison all emit [`MopReport`]s; the oracle and the
//! simulator provide reference distributions that share no code with the
//! production engines.

use crate::dist::{JointPmf, Method, PmfVector};
use crate::model::ModelParams;
use crate::{chebyshev, quadratic, rintegral, Error, Result};

mod mop;
mod oracle;
mod sim;

pub use mop::{
    aggregation_test, mop_joint, mop_vectors, nn_test, quadratic_test, xhi_test, xlo_test,
    MopReport, QuadraticTestReport, DEFAULT_N_LIM, DEFAULT_P_LIM, DEFAULT_P_LIM_XHI,
    DEFAULT_THRESHOLD,
};
pub use oracle::{ctmc_oracle, default_truncation, OracleResult};
pub use sim::{monte_carlo, SimResult};

/// Joint PMF by the engine named in `method`. The reconstruction surface
/// (`Method::Chebyshev`) is fed the recurrence-engine marginal.
pub fn joint_by_method(
    params: &ModelParams,
    n_max: usize,
    m_max: usize,
    method: Method,
) -> Result<JointPmf> {
    match method {
        Method::QuadraticRecurrence => Ok(quadratic::joint_qr(params, n_max, m_max)),
        Method::RIntegral => Ok(rintegral::joint_ri(params, n_max, m_max)),
        Method::Chebyshev => {
            let lo = quadratic::lo_marginal_qr(params, n_max);
            chebyshev::joint_via_convolution(params, n_max, m_max, &lo)
        }
        other => Err(Error::Domain(format!(
            "no joint engine behind method '{}'",
            other.tag()
        ))),
    }
}

/// Low-priority marginal by engine.
pub fn lo_marginal_by_method(params: &ModelParams, n_max: usize, method: Method) -> Result<PmfVector> {
    match method {
        Method::QuadraticRecurrence => Ok(quadratic::lo_marginal_qr(params, n_max)),
        Method::RIntegral => Ok(rintegral::lo_marginal_ri(params, n_max)),
        other => Err(Error::Domain(format!(
            "no marginal engine behind method '{}'",
            other.tag()
        ))),
    }
}

/// Exclusively-low distribution `f(n, 0)` by engine.
pub fn xlo_by_method(params: &ModelParams, n_max: usize, method: Method) -> Result<PmfVector> {
    match method {
        Method::RIntegral => Ok(rintegral::xlo_ri(params, n_max)),
        _ => {
            let joint = joint_by_method(params, n_max, 0, method)?;
            let values = (0..=n_max).map(|n| joint.get(n, 0)).collect();
            Ok(PmfVector::from_raw(values, crate::dist::PmfKind::Xlo, true, method))
        }
    }
}

/// Largest index `k` with `(1 - r) r^k > p_lim`; anti-diagonal sums of the
/// joint PMF are exactly this geometric law, so `f(n, m) <= (1-r) r^(n+m)`
/// bounds every joint entry and no point beyond the cut can qualify for a
/// comparison with floor `p_lim`.
pub fn qualifying_extent(r: f64, p_lim: f64, n_lim: usize) -> usize {
    if p_lim <= 0.0 {
        return n_lim;
    }
    let cut = (p_lim.ln() - (1.0 - r).ln()) / r.ln();
    if !cut.is_finite() || cut < 0.0 {
        return 0;
    }
    (cut.ceil() as usize).min(n_lim)
}
