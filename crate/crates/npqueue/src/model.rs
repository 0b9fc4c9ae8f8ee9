//! Model parameters, derived algebraic constants and exact closed forms.
//!
//! The wait-conditional distributions depend on the pair `(r, nu)` only:
//! `r` is the total traffic intensity per server and `nu` the fraction of
//! arrivals that are high priority, so that `r_hi = nu*r` and
//! `r_lo = r - r_hi`. The optional server count `N` and service rate `mu`
//! matter only for unconditional quantities and simulation time scales.
//!
//! The constants `z0, z1, z2` are the poles of the contour-integral
//! representation: `z1, z2` are the roots of `z^2 - (1+r) z + nu*r = 0`
//! and `z0 = nu`. To avoid cancellation, the discriminant is computed in
//! the form `(1-r)^2 + 4 r_lo` (algebraically equal to `(1+r)^2 - 4 nu r`,
//! but with both terms nonnegative), `z2` takes the `+` root and `z1` is
//! recovered from the product `z1 z2 = nu r`. Likewise `z0 - z1`, which
//! vanishes as `nu -> 1`, is evaluated through the identity
//! `(z0 - z1)(z2 - z0) = nu (1 - nu)`.

use crate::dist::{JointPmf, Method, PmfVector};
use crate::{Error, Result};
use statrs::function::gamma::{gamma_ur, ln_gamma};

/// Inputs of the two-level non-preemptive priority model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    r: f64,
    nu: f64,
    r_hi: f64,
    r_lo: f64,
    n_servers: Option<u32>,
    mu: f64,
}

impl ModelParams {
    /// Validates `0 < r < 1` (stability) and `0 <= nu <= 1`.
    pub fn new(r: f64, nu: f64) -> Result<Self> {
        if !r.is_finite() || r <= 0.0 || r >= 1.0 {
            return Err(Error::Domain(format!(
                "traffic intensity r must satisfy 0 < r < 1 (queue is unstable at r >= 1); got r = {r}"
            )));
        }
        if !nu.is_finite() || !(0.0..=1.0).contains(&nu) {
            return Err(Error::Domain(format!(
                "high-priority fraction nu must lie in [0, 1]; got nu = {nu}"
            )));
        }
        // Split r into the level intensities so that r_hi + r_lo == r holds
        // bit-exactly: one of the two complements r - x is Sterbenz-exact,
        // so the double complement reconstitutes r.
        let r_lo = r - nu * r;
        let r_hi = r - r_lo;
        Ok(ModelParams { r, nu, r_hi, r_lo, n_servers: None, mu: 1.0 })
    }

    pub fn with_servers(mut self, n_servers: u32) -> Result<Self> {
        if n_servers == 0 {
            return Err(Error::Domain("server count N must be at least 1".into()));
        }
        self.n_servers = Some(n_servers);
        Ok(self)
    }

    pub fn with_service_rate(mut self, mu: f64) -> Result<Self> {
        if !mu.is_finite() || mu <= 0.0 {
            return Err(Error::Domain(format!("service rate mu must be positive; got {mu}")));
        }
        self.mu = mu;
        Ok(self)
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// High-priority traffic intensity `nu * r` (up to one unit in the
    /// last place, so that the split below stays exact).
    pub fn r_hi(&self) -> f64 {
        self.r_hi
    }

    /// Low-priority traffic intensity `(1 - nu) r`, complemented so that
    /// `r_hi + r_lo == r` holds bit-exactly.
    pub fn r_lo(&self) -> f64 {
        self.r_lo
    }

    pub fn n_servers(&self) -> Option<u32> {
        self.n_servers
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// True at the single-class endpoints `nu = 0` and `nu = 1`, which the
    /// generic engines must not receive (pole collisions).
    pub fn is_degenerate(&self) -> bool {
        self.nu == 0.0 || self.nu == 1.0
    }
}

/// Algebraic constants derived from `(r, nu)`.
///
/// `kappa`, `a_ratio`, `b_ratio`, `gamma_ratio` and `chi` exist only for
/// `nu` strictly inside `(0, 1)`; at the endpoints they are `None` rather
/// than carrying non-finite or misleading values.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedConstants {
    pub r_hi: f64,
    pub r_lo: f64,
    pub z0: f64,
    pub z1: f64,
    pub z2: f64,
    /// `1 / ((z2 - z1)(1 - z1/z0))`.
    pub kappa: Option<f64>,
    /// `r_lo / (z2 - z1)^2`, always below `1/4`.
    pub a_ratio: Option<f64>,
    /// `(z2 - z1) / (1 - z1/z0)`.
    pub b_ratio: Option<f64>,
    /// `r_lo / ((z2 - z1)(1 - z1/z0)) = a * b`, always below `1`.
    pub gamma_ratio: Option<f64>,
    /// `1 + (1 - sqrt(r_hi))^2 / r_lo`, the cut decay rate.
    pub chi: Option<f64>,
}

impl DerivedConstants {
    /// `z2 - z1`, which equals the (stably computed) square root of the
    /// discriminant.
    pub fn z_gap(&self) -> f64 {
        self.z2 - self.z1
    }

    /// `z0 - z1` through the cancellation-free identity
    /// `(z0 - z1)(z2 - z0) = nu (1 - nu)`.
    pub fn z0_minus_z1(&self) -> f64 {
        self.z0 * (1.0 - self.z0) / (self.z2 - self.z0)
    }

    /// Conditioning estimate for the series engine: the magnitudes of
    /// `gamma` and of `1 - z1/z0`. Values of `gamma` near 1 or
    /// `1 - z1/z0` near 0 signal a poorly conditioned parameter point.
    pub fn condition_estimate(&self) -> Option<(f64, f64)> {
        let gamma = self.gamma_ratio?;
        Some((gamma, self.z0_minus_z1() / self.z0))
    }
}

/// Computes all derived constants for a parameter point.
pub fn derive_constants(params: &ModelParams) -> DerivedConstants {
    let (r, nu) = (params.r(), params.nu());
    let (r_hi, r_lo) = (params.r_hi(), params.r_lo());

    if nu == 0.0 {
        // z1 and z0 collide at 0; the quadratic degenerates to z(z - (1+r)).
        return DerivedConstants {
            r_hi,
            r_lo,
            z0: 0.0,
            z1: 0.0,
            z2: 1.0 + r,
            kappa: None,
            a_ratio: None,
            b_ratio: None,
            gamma_ratio: None,
            chi: None,
        };
    }
    if nu == 1.0 {
        // z0 and z2 collide at 1; the roots are r and 1 exactly.
        return DerivedConstants {
            r_hi,
            r_lo,
            z0: 1.0,
            z1: r,
            z2: 1.0,
            kappa: None,
            a_ratio: None,
            b_ratio: None,
            gamma_ratio: None,
            chi: None,
        };
    }

    // (1+r)^2 - 4 nu r == (1-r)^2 + 4 r_lo; the right-hand form has no
    // cancellation.
    let disc = (1.0 - r) * (1.0 - r) + 4.0 * r_lo;
    let s = disc.sqrt();
    let z2 = 0.5 * (1.0 + r + s);
    // The direct product keeps z1 relatively accurate down to nu -> 0,
    // where the subtractive root (1 + r - s)/2 would cancel.
    let z1 = nu * r / z2;
    let z0 = nu;

    // kappa, b and gamma all contain 1 - z1/z0 = (z0 - z1)/z0, rewritten
    // through (z0 - z1)(z2 - z0) = nu(1 - nu).
    let z2_minus_z0 = z2 - z0;
    let kappa = z2_minus_z0 / (s * (1.0 - nu));
    // a expressed through r(1 - nu) rather than the complemented r_lo so
    // that a * b reproduces gamma to a few ulps at every nu.
    let a = r * (1.0 - nu) / disc;
    let b = s * z2_minus_z0 / (1.0 - nu);
    let gamma = r * z2_minus_z0 / s;
    let chi = 1.0 + (1.0 - r_hi.sqrt()).powi(2) / r_lo;

    DerivedConstants {
        r_hi,
        r_lo,
        z0,
        z1,
        z2,
        kappa: Some(kappa),
        a_ratio: Some(a),
        b_ratio: Some(b),
        gamma_ratio: Some(gamma),
        chi: Some(chi),
    }
}

/// Probability that an arrival finds at least one server idle.
///
/// Evaluated through the Erlang-B recursion on the offered load `a = N r`,
/// which is monotone and free of large intermediate terms:
/// `B_0 = 1`, `B_k = a B_{k-1} / (k + a B_{k-1})`, and the waiting
/// probability (Erlang C) is `N B_N / (N - a (1 - B_N))`.
///
/// `r = 0` is accepted and returns 1 by continuity (an empty system).
pub fn no_wait_probability(r: f64, n_servers: u32) -> Result<f64> {
    if !r.is_finite() || !(0.0..1.0).contains(&r) {
        return Err(Error::Domain(format!(
            "no-wait probability needs 0 <= r < 1 (unstable at r >= 1); got r = {r}"
        )));
    }
    if n_servers == 0 {
        return Err(Error::Domain("server count N must be at least 1".into()));
    }
    if r == 0.0 {
        return Ok(1.0);
    }
    let n = f64::from(n_servers);
    let a = n * r;
    let mut b = 1.0;
    for k in 1..=n_servers {
        let ab = a * b;
        b = ab / (f64::from(k) + ab);
    }
    let erlang_c = n * b / (n - a * (1.0 - b));
    Ok(1.0 - erlang_c)
}

/// Scaled upper incomplete gamma function
/// `shape * e^x * x^(-shape) * Integral_x^inf t^(shape-1) e^(-t) dt`.
pub fn scaled_upper_incomplete_gamma(x: f64, shape: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!("scaled incomplete gamma needs x > 0; got x = {x}")));
    }
    if !shape.is_finite() || shape <= 0.0 {
        return Err(Error::Domain(format!(
            "scaled incomplete gamma needs shape > 0; got shape = {shape}"
        )));
    }
    let q = gamma_ur(shape, x);
    if q > 0.0 {
        // shape * Q(shape, x) * exp(x - shape ln x + ln Gamma(shape)).
        let log_factor = x - shape * x.ln() + ln_gamma(shape);
        Ok(shape * q * log_factor.exp())
    } else {
        // Q underflowed (x far beyond shape): use the divergent tail
        // expansion Gamma(shape, x) ~ x^(shape-1) e^(-x) sum_j prod (shape-j)/x,
        // truncated at its smallest term.
        let mut term = 1.0f64;
        let mut total = 1.0f64;
        for j in 1..=30 {
            let next = term * (shape - j as f64) / x;
            if next.abs() >= term.abs() || next.abs() < f64::EPSILON * total.abs() {
                break;
            }
            term = next;
            total += term;
        }
        Ok(shape / x * total)
    }
}

/// Probability that the system is completely empty.
pub fn empty_system_probability(r: f64, n_servers: u32) -> Result<f64> {
    if !r.is_finite() || r <= 0.0 || r >= 1.0 {
        return Err(Error::Domain(format!(
            "empty-system probability needs 0 < r < 1; got r = {r}"
        )));
    }
    if n_servers == 0 {
        return Err(Error::Domain("server count N must be at least 1".into()));
    }
    let n = f64::from(n_servers);
    let x = r * n;
    let gscl = scaled_upper_incomplete_gamma(x, n)?;
    // 1/p(0,0) = ((rN)^N / N!) * [1/(1-r) + gscl]; assembled in log space
    // so that large N does not overflow the prefactor.
    let ln_pref = n * x.ln() - ln_gamma(n + 1.0);
    let bracket = 1.0 / (1.0 - r) + gscl;
    Ok((-ln_pref - bracket.ln()).exp())
}

/// Wait-conditional high-priority marginal: `(1 - r_hi) r_hi^m`.
pub fn hi_marginal_exact(params: &ModelParams, m: usize) -> f64 {
    let r_hi = params.r_hi();
    (1.0 - r_hi) * r_hi.powi(m as i32)
}

/// Exact aggregate queue-length PMF `(1 - r) r^k` (all priorities pooled).
pub fn agg_exact(r: f64, k: usize) -> f64 {
    (1.0 - r) * r.powi(k as i32)
}

/// Exact exclusively-high probability `(1 - r)(r_hi / z2)^m`: `m` high
/// clients in the queue and no low ones.
pub fn xhi_exact(params: &ModelParams, m: usize) -> f64 {
    // r_hi / z2 = z1 z2 / z2 = z1, which is the cancellation-safe form.
    let constants = derive_constants(params);
    (1.0 - params.r()) * constants.z1.powi(m as i32)
}

/// Mixes a wait-conditional PMF with the no-wait atom at zero:
/// `P(k) = P_NW * delta_k0 + (1 - P_NW) f(k)`.
pub fn condition_decomposition(params: &ModelParams, pmf: &PmfVector) -> Result<PmfVector> {
    let n = params.n_servers().ok_or(Error::MissingServerCount)?;
    let p_nw = no_wait_probability(params.r(), n)?;
    let mut values: Vec<f64> = pmf.values.iter().map(|v| (1.0 - p_nw) * v).collect();
    if let Some(v0) = values.first_mut() {
        *v0 += p_nw;
    }
    let mut out = pmf.clone();
    out.values = values;
    out.conditional = false;
    Ok(out)
}

/// Joint version of [`condition_decomposition`]:
/// `P(n, m) = P_NW * delta_n0 delta_m0 + (1 - P_NW) f(n, m)`.
pub fn condition_decomposition_joint(params: &ModelParams, pmf: &JointPmf) -> Result<JointPmf> {
    let n_servers = params.n_servers().ok_or(Error::MissingServerCount)?;
    let p_nw = no_wait_probability(params.r(), n_servers)?;
    let mut out = JointPmf::zeros(pmf.n_max, pmf.m_max, false, pmf.method);
    for n in 0..=pmf.n_max {
        for m in 0..=pmf.m_max {
            out.set(n, m, (1.0 - p_nw) * pmf.get(n, m));
        }
    }
    out.set(0, 0, out.get(0, 0) + p_nw);
    Ok(out)
}

/// Exact analytic joint PMF at the endpoints `nu = 0` (all-low) and
/// `nu = 1` (all-high); used by every engine as the degenerate branch.
pub(crate) fn degenerate_joint(params: &ModelParams, n_max: usize, m_max: usize, method: Method) -> JointPmf {
    let mut out = JointPmf::zeros(n_max, m_max, true, method);
    if params.nu() == 0.0 {
        for n in 0..=n_max {
            out.set(n, 0, agg_exact(params.r(), n));
        }
    } else {
        for m in 0..=m_max {
            out.set(0, m, agg_exact(params.r(), m));
        }
    }
    out
}

/// Exact analytic low-priority marginal at the endpoints: geometric for
/// `nu = 0`, a unit mass at zero for `nu = 1`.
pub(crate) fn degenerate_lo_marginal(params: &ModelParams, n_max: usize, method: Method) -> PmfVector {
    let values: Vec<f64> = if params.nu() == 0.0 {
        (0..=n_max).map(|n| agg_exact(params.r(), n)).collect()
    } else {
        let mut v = vec![0.0; n_max + 1];
        v[0] = 1.0;
        v
    };
    PmfVector { values, kind: crate::dist::PmfKind::LoMarginal, conditional: true, method, clamped: 0, gross_negatives: 0 }
}
