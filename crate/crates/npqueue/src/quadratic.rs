//! Quadratic-recurrence engine.
//!
//! The wait-conditional generating function of the low-priority queue
//! length satisfies a quadratic equation, so its Taylor coefficients obey
//! a nonlinear recurrence that can be marched forward directly. The joint
//! PMF follows from repeated truncated convolutions with the coefficient
//! sequence of the root `lambda_1(p)`.
//!
//! All recurrences are run in scaled variables `f~_n = Lambda^n f_n`; the
//! default scale `Lambda = r_lo` keeps every intermediate on the order of
//! the final probabilities. The scale factor is exposed because results
//! must be invariant under it, which the tests exploit.

use crate::dist::{JointPmf, Method, PmfKind, PmfVector};
use crate::model::{self, ModelParams};
use crate::{Error, Result};

/// State of the scaled marginal recurrence.
///
/// Invariants: `d^2 = (1-r)^2 + 4 r_lo`, `c1 = r_lo / scale_factor`,
/// `c2 = scale_factor / d`, and with the default scale `c1 == 1` and
/// `f_tilde[0] == 2 / (1 - r + d) > 0`.
#[derive(Debug, Clone)]
pub struct ScaledRecurrenceState {
    pub scale_factor: f64,
    pub c1: f64,
    pub c2: f64,
    pub d: f64,
    /// Scaled coefficients `f~_0 ..= f~_n_max`.
    pub f_tilde: Vec<f64>,
    /// Finalized work terms `Delta_k = r f~_k - c1 f~_(k+1)`, `k < n_max`.
    pub delta: Vec<f64>,
}

/// Runs the scaled coefficient recurrence up to `n_max`.
///
/// `scale` defaults to `r_lo`; it must be positive. While computing the
/// newest work term `Delta_(n-1)`, the not-yet-known `f~_n` is taken as
/// zero; the term is finalized right after `f~_n` becomes available.
pub fn scaled_recurrence(params: &ModelParams, n_max: usize, scale: Option<f64>) -> Result<ScaledRecurrenceState> {
    let r = params.r();
    let r_lo = params.r_lo();
    let lambda = scale.unwrap_or(r_lo);
    if !(lambda > 0.0) {
        return Err(Error::Degenerate(format!(
            "scale factor must be positive; the default r_lo = {r_lo} vanishes at nu = 1 \
             (use the analytic reduction instead)"
        )));
    }
    let d = ((1.0 - r) * (1.0 - r) + 4.0 * r_lo).sqrt();
    let c1 = r_lo / lambda;
    let c2 = lambda / d;
    let f0 = 2.0 / (1.0 - r + d);

    let mut f_tilde = Vec::with_capacity(n_max + 1);
    f_tilde.push(f0);
    let mut delta: Vec<f64> = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        delta.push(r * f_tilde[n - 1]);
        let mut acc = f_tilde[n - 1];
        for k in 0..n {
            acc += f_tilde[k] * delta[n - 1 - k];
        }
        let f_n = c2 * acc;
        f_tilde.push(f_n);
        delta[n - 1] -= c1 * f_n;
    }
    Ok(ScaledRecurrenceState { scale_factor: lambda, c1, c2, d, f_tilde, delta })
}

/// Wait-conditional low-priority marginal `f_lo(0..=n_max)` from the
/// scaled recurrence, `f_lo(n) = (1-r) c1^n f~_n`.
pub fn lo_marginal_qr(params: &ModelParams, n_max: usize) -> PmfVector {
    lo_marginal_qr_with_scale(params, n_max, None)
}

/// Same as [`lo_marginal_qr`] with an explicit scale factor (the result is
/// scale-invariant; the knob exists so that this can be verified).
pub fn lo_marginal_qr_with_scale(params: &ModelParams, n_max: usize, scale: Option<f64>) -> PmfVector {
    if params.is_degenerate() {
        return model::degenerate_lo_marginal(params, n_max, Method::QuadraticRecurrence);
    }
    let state = scaled_recurrence(params, n_max, scale).expect("non-degenerate scale");
    let pre = 1.0 - params.r();
    let mut c1_pow = 1.0;
    let values: Vec<f64> = state
        .f_tilde
        .iter()
        .map(|ft| {
            let v = pre * c1_pow * ft;
            c1_pow *= state.c1;
            v
        })
        .collect();
    PmfVector::from_raw(values, PmfKind::LoMarginal, true, Method::QuadraticRecurrence)
}

/// Which root of the generating-function quadratic a Taylor series refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LambdaSign {
    Plus,
    Minus,
}

/// Taylor coefficients of `lambda_(+/-)(p)` about `p = 0`.
#[derive(Debug, Clone)]
pub struct LambdaTaylor {
    pub sign: LambdaSign,
    /// Coefficients `lambda^(k)` of the series in `p`.
    pub coeffs: Vec<f64>,
    /// Internal scaled coefficients `f^(+/-)_k` with `lambda^(k) = c1^k f_k`.
    pub scaled: Vec<f64>,
    pub scale_factor: f64,
}

/// Computes the Taylor coefficients of the chosen root up to order `n_max`
/// via the nonlinear recurrence
/// `f_n = -/+ (Lambda f_(n-1) + sum_(k=1)^(n-1) f_k f_(n-k)) / d`,
/// seeded with `f_0 = (1 + r +/- d) / 2`.
///
/// At `nu = 1` both roots are constant in `p` (`lambda_- = r`,
/// `lambda_+ = 1`) and the exact constant series is returned.
pub fn lambda_taylor(params: &ModelParams, n_max: usize, sign: LambdaSign) -> LambdaTaylor {
    let r = params.r();
    let r_lo = params.r_lo();
    if params.nu() == 1.0 {
        let c0 = match sign {
            LambdaSign::Minus => r,
            LambdaSign::Plus => 1.0,
        };
        let mut coeffs = vec![0.0; n_max + 1];
        coeffs[0] = c0;
        return LambdaTaylor { sign, coeffs: coeffs.clone(), scaled: coeffs, scale_factor: 1.0 };
    }
    let lambda = r_lo;
    let d = ((1.0 - r) * (1.0 - r) + 4.0 * r_lo).sqrt();
    let sgn = match sign {
        LambdaSign::Plus => -1.0,
        LambdaSign::Minus => 1.0,
    };
    // The minus-root seed uses the product form 2 nu r / (1 + r + d)
    // instead of the subtractive (1 + r - d)/2, which cancels as nu -> 0.
    let seed = match sign {
        LambdaSign::Plus => 0.5 * (1.0 + r + d),
        LambdaSign::Minus => 2.0 * params.nu() * r / (1.0 + r + d),
    };
    let mut scaled = Vec::with_capacity(n_max + 1);
    scaled.push(seed);
    for n in 1..=n_max {
        let mut acc = lambda * scaled[n - 1];
        for k in 1..n {
            acc += scaled[k] * scaled[n - k];
        }
        scaled.push(sgn * acc / d);
    }
    // lambda^(k) = (r_lo / Lambda)^k f_k; the default scale makes the ratio
    // exactly one.
    let c1 = r_lo / lambda;
    let mut c1_pow = 1.0;
    let coeffs: Vec<f64> = scaled
        .iter()
        .map(|f| {
            let v = c1_pow * f;
            c1_pow *= c1;
            v
        })
        .collect();
    LambdaTaylor { sign, coeffs, scaled, scale_factor: lambda }
}

/// Full discrete convolution `c(n) = sum_k a(k) b(n-k)`,
/// `n = 0 ..= len(a)+len(b)-2`.
pub fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Truncated convolution: the first `len` entries of [`convolve`].
pub fn convolve_trunc(a: &[f64], b: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    convolve_trunc_into(a, b, &mut out);
    out
}

fn convolve_trunc_into(a: &[f64], b: &[f64], out: &mut [f64]) {
    for (n, slot) in out.iter_mut().enumerate() {
        let k_lo = (n + 1).saturating_sub(b.len());
        let k_hi = n.min(a.len().saturating_sub(1));
        let mut acc = 0.0;
        for k in k_lo..=k_hi {
            acc += a[k] * b[n - k];
        }
        *slot = acc;
    }
}

/// Wait-conditional joint PMF on `[0, n_max] x [0, m_max]` by repeated
/// convolution: `phi_0 = (1-r) conv(1/(lambda_2 - r), 1 - lambda_1)` and
/// `phi_m = conv(phi_(m-1), lambda_1)`, truncated to `n_max + 1` terms at
/// every step; `f(n, m) = phi_m(n)`.
pub fn joint_qr(params: &ModelParams, n_max: usize, m_max: usize) -> JointPmf {
    if params.is_degenerate() {
        return model::degenerate_joint(params, n_max, m_max, Method::QuadraticRecurrence);
    }
    let state = scaled_recurrence(params, n_max, None).expect("non-degenerate");
    // With the default scale, c1 = 1 and f~_n are directly the p-series
    // coefficients of 1/(lambda_2 - r).
    let mut glo_inv = state.f_tilde;
    if state.c1 != 1.0 {
        let mut c1_pow = 1.0;
        for g in glo_inv.iter_mut() {
            *g *= c1_pow;
            c1_pow *= state.c1;
        }
    }
    let lam1 = lambda_taylor(params, n_max, LambdaSign::Minus).coeffs;
    let mut one_minus_lam1: Vec<f64> = lam1.iter().map(|c| -c).collect();
    one_minus_lam1[0] += 1.0;

    let width = n_max + 1;
    let pre = 1.0 - params.r();
    let mut phi = convolve_trunc(&glo_inv, &one_minus_lam1, width);
    for v in phi.iter_mut() {
        *v *= pre;
    }

    let mut values = vec![0.0; width * (m_max + 1)];
    let mut scratch = vec![0.0; width];
    for m in 0..=m_max {
        if m > 0 {
            convolve_trunc_into(&phi, &lam1, &mut scratch);
            std::mem::swap(&mut phi, &mut scratch);
        }
        for (n, &v) in phi.iter().enumerate() {
            values[n * (m_max + 1) + m] = v;
        }
    }
    JointPmf::from_raw(n_max, m_max, values, true, Method::QuadraticRecurrence)
}
