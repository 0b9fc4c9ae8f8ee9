//! Large-`n` tail of the low-priority marginal.
//!
//! The tail splits into a geometric (pole) part, present only while
//! `r_hi <= r^2`, and an algebraically damped part from the branch cut
//! decaying like `chi^(-n) n^(-3/2)` with
//! `chi = 1 + (1 - sqrt(r_hi))^2 / r_lo > 1/r`. At the critical point
//! `r_hi = r^2` (that is, `nu = r`) the two merge into a
//! `r^n / sqrt(n)` law. These formulas are overlays and convergence
//! checks; no derivation-level machinery lives here.

use crate::dist::PmfVector;
use crate::model::ModelParams;
use crate::quadratic;
use crate::{Error, Result};

/// Relative tolerance for detecting the critical case `nu = r`.
const CRITICAL_BAND: f64 = 1e-12;

/// Which tail law applies at a parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailRegime {
    /// `r_hi = r^2`: square-root-damped geometric decay.
    Critical,
    /// `r_hi < r^2`: geometric pole term plus a faster cut term.
    PolePlusCut,
    /// `r_hi > r^2`: cut term only.
    CutOnly,
}

impl TailRegime {
    pub fn label(self) -> &'static str {
        match self {
            TailRegime::Critical => "critical",
            TailRegime::PolePlusCut => "pole_plus_cut",
            TailRegime::CutOnly => "cut_only",
        }
    }
}

/// Tail law of `f_lo(n)` for one parameter point.
#[derive(Debug, Clone)]
pub struct TailAsymptote {
    pub regime: TailRegime,
    /// `(r^2 - r_hi)/r_lo * (1-r)`: the pole term is `pole_coeff * r^(n-1)`.
    pub pole_coeff: f64,
    /// The cut term is `cut_coeff * chi^(-n) * n^(-3/2)`.
    pub cut_coeff: f64,
    pub chi: f64,
    r: f64,
}

impl TailAsymptote {
    /// Classifies the regime and precomputes the coefficients. The
    /// endpoints `nu = 0` and `nu = 1` are rejected: there is no
    /// two-component tail to speak of.
    pub fn new(params: &ModelParams) -> Result<Self> {
        if params.is_degenerate() {
            return Err(Error::Degenerate(format!(
                "tail asymptotics need 0 < nu < 1; got nu = {}",
                params.nu()
            )));
        }
        let r = params.r();
        let nu = params.nu();
        let (r_hi, r_lo) = (params.r_hi(), params.r_lo());
        let chi = 1.0 + (1.0 - r_hi.sqrt()).powi(2) / r_lo;
        let regime = if (nu - r).abs() <= CRITICAL_BAND * nu.max(r) {
            TailRegime::Critical
        } else if r_hi < r * r {
            TailRegime::PolePlusCut
        } else {
            TailRegime::CutOnly
        };
        // The bracket 1 - r(1-r)/r_lo equals (r^2 - r_hi)/r_lo exactly;
        // the latter form does not cancel near the critical point.
        let pole_coeff = match regime {
            TailRegime::PolePlusCut => (r * r - r_hi) / r_lo * (1.0 - r),
            _ => 0.0,
        };
        let cut_coeff = (r_hi.sqrt() / r_lo).sqrt() / (2.0 * std::f64::consts::PI.sqrt() * r)
            * (1.0 - r)
            / (chi - 1.0 / r)
            * chi.sqrt();
        Ok(TailAsymptote { regime, pole_coeff, cut_coeff, chi, r })
    }

    /// The asymptotic value at queue length `n >= 1`.
    pub fn eval(&self, n: usize) -> f64 {
        let nf = n as f64;
        match self.regime {
            TailRegime::Critical => {
                ((1.0 - self.r) / (std::f64::consts::PI * self.r)).sqrt() * self.r.powi(n as i32)
                    / nf.sqrt()
            }
            _ => {
                let pole = self.pole_coeff * self.r.powi(n as i32 - 1);
                let cut = self.cut_coeff * (-(nf) * self.chi.ln()).exp() / (nf * nf.sqrt());
                pole + cut
            }
        }
    }
}

/// Convenience wrapper: the asymptotic tail value at a single `n`.
pub fn lo_tail_asymptote(params: &ModelParams, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("the tail formulas start at n = 1".into()));
    }
    Ok(TailAsymptote::new(params)?.eval(n))
}

/// Agreement between a computed marginal and its tail law over a range.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub regime: TailRegime,
    /// `(n, |f_lo(n)/asym(n) - 1|)` for each `n` in the requested range.
    pub rel_errors: Vec<(usize, f64)>,
    /// Set when the computed marginal itself fails to decrease somewhere
    /// in the examined range.
    pub non_monotone_tail: bool,
}

/// Compares a computed marginal against the tail law on `n_lo..=n_hi`
/// and reports the per-`n` relative errors.
///
/// The default marginal comes from the recurrence engine, which keeps its
/// relative accuracy all the way down to the bottom of the `f64` range;
/// the series engine's difference assembly loses the tail a couple of
/// hundred steps earlier at small `r`.
pub fn asymptote_convergence_report(
    params: &ModelParams,
    n_lo: usize,
    n_hi: usize,
) -> Result<ConvergenceReport> {
    if n_lo == 0 || n_lo > n_hi {
        return Err(Error::Domain(format!(
            "need 1 <= n_lo <= n_hi; got {n_lo}..={n_hi}"
        )));
    }
    let marginal = quadratic::lo_marginal_qr(params, n_hi);
    asymptote_convergence_report_for(params, &marginal, n_lo, n_hi)
}

/// Same as [`asymptote_convergence_report`], but against a caller-supplied
/// marginal (any engine).
pub fn asymptote_convergence_report_for(
    params: &ModelParams,
    marginal: &PmfVector,
    n_lo: usize,
    n_hi: usize,
) -> Result<ConvergenceReport> {
    if marginal.values.len() <= n_hi {
        return Err(Error::Domain(format!(
            "marginal covers 0..={}, need 0..={n_hi}",
            marginal.values.len().saturating_sub(1)
        )));
    }
    let asym = TailAsymptote::new(params)?;
    let mut rel_errors = Vec::with_capacity(n_hi - n_lo + 1);
    let mut non_monotone = false;
    for n in n_lo..=n_hi {
        let f = marginal.values[n];
        if n > n_lo && f > marginal.values[n - 1] {
            non_monotone = true;
        }
        let a = asym.eval(n);
        rel_errors.push((n, (f / a - 1.0).abs()));
    }
    Ok(ConvergenceReport { regime: asym.regime, rel_errors, non_monotone_tail: non_monotone })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;

    fn params(r: f64, nu: f64) -> ModelParams {
        ModelParams::new(r, nu).unwrap()
    }

    #[test]
    fn branch_selection_follows_sign() {
        assert_eq!(TailAsymptote::new(&params(0.5, 0.5)).unwrap().regime, TailRegime::Critical);
        assert_eq!(
            TailAsymptote::new(&params(0.9, 0.5)).unwrap().regime,
            TailRegime::PolePlusCut
        );
        assert_eq!(TailAsymptote::new(&params(0.5, 0.9)).unwrap().regime, TailRegime::CutOnly);
        // r = 0.99, nu = 0.9: r_hi = 0.891 < r^2 = 0.9801, so the pole term
        // is present.
        assert_eq!(
            TailAsymptote::new(&params(0.99, 0.9)).unwrap().regime,
            TailRegime::PolePlusCut
        );
        // Within the relative band of the critical point.
        assert_eq!(
            TailAsymptote::new(&params(0.5, 0.5 * (1.0 + 1e-13))).unwrap().regime,
            TailRegime::Critical
        );
        assert!(TailAsymptote::new(&params(0.5, 0.0)).is_err());
        assert!(lo_tail_asymptote(&params(0.5, 0.4), 0).is_err());
    }

    #[test]
    fn pole_coefficient_vanishes_continuously_at_criticality() {
        // At r_hi = r^2 (1 - 1e-6) the bracket equals r^2 * 1e-6 / r_lo.
        let r = 0.5f64;
        let eps = 1e-6;
        let nu = r * (1.0 - eps);
        let p = params(r, nu);
        let asym = TailAsymptote::new(&p).unwrap();
        assert_eq!(asym.regime, TailRegime::PolePlusCut);
        let bracket = asym.pole_coeff / (1.0 - r);
        let want = r * r * eps / p.r_lo();
        assert!(
            (bracket - want).abs() < 1e-10,
            "bracket {bracket} should approach zero like {want}"
        );
    }

    #[test]
    fn critical_value_matches_closed_form() {
        let p = params(0.5, 0.5);
        let v = lo_tail_asymptote(&p, 400).unwrap();
        let want = (0.5f64 / (std::f64::consts::PI * 0.5)).sqrt() * 0.5f64.powi(400) / 20.0;
        assert!((v - want).abs() <= 1e-15 * want);
    }

    #[test]
    fn critical_relative_error_decreases() {
        let p = params(0.5, 0.5);
        let rep = asymptote_convergence_report(&p, 100, 600).unwrap();
        assert_eq!(rep.regime, TailRegime::Critical);
        assert!(!rep.non_monotone_tail);
        let first = rep.rel_errors.first().unwrap().1;
        let last = rep.rel_errors.last().unwrap().1;
        assert!(last < first, "relative error should shrink: {first} -> {last}");
        // O(1/n) convergence: by n = 600 the error is below a percent.
        assert!(last < 1e-2, "relative error at n=600 is {last}");
    }

    #[test]
    fn pole_plus_cut_converges_fast() {
        let p = params(0.9, 0.5);
        let rep = asymptote_convergence_report(&p, 500, 1000).unwrap();
        assert_eq!(rep.regime, TailRegime::PolePlusCut);
        let last = rep.rel_errors.last().unwrap().1;
        assert!(last < 1e-3, "pole-dominated tail should match to <1e-3, got {last}");
    }

    #[test]
    fn cut_only_slope_regression() {
        // Pure cut decay: log10 f_lo(n) + 1.5 log10 n should fall with
        // slope -log10(chi) per step.
        let p = params(0.5, 0.9);
        let asym = TailAsymptote::new(&p).unwrap();
        assert_eq!(asym.regime, TailRegime::CutOnly);
        let lo = crate::rintegral::lo_marginal_ri(&p, 320);
        let (n0, n1) = (120usize, 300usize);
        let y = |n: usize| lo.values[n].log10() + 1.5 * (n as f64).log10();
        let slope = (y(n1) - y(n0)) / (n1 - n0) as f64;
        let want = -asym.chi.log10();
        assert!(
            ((slope - want) / want).abs() < 0.02,
            "cut slope {slope} vs -log10(chi) {want}"
        );
    }
}
