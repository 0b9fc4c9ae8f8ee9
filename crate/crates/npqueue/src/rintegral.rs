//! R-integral (closed-form series) engine.
//!
//! The joint and marginal PMFs of the wait-conditional queue are contour
//! integrals of a meromorphic function with poles `z0 = nu`, `z1 < 1 < z2`,
//! where `z1, z2` solve `z^2 - (1+r) z + nu r = 0`. Their residues admit a
//! finite series whose terms are all positive once re-expressed through the
//! scaled integrals
//!
//! ```text
//! Rhat^m_(n+1) = (-r_lo)^n R^m_(n+1)
//!             = kappa a^n sum_(k=0)^n C(2n-k, n) b^k z0^(m-k-1) P^m_k(z1/z0)
//! ```
//!
//! with `kappa = 1/((z2-z1)(1-z1/z0))`, `a = r_lo/(z2-z1)^2 < 1/4`,
//! `b = (z2-z1)/(1-z1/z0)` and `gamma = a b < 1`. The polynomials
//! `P^m_k(x)` are cumulative sums of binomial terms
//! `D^m_l(x) = C(m,l) x^(m-l) (1-x)^l` and lie in `[0, 1]`.
//!
//! Positivity means there is no cancellation inside the series; the only
//! numerical hazard is the enormous dynamic range of the individual
//! factors (`z0^(m-k-1)` may underflow while the binomial row grows to
//! 1e120 and beyond). Columns are therefore evaluated in a tiny
//! mantissa/exponent arithmetic ([`Scaled`]) and converted to `f64` only
//! at the end, where genuine underflow is harmless.
//!
//! The backwards three-term recurrence for the `R^m_n` is also provided,
//! purely as a diagnostic: it is numerically unstable (catastrophically so
//! for small `nu`) and the [`backwards_recurrence_diagnostic`] quantifies
//! the instability instead of hiding it.

use crate::dist::{JointPmf, Method, PmfKind, PmfVector};
use crate::model::{self, derive_constants, ModelParams};
use crate::{Error, Result};

/// Neighborhood of `nu = 0` inside which [`limiting_r_values`] accepts a
/// parameter point as "near zero". The limit formulas carry `O(nu)`
/// corrections, so 1e-3 keeps them meaningful.
pub const NU_ZERO_NEIGHBORHOOD: f64 = 1e-3;

// ---------------------------------------------------------------------------
// Mantissa/exponent arithmetic
// ---------------------------------------------------------------------------

/// A positive-range floating value `m * 2^e` with the exponent tracked
/// separately, so products of thousands of factors can pass through
/// magnitudes far outside the `f64` range without flushing to zero or
/// infinity.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Scaled {
    m: f64,
    e: i64,
}

impl Scaled {
    pub(crate) fn new(x: f64) -> Self {
        let mut s = Scaled { m: x, e: 0 };
        s.renorm();
        s
    }

    pub(crate) fn one() -> Self {
        Scaled { m: 1.0, e: 0 }
    }

    /// Keeps the mantissa in `[1, 2)` so that the stored exponents of two
    /// values are always directly comparable (the addition path relies on
    /// this).
    fn renorm(&mut self) {
        if self.m == 0.0 || !self.m.is_finite() {
            self.e = 0;
            return;
        }
        let bits = self.m.to_bits();
        let biased = ((bits >> 52) & 0x7ff) as i64;
        if biased == 0 {
            // Subnormal mantissa: lift it back into the normal range.
            self.m *= 2f64.powi(256);
            self.e -= 256;
            self.renorm();
            return;
        }
        let exp = biased - 1023;
        if exp != 0 {
            self.e += exp;
            self.m = f64::from_bits((bits & 0x800F_FFFF_FFFF_FFFF) | (1023u64 << 52));
        }
    }

    pub(crate) fn mul_f64(mut self, x: f64) -> Self {
        self.m *= x;
        self.renorm();
        self
    }

    pub(crate) fn mul(mut self, other: Scaled) -> Self {
        self.m *= other.m;
        self.e += other.e;
        self.renorm();
        self
    }

    pub(crate) fn add(self, other: Scaled) -> Self {
        if other.m == 0.0 {
            return self;
        }
        if self.m == 0.0 {
            return other;
        }
        let d = other.e - self.e;
        if d > 64 {
            return other;
        }
        if d < -64 {
            return self;
        }
        let mut out = Scaled { m: self.m + other.m * 2f64.powi(d as i32), e: self.e };
        out.renorm();
        out
    }

    pub(crate) fn recip(self) -> Self {
        let mut out = Scaled { m: 1.0 / self.m, e: -self.e };
        out.renorm();
        out
    }

    pub(crate) fn to_f64(self) -> f64 {
        if self.m == 0.0 {
            return 0.0;
        }
        let e = self.e.clamp(-1100, 1100) as i32;
        self.m * 2f64.powi(e)
    }
}

/// `base^exp` by square-and-multiply in scaled arithmetic; `exp` may be
/// negative.
pub(crate) fn scaled_pow(base: f64, exp: i64) -> Scaled {
    let mut acc = Scaled::one();
    let mut sq = Scaled::new(base);
    let mut k = exp.unsigned_abs();
    while k > 0 {
        if k & 1 == 1 {
            acc = acc.mul(sq);
        }
        sq = sq.mul(sq);
        k >>= 1;
    }
    if exp < 0 {
        acc.recip()
    } else {
        acc
    }
}

// ---------------------------------------------------------------------------
// P polynomials and their binomial summands
// ---------------------------------------------------------------------------

/// `P_k^m(x)` via the cumulative binomial sum, in plain `f64`.
///
/// The summands obey the ratio recursion
/// `D^m_l = ((m+1)/l - 1)(1/x - 1) D^m_(l-1)`; the march starts from
/// `D^m_0 = x^m` when `x >= 0.5` and runs backwards from
/// `D^m_m = (1-x)^m` when `x < 0.5`, so that the anchor is the larger
/// endpoint. For `m` beyond roughly 1000 the anchors can underflow even
/// though the result is order one; the table builders use the scaled
/// column routine instead, which has no such limit.
pub fn d_cumulative(m: usize, x: f64, k: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("P polynomials need 0 <= x <= 1; got {x}")));
    }
    Ok(d_cumulative_directional(m, x, k, x >= 0.5))
}

/// Directional variant backing [`d_cumulative`]; exposed within the crate
/// so tests can compare the two marching directions.
pub(crate) fn d_cumulative_directional(m: usize, x: f64, k: usize, forward: bool) -> f64 {
    if k >= m {
        return 1.0;
    }
    if x == 0.0 {
        return 0.0;
    }
    if x == 1.0 {
        return 1.0;
    }
    let mf = m as f64;
    if forward {
        let ratio = (1.0 - x) / x;
        let mut d = x.powi(m as i32);
        let mut acc = d;
        for l in 1..=k {
            d *= ((mf + 1.0) / l as f64 - 1.0) * ratio;
            acc += d;
        }
        acc.min(1.0)
    } else {
        let ratio = x / (1.0 - x);
        let mut d = (1.0 - x).powi(m as i32);
        let mut acc = 0.0;
        for l in (0..m).rev() {
            // Step from D_(l+1) down to D_l.
            d *= (l as f64 + 1.0) / (mf - l as f64) * ratio;
            if l <= k {
                acc += d;
            }
        }
        acc.min(1.0)
    }
}

/// Table of `P_k^m(x)` for `m = 0..=m_max`, `k = 0..=k_max`, indexed
/// `[m][k]`. Entries with `m <= k` are exactly 1; the rest are cumulative
/// binomial sums evaluated in scaled arithmetic, valid for any sizes.
pub fn p_polynomial_table(x: f64, m_max: usize, k_max: usize) -> Result<Vec<Vec<f64>>> {
    if !(0.0..=1.0).contains(&x) || x >= 1.0 {
        return Err(Error::Domain(format!("P polynomial table needs 0 <= x < 1; got {x}")));
    }
    let mut table = Vec::with_capacity(m_max + 1);
    for m in 0..=m_max {
        let mut col = vec![1.0; k_max + 1];
        if m > 0 && x > 0.0 {
            let kcap = k_max.min(m - 1);
            let ratio = (1.0 - x) / x;
            let mut d = scaled_pow(x, m as i64);
            let mut acc = d;
            col[0] = acc.to_f64().min(1.0);
            for l in 1..=kcap {
                d = d.mul_f64(((m as f64 + 1.0) / l as f64 - 1.0) * ratio);
                acc = acc.add(d);
                col[l] = acc.to_f64().min(1.0);
            }
        } else if m > 0 {
            // x = 0: the polynomial vanishes below k = m.
            for v in col.iter_mut().take(k_max.min(m - 1) + 1) {
                *v = 0.0;
            }
        }
        table.push(col);
    }
    Ok(table)
}

// ---------------------------------------------------------------------------
// Series evaluation of the scaled integrals
// ---------------------------------------------------------------------------

/// Constants driving the series, all in cancellation-free forms.
#[derive(Debug, Clone)]
struct SeriesConsts {
    r: f64,
    z0: f64,
    z1z2: f64,
    /// `z2 - z1`, the root gap.
    s: f64,
    /// `x = z1/z0 ` in `(0, 1)`.
    x: f64,
    /// `1 - x`, from the identity `(z0 - z1)(z2 - z0) = nu(1 - nu)`.
    one_minus_x: f64,
    kappa: f64,
    a: f64,
    b: f64,
    gamma: f64,
}

impl SeriesConsts {
    fn build(params: &ModelParams) -> Result<Self> {
        if params.is_degenerate() {
            return Err(Error::Degenerate(format!(
                "the series engine needs 0 < nu < 1 (got nu = {}); use the analytic reduction",
                params.nu()
            )));
        }
        let c = derive_constants(params);
        let s = c.z_gap();
        let one_minus_x = c.z0_minus_z1() / c.z0;
        Ok(SeriesConsts {
            r: params.r(),
            z0: c.z0,
            z1z2: params.nu() * params.r(),
            s,
            x: c.z1 / c.z0,
            one_minus_x,
            kappa: c.kappa.expect("non-degenerate"),
            a: c.a_ratio.expect("non-degenerate"),
            b: c.b_ratio.expect("non-degenerate"),
            gamma: c.gamma_ratio.expect("non-degenerate"),
        })
    }

    /// Binomial row `w_k = a^(n-k) C(2n-k, n)`, `k = 0..=n`, via the
    /// cumulative product `a^l C(n+l, n) = prod_(j=1..l) (1 + n/j) a`.
    fn binomial_row(&self, n: usize, out: &mut Vec<f64>) {
        out.clear();
        out.resize(n + 1, 0.0);
        out[n] = 1.0;
        let nf = n as f64;
        for l in 1..=n {
            out[n - l] = out[n - l + 1] * (1.0 + nf / l as f64) * self.a;
        }
    }

    /// Column `q_k = gamma^k z0^(m-k-1) P^m_k(x)` for `k = 0..=k_hi`,
    /// evaluated in scaled arithmetic. Entries whose true magnitude is
    /// below the `f64` range come out as zero, which is harmless in the
    /// positive series.
    fn q_column(&self, m: usize, k_hi: usize, out: &mut Vec<f64>) {
        out.clear();
        out.resize(k_hi + 1, 0.0);
        let mut power = scaled_pow(self.z0, m as i64 - 1);
        let step = self.gamma / self.z0;
        let ratio = self.one_minus_x / self.x;
        let mf = m as f64;
        let mut d = scaled_pow(self.x, m as i64);
        let mut psum = d;
        for (k, slot) in out.iter_mut().enumerate() {
            if k >= m {
                *slot = power.to_f64();
            } else {
                *slot = power.mul(psum).to_f64();
                // Advance the cumulative binomial sum to level k+1:
                // D_(k+1) = D_k * (m-k)/(k+1) * (1-x)/x.
                if k + 1 < m {
                    d = d.mul_f64((mf - k as f64) / (k as f64 + 1.0) * ratio);
                    psum = psum.add(d);
                }
            }
            power = power.mul_f64(step);
        }
    }

    /// `Rhat^m_(n+1) = kappa * dot(w^(n), q^(m))` for one row/column pair.
    fn r_hat(&self, row: &[f64], q: &[f64]) -> f64 {
        let len = row.len().min(q.len());
        let mut acc = 0.0;
        for k in 0..len {
            acc += row[k] * q[k];
        }
        self.kappa * acc
    }
}

/// Scaled-integral table `Rhat^m_(n+1)` for rows `n = 0..=n_max`
/// (representing subscripts `n+1`) and columns `m = 0..=m_max`, together
/// with the constants and the scaled polynomial vectors
/// `P^(m)_k = z0^(m-k-1) P_k^m(z1/z0)`.
#[derive(Debug, Clone)]
pub struct RIntegralTable {
    pub n_rows: usize,
    pub m_cols: usize,
    r_hat: Vec<f64>,
    p_scaled: Vec<f64>,
    pub kappa: f64,
    pub a: f64,
    pub b: f64,
    pub gamma: f64,
}

impl RIntegralTable {
    /// `Rhat^m_(n+1)`; `row` is the derivative order `n`, starting at 0.
    pub fn r_hat(&self, row: usize, m: usize) -> f64 {
        self.r_hat[row * (self.m_cols + 1) + m]
    }

    /// Scaled polynomial entry `P^(m)_k`.
    pub fn p_scaled(&self, k: usize, m: usize) -> f64 {
        self.p_scaled[k * (self.m_cols + 1) + m]
    }

    /// Unscaled `R^m_n` for subscript `n >= 1` (divides the scaling factor
    /// back out; beware that this reintroduces the huge dynamic range the
    /// scaling exists to avoid).
    pub fn r_unscaled(&self, n: usize, m: usize, r_lo: f64) -> f64 {
        assert!(n >= 1, "R^m_0 = 0 is a seed, not a table row");
        let scale = (-r_lo).powi(n as i32 - 1);
        self.r_hat(n - 1, m) / scale
    }
}

/// Builds the full rectangular table. Intended for inspection and tests;
/// the PMF assemblers below stream rows instead and never materialize the
/// (possibly astronomically large) `m < n` corner.
pub fn r_hat_table(params: &ModelParams, n_max: usize, m_max: usize) -> Result<RIntegralTable> {
    let c = SeriesConsts::build(params)?;
    let width = m_max + 1;
    let mut r_hat = vec![0.0; (n_max + 1) * width];
    let mut p_scaled = vec![0.0; (n_max + 1) * width];
    let mut q = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let mut row = Vec::new();
        c.binomial_row(n, &mut row);
        rows.push(row);
    }
    for m in 0..=m_max {
        c.q_column(m, n_max, &mut q);
        // P^(m)_k = q_k / gamma^k, but recomputed directly to avoid the
        // quotient of two extreme magnitudes.
        let mut power = scaled_pow(c.z0, m as i64 - 1);
        let ratio = c.one_minus_x / c.x;
        let mf = m as f64;
        let mut d = scaled_pow(c.x, m as i64);
        let mut psum = d;
        for k in 0..=n_max {
            p_scaled[k * width + m] = if k >= m {
                power.to_f64()
            } else {
                let v = power.mul(psum).to_f64();
                if k + 1 < m {
                    d = d.mul_f64((mf - k as f64) / (k as f64 + 1.0) * ratio);
                    psum = psum.add(d);
                }
                v
            };
            power = power.mul_f64(1.0 / c.z0);
        }
        for n in 0..=n_max {
            r_hat[n * width + m] = c.r_hat(&rows[n], &q);
        }
    }
    Ok(RIntegralTable {
        n_rows: n_max,
        m_cols: m_max,
        r_hat,
        p_scaled,
        kappa: c.kappa,
        a: c.a,
        b: c.b,
        gamma: c.gamma,
    })
}

/// Streams scaled-integral rows `Rhat^(n+j)_(n+1)`, `j = 0..span`, to a
/// consumer. Only columns at or above the row index are ever formed, the
/// region where every series term is bounded; the `m < n` corner, whose
/// true values explode like `nu^(m-n)`, is never touched.
fn for_each_r_hat_row(
    c: &SeriesConsts,
    n_max: usize,
    span: usize,
    mut consume: impl FnMut(usize, &[f64]),
) {
    let col_max = n_max + span - 1;
    // Q columns, column m holding k = 0..=min(n_max, m).
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(col_max + 1);
    for m in 0..=col_max {
        let mut q = Vec::new();
        c.q_column(m, n_max.min(m), &mut q);
        columns.push(q);
    }
    let mut row = Vec::new();
    let mut rvals = vec![0.0; span];
    for n in 0..=n_max {
        c.binomial_row(n, &mut row);
        for j in 0..span {
            rvals[j] = c.r_hat(&row, &columns[n + j]);
        }
        consume(n, &rvals);
    }
}

/// Wait-conditional joint PMF on `[0, n_max] x [0, m_max]` assembled from
/// the scaled integrals:
/// `f(n, m) = ((1-r)/r) (DRhat^(m+n+2)_(n+1) - z1 z2 DRhat^(m+n)_(n+1))`
/// with `DRhat^j = Rhat^(j+1) - Rhat^j`. The `(-r_lo)^n` scaling factors
/// cancel between the two sides by construction.
pub fn joint_ri(params: &ModelParams, n_max: usize, m_max: usize) -> JointPmf {
    if params.is_degenerate() {
        return model::degenerate_joint(params, n_max, m_max, Method::RIntegral);
    }
    let c = SeriesConsts::build(params).expect("non-degenerate");
    let pre = (1.0 - c.r) / c.r;
    let width = m_max + 1;
    let mut values = vec![0.0; (n_max + 1) * width];
    for_each_r_hat_row(&c, n_max, m_max + 4, |n, rvals| {
        for m in 0..=m_max {
            let d_hi = rvals[m + 3] - rvals[m + 2];
            let d_lo = rvals[m + 1] - rvals[m];
            values[n * width + m] = pre * (d_hi - c.z1z2 * d_lo);
        }
    });
    JointPmf::from_raw(n_max, m_max, values, true, Method::RIntegral)
}

/// Wait-conditional low-priority marginal from the scaled integrals:
/// `f_lo(n) = -((1-r)/r) (Rhat^(n+2)_(n+1) - z1 z2 Rhat^n_(n+1))`.
pub fn lo_marginal_ri(params: &ModelParams, n_max: usize) -> PmfVector {
    if params.is_degenerate() {
        return model::degenerate_lo_marginal(params, n_max, Method::RIntegral);
    }
    let c = SeriesConsts::build(params).expect("non-degenerate");
    let pre = (1.0 - c.r) / c.r;
    let mut values = vec![0.0; n_max + 1];
    for_each_r_hat_row(&c, n_max, 3, |n, rvals| {
        values[n] = -pre * (rvals[2] - c.z1z2 * rvals[0]);
    });
    PmfVector::from_raw(values, PmfKind::LoMarginal, true, Method::RIntegral)
}

/// Exclusively-low distribution `f_xlo(n) = f(n, 0)` from the scaled
/// integrals: `((1-r)/r) (DRhat^(n+2)_(n+1) - z1 z2 DRhat^n_(n+1))`.
pub fn xlo_ri(params: &ModelParams, n_max: usize) -> PmfVector {
    if params.is_degenerate() {
        let joint = model::degenerate_joint(params, n_max, 0, Method::RIntegral);
        let values = (0..=n_max).map(|n| joint.get(n, 0)).collect();
        return PmfVector::from_raw(values, PmfKind::Xlo, true, Method::RIntegral);
    }
    let c = SeriesConsts::build(params).expect("non-degenerate");
    let pre = (1.0 - c.r) / c.r;
    let mut values = vec![0.0; n_max + 1];
    for_each_r_hat_row(&c, n_max, 4, |n, rvals| {
        let d_hi = rvals[3] - rvals[2];
        let d_lo = rvals[1] - rvals[0];
        values[n] = pre * (d_hi - c.z1z2 * d_lo);
    });
    PmfVector::from_raw(values, PmfKind::Xlo, true, Method::RIntegral)
}

// ---------------------------------------------------------------------------
// Backwards recurrence diagnostic
// ---------------------------------------------------------------------------

/// Outcome of running the unstable backwards recurrence against the series
/// values. `digits_lost[n][m]` is `log10` of the relative divergence of
/// the recurrence from the series at `R^m_n` (so bigger is worse);
/// `f64::NAN` marks entries where the reference vanishes.
#[derive(Debug, Clone)]
pub struct BackwardsDiagnostic {
    pub n_max: usize,
    pub m_max: usize,
    /// `R^m_n` from the backwards recurrence, rows `n = 0..=n_max`.
    pub recurrence: Vec<Vec<f64>>,
    /// `R^m_n` from the series representation.
    pub reference: Vec<Vec<f64>>,
    pub digits_lost: Vec<Vec<f64>>,
    pub max_divergence: f64,
}

/// Runs the backwards recurrence
/// `R^m_n = R^(m-2)_(n-1) - z1 z2 R^(m-2)_n + (z1 + z2) R^(m-1)_n`
/// from its seed values and measures how quickly it departs from the
/// well-behaved series evaluation. Instability (especially at small `nu`)
/// is the expected outcome, not an error.
pub fn backwards_recurrence_diagnostic(
    params: &ModelParams,
    n_max: usize,
    m_max: usize,
) -> Result<BackwardsDiagnostic> {
    let c = SeriesConsts::build(params)?;
    let consts = derive_constants(params);
    let z0 = consts.z0;
    let z0_minus_z1 = consts.z0_minus_z1();
    let s = c.s;
    let z1_plus_z2 = 1.0 + c.r;
    let z1z2 = c.z1z2;

    let mut rec = vec![vec![0.0; m_max + 1]; n_max + 1];
    // Seeds: R^m_0 = 0 (row 0 stays zero), plus the m = 0 and m = 1
    // columns for every n >= 1.
    for n_sub in 1..=n_max {
        let n = n_sub - 1; // R^m_(n+1) seed formulas are indexed by n
        // R^0_(n+1) = (-1)^n / ((z1-z0)(z1-z2))^(n+1) * p_n((z1-z0)/(z1-z2));
        // (z1-z0)(z1-z2) = (z0-z1) * s > 0.
        let base = z0_minus_z1 * s;
        let x_seed = z0_minus_z1 / s;
        let mut p_n = 1.0;
        let mut binom = 1.0;
        let mut x_pow = 1.0;
        for k in 1..=n {
            binom *= (k + n) as f64 / k as f64;
            x_pow *= x_seed;
            p_n += binom * x_pow;
        }
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let r0 = sign / base.powi(n_sub as i32) * p_n;
        rec[n_sub][0] = r0;
        if m_max >= 1 {
            // Central binomial coefficient C(2n, n).
            let mut central = 1.0;
            for j in 1..=n {
                central *= (n + j) as f64 / j as f64;
            }
            rec[n_sub][1] = -sign * central / s.powi(2 * n as i32 + 1) + z0 * r0;
        }
    }
    for n_sub in 1..=n_max {
        for m in 2..=m_max {
            rec[n_sub][m] = rec[n_sub - 1][m - 2] - z1z2 * rec[n_sub][m - 2]
                + z1_plus_z2 * rec[n_sub][m - 1];
        }
    }

    // Series reference, unscaled.
    let mut reference = vec![vec![0.0; m_max + 1]; n_max + 1];
    let table = r_hat_table(params, n_max.saturating_sub(1), m_max)?;
    for n_sub in 1..=n_max {
        for m in 0..=m_max {
            reference[n_sub][m] = table.r_unscaled(n_sub, m, params.r_lo());
        }
    }

    let mut digits = vec![vec![f64::NAN; m_max + 1]; n_max + 1];
    let mut max_div = f64::NEG_INFINITY;
    for n_sub in 0..=n_max {
        for m in 0..=m_max {
            let want = reference[n_sub][m];
            if want == 0.0 {
                continue;
            }
            let rel = ((rec[n_sub][m] - want) / want).abs().max(1e-17);
            let d = rel.log10();
            digits[n_sub][m] = d;
            max_div = max_div.max(d);
        }
    }
    Ok(BackwardsDiagnostic {
        n_max,
        m_max,
        recurrence: rec,
        reference,
        digits_lost: digits,
        max_divergence: max_div,
    })
}

// ---------------------------------------------------------------------------
// Limiting cases
// ---------------------------------------------------------------------------

/// Limiting values of the unscaled `R^m_n` at the edges of the `nu`
/// domain. For `nu = 1` (exact) the closed sum over `P_k^m(r)` is used;
/// for `nu` within [`NU_ZERO_NEIGHBORHOOD`] of zero the three-case limit
/// applies (the `m < n` case diverges like `nu^(m-n)` and is evaluated at
/// the supplied `nu`). Everything else is rejected.
pub fn limiting_r_values(params: &ModelParams, n: usize, m: usize) -> Result<f64> {
    let r = params.r();
    let nu = params.nu();
    if nu == 1.0 {
        if n == 0 {
            return Ok(0.0);
        }
        let d = n - 1;
        let p_col = p_polynomial_table(r, m, d)?;
        // C(2d - k, d) marched down from the central coefficient C(2d, d):
        // C(2d-k, d) = C(2d-k+1, d) * (d-k+1)/(2d-k+1).
        let mut coeff = 1.0;
        for j in 1..=d {
            coeff *= (d + j) as f64 / j as f64;
        }
        let mut acc = 0.0;
        for k in 0..=d {
            if k > 0 {
                coeff *= (d - k + 1) as f64 / (2 * d - k + 1) as f64;
            }
            acc += coeff * p_col[m][k];
        }
        let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
        return Ok(sign / (1.0 - r).powi(2 * d as i32 + 2) * acc);
    }
    if nu <= NU_ZERO_NEIGHBORHOOD {
        if n == 0 {
            return Ok(0.0);
        }
        let sign = if (n - 1) % 2 == 0 { 1.0 } else { -1.0 };
        return Ok(match m.cmp(&n) {
            std::cmp::Ordering::Greater => 0.0,
            std::cmp::Ordering::Equal => {
                sign * (1.0 - r.powi(n as i32 - 1) / (1.0 + r).powi(2 * n as i32 - 1))
            }
            std::cmp::Ordering::Less => sign / nu.powi((n - m) as i32),
        });
    }
    Err(Error::Domain(format!(
        "limiting R values need nu = 1 exactly or nu <= {NU_ZERO_NEIGHBORHOOD}; got nu = {nu}"
    )))
}

// ---------------------------------------------------------------------------
// General-triple series (tests and diagnostics)
// ---------------------------------------------------------------------------

/// Unscaled `R^m_(n+1)` from an arbitrary pole triple, straight from the
/// series. Plain `f64`; meant for modest orders in tests (the scaling
/// identity, contour cross-checks).
#[cfg(test)]
pub(crate) fn r_series_general(z0: f64, z1: f64, z2: f64, n: usize, m: usize) -> f64 {
    let s = z2 - z1;
    let x = z1 / z0;
    let bk = s / (1.0 - x);
    let mut binom = vec![0.0; n + 1];
    binom[n] = 1.0;
    for l in 1..=n {
        binom[n - l] = binom[n - l + 1] * (n + l) as f64 / l as f64;
    }
    let mut acc = 0.0;
    for (k, bin) in binom.iter().enumerate() {
        let p = d_cumulative_directional(m, x, k, x >= 0.5);
        acc += bin * bk.powi(k as i32 + 1) * z0.powi(m as i32 - k as i32 - 1) * p;
    }
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    sign / s.powi(2 * n as i32 + 2) * acc
}
