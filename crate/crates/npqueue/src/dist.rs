//! PMF containers shared by all engines.
//!
//! Values carry provenance (which engine produced them) and a conditioning
//! flag (wait-conditional vs unconditional). Small negative round-off is
//! clamped to zero on construction so that downstream log-space comparisons
//! stay defined; the clamp events are counted, not hidden.

use serde::Serialize;

/// Magnitude below which a negative entry is treated as benign round-off.
pub const NEGATIVE_CLAMP_FLOOR: f64 = 1e-18;

/// Which distribution a [`PmfVector`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PmfKind {
    LoMarginal,
    HiMarginal,
    Xlo,
    Xhi,
    Aggregate,
}

/// Provenance tag: the route that produced a set of values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    QuadraticRecurrence,
    RIntegral,
    Chebyshev,
    CtmcOracle,
    MonteCarlo,
    Exact,
}

impl Method {
    /// Short tag used on the command line and in output metadata.
    pub fn tag(self) -> &'static str {
        match self {
            Method::QuadraticRecurrence => "qr",
            Method::RIntegral => "ri",
            Method::Chebyshev => "cheb",
            Method::CtmcOracle => "oracle",
            Method::MonteCarlo => "mc",
            Method::Exact => "exact",
        }
    }
}

/// A finite prefix `f(0..=n_max)` of a one-dimensional PMF.
#[derive(Debug, Clone)]
pub struct PmfVector {
    /// Probabilities indexed by queue length `0..=n_max`.
    pub values: Vec<f64>,
    pub kind: PmfKind,
    /// `true` for wait-conditional values (given all servers busy).
    pub conditional: bool,
    pub method: Method,
    /// Entries in `(-1e-18, 0)` that were clamped to zero.
    pub clamped: usize,
    /// Entries at or below `-1e-18` that were clamped; should be zero for a
    /// healthy computation.
    pub gross_negatives: usize,
}

impl PmfVector {
    /// Wraps raw engine output, clamping negative round-off.
    pub fn from_raw(mut values: Vec<f64>, kind: PmfKind, conditional: bool, method: Method) -> Self {
        let (mut clamped, mut gross) = (0usize, 0usize);
        for v in values.iter_mut() {
            if *v < 0.0 {
                if *v > -NEGATIVE_CLAMP_FLOOR {
                    clamped += 1;
                } else {
                    gross += 1;
                }
                *v = 0.0;
            }
        }
        PmfVector { values, kind, conditional, method, clamped, gross_negatives: gross }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// A matrix `f(n, m)` for `n = 0..=n_max` (low priority) and
/// `m = 0..=m_max` (high priority), stored row-major by `n`.
#[derive(Debug, Clone)]
pub struct JointPmf {
    pub n_max: usize,
    pub m_max: usize,
    values: Vec<f64>,
    pub conditional: bool,
    pub method: Method,
    pub clamped: usize,
    pub gross_negatives: usize,
}

impl JointPmf {
    pub fn from_raw(
        n_max: usize,
        m_max: usize,
        mut values: Vec<f64>,
        conditional: bool,
        method: Method,
    ) -> Self {
        assert_eq!(values.len(), (n_max + 1) * (m_max + 1), "joint PMF shape mismatch");
        let (mut clamped, mut gross) = (0usize, 0usize);
        for v in values.iter_mut() {
            if *v < 0.0 {
                if *v > -NEGATIVE_CLAMP_FLOOR {
                    clamped += 1;
                } else {
                    gross += 1;
                }
                *v = 0.0;
            }
        }
        JointPmf { n_max, m_max, values, conditional, method, clamped, gross_negatives: gross }
    }

    /// Zero-filled joint PMF, for incremental construction.
    pub fn zeros(n_max: usize, m_max: usize, conditional: bool, method: Method) -> Self {
        JointPmf {
            n_max,
            m_max,
            values: vec![0.0; (n_max + 1) * (m_max + 1)],
            conditional,
            method,
            clamped: 0,
            gross_negatives: 0,
        }
    }

    #[inline]
    pub fn get(&self, n: usize, m: usize) -> f64 {
        self.values[n * (self.m_max + 1) + m]
    }

    #[inline]
    pub fn set(&mut self, n: usize, m: usize, v: f64) {
        self.values[n * (self.m_max + 1) + m] = v;
    }

    /// Row `f(n, 0..=m_max)` as a slice.
    pub fn row(&self, n: usize) -> &[f64] {
        let w = self.m_max + 1;
        &self.values[n * w..(n + 1) * w]
    }

    /// Sum along the anti-diagonal `n + m = k`, the aggregate PMF at `k`.
    pub fn anti_diagonal_sum(&self, k: usize) -> f64 {
        let lo = k.saturating_sub(self.m_max);
        let hi = k.min(self.n_max);
        let mut acc = 0.0;
        for n in lo..=hi {
            acc += self.get(n, k - n);
        }
        acc
    }

    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Largest entry (used by the log-map output transform).
    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}
