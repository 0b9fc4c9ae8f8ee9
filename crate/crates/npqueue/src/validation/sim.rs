//! Event-driven simulation of the non-preemptive priority queue.
//!
//! The full `N`-server system is simulated: Poisson arrivals at total
//! rate `N r mu` (high priority with probability `nu`), exponential
//! services at rate `mu` per busy server, and the head-of-the-line rule
//! on completions (the highest waiting priority is admitted). Queue
//! occupancy `(n, m)` is accumulated time-weighted over the periods when
//! all servers are busy, which estimates the wait-conditional joint PMF.
//!
//! Standard errors come from batch means: the post-warmup horizon is cut
//! into equal event batches and the per-batch occupancy ratios provide a
//! spread that honestly reflects the serial correlation of the process.

use crate::dist::{JointPmf, Method};
use crate::model::ModelParams;
use crate::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::collections::HashMap;

/// Number of batches used for the standard errors.
const BATCHES: usize = 100;
/// Fraction of events discarded as warm-up.
const WARMUP_FRACTION: f64 = 0.10;

/// Simulation estimates with reproducibility metadata.
#[derive(Debug, Clone)]
pub struct SimResult {
    /// Time-weighted wait-conditional occupancy frequencies.
    pub estimates: JointPmf,
    std_errors: Vec<f64>,
    /// Pooled queue-length histogram (wait-conditional).
    pub aggregate: Vec<f64>,
    pub aggregate_se: Vec<f64>,
    /// Fraction of simulated time with every server busy.
    pub busy_fraction: f64,
    pub events: u64,
    pub warmup_events: u64,
    pub seed: u64,
    pub batches: usize,
    pub n_servers: u32,
}

impl SimResult {
    /// Batch-means standard error of the `(n, m)` cell estimate.
    pub fn std_error(&self, n: usize, m: usize) -> f64 {
        self.std_errors[n * (self.estimates.m_max + 1) + m]
    }
}

/// Runs `n_events` transitions from an explicit 64-bit seed.
///
/// Needs the server count on the parameters. At least `10^5` events are
/// required so that the batch statistics mean something; the first 10%
/// are discarded as warm-up and reported.
pub fn monte_carlo(params: &ModelParams, n_events: u64, seed: u64) -> Result<SimResult> {
    let n_servers = params.n_servers().ok_or(Error::MissingServerCount)?;
    if n_events < 100_000 {
        return Err(Error::Domain(format!(
            "Monte-Carlo runs need at least 1e5 events; got {n_events}"
        )));
    }
    let mu = params.mu();
    let arrival_rate = f64::from(n_servers) * params.r() * mu;
    let nu = params.nu();
    let n_f = n_servers;

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let warmup = (n_events as f64 * WARMUP_FRACTION) as u64;
    let measured = n_events - warmup;

    let mut in_service: u32 = 0;
    let mut queue_lo: u32 = 0;
    let mut queue_hi: u32 = 0;

    let mut cell_batches: HashMap<(u32, u32), Vec<f64>> = HashMap::new();
    let mut agg_batches: HashMap<u32, Vec<f64>> = HashMap::new();
    let mut busy_batches = vec![0.0f64; BATCHES];
    let mut total_time = 0.0f64;
    let mut busy_time = 0.0f64;

    for event in 0..n_events {
        let service_rate = f64::from(in_service) * mu;
        let total_rate = arrival_rate + service_rate;
        let dt = -(1.0 - rng.random::<f64>()).ln() / total_rate;

        if event >= warmup {
            total_time += dt;
            if in_service == n_f {
                busy_time += dt;
                let batch = ((event - warmup) * BATCHES as u64 / measured) as usize;
                let batch = batch.min(BATCHES - 1);
                busy_batches[batch] += dt;
                cell_batches
                    .entry((queue_lo, queue_hi))
                    .or_insert_with(|| vec![0.0; BATCHES])[batch] += dt;
                agg_batches
                    .entry(queue_lo + queue_hi)
                    .or_insert_with(|| vec![0.0; BATCHES])[batch] += dt;
            }
        }

        if rng.random::<f64>() * total_rate < arrival_rate {
            // Arrival; joins service if a server is idle, else the queue.
            let high = rng.random::<f64>() < nu;
            if in_service < n_f {
                in_service += 1;
            } else if high {
                queue_hi += 1;
            } else {
                queue_lo += 1;
            }
        } else {
            // Service completion; admit the highest waiting priority.
            if queue_hi > 0 {
                queue_hi -= 1;
            } else if queue_lo > 0 {
                queue_lo -= 1;
            } else {
                in_service -= 1;
            }
        }
    }

    if busy_time == 0.0 {
        return Err(Error::Domain(
            "no all-servers-busy time was observed; increase the event count".into(),
        ));
    }

    let n_max = cell_batches.keys().map(|&(n, _)| n as usize).max().unwrap_or(0);
    let m_max = cell_batches.keys().map(|&(_, m)| m as usize).max().unwrap_or(0);
    let width = m_max + 1;
    let mut values = vec![0.0; (n_max + 1) * width];
    let mut std_errors = vec![0.0; (n_max + 1) * width];
    for (&(n, m), batches) in &cell_batches {
        let total: f64 = batches.iter().sum();
        let idx = n as usize * width + m as usize;
        values[idx] = total / busy_time;
        std_errors[idx] = batch_se(batches, &busy_batches);
    }
    let estimates = JointPmf::from_raw(n_max, m_max, values, true, Method::MonteCarlo);

    let k_max = agg_batches.keys().copied().max().unwrap_or(0) as usize;
    let mut aggregate = vec![0.0; k_max + 1];
    let mut aggregate_se = vec![0.0; k_max + 1];
    for (&k, batches) in &agg_batches {
        let total: f64 = batches.iter().sum();
        aggregate[k as usize] = total / busy_time;
        aggregate_se[k as usize] = batch_se(batches, &busy_batches);
    }

    Ok(SimResult {
        estimates,
        std_errors,
        aggregate,
        aggregate_se,
        busy_fraction: busy_time / total_time,
        events: n_events,
        warmup_events: warmup,
        seed,
        batches: BATCHES,
        n_servers,
    })
}

/// Standard error of a time-ratio estimate from per-batch ratios.
fn batch_se(cell: &[f64], busy: &[f64]) -> f64 {
    let ratios: Vec<f64> = cell
        .iter()
        .zip(busy)
        .filter(|(_, &b)| b > 0.0)
        .map(|(&c, &b)| c / b)
        .collect();
    let b = ratios.len();
    if b < 2 {
        return f64::INFINITY;
    }
    let mean = ratios.iter().sum::<f64>() / b as f64;
    let var = ratios.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / (b - 1) as f64;
    (var / b as f64).sqrt()
}
