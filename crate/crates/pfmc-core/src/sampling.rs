//! Sample budgets, deterministic chunked aggregation, and robust means.
//!
//! Aggregation is bit-reproducible under any worker count: samples are
//! assigned to fixed-size chunks by index, each chunk reduces its own range
//! in index order, and chunk partials merge in chunk order. The parallel
//! backend only decides who computes each chunk, never the reduction shape.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // float methods under no_std
use num_traits::Float;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::C64;

/// Samples per work unit.
pub const CHUNK_SIZE: u64 = 4096;

/// Hoeffding budget: K = ceil(2 B² ln(2/δ) / ε²).
pub fn hoeffding_samples(bound: f64, eps: f64, delta: f64) -> u64 {
    let k = 2.0 * bound * bound * (2.0 / delta).ln() / (eps * eps);
    if !k.is_finite() || k >= u64::MAX as f64 {
        return u64::MAX;
    }
    (k.ceil() as u64).max(1)
}

/// Median-of-means group count: ceil(8 ln(2/δ)).
pub fn mom_groups(delta: f64) -> u32 {
    let g = (8.0 * (2.0 / delta).ln()).ceil();
    if !g.is_finite() || g >= u32::MAX as f64 {
        return u32::MAX;
    }
    (g as u32).max(1)
}

/// Median-of-means group size from a second-moment bound.
pub fn mom_per_group(second_moment_bound: f64, eps: f64) -> u64 {
    let m = 8.0 * second_moment_bound * second_moment_bound / (eps * eps);
    if !m.is_finite() || m >= u64::MAX as f64 {
        return u64::MAX;
    }
    (m.ceil() as u64).max(1)
}

pub fn validate_budget(eps: f64, delta: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::validation(alloc::format!(
            "epsilon must lie in (0,1), got {eps}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::validation(alloc::format!(
            "delta must lie in (0,1), got {delta}"
        )));
    }
    Ok(())
}

/// Aggregation strategy for one estimator run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plan {
    Mean { k: u64 },
    MedianOfMeans { groups: u32, per_group: u64 },
}

impl Plan {
    pub fn total_samples(&self) -> u64 {
        match *self {
            Plan::Mean { k } => k,
            Plan::MedianOfMeans { groups, per_group } => (groups as u64).saturating_mul(per_group),
        }
    }
}

/// Pick the cheaper of a Hoeffding mean (valid under the pointwise bound)
/// and median-of-means (valid under the second-moment bound). Errors are
/// guaranteed at ε·`scale`; both bounds are absolute one-shot magnitudes.
pub fn choose_plan(
    pointwise_bound: f64,
    second_moment_bound: f64,
    scale: f64,
    eps: f64,
    delta: f64,
) -> (Plan, f64) {
    let eps_abs = eps * scale;
    let k_mean = hoeffding_samples(pointwise_bound, eps_abs, delta);
    let groups = mom_groups(delta);
    let per_group = mom_per_group(second_moment_bound, eps_abs);
    let k_mom = (groups as u64).saturating_mul(per_group);
    if k_mean <= k_mom {
        (Plan::Mean { k: k_mean }, pointwise_bound)
    } else {
        (
            Plan::MedianOfMeans { groups, per_group },
            second_moment_bound,
        )
    }
}

/// Partial sums over one contiguous index range.
#[derive(Debug, Clone)]
pub struct ChunkStats {
    pub count: u64,
    pub sum: C64,
    pub sum_abs2: f64,
    pub aux_sum: C64,
    /// (group index, partial sum) for every group intersecting the chunk,
    /// in ascending group order.
    pub group_partials: Vec<(u32, C64)>,
}

/// Runs chunk jobs; implementations must return results in chunk order.
pub trait Executor: Sync {
    fn run_chunks(
        &self,
        n_chunks: usize,
        job: &(dyn Fn(usize) -> ChunkStats + Sync),
    ) -> Vec<ChunkStats>;
}

/// Single-threaded reference executor.
pub struct Sequential;

impl Executor for Sequential {
    fn run_chunks(
        &self,
        n_chunks: usize,
        job: &(dyn Fn(usize) -> ChunkStats + Sync),
    ) -> Vec<ChunkStats> {
        (0..n_chunks).map(job).collect()
    }
}

/// Full-run statistics in deterministic reduction order.
#[derive(Debug, Clone)]
pub struct RunStats {
    pub k: u64,
    pub value: C64,
    pub mean: C64,
    pub aux_mean: C64,
    pub std_error: f64,
}

/// A stateful per-chunk sampler: maps a sample index to (value, auxiliary).
/// Mutability covers scratch buffers only; the value must stay a pure
/// function of the index.
pub type ShotFn<'a> = alloc::boxed::Box<dyn FnMut(u64) -> (C64, C64) + 'a>;

/// Evaluate `plan.total_samples()` shots and aggregate. Each chunk obtains
/// its own sampler from `factory`, so scratch reuse never crosses threads.
pub fn run_plan<'a>(
    plan: Plan,
    exec: &dyn Executor,
    factory: &(dyn Fn() -> ShotFn<'a> + Sync),
) -> RunStats {
    let k_total = plan.total_samples();
    if k_total == 0 {
        return RunStats {
            k: 0,
            value: Complex64::zero(),
            mean: Complex64::zero(),
            aux_mean: Complex64::zero(),
            std_error: 0.0,
        };
    }
    let per_group = match plan {
        Plan::MedianOfMeans { per_group, .. } => per_group,
        Plan::Mean { k } => k,
    };
    let n_chunks = k_total.div_ceil(CHUNK_SIZE) as usize;
    let job = |c: usize| -> ChunkStats {
        let start = c as u64 * CHUNK_SIZE;
        let end = (start + CHUNK_SIZE).min(k_total);
        let mut shot = factory();
        let mut sum = Complex64::zero();
        let mut sum_abs2 = 0.0f64;
        let mut aux_sum = Complex64::zero();
        let mut group_partials: Vec<(u32, C64)> = Vec::new();
        let mut cur_group = u32::MAX;
        let mut cur_sum = Complex64::zero();
        for k in start..end {
            let (v, aux) = shot(k);
            sum += v;
            sum_abs2 += v.norm_sqr();
            aux_sum += aux;
            let g = (k / per_group) as u32;
            if g != cur_group {
                if cur_group != u32::MAX {
                    group_partials.push((cur_group, cur_sum));
                }
                cur_group = g;
                cur_sum = Complex64::zero();
            }
            cur_sum += v;
        }
        if cur_group != u32::MAX {
            group_partials.push((cur_group, cur_sum));
        }
        ChunkStats {
            count: end - start,
            sum,
            sum_abs2,
            aux_sum,
            group_partials,
        }
    };
    let chunks = exec.run_chunks(n_chunks, &job);

    // Merge in chunk order.
    let n_groups = k_total.div_ceil(per_group) as usize;
    let mut group_sums = alloc::vec![Complex64::zero(); n_groups];
    let mut sum = Complex64::zero();
    let mut sum_abs2 = 0.0f64;
    let mut aux_sum = Complex64::zero();
    let mut count = 0u64;
    for ch in &chunks {
        sum += ch.sum;
        sum_abs2 += ch.sum_abs2;
        aux_sum += ch.aux_sum;
        count += ch.count;
        for &(g, s) in &ch.group_partials {
            group_sums[g as usize] += s;
        }
    }
    debug_assert_eq!(count, k_total);

    let kf = k_total as f64;
    let mean = sum / kf;
    let aux_mean = aux_sum / kf;
    let value = match plan {
        Plan::Mean { .. } => mean,
        Plan::MedianOfMeans { per_group, .. } => {
            let means: Vec<C64> = group_sums
                .iter()
                .enumerate()
                .map(|(g, s)| {
                    let gk = group_len(g as u64, per_group, k_total);
                    s / gk as f64
                })
                .collect();
            coordinatewise_median(&means)
        }
    };
    let var = (sum_abs2 - kf * mean.norm_sqr()).max(0.0);
    let std_error = if k_total > 1 {
        (var / (kf - 1.0)).sqrt() / kf.sqrt()
    } else {
        0.0
    };
    RunStats {
        k: k_total,
        value,
        mean,
        aux_mean,
        std_error,
    }
}

fn group_len(g: u64, per_group: u64, k_total: u64) -> u64 {
    let start = g * per_group;
    (start + per_group).min(k_total) - start
}

/// Coordinatewise (real, imaginary) median of `values`.
pub fn coordinatewise_median(values: &[C64]) -> C64 {
    let mut re: Vec<f64> = values.iter().map(|z| z.re).collect();
    let mut im: Vec<f64> = values.iter().map(|z| z.im).collect();
    Complex64::new(median_in_place(&mut re), median_in_place(&mut im))
}

fn median_in_place(xs: &mut [f64]) -> f64 {
    let n = xs.len();
    xs.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite sample values"));
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Coordinatewise median of group means over an explicit sample list.
/// `groups` beyond the sample count is truncated; trailing samples that
/// do not fill a group are dropped.
pub fn median_of_means(samples: &[C64], groups: usize) -> Result<C64> {
    if samples.is_empty() {
        return Err(Error::validation("median_of_means needs samples"));
    }
    if groups == 0 {
        return Err(Error::validation("median_of_means needs at least one group"));
    }
    let g = groups.min(samples.len());
    let m = samples.len() / g;
    let means: Vec<C64> = (0..g)
        .map(|i| {
            let chunk = &samples[i * m..(i + 1) * m];
            chunk.iter().sum::<C64>() / m as f64
        })
        .collect();
    Ok(coordinatewise_median(&means))
}
