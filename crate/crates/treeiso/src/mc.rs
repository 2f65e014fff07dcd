//! Parallel Monte Carlo over independent chunks.

use rayon::prelude::*;
use treeiso_core::model::{DegreeModel, UnboundedWeights};
use treeiso_core::samplers::{CiMethod, MCEstimate, McJob, McModel};

use crate::failure::{Failure, Outcome};

pub fn mc_model(model: &DegreeModel) -> McModel {
    match model {
        DegreeModel::Unbounded(UnboundedWeights::InvFactorial) => McModel::Labeled,
        DegreeModel::Unbounded(UnboundedWeights::Ones) => McModel::Plane,
        m => McModel::Cgw(m.clone()),
    }
}

/// Thread pool with `workers` threads (0: one per available core).
pub fn pool(workers: usize) -> Outcome<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Failure::other(format!("thread pool: {e}")))
}

/// `(pairs, hits)` summed over all chunks; independent of the thread count.
pub fn run_job(job: &McJob) -> (u64, u64) {
    (0..job.chunks()).into_par_iter().map(|c| job.run_chunk(c)).reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
}

pub fn estimate(n: usize, model: &McModel, samples: u64, seed: u64, method: CiMethod) -> Outcome<MCEstimate> {
    let job = McJob::new(n, model, samples, seed)?;
    let (pairs, hits) = run_job(&job);
    Ok(job.finish(pairs, hits, method))
}

#[cfg(test)]
mod tests {
    use super::*;
    use treeiso_core::samplers::mc_iso_probability;

    #[test]
    fn parallel_matches_sequential() {
        let m = McModel::Cgw(DegreeModel::unary_binary());
        let seq = mc_iso_probability(6, &m, 200_000, 9, CiMethod::Wilson).unwrap();
        for workers in [1, 3] {
            let par = pool(workers).unwrap().install(|| estimate(6, &m, 200_000, 9, CiMethod::Wilson)).unwrap();
            assert_eq!(par, seq);
        }
    }
}
