//! Replicates spread over a rayon pool. Results are collected in replicate
//! order, so the report does not depend on the number of workers.

use groupfx_core::sim::{check_claims, ClaimCheck, PreparedCase, SimCaseConfig, SimReport};
use rayon::prelude::*;
use rayon::ThreadPool;

use crate::error::{CliError, CliResult};

pub fn build_pool(threads: Option<usize>) -> CliResult<ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = threads {
        builder = builder.num_threads(k);
    }
    builder
        .build()
        .map_err(|e| CliError::data(format!("cannot start worker threads: {e}")))
}

pub fn run_prepared(case: &PreparedCase, pool: &ThreadPool) -> CliResult<SimReport> {
    let replicates = case.config.replicates as u64;
    let rows = pool.install(|| {
        (0..replicates)
            .into_par_iter()
            .map(|k| case.replicate(k))
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(case.summarize(&rows))
}

pub fn run_case(name: &str, config: &SimCaseConfig, pool: &ThreadPool) -> CliResult<SimReport> {
    let case = PreparedCase::new(name, config.clone())?;
    run_prepared(&case, pool)
}

/// The five reference cases, optionally with a different replicate count.
pub fn run_suite(
    seed: u64,
    replicates: Option<usize>,
    pool: &ThreadPool,
) -> CliResult<(Vec<SimReport>, Vec<ClaimCheck>)> {
    let mut reports = Vec::new();
    for case in 1..=5u8 {
        let mut cfg = SimCaseConfig::reference_case(case, seed)?;
        if let Some(r) = replicates {
            cfg.replicates = r;
        }
        reports.push(run_case(&format!("case{case}"), &cfg, pool)?);
    }
    let claims = check_claims(&reports);
    Ok((reports, claims))
}
