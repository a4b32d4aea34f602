//! Run-until-first-success races and batches of independent timed runs.
//!
//! A race owns `M` independent solver states seeded `seed_base + k`. They are
//! spread over a pool of worker threads; a worker holding several states
//! interleaves them in slices of `cancel_poll_interval` decisions, so the
//! contract is the same whether every state gets its own core or not. The first
//! instance to report sat raises the shared stop signal.

use std::io::{Read, Write};
use std::num::NonZeroUsize;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{mpsc, Arc, Barrier, OnceLock};
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::model::{ConstraintModel, ModelKind};
use crate::search::{Prepared, SearchConfig, SolveOutcome, SolveStatus, Solver};

/// Environment variable overriding the worker thread count.
pub const WORKERS_ENV: &str = "NOTHREE_WORKERS";

pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&w| w > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(NonZeroUsize::get)
                .unwrap_or(1)
        })
}

/// Step-function estimate of a runtime distribution from completed runs.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalCdf {
    times: Vec<f64>,
    total_runs: usize,
    cutoff: f64,
}

impl EmpiricalCdf {
    /// `times` are completion times; runs that did not complete count only toward `total_runs`.
    pub fn new(mut times: Vec<f64>, total_runs: usize, cutoff: f64) -> Result<Self> {
        if total_runs == 0 {
            return Err(Error::invalid("an empirical CDF needs at least one run"));
        }
        if times.len() > total_runs {
            return Err(Error::invalid("more completions than runs"));
        }
        if times.iter().any(|t| !t.is_finite() || *t < 0.0 || *t > cutoff) {
            return Err(Error::invalid("completion times must lie in [0, cutoff]"));
        }
        times.sort_by(f64::total_cmp);
        Ok(EmpiricalCdf {
            times,
            total_runs,
            cutoff,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn total_runs(&self) -> usize {
        self.total_runs
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn censored(&self) -> usize {
        self.total_runs - self.times.len()
    }

    /// `F(t) = #{times <= t} / total_runs`.
    pub fn eval(&self, t: f64) -> f64 {
        self.times.partition_point(|&x| x <= t) as f64 / self.total_runs as f64
    }

    /// `(t, F(t))` at each distinct completion time.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (k, &t) in self.times.iter().enumerate() {
            let f = (k + 1) as f64 / self.total_runs as f64;
            match out.last_mut() {
                Some(last) if last.0 == t => last.1 = f,
                _ => out.push((t, f)),
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct InstanceResult {
    pub seed: u64,
    pub status: SolveStatus,
    /// Seconds from the common launch.
    pub elapsed: f64,
    pub nodes: u64,
    pub nodes_since_clear_poll: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assignment: Option<Vec<bool>>,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SolveRecord {
    pub n: usize,
    pub kind: ModelKind,
    #[serde(rename = "M")]
    pub m: usize,
    pub seed_base: u64,
    pub winner_seed: Option<u64>,
    /// Seconds from the common launch to the first success.
    pub wall_time_to_first: Option<f64>,
    pub per_instance: Vec<InstanceResult>,
}

impl SolveRecord {
    pub fn winner(&self) -> Option<&InstanceResult> {
        let seed = self.winner_seed?;
        self.per_instance.iter().find(|r| r.seed == seed)
    }
}

#[derive(Clone, Debug)]
pub struct RaceOptions {
    pub workers: usize,
    /// Per-instance search settings; the seed is replaced by `seed_base + k`.
    pub search: SearchConfig,
}

impl Default for RaceOptions {
    fn default() -> Self {
        RaceOptions {
            workers: default_workers(),
            search: SearchConfig::default(),
        }
    }
}

/// Races `m_instances` seeded solvers and stops all of them at the first sat.
pub fn race(
    model: &ConstraintModel,
    m_instances: usize,
    seed_base: u64,
    timeout: Duration,
) -> Result<SolveRecord> {
    let mut opts = RaceOptions::default();
    opts.search.timeout = timeout;
    race_with(model, m_instances, seed_base, &opts)
}

fn instance_result(seed: u64, out: SolveOutcome) -> InstanceResult {
    InstanceResult {
        seed,
        status: out.status,
        elapsed: out.elapsed,
        nodes: out.nodes,
        nodes_since_clear_poll: out.nodes_since_clear_poll,
        assignment: out.assignment,
    }
}

pub fn race_with(
    model: &ConstraintModel,
    m_instances: usize,
    seed_base: u64,
    opts: &RaceOptions,
) -> Result<SolveRecord> {
    if m_instances == 0 {
        return Err(Error::invalid("a race needs at least one instance"));
    }
    let shared = Prepared::new(model)?;
    // Surface configuration errors before any thread starts.
    Solver::with_prepared(Arc::clone(&shared), &opts.search, Instant::now())?;

    let workers = opts.workers.clamp(1, m_instances);
    let slice = opts.search.cancel_poll_interval;
    let stop = AtomicBool::new(false);
    let winner = AtomicUsize::new(usize::MAX);
    let barrier = Barrier::new(workers);
    let launch = OnceLock::new();
    let (tx, rx) = mpsc::channel::<(usize, InstanceResult)>();

    let worker = |w: usize, tx: mpsc::Sender<(usize, InstanceResult)>| {
        barrier.wait();
        let launch = *launch.get_or_init(Instant::now);
        let mut active: Vec<(usize, u64, Solver)> = (w..m_instances)
            .step_by(workers)
            .map(|k| {
                let seed = seed_base.wrapping_add(k as u64);
                let cfg = SearchConfig {
                    seed,
                    ..opts.search.clone()
                };
                let solver = Solver::with_prepared(Arc::clone(&shared), &cfg, launch)
                    .expect("validated above");
                (k, seed, solver)
            })
            .collect();
        while !active.is_empty() {
            let mut k = 0;
            while k < active.len() {
                let (idx, seed, solver) = &mut active[k];
                let done = if stop.load(Ordering::Acquire) {
                    Some(solver.abandon(SolveStatus::Cancelled))
                } else {
                    solver.resume(Some(slice), &stop)
                };
                match done {
                    Some(out) => {
                        if out.status == SolveStatus::Sat
                            && winner
                                .compare_exchange(usize::MAX, *idx, Ordering::AcqRel, Ordering::Acquire)
                                .is_ok()
                        {
                            stop.store(true, Ordering::Release);
                        }
                        let _ = tx.send((*idx, instance_result(*seed, out)));
                        active.swap_remove(k);
                    }
                    None => k += 1,
                }
            }
        }
    };
    if workers == 1 {
        worker(0, tx);
    } else {
        std::thread::scope(|scope| {
            for w in 0..workers {
                let tx = tx.clone();
                let worker = &worker;
                scope.spawn(move || worker(w, tx));
            }
        });
        drop(tx);
    }

    let mut results: Vec<(usize, InstanceResult)> = rx.into_iter().collect();
    results.sort_by_key(|r| r.0);
    let per_instance: Vec<InstanceResult> = results.into_iter().map(|r| r.1).collect();
    let win = winner.load(Ordering::Acquire);
    let (winner_seed, wall_time_to_first) = if win == usize::MAX {
        (None, None)
    } else {
        let r = &per_instance[win];
        (Some(r.seed), Some(r.elapsed))
    };
    Ok(SolveRecord {
        n: model.n,
        kind: model.kind,
        m: m_instances,
        seed_base,
        winner_seed,
        wall_time_to_first,
        per_instance,
    })
}

/// One line of the run CSV.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RunRow {
    pub run_index: usize,
    pub seed: u64,
    pub status: SolveStatus,
    pub elapsed_seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CdfCollection {
    pub runs: Vec<RunRow>,
    pub cdf: EmpiricalCdf,
}

/// Builds the CDF from run rows: sat runs at or before the cutoff are completions.
pub fn cdf_from_rows(rows: &[RunRow], cutoff: f64) -> Result<EmpiricalCdf> {
    let times = rows
        .iter()
        .filter(|r| r.status == SolveStatus::Sat && r.elapsed_seconds <= cutoff)
        .map(|r| r.elapsed_seconds)
        .collect();
    EmpiricalCdf::new(times, rows.len(), cutoff)
}

/// Runs `runs` independent single solves with a common cutoff, spread over the worker pool.
pub fn collect_cdf(
    model: &ConstraintModel,
    runs: usize,
    cutoff: Duration,
    seed_base: u64,
) -> Result<CdfCollection> {
    let opts = RaceOptions::default();
    collect_cdf_with(model, runs, cutoff, seed_base, &opts)
}

pub fn collect_cdf_with(
    model: &ConstraintModel,
    runs: usize,
    cutoff: Duration,
    seed_base: u64,
    opts: &RaceOptions,
) -> Result<CdfCollection> {
    if runs == 0 {
        return Err(Error::invalid("need at least one run"));
    }
    let base_cfg = SearchConfig {
        timeout: cutoff,
        ..opts.search.clone()
    };
    let shared = Prepared::new(model)?;
    Solver::with_prepared(Arc::clone(&shared), &base_cfg, Instant::now())?;
    let next = AtomicUsize::new(0);
    let never = AtomicBool::new(false);
    let (tx, rx) = mpsc::channel::<RunRow>();
    std::thread::scope(|scope| {
        for _ in 0..opts.workers.clamp(1, runs) {
            let tx = tx.clone();
            let (next, never, base_cfg, shared) = (&next, &never, &base_cfg, &shared);
            scope.spawn(move || loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= runs {
                    break;
                }
                let seed = seed_base.wrapping_add(k as u64);
                let cfg = SearchConfig {
                    seed,
                    ..base_cfg.clone()
                };
                let mut solver = Solver::with_prepared(Arc::clone(shared), &cfg, Instant::now())
                    .expect("validated above");
                let out = solver.resume(None, never).expect("unbounded resume always finishes");
                let _ = tx.send(RunRow {
                    run_index: k,
                    seed,
                    status: out.status,
                    elapsed_seconds: out.elapsed,
                });
            });
        }
    });
    drop(tx);
    let mut rows: Vec<RunRow> = rx.into_iter().collect();
    rows.sort_by_key(|r| r.run_index);
    let cdf = cdf_from_rows(&rows, cutoff.as_secs_f64())?;
    Ok(CdfCollection { runs: rows, cdf })
}

pub fn write_runs_csv<W: Write>(rows: &[RunRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::invalid(e.to_string()))?;
    }
    if rows.is_empty() {
        w.write_record(["run_index", "seed", "status", "elapsed_seconds"])
            .map_err(|e| Error::invalid(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_runs_csv<R: Read>(input: R) -> Result<Vec<RunRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(|e| Error::parse(1, e.to_string()))?;
    if header != vec!["run_index", "seed", "status", "elapsed_seconds"] {
        return Err(Error::parse(1, "expected header run_index,seed,status,elapsed_seconds"));
    }
    r.deserialize()
        .enumerate()
        .map(|(k, row)| row.map_err(|e| Error::parse(k + 2, e.to_string())))
        .collect()
}
