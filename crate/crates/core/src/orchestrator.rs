//! Deterministic worker pool for the two-stage per-building pipeline, and a
//! list-scheduling simulator for cluster makespans.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, VecDeque};
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};
use std::sync::{Condvar, Mutex};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::BuildingRecord;
use crate::model::{collect_neighbors, SpatialIndex};

pub const DEFAULT_RETRIES: usize = 2;
pub const DEFAULT_CORES_PER_NODE: usize = 112;
/// Failure fraction above which a run is aborted.
pub const MAX_FAILURE_RATE: f64 = 0.10;
pub const SLOWEST_TASKS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Stage {
    GenerateModel,
    Simulate,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::GenerateModel => "GENERATE_MODEL",
            Stage::Simulate => "SIMULATE",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TaskId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub id: TaskId,
    pub parcel_id: String,
    pub stage: Stage,
    pub dependencies: Vec<TaskId>,
}

/// Two tasks per building: generation, then simulation depending on it.
pub fn task_graph<S: AsRef<str>>(parcel_ids: &[S]) -> Vec<TaskSpec> {
    parcel_ids
        .iter()
        .enumerate()
        .flat_map(|(i, p)| {
            let generate = TaskId(2 * i);
            [
                TaskSpec {
                    id: generate,
                    parcel_id: p.as_ref().to_string(),
                    stage: Stage::GenerateModel,
                    dependencies: Vec::new(),
                },
                TaskSpec {
                    id: TaskId(2 * i + 1),
                    parcel_id: p.as_ref().to_string(),
                    stage: Stage::Simulate,
                    dependencies: vec![generate],
                },
            ]
        })
        .collect()
}

/// Work performed for each building. Implementations must be pure per
/// parcel so results do not depend on scheduling.
pub trait PipelineJob: Sync {
    type Output: Send;
    fn generate(&self, parcel_id: &str) -> Result<()>;
    fn simulate(&self, parcel_id: &str) -> Result<Self::Output>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolConfig {
    pub workers: usize,
    pub retries: usize,
}

impl Default for PoolConfig {
    fn default() -> Self {
        PoolConfig {
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            retries: DEFAULT_RETRIES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskTiming {
    pub parcel_id: String,
    pub stage: Stage,
    pub attempts: usize,
    pub succeeded: bool,
    pub duration_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tasks_total: usize,
    pub tasks_succeeded: usize,
    /// Tasks that needed more than one attempt.
    pub tasks_retried: usize,
    pub tasks_failed: usize,
    pub wall_time_s: f64,
    /// Sorted by parcel id, then stage.
    pub tasks: Vec<TaskTiming>,
    /// Parcels whose pipeline did not complete, with the last error.
    pub failures: Vec<(String, String)>,
}

#[derive(Debug)]
pub struct PipelineOutput<T> {
    pub report: RunReport,
    /// Successful simulations ordered by parcel id.
    pub results: Vec<(String, T)>,
}

struct PoolState<T> {
    ready: VecDeque<(usize, Stage)>,
    outstanding: usize,
    failed: usize,
    aborted: bool,
    timings: Vec<TaskTiming>,
    results: Vec<(usize, T)>,
    failures: Vec<(usize, String)>,
}

/// Runs generation then simulation for every parcel on `config.workers` threads.
///
/// Failing tasks are retried up to `config.retries` times; a building whose
/// generation fails never reaches simulation and counts both tasks as failed.
/// The run is aborted once more than 10% of tasks have failed.
pub fn run_pipeline<J: PipelineJob>(
    parcel_ids: &[String],
    job: &J,
    config: &PoolConfig,
) -> Result<PipelineOutput<J::Output>> {
    if config.workers == 0 {
        return Err(Error::Config("workers must be at least 1".into()));
    }
    let start = Instant::now();
    let total = 2 * parcel_ids.len();
    let state = Mutex::new(PoolState {
        ready: (0..parcel_ids.len()).map(|i| (i, Stage::GenerateModel)).collect(),
        outstanding: total,
        failed: 0,
        aborted: false,
        timings: Vec::with_capacity(total),
        results: Vec::with_capacity(parcel_ids.len()),
        failures: Vec::new(),
    });
    let wake = Condvar::new();
    let completed = AtomicUsize::new(0);
    let max_failed = (MAX_FAILURE_RATE * total as f64).floor() as usize;

    let worker = || loop {
        let (idx, stage) = {
            let mut s = state.lock().unwrap_or_else(|e| e.into_inner());
            loop {
                if s.aborted || s.outstanding == 0 {
                    return;
                }
                if let Some(t) = s.ready.pop_front() {
                    break t;
                }
                s = wake.wait(s).unwrap_or_else(|e| e.into_inner());
            }
        };
        let parcel = parcel_ids[idx].as_str();
        let t0 = Instant::now();
        let mut attempts = 0;
        let outcome = loop {
            attempts += 1;
            let r = match stage {
                Stage::GenerateModel => job.generate(parcel).map(|()| None),
                Stage::Simulate => job.simulate(parcel).map(Some),
            };
            match r {
                Ok(v) => break Ok(v),
                Err(e) if attempts > config.retries => break Err(e),
                Err(e) => log::warn!("{stage} {parcel} attempt {attempts} failed: {e}"),
            }
        };
        let duration_s = t0.elapsed().as_secs_f64();
        let done = completed.fetch_add(1, AtomicOrdering::Relaxed) + 1;
        log::debug!("{done}/{total} tasks finished");
        let mut s = state.lock().unwrap_or_else(|e| e.into_inner());
        s.timings.push(TaskTiming {
            parcel_id: parcel.to_string(),
            stage,
            attempts,
            succeeded: outcome.is_ok(),
            duration_s,
        });
        s.outstanding -= 1;
        match outcome {
            Ok(Some(v)) => s.results.push((idx, v)),
            Ok(None) => s.ready.push_back((idx, Stage::Simulate)),
            Err(e) => {
                s.failed += 1;
                if stage == Stage::GenerateModel {
                    // The dependent simulation can never run.
                    s.failed += 1;
                    s.outstanding -= 1;
                    s.timings.push(TaskTiming {
                        parcel_id: parcel.to_string(),
                        stage: Stage::Simulate,
                        attempts: 0,
                        succeeded: false,
                        duration_s: 0.0,
                    });
                }
                log::error!("{stage} {parcel} failed after {attempts} attempts: {e}");
                s.failures.push((idx, e.to_string()));
                if s.failed > max_failed {
                    s.aborted = true;
                }
            }
        }
        drop(s);
        wake.notify_all();
    };

    std::thread::scope(|scope| {
        for _ in 0..config.workers.min(total.max(1)) {
            scope.spawn(worker);
        }
    });

    let mut s = state.into_inner().unwrap_or_else(|e| e.into_inner());
    if s.aborted {
        return Err(Error::RunAborted {
            failed: s.failed,
            total,
        });
    }
    s.timings
        .sort_by(|a, b| a.parcel_id.cmp(&b.parcel_id).then(a.stage.cmp(&b.stage)));
    s.results.sort_by(|a, b| parcel_ids[a.0].cmp(&parcel_ids[b.0]));
    s.failures.sort_by(|a, b| parcel_ids[a.0].cmp(&parcel_ids[b.0]));
    let tasks_retried = s.timings.iter().filter(|t| t.attempts > 1).count();
    let report = RunReport {
        tasks_total: total,
        tasks_succeeded: total - s.failed,
        tasks_retried,
        tasks_failed: s.failed,
        wall_time_s: start.elapsed().as_secs_f64(),
        tasks: s.timings,
        failures: s
            .failures
            .into_iter()
            .map(|(i, e)| (parcel_ids[i].clone(), e))
            .collect(),
    };
    let results = s.results.into_iter().map(|(i, v)| (parcel_ids[i].clone(), v)).collect();
    Ok(PipelineOutput { report, results })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterConfig {
    pub nodes: usize,
    pub cores_per_node: usize,
}

impl ClusterConfig {
    pub fn new(nodes: usize, cores_per_node: usize) -> Result<Self> {
        if nodes == 0 || cores_per_node == 0 {
            return Err(Error::Config("nodes and cores per node must be positive".into()));
        }
        Ok(ClusterConfig { nodes, cores_per_node })
    }

    pub fn with_nodes(nodes: usize) -> Result<Self> {
        Self::new(nodes, DEFAULT_CORES_PER_NODE)
    }

    pub fn total_cores(&self) -> usize {
        self.nodes * self.cores_per_node
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchedulePolicy {
    /// Longest task first onto the least-loaded core.
    #[default]
    Lpt,
    /// Submission order onto the least-loaded core.
    Fifo,
}

impl std::str::FromStr for SchedulePolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lpt" => Ok(SchedulePolicy::Lpt),
            "fifo" => Ok(SchedulePolicy::Fifo),
            other => Err(Error::Config(format!("unknown schedule policy {other:?} (lpt|fifo)"))),
        }
    }
}

#[derive(PartialEq)]
struct CoreLoad(f64, usize);

impl Eq for CoreLoad {}

impl Ord for CoreLoad {
    // Reversed so the max-heap pops the least-loaded, lowest-index core.
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for CoreLoad {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Greedy list-scheduling makespan; returns the final load of each core.
pub fn core_loads(durations: &[f64], cores: usize, policy: SchedulePolicy) -> Vec<f64> {
    let cores = cores.max(1);
    let mut order: Vec<f64> = durations.to_vec();
    if policy == SchedulePolicy::Lpt {
        order.sort_by(|a, b| b.total_cmp(a));
    }
    let mut heap: BinaryHeap<CoreLoad> = (0..cores.min(order.len().max(1))).map(|i| CoreLoad(0.0, i)).collect();
    for d in order {
        let CoreLoad(load, i) = heap.pop().expect("at least one core");
        heap.push(CoreLoad(load + d, i));
    }
    let mut loads = vec![0.0; cores];
    for CoreLoad(load, i) in heap {
        loads[i] = load;
    }
    loads
}

pub fn simulate_makespan(durations: &[f64], cluster: &ClusterConfig, policy: SchedulePolicy) -> f64 {
    core_loads(durations, cluster.total_cores(), policy)
        .into_iter()
        .fold(0.0, f64::max)
}

/// Total time minus the mean duration of the ten slowest tasks, floored at zero.
pub fn estimate_speedup_potential(durations: &[f64], total_time_s: f64) -> Result<f64> {
    if durations.len() < SLOWEST_TASKS {
        return Err(Error::Input(format!(
            "need at least {SLOWEST_TASKS} durations, got {}",
            durations.len()
        )));
    }
    let mut sorted = durations.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mean = sorted[..SLOWEST_TASKS].iter().sum::<f64>() / SLOWEST_TASKS as f64;
    let estimate = total_time_s - mean;
    if estimate < 0.0 {
        log::warn!("total time {total_time_s} s is below the slowest-task mean {mean} s; clamping to 0");
        return Ok(0.0);
    }
    Ok(estimate)
}

/// Per-task duration as a linear function of the number of shading neighbors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostModel {
    pub base_s: f64,
    pub per_shading_surface_s: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            base_s: 40.0,
            per_shading_surface_s: 1.0,
        }
    }
}

impl CostModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.base_s > 0.0 && self.per_shading_surface_s >= 0.0) {
            return Err(Error::Config(
                "cost model needs base_s > 0 and per_shading_surface_s >= 0".into(),
            ));
        }
        Ok(())
    }

    pub fn predict(&self, neighbor_count: usize) -> f64 {
        self.base_s + self.per_shading_surface_s * neighbor_count as f64
    }

    /// Least-squares line through `(neighbor_count, duration_s)` samples.
    /// Coefficients are clamped to keep the model valid.
    pub fn fit(samples: &[(usize, f64)]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Input("cost model fit needs at least two samples".into()));
        }
        let n = samples.len() as f64;
        let mx = samples.iter().map(|s| s.0 as f64).sum::<f64>() / n;
        let my = samples.iter().map(|s| s.1).sum::<f64>() / n;
        let sxx: f64 = samples.iter().map(|s| (s.0 as f64 - mx).powi(2)).sum();
        let sxy: f64 = samples.iter().map(|s| (s.0 as f64 - mx) * (s.1 - my)).sum();
        let slope = if sxx > 0.0 { (sxy / sxx).max(0.0) } else { 0.0 };
        let base = (my - slope * mx).max(f64::MIN_POSITIVE);
        Ok(CostModel {
            base_s: base,
            per_shading_surface_s: slope,
        })
    }
}

/// Number of shading neighbors of every record at `radius_m`, in record order.
pub fn neighbor_counts(records: &[BuildingRecord], radius_m: f64) -> Vec<usize> {
    let index = SpatialIndex::new(records);
    records
        .iter()
        .map(|r| collect_neighbors(r, &index, radius_m).len())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub radius_m: f64,
    pub nodes: usize,
    pub makespan_s: f64,
    /// Longest single task: the floor no amount of nodes removes.
    pub baseline_s: f64,
    pub speedup_potential_s: f64,
}

/// Makespan for every (radius, nodes) pair, radius-major.
pub fn scaling_surface(
    neighbor_counts_by_radius: &BTreeMap<u64, Vec<usize>>,
    node_counts: &[usize],
    cores_per_node: usize,
    cost: &CostModel,
    policy: SchedulePolicy,
) -> Result<Vec<ScalingRow>> {
    cost.validate()?;
    let mut rows = Vec::with_capacity(neighbor_counts_by_radius.len() * node_counts.len());
    for (&radius_bits, counts) in neighbor_counts_by_radius {
        let durations: Vec<f64> = counts.iter().map(|&c| cost.predict(c)).collect();
        let baseline = durations.iter().copied().fold(0.0, f64::max);
        for &nodes in node_counts {
            let cluster = ClusterConfig::new(nodes, cores_per_node)?;
            let makespan = simulate_makespan(&durations, &cluster, policy);
            let speedup = if durations.len() >= SLOWEST_TASKS {
                estimate_speedup_potential(&durations, makespan)?
            } else {
                0.0
            };
            rows.push(ScalingRow {
                radius_m: f64::from_bits(radius_bits),
                nodes,
                makespan_s: makespan,
                baseline_s: baseline,
                speedup_potential_s: speedup,
            });
        }
    }
    Ok(rows)
}

/// Key for [`scaling_surface`] maps: radii sort numerically for nonnegative values.
pub fn radius_key(radius_m: f64) -> u64 {
    radius_m.to_bits()
}

pub fn write_scaling_csv<W: std::io::Write>(out: W, rows: &[ScalingRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["radius_m", "nodes", "makespan_s", "baseline_s", "speedup_potential_s"])?;
    for r in rows {
        w.write_record([
            r.radius_m.to_string(),
            r.nodes.to_string(),
            r.makespan_s.to_string(),
            r.baseline_s.to_string(),
            r.speedup_potential_s.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(std::path::Path::new("<scaling>"), e))?;
    Ok(())
}

pub fn write_timings_csv<W: std::io::Write>(out: W, report: &RunReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["parcel_id", "stage", "attempts", "succeeded", "duration_s"])?;
    for t in &report.tasks {
        w.write_record([
            t.parcel_id.clone(),
            t.stage.to_string(),
            t.attempts.to_string(),
            t.succeeded.to_string(),
            t.duration_s.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(std::path::Path::new("<timings>"), e))?;
    Ok(())
}
