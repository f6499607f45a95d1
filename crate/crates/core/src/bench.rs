//! Random scene generation and the benchmark sweep.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::executor::{execute_with, ExecutorConfig, Termination};
use crate::geometry::{HalfDims, Rect, Vec2};
use crate::metrics::{percent_reduction, MetricsError};
use crate::planner::{plan_with_stats, Budget, PlannerConfig};
use crate::render;
use crate::scene::{Scene, SceneError, DEFAULT_TOLERANCE};
use crate::seed::{hash_str, mix};
use crate::simulator::NoiseConfig;

pub const MAX_POSE_ATTEMPTS: usize = 10_000;
/// Total footprint of N max-size objects may use at most this share of the table.
pub const AREA_FRACTION: f64 = 0.4;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid bench config: {0}")]
    InvalidConfig(String),
    #[error("{n} objects of half-size up to {max} do not fit the workspace; use a larger workspace")]
    Infeasible { n: usize, max: f64 },
    #[error("could not place object {object} after {attempts} attempts; use a larger workspace or fewer objects")]
    SamplingExhausted { object: usize, attempts: usize },
    #[error("no records for variant {variant}, N={n}")]
    EmptyCell { variant: String, n: usize },
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Variant {
    pub name: String,
    pub planner: PlannerConfig,
}

impl Variant {
    pub fn new(name: &str, planner: PlannerConfig) -> Self {
        Self {
            name: name.to_string(),
            planner,
        }
    }

    pub fn is_push(&self) -> bool {
        self.planner.push_enabled
    }
}

/// Default pair: the plain planner and the one with push-placement.
pub fn default_variants(budget: Budget) -> Vec<Variant> {
    let base = PlannerConfig {
        budget,
        ..PlannerConfig::default()
    };
    vec![
        Variant::new(
            "MCTS",
            PlannerConfig {
                push_enabled: false,
                ..base.clone()
            },
        ),
        Variant::new("MCTS+PP", base),
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExecutionBench {
    pub object_counts: Vec<usize>,
    pub scenes_per_count: usize,
    pub runs_per_scene: usize,
    pub step_budget: usize,
    pub noise: NoiseConfig,
}

impl Default for ExecutionBench {
    fn default() -> Self {
        Self {
            object_counts: vec![8],
            scenes_per_count: 100,
            runs_per_scene: 3,
            step_budget: 15,
            noise: NoiseConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub object_counts: Vec<usize>,
    pub scenes_per_count: usize,
    pub runs_per_scene: usize,
    /// Half-dimension range `[min, max]`, per axis.
    pub size_range: [f64; 2],
    /// `[x0, y0, x1, y1]`
    pub workspace: [f64; 4],
    pub tolerance: f64,
    pub variants: Vec<Variant>,
    pub master_seed: u64,
    /// Fill `planning_time_ms` with wall-clock time. Off by default so that
    /// records are reproducible byte for byte.
    pub record_timing: bool,
    pub execution: Option<ExecutionBench>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            object_counts: vec![4, 6, 8],
            scenes_per_count: 100,
            runs_per_scene: 3,
            size_range: [0.03, 0.07],
            workspace: [0.0, 0.0, 1.0, 1.0],
            tolerance: DEFAULT_TOLERANCE,
            variants: default_variants(Budget::Expansions(5000)),
            master_seed: 0,
            record_timing: false,
            execution: None,
        }
    }
}

impl BenchConfig {
    pub fn workspace_rect(&self) -> Rect {
        let [x0, y0, x1, y1] = self.workspace;
        Rect::from_bounds(x0, y0, x1, y1)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |m: &str| Err(BenchError::InvalidConfig(m.to_string()));
        if self.object_counts.is_empty() || self.object_counts.contains(&0) {
            return bad("object_counts must be non-empty and positive");
        }
        if self.scenes_per_count == 0 || self.runs_per_scene == 0 {
            return bad("scenes_per_count and runs_per_scene must be >= 1");
        }
        let [lo, hi] = self.size_range;
        if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo <= hi) {
            return bad("size_range must satisfy 0 < min <= max");
        }
        let [x0, y0, x1, y1] = self.workspace;
        if !(x0 < x1 && y0 < y1) {
            return bad("workspace must have positive area");
        }
        if self.variants.is_empty() {
            return bad("at least one variant is required");
        }
        let mut names: Vec<&str> = self.variants.iter().map(|v| v.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        if names.len() != self.variants.len() {
            return bad("variant names must be unique");
        }
        for v in &self.variants {
            v.planner
                .validate()
                .map_err(|e| BenchError::InvalidConfig(format!("variant {}: {e}", v.name)))?;
        }
        if let Some(e) = &self.execution {
            if e.scenes_per_count == 0 || e.runs_per_scene == 0 || e.step_budget == 0 {
                return bad("execution counts and step_budget must be >= 1");
            }
        }
        for &n in &self.object_counts {
            check_area(n, self)?;
        }
        Ok(())
    }
}

fn check_area(n: usize, cfg: &BenchConfig) -> Result<(), BenchError> {
    let max = cfg.size_range[1];
    let total = n as f64 * 4.0 * max * max;
    if total > AREA_FRACTION * cfg.workspace_rect().area() {
        return Err(BenchError::Infeasible { n, max });
    }
    Ok(())
}

/// Seed for scene `index` with `n` objects; shared by every variant.
pub fn scene_seed(master: u64, n: usize, index: usize) -> u64 {
    mix(master, &[n as u64, index as u64])
}

pub fn run_seed(master: u64, variant: &str, n: usize, scene: usize, run: usize) -> u64 {
    mix(master, &[hash_str(variant), n as u64, scene as u64, run as u64])
}

/// Random scene: sizes uniform in `size_range`, start and goal each
/// collision free, independently sampled.
pub fn generate_scene<R: Rng + ?Sized>(n: usize, cfg: &BenchConfig, rng: &mut R) -> Result<Scene, BenchError> {
    check_area(n, cfg)?;
    let ws = cfg.workspace_rect();
    let [lo, hi] = cfg.size_range;
    let halves: Vec<HalfDims> = (0..n)
        .map(|_| HalfDims::new(uniform(rng, lo, hi), uniform(rng, lo, hi)))
        .collect();
    let start = sample_arrangement(&ws, &halves, rng)?;
    let goal = sample_arrangement(&ws, &halves, rng)?;
    Ok(Scene::new(ws, halves, start, goal, cfg.tolerance)?)
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if lo < hi {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

fn sample_arrangement<R: Rng + ?Sized>(ws: &Rect, halves: &[HalfDims], rng: &mut R) -> Result<Vec<Vec2>, BenchError> {
    let mut placed: Vec<Rect> = Vec::with_capacity(halves.len());
    let mut poses = Vec::with_capacity(halves.len());
    for (object, h) in halves.iter().enumerate() {
        let mut found = None;
        for _ in 0..MAX_POSE_ATTEMPTS {
            let p = Vec2::new(
                uniform(rng, ws.lo.x + h.a, ws.hi.x - h.a),
                uniform(rng, ws.lo.y + h.b, ws.hi.y - h.b),
            );
            let fp = Rect::from_center(p, *h);
            if ws.contains(&fp) && placed.iter().all(|r| !r.overlaps(&fp)) {
                found = Some((p, fp));
                break;
            }
        }
        let (p, fp) = found.ok_or(BenchError::SamplingExhausted {
            object,
            attempts: MAX_POSE_ATTEMPTS,
        })?;
        placed.push(fp);
        poses.push(p);
    }
    Ok(poses)
}

/// Two equal boxes trading places, centered on `workspace`.
pub fn swap_scene(workspace: Rect) -> Scene {
    let c = workspace.center();
    let half = HalfDims::new(0.05, 0.05);
    let a = Vec2::new(c.x - 0.15, c.y);
    let b = Vec2::new(c.x + 0.15, c.y);
    Scene::new(workspace, vec![half, half], vec![a, b], vec![b, a], DEFAULT_TOLERANCE)
        .expect("swap layout fits any workspace at least 0.4 m wide")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub variant: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub scene: usize,
    pub run: usize,
    pub plan_found: bool,
    pub actions: usize,
    pub cost: Option<f64>,
    pub planning_time_ms: f64,
}

/// All scenes of the sweep in `(N, index)` order.
pub fn generate_scenes(cfg: &BenchConfig, counts: &[usize], per_count: usize) -> Result<Vec<(usize, usize, Scene)>, BenchError> {
    let cells: Vec<(usize, usize)> = counts
        .iter()
        .flat_map(|&n| (0..per_count).map(move |i| (n, i)))
        .collect();
    cells
        .into_par_iter()
        .map(|(n, i)| {
            let mut rng = ChaCha8Rng::seed_from_u64(scene_seed(cfg.master_seed, n, i));
            generate_scene(n, cfg, &mut rng).map(|s| (n, i, s))
        })
        .collect()
}

/// One record per (variant, N, scene, run), in that order.
pub fn run_benchmark(cfg: &BenchConfig) -> Result<Vec<BenchRecord>, BenchError> {
    cfg.validate()?;
    let scenes = generate_scenes(cfg, &cfg.object_counts, cfg.scenes_per_count)?;
    let cells: Vec<(&Variant, &(usize, usize, Scene), usize)> = cfg
        .variants
        .iter()
        .flat_map(|v| scenes.iter().flat_map(move |s| (0..cfg.runs_per_scene).map(move |r| (v, s, r))))
        .collect();
    Ok(cells
        .into_par_iter()
        .map(|(v, (n, idx, scene), run)| {
            let pcfg = PlannerConfig {
                seed: run_seed(cfg.master_seed, &v.name, *n, *idx, run),
                ..v.planner.clone()
            };
            let t = Instant::now();
            let out = plan_with_stats(scene, &pcfg);
            let ms = t.elapsed().as_secs_f64() * 1e3;
            BenchRecord {
                variant: v.name.clone(),
                n: *n,
                scene: *idx,
                run,
                plan_found: out.plan.is_some(),
                actions: out.plan.as_ref().map_or(0, |p| p.len()),
                cost: out.plan.as_ref().map(|p| p.total),
                planning_time_ms: if cfg.record_timing { ms } else { 0.0 },
            }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub variant: String,
    #[serde(rename = "N")]
    pub n: usize,
    /// Scenes with at least one found plan; only these enter the means.
    pub scenes: usize,
    pub plan_found_rate: f64,
    pub actions_mean: f64,
    pub actions_std: f64,
    pub cost_mean: f64,
    pub cost_std: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reduction {
    pub variant: String,
    pub baseline: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub cost_pct: f64,
    pub actions_pct: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub cells: Vec<CellSummary>,
    pub reductions: Vec<Reduction>,
}

impl Summary {
    pub fn cell(&self, variant: &str, n: usize) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.variant == variant && c.n == n)
    }

    pub fn reduction(&self, variant: &str, baseline: &str, n: usize) -> Option<&Reduction> {
        self.reductions
            .iter()
            .find(|r| r.variant == variant && r.baseline == baseline && r.n == n)
    }
}

/// Mean and population standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Per-scene mean over runs, then mean and std across scenes, for every
/// (variant, N) in `variants` order. Every push variant is compared with
/// every non-push variant.
pub fn aggregate(records: &[BenchRecord], variants: &[Variant]) -> Result<Summary, BenchError> {
    let mut counts: Vec<usize> = records.iter().map(|r| r.n).collect();
    counts.sort_unstable();
    counts.dedup();
    let mut cells = Vec::new();
    for v in variants {
        for &n in &counts {
            let mut per_scene: BTreeMap<usize, Vec<&BenchRecord>> = BTreeMap::new();
            for r in records.iter().filter(|r| r.variant == v.name && r.n == n) {
                per_scene.entry(r.scene).or_default().push(r);
            }
            if per_scene.is_empty() {
                return Err(BenchError::EmptyCell {
                    variant: v.name.clone(),
                    n,
                });
            }
            let total = per_scene.values().map(Vec::len).sum::<usize>();
            let found = per_scene.values().flatten().filter(|r| r.plan_found).count();
            let (mut actions, mut costs) = (Vec::new(), Vec::new());
            for runs in per_scene.values() {
                let ok: Vec<&&BenchRecord> = runs.iter().filter(|r| r.plan_found).collect();
                if ok.is_empty() {
                    continue;
                }
                let k = ok.len() as f64;
                actions.push(ok.iter().map(|r| r.actions as f64).sum::<f64>() / k);
                costs.push(ok.iter().filter_map(|r| r.cost).sum::<f64>() / k);
            }
            let (actions_mean, actions_std) = mean_std(&actions);
            let (cost_mean, cost_std) = mean_std(&costs);
            cells.push(CellSummary {
                variant: v.name.clone(),
                n,
                scenes: actions.len(),
                plan_found_rate: found as f64 / total as f64,
                actions_mean,
                actions_std,
                cost_mean,
                cost_std,
            });
        }
    }
    let mut summary = Summary {
        cells,
        reductions: Vec::new(),
    };
    for pp in variants.iter().filter(|v| v.is_push()) {
        for base in variants.iter().filter(|v| !v.is_push()) {
            for &n in &counts {
                let b = summary.cell(&base.name, n).expect("cell built above");
                let c = summary.cell(&pp.name, n).expect("cell built above");
                let r = Reduction {
                    variant: pp.name.clone(),
                    baseline: base.name.clone(),
                    n,
                    cost_pct: percent_reduction(b.cost_mean, c.cost_mean)?,
                    actions_pct: percent_reduction(b.actions_mean, c.actions_mean)?,
                };
                summary.reductions.push(r);
            }
        }
    }
    Ok(summary)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExecutionRecord {
    pub variant: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub scene: usize,
    pub run: usize,
    pub actions: usize,
    pub success_rate: f64,
    pub robot_time: f64,
    pub terminated_by: Termination,
}

/// Noisy closed-loop trials for every variant on the execution scene set.
pub fn run_execution(cfg: &BenchConfig, exec: &ExecutionBench) -> Result<Vec<ExecutionRecord>, BenchError> {
    let scenes = generate_scenes(cfg, &exec.object_counts, exec.scenes_per_count)?;
    let cells: Vec<(&Variant, &(usize, usize, Scene), usize)> = cfg
        .variants
        .iter()
        .flat_map(|v| scenes.iter().flat_map(move |s| (0..exec.runs_per_scene).map(move |r| (v, s, r))))
        .collect();
    Ok(cells
        .into_par_iter()
        .map(|(v, (n, idx, scene), run)| {
            let ecfg = ExecutorConfig {
                planner: v.planner.clone(),
                noise: exec.noise,
                step_budget: exec.step_budget,
                ..ExecutorConfig::default()
            };
            let seed = run_seed(cfg.master_seed ^ 0x5EED, &v.name, *n, *idx, run);
            let r = execute_with(scene, &ecfg, seed);
            ExecutionRecord {
                variant: v.name.clone(),
                n: *n,
                scene: *idx,
                run,
                actions: r.total_actions,
                success_rate: r.success_rate,
                robot_time: r.robot_time_proxy,
                terminated_by: r.terminated_by,
            }
        })
        .collect())
}

pub fn write_records(path: &Path, records: &[BenchRecord]) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<BenchRecord>, BenchError> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

fn write_summary_csv(path: &Path, summary: &Summary) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "variant",
        "N",
        "scenes",
        "plan_found_rate",
        "actions_mean",
        "actions_std",
        "cost_mean",
        "cost_std",
        "reduction_pct",
    ])?;
    for c in &summary.cells {
        let red = summary
            .reductions
            .iter()
            .find(|r| r.variant == c.variant && r.n == c.n)
            .map(|r| format!("{:.4}", r.cost_pct))
            .unwrap_or_default();
        w.write_record([
            c.variant.clone(),
            c.n.to_string(),
            c.scenes.to_string(),
            format!("{:.4}", c.plan_found_rate),
            format!("{:.6}", c.actions_mean),
            format!("{:.6}", c.actions_std),
            format!("{:.6}", c.cost_mean),
            format!("{:.6}", c.cost_std),
            red,
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Runs the sweep and writes records.csv, summary.json, summary.csv and
/// summary.svg (plus execution.csv when configured) into `dir`.
pub fn run_and_write(cfg: &BenchConfig, dir: &Path) -> Result<(Summary, Vec<PathBuf>), BenchError> {
    let records = run_benchmark(cfg)?;
    let summary = aggregate(&records, &cfg.variants)?;
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let p = dir.join("records.csv");
    write_records(&p, &records)?;
    written.push(p);
    let p = dir.join("summary.json");
    fs::write(&p, serde_json::to_string_pretty(&summary)? + "\n")?;
    written.push(p);
    let p = dir.join("summary.csv");
    write_summary_csv(&p, &summary)?;
    written.push(p);
    let p = dir.join("summary.svg");
    fs::write(&p, render::summary_chart(&summary))?;
    written.push(p);
    if let Some(exec) = &cfg.execution {
        let recs = run_execution(cfg, exec)?;
        let p = dir.join("execution.csv");
        let mut w = csv::Writer::from_path(&p)?;
        for r in &recs {
            w.serialize(r)?;
        }
        w.flush()?;
        written.push(p);
    }
    Ok((summary, written))
}
