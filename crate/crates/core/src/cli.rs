//! Command-line front end. Exit codes: 0 success, 1 input error,
//! 2 planning or execution failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::bench::{self, BenchConfig};
use crate::executor::{execute_with, ExecutorConfig};
use crate::planner::{plan_with_stats, PlannerConfig};
use crate::render::{self, RenderStyle};
use crate::scene::{Action, Scene};
use crate::simulator::NoiseConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "pushplace", version, about = "Tabletop rearrangement planning with push-placement")]
pub struct Cli {
    /// Overrides every seed in the loaded configs.
    #[arg(long, global = true, env = "PPLAN_SEED")]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Plan a scene and write the plan as JSON.
    Plan {
        #[arg(long)]
        scene: PathBuf,
        /// Planner config JSON.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output file; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-loop execution through the simulator.
    Execute {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = NoiseMode::Default)]
        noise: NoiseMode,
        #[arg(long, default_value_t = 15, value_parser = clap::value_parser!(u64).range(1..))]
        steps: u64,
    },
    /// Run a benchmark sweep and write records and summaries to a directory.
    Bench {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; output bytes do not depend on it.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Render a scene, optionally with a plan, to SVG.
    Render {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        plan: Option<PathBuf>,
        /// Output SVG; with --frames, a directory receiving frame_NNN.svg.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        frames: bool,
        #[arg(long)]
        no_goals: bool,
        #[arg(long)]
        no_gripper: bool,
        /// Pixels per meter.
        #[arg(long, default_value_t = 500.0)]
        scale: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum NoiseMode {
    Default,
    None,
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Failure(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Failure(_) => EXIT_FAILURE,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Failure(m) => m,
        }
    }
}

/// Reads `path` as JSON, reporting the failing field path and position.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    parse_json(&text).map_err(|m| CliError::Input(format!("{}: {m}", path.display())))
}

pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T, String> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            e.into_inner().to_string()
        } else {
            format!("field `{path}`: {}", e.into_inner())
        }
    })
}

fn write_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Failure(e.to_string()))? + "\n";
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_scene(path: &Path) -> Result<Scene, CliError> {
    read_json(path)
}

fn load_planner(path: Option<&Path>, seed: Option<u64>) -> Result<PlannerConfig, CliError> {
    let mut cfg: PlannerConfig = match path {
        Some(p) => read_json(p)?,
        None => PlannerConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate().map_err(|e| CliError::Input(e.to_string()))?;
    Ok(cfg)
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Plan { scene, config, out } => {
            let scene = load_scene(&scene)?;
            let cfg = load_planner(config.as_deref(), cli.seed)?;
            let outcome = plan_with_stats(&scene, &cfg);
            match outcome.plan {
                Some(p) => write_json(&p, out.as_deref()),
                None => Err(CliError::Failure(format!(
                    "no plan found after {} expansions",
                    outcome.expansions
                ))),
            }
        }
        Command::Execute {
            scene,
            config,
            out,
            noise,
            steps,
        } => {
            let scene = load_scene(&scene)?;
            let planner = load_planner(config.as_deref(), cli.seed)?;
            let cfg = ExecutorConfig {
                noise: match noise {
                    NoiseMode::Default => NoiseConfig::default(),
                    NoiseMode::None => NoiseConfig::none(),
                },
                step_budget: steps as usize,
                planner,
                ..ExecutorConfig::default()
            };
            let report = execute_with(&scene, &cfg, cli.seed.unwrap_or(cfg.planner.seed));
            write_json(&report, out.as_deref())?;
            if report.success() {
                Ok(())
            } else {
                Err(CliError::Failure(format!("execution ended with {:?}", report.terminated_by)))
            }
        }
        Command::Bench { config, out, jobs } => {
            let mut cfg: BenchConfig = match config {
                Some(p) => read_json(&p)?,
                None => BenchConfig::default(),
            };
            if let Some(s) = cli.seed {
                cfg.master_seed = s;
            }
            cfg.validate().map_err(|e| CliError::Input(e.to_string()))?;
            let go = || bench::run_and_write(&cfg, &out);
            let result = match jobs {
                Some(k) => rayon::ThreadPoolBuilder::new()
                    .num_threads(k.max(1))
                    .build()
                    .map_err(|e| CliError::Input(e.to_string()))?
                    .install(go),
                None => go(),
            };
            let (summary, files) = result.map_err(|e| match e {
                bench::BenchError::Io(_) | bench::BenchError::Csv(_) | bench::BenchError::Json(_) => {
                    CliError::Failure(e.to_string())
                }
                _ => CliError::Input(e.to_string()),
            })?;
            for r in &summary.reductions {
                eprintln!(
                    "{} vs {} N={}: cost reduction {:.2}%",
                    r.variant, r.baseline, r.n, r.cost_pct
                );
            }
            for f in files {
                eprintln!("wrote {}", f.display());
            }
            Ok(())
        }
        Command::Render {
            scene,
            plan,
            out,
            frames,
            no_goals,
            no_gripper,
            scale,
        } => {
            let scene = load_scene(&scene)?;
            let style = RenderStyle {
                show_goals: !no_goals,
                show_gripper: !no_gripper,
                scale,
            };
            style.validate().map_err(CliError::Input)?;
            let actions: Vec<Action> = match plan {
                Some(p) => read_json::<crate::planner::Plan>(&p)?.actions,
                None => Vec::new(),
            };
            let io = |p: &Path, e: std::io::Error| CliError::Failure(format!("{}: {e}", p.display()));
            if frames {
                let svgs = render::plan_frames(&scene, &actions, &style).map_err(|e| CliError::Input(e.to_string()))?;
                fs::create_dir_all(&out).map_err(|e| io(&out, e))?;
                for (i, svg) in svgs.iter().enumerate() {
                    let p = out.join(format!("frame_{i:03}.svg"));
                    fs::write(&p, svg).map_err(|e| io(&p, e))?;
                }
            } else {
                let svg = match actions.first() {
                    Some(a) => {
                        scene.apply_action(a).map_err(|e| CliError::Input(e.to_string()))?;
                        render::action_svg(&scene, a, &style)
                    }
                    None => render::scene_svg(&scene, &style),
                };
                fs::write(&out, svg).map_err(|e| io(&out, e))?;
            }
            Ok(())
        }
    }
}

/// Parses `args` and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.code()
        }
    }
}
