//! Receding-horizon execution: plan from the observed state, run the first
//! action through the simulator, observe, repeat.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::metrics::{action_cost_unchecked, CostModel, EEState};
use crate::planner::{self, home_pose, PlannerConfig};
use crate::scene::{Action, Arrangement, Scene};
use crate::seed::mix;
use crate::simulator::{simulate, NoiseConfig, SimEvent, SimEventKind};

pub const DEFAULT_STEP_BUDGET: usize = 15;
pub const DEFAULT_ACTION_OVERHEAD: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    AllAtGoal,
    StepBudget,
    PlanningFailure,
    ObjectLost,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExecutorConfig {
    pub planner: PlannerConfig,
    pub noise: NoiseConfig,
    pub step_budget: usize,
    /// Distance-equivalent time charged per executed action.
    pub action_overhead: f64,
    /// Keep following the previous plan while the observed state matches
    /// its prediction exactly; replan otherwise.
    pub reuse_plan_tail: bool,
}

impl Default for ExecutorConfig {
    fn default() -> Self {
        Self {
            planner: PlannerConfig::default(),
            noise: NoiseConfig::default(),
            step_budget: DEFAULT_STEP_BUDGET,
            action_overhead: DEFAULT_ACTION_OVERHEAD,
            reuse_plan_tail: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateSummary {
    pub satisfied: usize,
    pub poses: Arrangement,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub planned_plan_length: usize,
    pub replanned: bool,
    pub executed_action: Action,
    /// The simulator refused the action; the state is unchanged.
    pub skipped: Option<String>,
    pub sim_events: Vec<SimEvent>,
    pub travel: f64,
    pub post_state_summary: StateSummary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExecutionReport {
    pub steps: Vec<StepRecord>,
    pub total_actions: usize,
    pub success_rate: f64,
    pub robot_time_proxy: f64,
    pub terminated_by: Termination,
    pub first_plan_length: Option<usize>,
    pub final_poses: Arrangement,
}

impl ExecutionReport {
    pub fn success(&self) -> bool {
        self.terminated_by == Termination::AllAtGoal
    }

    pub fn replans(&self) -> usize {
        self.steps.iter().filter(|s| s.replanned).count()
    }
}

/// Fraction of objects within `tolerance` of their goal in `poses`.
pub fn success_rate_at(scene: &Scene, poses: &Arrangement, tolerance: f64) -> f64 {
    if scene.is_empty() {
        return 1.0;
    }
    let ok = (0..scene.len())
        .filter(|&i| poses[i].distance(scene.goal()[i]) <= tolerance)
        .count();
    ok as f64 / scene.len() as f64
}

/// Runs one trial with the given per-trial seed.
pub fn execute(
    scene: &Scene,
    planner_cfg: &PlannerConfig,
    noise: &NoiseConfig,
    step_budget: usize,
    trial_seed: u64,
) -> ExecutionReport {
    let cfg = ExecutorConfig {
        planner: planner_cfg.clone(),
        noise: *noise,
        step_budget,
        ..ExecutorConfig::default()
    };
    execute_with(scene, &cfg, trial_seed)
}

pub fn execute_with(scene: &Scene, cfg: &ExecutorConfig, trial_seed: u64) -> ExecutionReport {
    let mut state = scene.clone();
    let mut steps: Vec<StepRecord> = Vec::new();
    let mut ee = EEState::at_home(home_pose(scene));
    let travel_model = CostModel {
        lambda: 1.0,
        pick: cfg.planner.cost.pick,
    };
    let mut first_plan_length = None;
    let mut total_actions = 0;
    let mut travel_sum = 0.0;
    // remaining actions of the current plan and the state each one expects
    let mut cached: Vec<Action> = Vec::new();
    let mut expected: Option<Arrangement> = None;

    let terminated_by = loop {
        if state.all_at_goal() {
            break Termination::AllAtGoal;
        }
        if steps.len() >= cfg.step_budget {
            break Termination::StepBudget;
        }
        let k = steps.len() as u64;

        let reuse = cfg.reuse_plan_tail
            && !cached.is_empty()
            && expected
                .as_ref()
                .is_some_and(|e| e.max_abs_diff(state.current()) <= 1e-9);
        let (plan_len, replanned) = if reuse {
            (cached.len(), false)
        } else {
            let pcfg = PlannerConfig {
                seed: mix(trial_seed, &[k, 0]),
                ..cfg.planner.clone()
            };
            match planner::plan(&state, &pcfg) {
                Some(p) if !p.is_empty() => {
                    first_plan_length.get_or_insert(p.len());
                    cached = p.actions;
                    (cached.len(), true)
                }
                _ => break Termination::PlanningFailure,
            }
        };

        let action = cached.remove(0);
        let predicted = state.apply_action(&action).ok().map(|s| s.current().clone());
        let mut rng = ChaCha8Rng::seed_from_u64(mix(trial_seed, &[k, 1]));
        match simulate(&state, &action, &cfg.noise, &mut rng) {
            Ok((next, events)) => {
                let (c, e) = action_cost_unchecked(&state, &action, ee, &travel_model);
                ee = e;
                travel_sum += c.travel();
                total_actions += 1;
                let lost = events.iter().any(|e| e.kind == SimEventKind::LeftTable);
                state = next;
                expected = predicted;
                steps.push(StepRecord {
                    planned_plan_length: plan_len,
                    replanned,
                    executed_action: action,
                    skipped: None,
                    sim_events: events,
                    travel: c.travel(),
                    post_state_summary: summary(&state),
                });
                if lost {
                    break Termination::ObjectLost;
                }
            }
            Err(err) => {
                cached.clear();
                expected = None;
                steps.push(StepRecord {
                    planned_plan_length: plan_len,
                    replanned,
                    executed_action: action,
                    skipped: Some(err.to_string()),
                    sim_events: Vec::new(),
                    travel: 0.0,
                    post_state_summary: summary(&state),
                });
            }
        }
    };

    ExecutionReport {
        success_rate: success_rate_at(&state, state.current(), state.tolerance()),
        robot_time_proxy: travel_sum + cfg.action_overhead * total_actions as f64,
        total_actions,
        terminated_by,
        first_plan_length,
        final_poses: state.current().clone(),
        steps,
    }
}

fn summary(s: &Scene) -> StateSummary {
    StateSummary {
        satisfied: s.satisfied_count(),
        poses: s.current().clone(),
    }
}

/// Aggregate over repeated trials.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExecutionSummary {
    pub trials: usize,
    pub mean_actions: f64,
    pub mean_success_rate: f64,
    pub mean_robot_time: f64,
    pub all_at_goal: usize,
}

pub fn summarize(reports: &[ExecutionReport]) -> ExecutionSummary {
    let n = reports.len();
    if n == 0 {
        return ExecutionSummary::default();
    }
    let mean = |f: &dyn Fn(&ExecutionReport) -> f64| reports.iter().map(f).sum::<f64>() / n as f64;
    ExecutionSummary {
        trials: n,
        mean_actions: mean(&|r| r.total_actions as f64),
        mean_success_rate: mean(&|r| r.success_rate),
        mean_robot_time: mean(&|r| r.robot_time_proxy),
        all_at_goal: reports.iter().filter(|r| r.success()).count(),
    }
}

/// Final effector-free arrangement reached by running `actions` open loop
/// through the noiseless simulator.
pub fn open_loop(scene: &Scene, actions: &[Action]) -> Option<Arrangement> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut s = scene.clone();
    for a in actions {
        s = simulate(&s, a, &NoiseConfig::none(), &mut rng).ok()?.0;
    }
    Some(s.current().clone())
}
