//! End-effector travel cost of actions and plans, and the reduction statistic.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vec2;
use crate::planner::Plan;
use crate::scene::{Action, Scene, SceneError};

/// Fixed grasp-acquisition plus lift travel (two 0.1 m vertical strokes).
pub const DEFAULT_PICK_COST: f64 = 0.2;
pub const DEFAULT_LAMBDA: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("action {index} is infeasible: {source}")]
    Infeasible { index: usize, source: SceneError },
    #[error("baseline mean must be > 0, got {0}")]
    NonPositiveBaseline(f64),
    #[error("invalid cost model: {0}")]
    InvalidModel(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostModel {
    pub lambda: f64,
    pub pick: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        Self {
            lambda: DEFAULT_LAMBDA,
            pick: DEFAULT_PICK_COST,
        }
    }
}

impl CostModel {
    pub fn validate(&self) -> Result<(), MetricsError> {
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(MetricsError::InvalidModel(format!("lambda {} must be > 0", self.lambda)));
        }
        if !(self.pick.is_finite() && self.pick >= 0.0) {
            return Err(MetricsError::InvalidModel(format!("pick {} must be >= 0", self.pick)));
        }
        Ok(())
    }
}

/// Per-action travel legs; `cost() = lambda * (approach + pick + transfer)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub approach: f64,
    pub pick: f64,
    pub transfer: f64,
    pub lambda: f64,
}

impl CostBreakdown {
    pub fn travel(&self) -> f64 {
        self.approach + self.pick + self.transfer
    }

    pub fn cost(&self) -> f64 {
        self.lambda * self.travel()
    }
}

/// Planar end-effector position.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EEState {
    pub pose: Vec2,
    pub home: Vec2,
}

impl EEState {
    pub fn at_home(home: Vec2) -> Self {
        Self { pose: home, home }
    }
}

/// Cost of `action` from `scene` with the effector at `ee`. Checks feasibility.
pub fn action_cost(
    scene: &Scene,
    action: &Action,
    ee: EEState,
    model: &CostModel,
) -> Result<(CostBreakdown, EEState), SceneError> {
    scene.apply_action(action)?;
    Ok(action_cost_unchecked(scene, action, ee, model))
}

pub(crate) fn action_cost_unchecked(
    scene: &Scene,
    action: &Action,
    ee: EEState,
    model: &CostModel,
) -> (CostBreakdown, EEState) {
    let object = action.object();
    let center = scene.current()[object];
    let (transfer, end) = match *action {
        Action::PickPlace { destination, .. } => (center.distance(destination), destination),
        Action::PushPlace { pre_push, .. } => {
            let goal = scene.goal()[object];
            (center.distance(pre_push) + pre_push.distance(goal), goal)
        }
    };
    let breakdown = CostBreakdown {
        approach: ee.pose.distance(center),
        pick: model.pick,
        transfer,
        lambda: model.lambda,
    };
    (breakdown, EEState { pose: end, ..ee })
}

/// `J(plan)`: replays the plan from `start`, threading the effector from `home`.
pub fn plan_cost(plan: &Plan, start: &Scene, model: &CostModel, home: Vec2) -> Result<f64, MetricsError> {
    let mut scene = start.clone();
    let mut ee = EEState::at_home(home);
    let mut total = 0.0;
    for (index, action) in plan.actions.iter().enumerate() {
        let next = scene
            .apply_action(action)
            .map_err(|source| MetricsError::Infeasible { index, source })?;
        let (c, e) = action_cost_unchecked(&scene, action, ee, model);
        total += c.cost();
        ee = e;
        scene = next;
    }
    Ok(total)
}

/// `100 * (baseline - candidate) / baseline`.
pub fn percent_reduction(baseline_mean: f64, candidate_mean: f64) -> Result<f64, MetricsError> {
    if !(baseline_mean > 0.0) {
        return Err(MetricsError::NonPositiveBaseline(baseline_mean));
    }
    Ok(100.0 * (baseline_mean - candidate_mean) / baseline_mean)
}
