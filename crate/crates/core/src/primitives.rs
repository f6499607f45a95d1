//! Push-placement admissibility, pre-push pose selection and the buffer
//! fallback used when no push is admissible.
//!
//! A push-placement grasps the target, brings it to a pre-push pose behind
//! every blocker of its goal region, sweeps it along one of four axis
//! directions until its leading face is `clearance` past the goal's far
//! edge, and then places it at the goal. Every blocker ends `clearance`
//! beyond the goal region. A side is admissible only if, for every blocker,
//! the post-push footprint stays inside the workspace shrunk by
//! `edge_margin` and the corridor swept by the blocker touches nothing but
//! the lifted target. The pre-push pose must be on the table, collision
//! free, and the target's own approach may only touch declared blockers.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Rect, Side, Vec2};
use crate::scene::{Action, Arrangement, ObjectId, Scene, SceneError};

pub const DEFAULT_CLEARANCE: f64 = 0.005;
pub const DEFAULT_EDGE_MARGIN: f64 = 0.010;
pub const DEFAULT_BUFFER_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PushError {
    #[error("object id {0} is out of range")]
    InvalidObject(ObjectId),
    #[error("goal region of object {0} is free; use pick-and-place")]
    NoBlockers(ObjectId),
    #[error("object {blocker} does not block the goal of object {target}")]
    NotBlocking { blocker: ObjectId, target: ObjectId },
    #[error("invalid push config: {0}")]
    InvalidConfig(String),
}

impl From<SceneError> for PushError {
    fn from(e: SceneError) -> Self {
        match e {
            SceneError::InvalidObject(id) => PushError::InvalidObject(id),
            other => PushError::InvalidConfig(other.to_string()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PushConfig {
    /// Gap behind the outermost blocker and beyond the goal's far edge.
    pub clearance: f64,
    /// Safety margin to the table boundary for pushed blockers.
    pub edge_margin: f64,
    pub side_order: Vec<Side>,
}

impl Default for PushConfig {
    fn default() -> Self {
        Self {
            clearance: DEFAULT_CLEARANCE,
            edge_margin: DEFAULT_EDGE_MARGIN,
            side_order: Side::ALL.to_vec(),
        }
    }
}

impl PushConfig {
    pub fn validate(&self) -> Result<(), PushError> {
        if !(self.clearance.is_finite() && self.clearance >= 0.0) {
            return Err(PushError::InvalidConfig(format!("clearance {} must be >= 0", self.clearance)));
        }
        if !(self.edge_margin.is_finite() && self.edge_margin >= 0.0) {
            return Err(PushError::InvalidConfig(format!(
                "edge_margin {} must be >= 0",
                self.edge_margin
            )));
        }
        let mut sorted = self.side_order.clone();
        sorted.sort();
        if sorted != Side::ALL {
            return Err(PushError::InvalidConfig(
                "side_order must list each of left, right, up, down exactly once".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockerMove {
    pub id: ObjectId,
    pub displacement: f64,
}

/// An admissible push-placement: side, pre-push pose and planned blocker moves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PushProposal {
    pub target: ObjectId,
    pub side: Side,
    pub pre_push: Vec2,
    pub blocker_moves: Vec<BlockerMove>,
    pub goal_pose: Vec2,
    pub clearance: f64,
}

impl PushProposal {
    pub fn action(&self) -> Action {
        Action::PushPlace {
            object: self.target,
            side: self.side,
            pre_push: self.pre_push,
            clearance: self.clearance,
        }
    }

    /// Sweep length of the target from the pre-push pose to the overshoot point.
    pub fn sweep_length(&self) -> f64 {
        self.side.project(self.goal_pose - self.pre_push) + self.clearance
    }

    pub fn blocker_ids(&self) -> Vec<ObjectId> {
        self.blocker_moves.iter().map(|m| m.id).collect()
    }

    /// Planner-model outcome: target at its goal, blockers translated.
    pub fn apply(&self, scene: &Scene) -> Result<Scene, SceneError> {
        let mut next: Arrangement = scene.current().clone();
        next.set(self.target, self.goal_pose);
        let dir = self.side.direction();
        for m in &self.blocker_moves {
            next.set(m.id, scene.current()[m.id] + dir * m.displacement);
        }
        scene.with_current(next)
    }
}

/// Why a side failed.
#[derive(Clone, Debug, PartialEq)]
pub enum Rejection {
    NoBlockers,
    OffTable { blocker: ObjectId },
    CorridorBlocked { blocker: ObjectId, by: ObjectId },
    PrePushOffTable,
    PrePushCollision { with: ObjectId },
    ApproachBlocked { by: ObjectId },
    ApproachOffTable,
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejection::NoBlockers => write!(f, "goal region has no blockers"),
            Rejection::OffTable { blocker } => {
                write!(f, "blocker {blocker} would end outside the safe table area")
            }
            Rejection::CorridorBlocked { blocker, by } => {
                write!(f, "corridor of blocker {blocker} is occupied by object {by}")
            }
            Rejection::PrePushOffTable => write!(f, "pre-push pose is off the table"),
            Rejection::PrePushCollision { with } => {
                write!(f, "pre-push pose overlaps object {with}")
            }
            Rejection::ApproachBlocked { by } => {
                write!(f, "target sweep would contact non-blocker {by}")
            }
            Rejection::ApproachOffTable => write!(f, "target sweep leaves the table"),
        }
    }
}

/// Instrumentation for the admissibility check budget.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PushStats {
    pub calls: usize,
    pub sides_evaluated: usize,
    /// One per (side, blocker) boundary + corridor check pair.
    pub blocker_checks: usize,
    pub pre_push_validations: usize,
    /// Largest blocker-check count seen on a single side.
    pub max_checks_per_side: usize,
}

impl PushStats {
    pub fn merge(&mut self, other: &PushStats) {
        self.calls += other.calls;
        self.sides_evaluated += other.sides_evaluated;
        self.blocker_checks += other.blocker_checks;
        self.pre_push_validations += other.pre_push_validations;
        self.max_checks_per_side = self.max_checks_per_side.max(other.max_checks_per_side);
    }
}

/// Pick the first admissible side in `cfg.side_order` for `target`.
pub fn select_push(scene: &Scene, target: ObjectId, cfg: &PushConfig) -> Result<Option<PushProposal>, PushError> {
    select_push_with_stats(scene, target, cfg, &mut PushStats::default())
}

pub fn select_push_with_stats(
    scene: &Scene,
    target: ObjectId,
    cfg: &PushConfig,
    stats: &mut PushStats,
) -> Result<Option<PushProposal>, PushError> {
    scene.check_id(target)?;
    let blockers = scene.blockers_of(target)?;
    if blockers.is_empty() {
        return Err(PushError::NoBlockers(target));
    }
    stats.calls += 1;
    for &side in &cfg.side_order {
        stats.sides_evaluated += 1;
        if let Ok(p) = evaluate_side_inner(scene, target, &blockers, side, cfg.clearance, cfg.edge_margin, stats) {
            return Ok(Some(p));
        }
    }
    Ok(None)
}

/// Full admissibility test of a single side.
pub fn evaluate_side(
    scene: &Scene,
    target: ObjectId,
    side: Side,
    clearance: f64,
    edge_margin: f64,
) -> Result<PushProposal, Rejection> {
    let blockers = scene.blockers_of(target).map_err(|_| Rejection::NoBlockers)?;
    evaluate_side_inner(scene, target, &blockers, side, clearance, edge_margin, &mut PushStats::default())
}

fn evaluate_side_inner(
    scene: &Scene,
    target: ObjectId,
    blockers: &[ObjectId],
    side: Side,
    clearance: f64,
    edge_margin: f64,
    stats: &mut PushStats,
) -> Result<PushProposal, Rejection> {
    if blockers.is_empty() {
        return Err(Rejection::NoBlockers);
    }
    let goal_pose = scene.goal()[target];
    let (_, goal_far) = scene.goal_footprint(target).axis_extent(side);

    let mut moves = Vec::with_capacity(blockers.len());
    let mut outermost: Option<f64> = None;
    let mut checks = 0;
    let result = (|| {
        for &b in blockers {
            checks += 1;
            let (near, _) = scene.footprint(b).axis_extent(side);
            let d = goal_far - near + clearance;
            if !edge_safe(scene, b, side, d, edge_margin) {
                return Err(Rejection::OffTable { blocker: b });
            }
            if let Some(by) = corridor_obstacle(scene, b, side, d, &[target]) {
                return Err(Rejection::CorridorBlocked { blocker: b, by });
            }
            // Outermost on the approach side: the trailing face met first.
            if outermost.is_none_or(|n| near < n) {
                outermost = Some(near);
            }
            moves.push(BlockerMove { id: b, displacement: d });
        }
        Ok(())
    })();
    stats.blocker_checks += checks;
    stats.max_checks_per_side = stats.max_checks_per_side.max(checks);
    result?;

    let Some(outer_near) = outermost else {
        return Err(Rejection::NoBlockers);
    };
    stats.pre_push_validations += 1;
    let half_along = scene.half(target).along(side);
    let approach = side.project(goal_pose) - (outer_near - clearance - half_along);
    let pre_push = goal_pose - side.direction() * approach;

    let start = scene.footprint_at(target, pre_push);
    let ws = scene.workspace();
    if !ws.contains(&start) {
        return Err(Rejection::PrePushOffTable);
    }
    if let Some(with) = (0..scene.len()).find(|&j| j != target && scene.footprint(j).overlaps(&start)) {
        return Err(Rejection::PrePushCollision { with });
    }
    let swept = start.sweep(side, approach + clearance);
    if !ws.contains(&swept) {
        return Err(Rejection::ApproachOffTable);
    }
    if let Some(by) = (0..scene.len())
        .find(|&j| j != target && !blockers.contains(&j) && scene.footprint(j).overlaps(&swept))
    {
        return Err(Rejection::ApproachBlocked { by });
    }

    Ok(PushProposal {
        target,
        side,
        pre_push,
        blocker_moves: moves,
        goal_pose,
        clearance,
    })
}

/// Minimal translation along `side` that takes `blocker` off the goal
/// footprint of `target`, plus `clearance`.
pub fn blocker_displacement(
    scene: &Scene,
    blocker: ObjectId,
    target: ObjectId,
    side: Side,
    clearance: f64,
) -> Result<f64, PushError> {
    scene.check_id(blocker)?;
    scene.check_id(target)?;
    let goal = scene.goal_footprint(target);
    let fp = scene.footprint(blocker);
    if blocker == target || !fp.overlaps(&goal) {
        return Err(PushError::NotBlocking { blocker, target });
    }
    let (_, goal_far) = goal.axis_extent(side);
    let (near, _) = fp.axis_extent(side);
    Ok(goal_far - near + clearance)
}

/// True iff the region swept by `blocker` over `displacement` along `side`
/// overlaps no footprint other than the blocker's own and those in `exclude`.
pub fn corridor_clear(
    scene: &Scene,
    blocker: ObjectId,
    side: Side,
    displacement: f64,
    exclude: &[ObjectId],
) -> bool {
    corridor_obstacle(scene, blocker, side, displacement, exclude).is_none()
}

fn corridor_obstacle(
    scene: &Scene,
    blocker: ObjectId,
    side: Side,
    displacement: f64,
    exclude: &[ObjectId],
) -> Option<ObjectId> {
    let corridor = scene.footprint(blocker).sweep(side, displacement);
    (0..scene.len()).find(|&j| j != blocker && !exclude.contains(&j) && scene.footprint(j).overlaps(&corridor))
}

/// True iff the blocker's post-push footprint lies inside the workspace
/// shrunk by `margin`.
pub fn edge_safe(scene: &Scene, blocker: ObjectId, side: Side, displacement: f64, margin: f64) -> bool {
    let after = scene.footprint(blocker).translate(side.direction() * displacement);
    scene.workspace().shrink(margin).contains(&after)
}

/// Uniform rejection sampling of a buffer pose for `object`: inside the
/// workspace, clear of every other current footprint and of the goal
/// footprints of all unsatisfied objects.
pub fn sample_buffer_pose<R: Rng + ?Sized>(
    scene: &Scene,
    object: ObjectId,
    rng: &mut R,
    max_attempts: usize,
) -> Option<Vec2> {
    if scene.check_id(object).is_err() {
        return None;
    }
    let half = scene.half(object);
    let ws = scene.workspace();
    let (x0, x1) = (ws.lo.x + half.a, ws.hi.x - half.a);
    let (y0, y1) = (ws.lo.y + half.b, ws.hi.y - half.b);
    if x0 > x1 || y0 > y1 {
        return None;
    }
    let goals: Vec<Rect> = scene.unsatisfied().into_iter().map(|i| scene.goal_footprint(i)).collect();
    for _ in 0..max_attempts {
        let p = Vec2::new(sample_in(rng, x0, x1), sample_in(rng, y0, y1));
        let fp = Rect::from_center(p, half);
        if scene.region_free(&fp, &[object]) && goals.iter().all(|g| !g.overlaps(&fp)) {
            return Some(p);
        }
    }
    None
}

fn sample_in<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if lo < hi {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}
