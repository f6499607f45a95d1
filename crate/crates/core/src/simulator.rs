//! Deterministic quasi-static 2D push simulator.
//!
//! Pushed objects translate with the pusher's leading face once in contact
//! and stop when it stops. Contact propagates along the push axis: a pushed
//! object pushes whatever it meets. There is no rotation and no momentum;
//! optional uniform drift on pushed objects stands in for unmodeled effects.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Rect, Side, Vec2};
use crate::scene::{Action, Arrangement, ObjectId, Scene, SceneError};

/// Objects that would leave the table are stopped this far inside the edge.
pub const EDGE_CLAMP: f64 = 0.001;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    /// Half-width of the uniform drift perpendicular to the push.
    pub lateral_sigma: f64,
    /// Half-width of the uniform drift along the push.
    pub depth_sigma: f64,
    /// Half-width of uniform placement error for pick-and-place, per axis.
    pub placement_sigma: f64,
    pub enabled: bool,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            lateral_sigma: 0.003,
            depth_sigma: 0.002,
            placement_sigma: 0.0,
            enabled: true,
        }
    }
}

impl NoiseConfig {
    pub fn none() -> Self {
        Self {
            enabled: false,
            ..Self::default()
        }
    }

    fn active(&self) -> bool {
        self.enabled && (self.lateral_sigma > 0.0 || self.depth_sigma > 0.0 || self.placement_sigma > 0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimEventKind {
    Pushed,
    SecondaryContact,
    LeftTable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimEvent {
    pub kind: SimEventKind,
    pub object: ObjectId,
    pub detail: String,
}

impl SimEvent {
    pub fn is_failure(&self) -> bool {
        matches!(self.kind, SimEventKind::SecondaryContact | SimEventKind::LeftTable)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error("pre-push pose of object {object} is off the table")]
    PrePushOffTable { object: ObjectId },
    #[error("pre-push pose of object {object} overlaps object {with}")]
    PrePushCollision { object: ObjectId, with: ObjectId },
    #[error("pick-and-place destination of object {object} is blocked: {reason}")]
    DestinationBlocked { object: ObjectId, reason: String },
    #[error("objects were crushed against the table edge")]
    Crushed,
}

/// Runs `action` through the forward model.
pub fn simulate<R: Rng + ?Sized>(
    scene: &Scene,
    action: &Action,
    noise: &NoiseConfig,
    rng: &mut R,
) -> Result<(Scene, Vec<SimEvent>), SimError> {
    match *action {
        Action::PickPlace {
            object,
            destination,
        } => {
            scene.check_id(object)?;
            let exact = scene.apply_action(action).map_err(|e| SimError::DestinationBlocked {
                object,
                reason: e.to_string(),
            })?;
            if noise.active() && noise.placement_sigma > 0.0 {
                let s = noise.placement_sigma;
                let jitter = Vec2::new(rng.random_range(-s..=s), rng.random_range(-s..=s));
                let mut arr = exact.current().clone();
                arr.set(object, destination + jitter);
                // A noisy placement that collides falls back to the exact one.
                if let Ok(noisy) = scene.with_current(arr) {
                    return Ok((noisy, Vec::new()));
                }
            }
            Ok((exact, Vec::new()))
        }
        Action::PushPlace {
            object,
            side,
            pre_push,
            clearance,
        } => {
            scene.check_id(object)?;
            let start = scene.footprint_at(object, pre_push);
            if !scene.workspace().contains(&start) {
                return Err(SimError::PrePushOffTable { object });
            }
            if let Some(with) = (0..scene.len()).find(|&j| j != object && scene.footprint(j).overlaps(&start)) {
                return Err(SimError::PrePushCollision { object, with });
            }
            let goal = scene.goal()[object];
            let dir = side.direction();
            let overshoot = side.project(goal - pre_push) + clearance.max(0.0);
            let to = pre_push + dir * overshoot;
            let (mut arr, mut events) = push_forward(scene, object, side, pre_push, to);
            // retract onto the goal pose
            arr.set(object, goal);
            if noise.active() {
                apply_push_noise(scene, &mut arr, side, &events, noise, rng);
            }
            check_edge(scene, &mut arr, side, &mut events);
            let next = scene.with_current(arr).map_err(|_| SimError::Crushed)?;
            Ok((next, events))
        }
    }
}

/// Advances `target` from `from` to `to` along `side`, propagating contact.
///
/// The target is taken off its current pose (it is held by the gripper).
/// Moved objects that block the target's goal emit `Pushed`, however they
/// were reached; every other object set in motion emits `SecondaryContact`.
/// Objects that would cross the table edge emit `LeftTable` and are clamped
/// [`EDGE_CLAMP`] inside it.
pub fn push_forward(scene: &Scene, target: ObjectId, side: Side, from: Vec2, to: Vec2) -> (Arrangement, Vec<SimEvent>) {
    let travel = side.project(to - from).max(0.0);
    let dir = side.direction();
    let tfp = scene.footprint_at(target, from);
    let (_, t_far) = tfp.axis_extent(side);
    let t_cross = tfp.cross_extent(side);
    let t_final_far = t_far + travel;
    let goal_fp = scene.goal_footprint(target);

    let mut order: Vec<ObjectId> = (0..scene.len()).filter(|&j| j != target).collect();
    order.sort_by(|&a, &b| {
        let na = scene.footprint(a).axis_extent(side).0;
        let nb = scene.footprint(b).axis_extent(side).0;
        na.total_cmp(&nb).then(a.cmp(&b))
    });

    // (id, initial far, final far, cross extent) of bodies set in motion
    let mut moving: Vec<(ObjectId, f64, f64, (f64, f64))> = Vec::new();
    let mut arr = scene.current().clone();
    let mut events = Vec::new();
    for &j in &order {
        let fp = scene.footprint(j);
        let (near, far) = fp.axis_extent(side);
        let cross = fp.cross_extent(side);
        let mut new_near = near;
        if cross_overlap(t_cross, cross) && near >= t_far && t_final_far > near {
            new_near = t_final_far;
        }
        let mut by_chain = None;
        for &(k, k_far0, k_far1, k_cross) in &moving {
            if cross_overlap(k_cross, cross) && near >= k_far0 && k_far1 > new_near {
                new_near = k_far1;
                by_chain = Some(k);
            }
        }
        if new_near > near {
            let shift = new_near - near;
            arr.set(j, scene.current()[j] + dir * shift);
            moving.push((j, far, far + shift, cross));
            let pusher = match by_chain {
                Some(k) => format!("object {k}"),
                None => format!("target {target}"),
            };
            let kind = if fp.overlaps(&goal_fp) {
                SimEventKind::Pushed
            } else {
                SimEventKind::SecondaryContact
            };
            let detail = format!("moved {shift:.6} m by {pusher}");
            events.push(SimEvent { kind, object: j, detail });
        }
    }
    arr.set(target, to);
    (arr, events)
}

fn cross_overlap(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 < b.1 && b.0 < a.1
}

fn apply_push_noise<R: Rng + ?Sized>(
    scene: &Scene,
    arr: &mut Arrangement,
    side: Side,
    events: &[SimEvent],
    noise: &NoiseConfig,
    rng: &mut R,
) {
    let dir = side.direction();
    let perp = Vec2::new(-dir.y, dir.x);
    let ws = scene.workspace();
    let mut moved: Vec<ObjectId> = events
        .iter()
        .filter(|e| e.kind != SimEventKind::LeftTable)
        .map(|e| e.object)
        .collect();
    moved.sort_unstable();
    moved.dedup();
    for j in moved {
        let lateral = draw(rng, noise.lateral_sigma);
        let depth = draw(rng, noise.depth_sigma);
        let planned = arr[j];
        let shift = side.project(planned - scene.current()[j]);
        let mut pose = planned + perp * lateral + dir * depth.max(-shift);
        let fits = |p: Vec2, arr: &Arrangement| {
            let fp = scene.footprint_at(j, p);
            ws.contains(&fp) && (0..scene.len()).all(|k| k == j || !scene.footprint_at(k, arr[k]).overlaps(&fp))
        };
        // Resolve residual overlap by the minimal forward translation.
        for _ in 0..=scene.len() {
            let fp = scene.footprint_at(j, pose);
            let (near, _) = fp.axis_extent(side);
            let push = (0..scene.len())
                .filter(|&k| k != j && scene.footprint_at(k, arr[k]).overlaps(&fp))
                .map(|k| scene.footprint_at(k, arr[k]).axis_extent(side).1 - near)
                .fold(0.0, f64::max);
            if push <= 0.0 {
                break;
            }
            pose = pose + dir * push;
        }
        if fits(pose, arr) {
            arr.set(j, pose);
        }
    }
}

fn check_edge(scene: &Scene, arr: &mut Arrangement, side: Side, events: &mut Vec<SimEvent>) {
    let ws = scene.workspace();
    let (_, ws_far) = ws.axis_extent(side);
    let limit = ws_far - EDGE_CLAMP;
    let dir = side.direction();
    let mut lost: Vec<(ObjectId, f64)> = Vec::new();
    for j in 0..scene.len() {
        let fp = scene.footprint_at(j, arr[j]);
        if !ws.contains(&fp) {
            let (_, far) = fp.axis_extent(side);
            let back = (far - limit).max(0.0);
            lost.push((j, back));
        }
    }
    for (j, back) in lost {
        arr.set(j, arr[j] - dir * back);
        events.push(SimEvent {
            kind: SimEventKind::LeftTable,
            object: j,
            detail: format!("pushed past the table edge, clamped {EDGE_CLAMP} m inside"),
        });
    }
    // Objects behind clamped ones are compressed against them.
    let mut order: Vec<ObjectId> = (0..scene.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = scene.footprint_at(a, arr[a]).axis_extent(side).1;
        let fb = scene.footprint_at(b, arr[b]).axis_extent(side).1;
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for (idx, &j) in order.iter().enumerate() {
        let fp = scene.footprint_at(j, arr[j]);
        let (near, far) = fp.axis_extent(side);
        let cross = fp.cross_extent(side);
        let mut cap = f64::INFINITY;
        for &k in &order[..idx] {
            let fk: Rect = scene.footprint_at(k, arr[k]);
            let (k_near, _) = fk.axis_extent(side);
            if cross_overlap(cross, fk.cross_extent(side)) && k_near < far && k_near >= near {
                cap = cap.min(k_near);
            }
        }
        if cap < far {
            arr.set(j, arr[j] - dir * (far - cap));
        }
    }
}

fn draw<R: Rng + ?Sized>(rng: &mut R, half_width: f64) -> f64 {
    if half_width > 0.0 {
        rng.random_range(-half_width..=half_width)
    } else {
        0.0
    }
}
