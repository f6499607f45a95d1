//! Scene state, goal predicates and the transition `P' = f(P, a)`.

use std::fmt;
use std::ops::Index;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{HalfDims, Rect, Side, Vec2};
use crate::primitives;

/// Default goal tolerance (0.5 cm).
pub const DEFAULT_TOLERANCE: f64 = 0.005;

/// Pre-push poses in an action must match the recomputed pose to this precision.
const PRE_PUSH_MATCH_TOL: f64 = 1e-9;

pub type ObjectId = usize;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SceneError {
    #[error("object id {0} is out of range")]
    InvalidObject(ObjectId),
    #[error("object {0} has non-positive or non-finite half-dimensions")]
    InvalidHalfDims(ObjectId),
    #[error("workspace must be a finite rectangle with positive area")]
    InvalidWorkspace,
    #[error("tolerance must be finite and > 0, got {0}")]
    InvalidTolerance(f64),
    #[error("{which} arrangement has {found} poses, expected {expected}")]
    ArrangementLength {
        which: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{which} pose of object {id} is not finite")]
    NonFinitePose { which: &'static str, id: ObjectId },
    #[error("{which} footprint of object {id} leaves the workspace")]
    OutOfWorkspace { which: &'static str, id: ObjectId },
    #[error("{which} footprints of objects {a} and {b} overlap")]
    Overlap {
        which: &'static str,
        a: ObjectId,
        b: ObjectId,
    },
    #[error("push-placement of object {object} from side {side} is inadmissible: {reason}")]
    InadmissiblePush {
        object: ObjectId,
        side: Side,
        reason: String,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObjectSpec {
    pub id: ObjectId,
    pub half: HalfDims,
    pub color: Option<String>,
}

/// Object centers indexed by object id.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Arrangement(Vec<Vec2>);

impl Arrangement {
    pub fn new(poses: Vec<Vec2>) -> Self {
        Self(poses)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn poses(&self) -> &[Vec2] {
        &self.0
    }

    pub fn set(&mut self, id: ObjectId, pose: Vec2) {
        self.0[id] = pose;
    }

    pub fn into_inner(self) -> Vec<Vec2> {
        self.0
    }

    /// Largest per-coordinate difference to `other`.
    pub fn max_abs_diff(&self, other: &Arrangement) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a.x - b.x).abs().max((a.y - b.y).abs()))
            .fold(0.0, f64::max)
    }
}

impl Index<ObjectId> for Arrangement {
    type Output = Vec2;
    fn index(&self, id: ObjectId) -> &Vec2 {
        &self.0[id]
    }
}

impl From<Vec<Vec2>> for Arrangement {
    fn from(v: Vec<Vec2>) -> Self {
        Self(v)
    }
}

/// A primitive manipulation action.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Action {
    PickPlace {
        object: ObjectId,
        destination: Vec2,
    },
    /// Grasp `object`, move it to `pre_push`, sweep it along `side` through
    /// its goal region and place it at the goal. `clearance` is the gap left
    /// behind the outermost blocker and beyond the goal's far edge.
    PushPlace {
        object: ObjectId,
        side: Side,
        pre_push: Vec2,
        clearance: f64,
    },
}

impl Action {
    pub fn object(&self) -> ObjectId {
        match *self {
            Action::PickPlace { object, .. } | Action::PushPlace { object, .. } => object,
        }
    }

    pub fn is_push(&self) -> bool {
        matches!(self, Action::PushPlace { .. })
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::PickPlace { object, destination } => {
                write!(f, "pick-place #{object} -> {destination}")
            }
            Action::PushPlace {
                object, side, pre_push, ..
            } => write!(f, "push-place #{object} side={side} from {pre_push}"),
        }
    }
}

/// Workspace, objects, current and goal arrangement, and goal tolerance.
///
/// Scenes are immutable values; transitions return new scenes. Object specs
/// and the goal are shared between copies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SceneFile", into = "SceneFile")]
pub struct Scene {
    workspace: Rect,
    objects: Arc<[ObjectSpec]>,
    current: Arrangement,
    goal: Arc<Arrangement>,
    tolerance: f64,
}

impl Scene {
    pub fn new(
        workspace: Rect,
        halves: Vec<HalfDims>,
        start: Vec<Vec2>,
        goal: Vec<Vec2>,
        tolerance: f64,
    ) -> Result<Self, SceneError> {
        let objects = halves
            .into_iter()
            .enumerate()
            .map(|(id, half)| ObjectSpec {
                id,
                half,
                color: None,
            })
            .collect();
        Self::with_objects(workspace, objects, start, goal, tolerance)
    }

    pub fn with_objects(
        workspace: Rect,
        objects: Vec<ObjectSpec>,
        start: Vec<Vec2>,
        goal: Vec<Vec2>,
        tolerance: f64,
    ) -> Result<Self, SceneError> {
        if !workspace.is_valid() || workspace.area() <= 0.0 {
            return Err(SceneError::InvalidWorkspace);
        }
        if !(tolerance.is_finite() && tolerance > 0.0) {
            return Err(SceneError::InvalidTolerance(tolerance));
        }
        for (i, obj) in objects.iter().enumerate() {
            if obj.id != i {
                return Err(SceneError::InvalidObject(obj.id));
            }
            if !obj.half.is_valid() {
                return Err(SceneError::InvalidHalfDims(i));
            }
        }
        let scene = Scene {
            workspace,
            objects: objects.into(),
            current: Arrangement(start),
            goal: Arc::new(Arrangement(goal)),
            tolerance,
        };
        scene.validate_arrangement(&scene.goal, "goal")?;
        scene.validate_arrangement(&scene.current, "current")?;
        Ok(scene)
    }

    fn validate_arrangement(&self, arr: &Arrangement, which: &'static str) -> Result<(), SceneError> {
        let n = self.len();
        if arr.len() != n {
            return Err(SceneError::ArrangementLength {
                which,
                expected: n,
                found: arr.len(),
            });
        }
        let mut rects = Vec::with_capacity(n);
        for (id, &p) in arr.poses().iter().enumerate() {
            if !p.is_finite() {
                return Err(SceneError::NonFinitePose { which, id });
            }
            let r = Rect::from_center(p, self.objects[id].half);
            if !self.workspace.contains(&r) {
                return Err(SceneError::OutOfWorkspace { which, id });
            }
            rects.push(r);
        }
        for a in 0..n {
            for b in a + 1..n {
                if rects[a].overlaps(&rects[b]) {
                    return Err(SceneError::Overlap { which, a, b });
                }
            }
        }
        Ok(())
    }

    /// Same objects and goal, new current arrangement (validated).
    pub fn with_current(&self, current: Arrangement) -> Result<Scene, SceneError> {
        self.validate_arrangement(&current, "current")?;
        Ok(Scene {
            current,
            ..self.clone()
        })
    }

    /// Same objects and current arrangement, new tolerance.
    pub fn with_tolerance(&self, tolerance: f64) -> Result<Scene, SceneError> {
        if !(tolerance.is_finite() && tolerance > 0.0) {
            return Err(SceneError::InvalidTolerance(tolerance));
        }
        Ok(Scene {
            tolerance,
            ..self.clone()
        })
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn workspace(&self) -> Rect {
        self.workspace
    }

    pub fn objects(&self) -> &[ObjectSpec] {
        &self.objects
    }

    pub fn current(&self) -> &Arrangement {
        &self.current
    }

    pub fn goal(&self) -> &Arrangement {
        &self.goal
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn half(&self, id: ObjectId) -> HalfDims {
        self.objects[id].half
    }

    pub fn check_id(&self, id: ObjectId) -> Result<(), SceneError> {
        if id < self.len() {
            Ok(())
        } else {
            Err(SceneError::InvalidObject(id))
        }
    }

    pub fn footprint(&self, id: ObjectId) -> Rect {
        Rect::from_center(self.current[id], self.objects[id].half)
    }

    pub fn goal_footprint(&self, id: ObjectId) -> Rect {
        Rect::from_center(self.goal[id], self.objects[id].half)
    }

    pub fn footprint_at(&self, id: ObjectId, center: Vec2) -> Rect {
        Rect::from_center(center, self.objects[id].half)
    }

    /// `|p_i - p_i*| <= eps`.
    pub fn is_at_goal(&self, id: ObjectId) -> Result<bool, SceneError> {
        self.check_id(id)?;
        Ok(self.at_goal(id))
    }

    pub(crate) fn at_goal(&self, id: ObjectId) -> bool {
        self.current[id].distance(self.goal[id]) <= self.tolerance
    }

    pub fn satisfied_count(&self) -> usize {
        (0..self.len()).filter(|&i| self.at_goal(i)).count()
    }

    pub fn all_at_goal(&self) -> bool {
        (0..self.len()).all(|i| self.at_goal(i))
    }

    pub fn unsatisfied(&self) -> Vec<ObjectId> {
        (0..self.len()).filter(|&i| !self.at_goal(i)).collect()
    }

    /// Objects whose current footprint overlaps the goal footprint of `target`,
    /// in ascending id order.
    pub fn blockers_of(&self, target: ObjectId) -> Result<Vec<ObjectId>, SceneError> {
        self.check_id(target)?;
        let goal = self.goal_footprint(target);
        Ok((0..self.len())
            .filter(|&j| j != target && self.footprint(j).overlaps(&goal))
            .collect())
    }

    pub fn goal_region_free(&self, target: ObjectId) -> Result<bool, SceneError> {
        Ok(self.blockers_of(target)?.is_empty())
    }

    /// True iff `rect` is inside the workspace and overlaps no current
    /// footprint other than those in `exclude`.
    pub fn region_free(&self, rect: &Rect, exclude: &[ObjectId]) -> bool {
        self.workspace.contains(rect)
            && (0..self.len()).all(|j| exclude.contains(&j) || !self.footprint(j).overlaps(rect))
    }

    /// Applies `action`, validating feasibility first.
    pub fn apply_action(&self, action: &Action) -> Result<Scene, SceneError> {
        match *action {
            Action::PickPlace {
                object,
                destination,
            } => {
                self.check_id(object)?;
                if !destination.is_finite() {
                    return Err(SceneError::NonFinitePose {
                        which: "destination",
                        id: object,
                    });
                }
                let fp = self.footprint_at(object, destination);
                if !self.workspace.contains(&fp) {
                    return Err(SceneError::OutOfWorkspace {
                        which: "destination",
                        id: object,
                    });
                }
                if let Some(j) = (0..self.len()).find(|&j| j != object && self.footprint(j).overlaps(&fp)) {
                    return Err(SceneError::Overlap {
                        which: "destination",
                        a: object,
                        b: j,
                    });
                }
                let mut current = self.current.clone();
                current.set(object, destination);
                Ok(Scene {
                    current,
                    ..self.clone()
                })
            }
            Action::PushPlace {
                object,
                side,
                pre_push,
                clearance,
            } => {
                self.check_id(object)?;
                let inadmissible = |reason: String| SceneError::InadmissiblePush {
                    object,
                    side,
                    reason,
                };
                if !(clearance.is_finite() && clearance >= 0.0) {
                    return Err(inadmissible(format!("invalid clearance {clearance}")));
                }
                let proposal = primitives::evaluate_side(self, object, side, clearance, 0.0)
                    .map_err(|r| inadmissible(r.to_string()))?;
                let d = proposal.pre_push - pre_push;
                if d.x.abs().max(d.y.abs()) > PRE_PUSH_MATCH_TOL {
                    return Err(inadmissible(format!(
                        "pre-push pose {pre_push} differs from the admissible pose {}",
                        proposal.pre_push
                    )));
                }
                proposal.apply(self)
            }
        }
    }
}

/// On-disk scene format.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    /// `[x0, y0, x1, y1]`
    pub workspace: [f64; 4],
    pub objects: Vec<ObjectFile>,
    pub start: Vec<Vec2>,
    pub goal: Vec<Vec2>,
    #[serde(default = "default_tolerance")]
    pub epsilon: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectFile {
    pub a: f64,
    pub b: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<String>,
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

impl TryFrom<SceneFile> for Scene {
    type Error = SceneError;

    fn try_from(f: SceneFile) -> Result<Self, SceneError> {
        let [x0, y0, x1, y1] = f.workspace;
        if !(x0 <= x1 && y0 <= y1) {
            return Err(SceneError::InvalidWorkspace);
        }
        let objects = f
            .objects
            .into_iter()
            .enumerate()
            .map(|(id, o)| ObjectSpec {
                id,
                half: HalfDims::new(o.a, o.b),
                color: o.color,
            })
            .collect();
        Scene::with_objects(Rect::from_bounds(x0, y0, x1, y1), objects, f.start, f.goal, f.epsilon)
    }
}

impl From<Scene> for SceneFile {
    fn from(s: Scene) -> Self {
        SceneFile {
            workspace: s.workspace.bounds(),
            objects: s
                .objects
                .iter()
                .map(|o| ObjectFile {
                    a: o.half.a,
                    b: o.half.b,
                    color: o.color.clone(),
                })
                .collect(),
            start: s.current.poses().to_vec(),
            goal: s.goal.poses().to_vec(),
            epsilon: s.tolerance,
        }
    }
}
