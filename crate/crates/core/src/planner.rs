//! Budget-bounded Monte Carlo tree search over arrangements.
//!
//! Every expansion samples an unsatisfied object uniformly, asks the action
//! recommender for one primitive, applies it, and scores the new node by the
//! number of objects within tolerance. Selection is UCT over rewards
//! normalized by the object count, with progressive widening: a node keeps
//! being expanded while its attempt count is below `k * visits^alpha`, so a
//! fresh node is expanded once before selection moves deeper. The search
//! stops at the first node that satisfies every goal and returns the path
//! from the root.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vec2;
use crate::metrics::{action_cost_unchecked, CostBreakdown, CostModel, EEState, MetricsError};
use crate::primitives::{self, PushConfig, PushError, PushStats, DEFAULT_BUFFER_ATTEMPTS};
use crate::scene::{Action, ObjectId, Scene, SceneError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("object {0} is already within tolerance of its goal")]
    AlreadySatisfied(ObjectId),
    #[error("every object is already within tolerance of its goal")]
    AllSatisfied,
    #[error("invalid planner config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Push(#[from] PushError),
}

/// Search budget: wall-clock milliseconds or a node-expansion count.
/// Only expansion budgets give reproducible plans.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Budget {
    Expansions(u64),
    Millis(u64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    pub budget: Budget,
    pub exploration_c: f64,
    pub push_enabled: bool,
    pub push: PushConfig,
    pub buffer_max_attempts: usize,
    pub seed: u64,
    pub cost: CostModel,
    /// Maximum plan depth as a multiple of the object count.
    pub depth_factor: usize,
    /// A node may hold up to `widening_k * visits^widening_alpha` expansion
    /// attempts before selection descends past it.
    pub widening_k: f64,
    pub widening_alpha: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            budget: Budget::Millis(2000),
            exploration_c: std::f64::consts::SQRT_2,
            push_enabled: true,
            push: PushConfig::default(),
            buffer_max_attempts: DEFAULT_BUFFER_ATTEMPTS,
            seed: 0,
            cost: CostModel::default(),
            depth_factor: 4,
            widening_k: 1.0,
            widening_alpha: 0.25,
        }
    }
}

impl PlannerConfig {
    pub fn baseline() -> Self {
        Self {
            push_enabled: false,
            ..Self::default()
        }
    }

    pub fn with_expansions(mut self, n: u64) -> Self {
        self.budget = Budget::Expansions(n);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), PlanError> {
        match self.budget {
            Budget::Expansions(0) | Budget::Millis(0) => {
                return Err(PlanError::InvalidConfig("budget must be positive".into()))
            }
            _ => {}
        }
        if !(self.exploration_c.is_finite() && self.exploration_c >= 0.0) {
            return Err(PlanError::InvalidConfig(format!(
                "exploration_c {} must be >= 0",
                self.exploration_c
            )));
        }
        if !(self.widening_k.is_finite() && self.widening_k > 0.0) {
            return Err(PlanError::InvalidConfig("widening_k must be > 0".into()));
        }
        if !(self.widening_alpha.is_finite() && (0.0..=1.0).contains(&self.widening_alpha)) {
            return Err(PlanError::InvalidConfig("widening_alpha must be in [0, 1]".into()));
        }
        if self.depth_factor == 0 {
            return Err(PlanError::InvalidConfig("depth_factor must be >= 1".into()));
        }
        self.push.validate()?;
        self.cost
            .validate()
            .map_err(|e| PlanError::InvalidConfig(e.to_string()))?;
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub actions: Vec<Action>,
    pub costs: Vec<CostBreakdown>,
    pub total: f64,
}

impl Plan {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// Costs `actions` by replaying them from `start`.
    pub fn from_actions(start: &Scene, actions: Vec<Action>, model: &CostModel, home: Vec2) -> Result<Plan, MetricsError> {
        let mut scene = start.clone();
        let mut ee = EEState::at_home(home);
        let mut costs = Vec::with_capacity(actions.len());
        for (index, action) in actions.iter().enumerate() {
            let next = scene
                .apply_action(action)
                .map_err(|source| MetricsError::Infeasible { index, source })?;
            let (c, e) = action_cost_unchecked(&scene, action, ee, model);
            costs.push(c);
            ee = e;
            scene = next;
        }
        let total = costs.iter().map(CostBreakdown::cost).sum();
        Ok(Plan { actions, costs, total })
    }

    pub fn push_count(&self) -> usize {
        self.actions.iter().filter(|a| a.is_push()).count()
    }
}

/// Where the effector starts for every plan: the workspace center.
pub fn home_pose(scene: &Scene) -> Vec2 {
    scene.workspace().center()
}

/// Uniform draw over objects outside tolerance.
pub fn sample_unsatisfied_object<R: Rng + ?Sized>(scene: &Scene, rng: &mut R) -> Result<ObjectId, PlanError> {
    let open = scene.unsatisfied();
    if open.is_empty() {
        return Err(PlanError::AllSatisfied);
    }
    Ok(open[rng.random_range(0..open.len())])
}

/// The recommender's decision logic for one unsatisfied object.
pub fn recommend_action<R: Rng + ?Sized>(
    scene: &Scene,
    object: ObjectId,
    cfg: &PlannerConfig,
    rng: &mut R,
) -> Result<Option<Action>, PlanError> {
    recommend_action_with_stats(scene, object, cfg, rng, &mut PushStats::default())
}

pub fn recommend_action_with_stats<R: Rng + ?Sized>(
    scene: &Scene,
    object: ObjectId,
    cfg: &PlannerConfig,
    rng: &mut R,
    stats: &mut PushStats,
) -> Result<Option<Action>, PlanError> {
    if scene.is_at_goal(object)? {
        return Err(PlanError::AlreadySatisfied(object));
    }
    let blockers = scene.blockers_of(object)?;
    if blockers.is_empty() {
        return Ok(Some(Action::PickPlace {
            object,
            destination: scene.goal()[object],
        }));
    }
    if cfg.push_enabled {
        if let Some(p) = primitives::select_push_with_stats(scene, object, &cfg.push, stats)? {
            return Ok(Some(p.action()));
        }
    }
    let b = blockers[rng.random_range(0..blockers.len())];
    if scene.goal_region_free(b)? {
        return Ok(Some(Action::PickPlace {
            object: b,
            destination: scene.goal()[b],
        }));
    }
    Ok(primitives::sample_buffer_pose(scene, b, rng, cfg.buffer_max_attempts)
        .map(|destination| Action::PickPlace { object: b, destination }))
}

#[derive(Clone, Debug)]
pub struct SearchNode {
    pub state: Scene,
    pub parent: Option<usize>,
    pub incoming_action: Option<Action>,
    pub incoming_cost: Option<CostBreakdown>,
    pub children: Vec<usize>,
    pub visit_count: u64,
    pub reward_sum: f64,
    pub depth: usize,
    ee: EEState,
    attempts: usize,
    open_objects: usize,
    dead: bool,
}

impl SearchNode {
    pub fn mean_reward(&self) -> f64 {
        if self.visit_count == 0 {
            0.0
        } else {
            self.reward_sum / self.visit_count as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum StepOutcome {
    Expanded { node: usize, reward: usize },
    Terminal { node: usize },
    /// The recommender produced no applicable action at `node`.
    Failed { node: usize },
    /// Every branch is at the depth cap or out of options.
    Exhausted,
}

/// Arena-backed search tree.
#[derive(Clone, Debug)]
pub struct SearchTree {
    nodes: Vec<SearchNode>,
    objects: usize,
    depth_cap: usize,
    widening: (f64, f64),
    expansions: u64,
    push_stats: PushStats,
}

impl SearchTree {
    pub fn new(root: Scene, cfg: &PlannerConfig) -> Self {
        let objects = root.len();
        let home = home_pose(&root);
        let open = objects - root.satisfied_count();
        let reward = root.satisfied_count() as f64;
        let node = SearchNode {
            state: root,
            parent: None,
            incoming_action: None,
            incoming_cost: None,
            children: Vec::new(),
            visit_count: 1,
            reward_sum: reward,
            depth: 0,
            ee: EEState::at_home(home),
            attempts: 0,
            open_objects: open,
            dead: false,
        };
        Self {
            nodes: vec![node],
            objects,
            depth_cap: cfg.depth_factor * objects.max(1),
            widening: (cfg.widening_k, cfg.widening_alpha),
            expansions: 0,
            push_stats: PushStats::default(),
        }
    }

    pub fn nodes(&self) -> &[SearchNode] {
        &self.nodes
    }

    pub fn expansions(&self) -> u64 {
        self.expansions
    }

    pub fn push_stats(&self) -> &PushStats {
        &self.push_stats
    }

    fn expandable(&self, n: usize) -> bool {
        let node = &self.nodes[n];
        let (k, alpha) = self.widening;
        let allowed = (k * (node.visit_count.max(1) as f64).powf(alpha)).floor().max(1.0) as usize;
        node.open_objects > 0 && node.depth < self.depth_cap && node.attempts < allowed
    }

    fn uct(&self, parent: usize, child: usize, c: f64) -> f64 {
        let p = &self.nodes[parent];
        let ch = &self.nodes[child];
        let norm = self.objects.max(1) as f64;
        let visits = ch.visit_count.max(1) as f64;
        ch.reward_sum / visits / norm + c * ((p.visit_count.max(1) as f64).ln() / visits).sqrt()
    }

    fn select(&mut self, c: f64) -> Option<usize> {
        loop {
            if self.nodes[0].dead {
                return None;
            }
            let mut n = 0;
            loop {
                if self.expandable(n) {
                    return Some(n);
                }
                let best = self.nodes[n]
                    .children
                    .iter()
                    .copied()
                    .filter(|&ch| !self.nodes[ch].dead)
                    .fold(None::<(usize, f64)>, |best, ch| {
                        let score = self.uct(n, ch, c);
                        match best {
                            Some((_, s)) if s >= score => best,
                            _ => Some((ch, score)),
                        }
                    });
                match best {
                    Some((ch, _)) => n = ch,
                    None => {
                        self.mark_dead(n);
                        break;
                    }
                }
            }
        }
    }

    fn mark_dead(&mut self, mut n: usize) {
        loop {
            self.nodes[n].dead = true;
            let Some(p) = self.nodes[n].parent else { return };
            if self.expandable(p) || self.nodes[p].children.iter().any(|&c| !self.nodes[c].dead) {
                return;
            }
            n = p;
        }
    }

    fn backpropagate(&mut self, from: usize, reward: f64) {
        let mut cur = Some(from);
        while let Some(n) = cur {
            let node = &mut self.nodes[n];
            node.visit_count += 1;
            node.reward_sum += reward;
            cur = node.parent;
        }
    }

    /// One selection / expansion / evaluation / backpropagation round.
    pub fn step<R: Rng + ?Sized>(&mut self, cfg: &PlannerConfig, rng: &mut R) -> StepOutcome {
        let Some(n) = self.select(cfg.exploration_c) else {
            return StepOutcome::Exhausted;
        };
        self.expansions += 1;
        self.nodes[n].attempts += 1;

        let state = &self.nodes[n].state;
        let action = sample_unsatisfied_object(state, rng)
            .and_then(|obj| recommend_action_with_stats(state, obj, cfg, rng, &mut self.push_stats));
        let next = match action {
            Ok(Some(a)) => state.apply_action(&a).map(|s| (a, s)).ok(),
            _ => None,
        };
        let Some((action, next)) = next else {
            if !self.expandable(n) && self.nodes[n].children.iter().all(|&c| self.nodes[c].dead) {
                self.mark_dead(n);
            }
            return StepOutcome::Failed { node: n };
        };

        let (cost, ee) = action_cost_unchecked(state, &action, self.nodes[n].ee, &cfg.cost);
        let reward = next.satisfied_count();
        let depth = self.nodes[n].depth + 1;
        let child = self.nodes.len();
        self.nodes.push(SearchNode {
            open_objects: self.objects - reward,
            state: next,
            parent: Some(n),
            incoming_action: Some(action),
            incoming_cost: Some(cost),
            children: Vec::new(),
            visit_count: 0,
            reward_sum: 0.0,
            depth,
            ee,
            attempts: 0,
            dead: false,
        });
        self.nodes[n].children.push(child);
        self.backpropagate(child, reward as f64);
        if reward == self.objects {
            return StepOutcome::Terminal { node: child };
        }
        if depth >= self.depth_cap {
            self.mark_dead(child);
        }
        StepOutcome::Expanded { node: child, reward }
    }

    /// Backtracks the unique path from `node` to the root.
    pub fn extract_plan(&self, node: usize) -> Plan {
        let mut actions = Vec::new();
        let mut costs = Vec::new();
        let mut cur = node;
        while let Some(p) = self.nodes[cur].parent {
            let n = &self.nodes[cur];
            actions.push(n.incoming_action.clone().expect("non-root node has an action"));
            costs.push(n.incoming_cost.expect("non-root node has a cost"));
            cur = p;
        }
        actions.reverse();
        costs.reverse();
        let total = costs.iter().map(CostBreakdown::cost).sum();
        Plan { actions, costs, total }
    }
}

/// Search diagnostics alongside the plan.
#[derive(Clone, Debug)]
pub struct PlanOutcome {
    pub plan: Option<Plan>,
    pub expansions: u64,
    pub nodes: usize,
    pub elapsed: Duration,
    pub push_stats: PushStats,
}

/// Runs the search until the first goal node or until the budget is spent.
pub fn plan(scene: &Scene, cfg: &PlannerConfig) -> Option<Plan> {
    plan_with_stats(scene, cfg).plan
}

pub fn plan_with_stats(scene: &Scene, cfg: &PlannerConfig) -> PlanOutcome {
    let started = Instant::now();
    if scene.all_at_goal() {
        return PlanOutcome {
            plan: Some(Plan::empty()),
            expansions: 0,
            nodes: 1,
            elapsed: started.elapsed(),
            push_stats: PushStats::default(),
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut tree = SearchTree::new(scene.clone(), cfg);
    let mut found = None;
    loop {
        let within_budget = match cfg.budget {
            Budget::Expansions(max) => tree.expansions() < max,
            Budget::Millis(ms) => started.elapsed() < Duration::from_millis(ms),
        };
        if !within_budget {
            break;
        }
        match tree.step(cfg, &mut rng) {
            StepOutcome::Terminal { node } => {
                found = Some(tree.extract_plan(node));
                break;
            }
            StepOutcome::Exhausted => break,
            _ => {}
        }
    }
    PlanOutcome {
        plan: found,
        expansions: tree.expansions(),
        nodes: tree.nodes().len(),
        elapsed: started.elapsed(),
        push_stats: *tree.push_stats(),
    }
}
