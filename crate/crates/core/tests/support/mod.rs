//! Shared test helpers: scene generators, independent geometric oracles and
//! the property list run by both the invariant tests and the acceptance
//! harness.

#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pushplace::bench::{generate_scene, run_benchmark, BenchConfig, Variant};
use pushplace::executor::{execute_with, open_loop, success_rate_at, ExecutorConfig, Termination};
use pushplace::geometry::{HalfDims, Rect, Side, Vec2};
use pushplace::metrics::{plan_cost, CostModel};
use pushplace::planner::{self, home_pose, Budget, Plan, PlannerConfig};
use pushplace::primitives::{select_push, select_push_with_stats, PushConfig, PushProposal, PushStats};
use pushplace::scene::{Action, Arrangement, ObjectId, Scene};
use pushplace::seed::mix;
use pushplace::simulator::{push_forward, simulate, NoiseConfig, SimEventKind};

/// Pinned push parameters, restated here so the oracle does not read them
/// from the code under test.
pub const DELTA: f64 = 0.005;
pub const EDGE_MARGIN: f64 = 0.010;
pub const SWEEP_STEP: f64 = 0.001;
pub const CASES: u32 = 1000;
const EPS: f64 = 1e-9;

// ---------------------------------------------------------------- scenes

/// Crowded scene on a 0.6 m table. Goals are biased onto other objects'
/// start poses so that most targets have blockers.
pub fn dense_scene(seed: u64, n: usize) -> Scene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ws = Rect::from_bounds(0.0, 0.0, 0.6, 0.6);
    'retry: loop {
        let halves: Vec<HalfDims> = (0..n)
            .map(|_| HalfDims::new(rng.random_range(0.02..0.05), rng.random_range(0.02..0.05)))
            .collect();
        let mut start: Vec<Vec2> = Vec::new();
        for h in &halves {
            match place(&mut rng, &ws, *h, &halves[..start.len()], &start, |r| {
                Vec2::new(r.random_range(ws.lo.x + h.a..ws.hi.x - h.a), r.random_range(ws.lo.y + h.b..ws.hi.y - h.b))
            }) {
                Some(p) => start.push(p),
                None => continue 'retry,
            }
        }
        let mut goal: Vec<Vec2> = Vec::new();
        for (i, h) in halves.iter().enumerate() {
            let biased = n > 1 && rng.random_bool(0.6);
            let anchor = {
                let mut j = rng.random_range(0..n);
                if j == i {
                    j = (j + 1) % n;
                }
                start[j]
            };
            let p = place(&mut rng, &ws, *h, &halves[..goal.len()], &goal, |r| {
                if biased {
                    anchor + Vec2::new(r.random_range(-0.04..0.04), r.random_range(-0.04..0.04))
                } else {
                    Vec2::new(r.random_range(ws.lo.x + h.a..ws.hi.x - h.a), r.random_range(ws.lo.y + h.b..ws.hi.y - h.b))
                }
            });
            match p {
                Some(p) => goal.push(p),
                None => continue 'retry,
            }
        }
        if let Ok(s) = Scene::new(ws, halves, start, goal, 0.005) {
            return s;
        }
    }
}

fn place<R: Rng>(
    rng: &mut R,
    ws: &Rect,
    h: HalfDims,
    halves: &[HalfDims],
    placed: &[Vec2],
    mut sample: impl FnMut(&mut R) -> Vec2,
) -> Option<Vec2> {
    for _ in 0..500 {
        let p = sample(rng);
        let b = OBox::new(p, h);
        if OBox::of(ws).contains(&b, 0.0) && placed.iter().zip(halves).all(|(&q, &hq)| !b.penetrates(&OBox::new(q, hq), 0.0)) {
            return Some(p);
        }
    }
    None
}

/// Benchmark-style scene from the library generator.
pub fn bench_scene(seed: u64, n: usize) -> Scene {
    let cfg = BenchConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    generate_scene(n, &cfg, &mut rng).expect("bench scene")
}

/// Sometimes dense, sometimes benchmark-style.
pub fn mixed_scene(seed: u64, n: usize) -> Scene {
    if seed.is_multiple_of(2) {
        dense_scene(seed, n)
    } else {
        bench_scene(seed, n)
    }
}

// ---------------------------------------------------------------- oracle geometry

/// Box by corners, independent of the library's Rect.
#[derive(Clone, Copy, Debug)]
pub struct OBox {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl OBox {
    pub fn new(c: Vec2, h: HalfDims) -> Self {
        Self {
            x0: c.x - h.a,
            x1: c.x + h.a,
            y0: c.y - h.b,
            y1: c.y + h.b,
        }
    }

    pub fn of(r: &Rect) -> Self {
        Self {
            x0: r.lo.x,
            x1: r.hi.x,
            y0: r.lo.y,
            y1: r.hi.y,
        }
    }

    /// Intersection has area, after allowing `slack` of penetration.
    pub fn penetrates(&self, o: &OBox, slack: f64) -> bool {
        self.x1.min(o.x1) - self.x0.max(o.x0) > slack && self.y1.min(o.y1) - self.y0.max(o.y0) > slack
    }

    pub fn intersection_area(&self, o: &OBox) -> f64 {
        (self.x1.min(o.x1) - self.x0.max(o.x0)).max(0.0) * (self.y1.min(o.y1) - self.y0.max(o.y0)).max(0.0)
    }

    pub fn contains(&self, inner: &OBox, margin: f64) -> bool {
        inner.x0 >= self.x0 + margin - EPS
            && inner.x1 <= self.x1 - margin + EPS
            && inner.y0 >= self.y0 + margin - EPS
            && inner.y1 <= self.y1 - margin + EPS
    }

    fn shifted(&self, dx: f64, dy: f64) -> OBox {
        OBox {
            x0: self.x0 + dx,
            x1: self.x1 + dx,
            y0: self.y0 + dy,
            y1: self.y1 + dy,
        }
    }
}

/// Unit travel direction.
fn dir_of(side: Side) -> (f64, f64) {
    match side {
        Side::Left => (-1.0, 0.0),
        Side::Right => (1.0, 0.0),
        Side::Up => (0.0, 1.0),
        Side::Down => (0.0, -1.0),
    }
}

/// Trailing and leading faces along the travel direction, as signed
/// distances along it.
fn faces(b: &OBox, side: Side) -> (f64, f64) {
    match side {
        Side::Right => (b.x0, b.x1),
        Side::Left => (-b.x1, -b.x0),
        Side::Up => (b.y0, b.y1),
        Side::Down => (-b.y1, -b.y0),
    }
}

fn obox(scene: &Scene, id: ObjectId, at: Vec2) -> OBox {
    OBox::new(at, scene.half(id))
}

/// Objects whose current footprint intersects the target's goal footprint
/// with positive area.
pub fn oracle_blockers(scene: &Scene, target: ObjectId) -> Vec<ObjectId> {
    let g = obox(scene, target, scene.goal()[target]);
    (0..scene.len())
        .filter(|&j| j != target && obox(scene, j, scene.current()[j]).intersection_area(&g) > 0.0)
        .collect()
}

/// Pre-push pose: leading face `delta` behind the rearmost blocker's
/// trailing face, aligned with the goal across the push.
pub fn oracle_p0(scene: &Scene, target: ObjectId, side: Side, blockers: &[ObjectId], delta: f64) -> Vec2 {
    let lead0 = blockers
        .iter()
        .map(|&b| faces(&obox(scene, b, scene.current()[b]), side).0)
        .fold(f64::INFINITY, f64::min)
        - delta;
    target_at_lead(scene, target, side, lead0)
}

fn target_at_lead(scene: &Scene, target: ObjectId, side: Side, lead: f64) -> Vec2 {
    let g = scene.goal()[target];
    let h = scene.half(target);
    match side {
        Side::Right => Vec2::new(lead - h.a, g.y),
        Side::Left => Vec2::new(-lead + h.a, g.y),
        Side::Up => Vec2::new(g.x, lead - h.b),
        Side::Down => Vec2::new(g.x, -lead + h.b),
    }
}

pub fn oracle_p0_valid(scene: &Scene, target: ObjectId, p0: Vec2) -> bool {
    let t = obox(scene, target, p0);
    OBox::of(&scene.workspace()).contains(&t, 0.0)
        && (0..scene.len()).all(|j| j == target || !t.penetrates(&obox(scene, j, scene.current()[j]), EPS))
}

/// Discretized sweep with step `SWEEP_STEP`: the target's leading face
/// advances from `delta` behind the rearmost blocker to `delta` past the
/// goal's far face; each blocker rides on the leading face once reached.
/// Fails on any contact involving a non-blocker, any blocker-blocker
/// contact, anything leaving the table, or a blocker ending inside the
/// edge margin.
pub fn oracle_sweep(scene: &Scene, target: ObjectId, side: Side, blockers: &[ObjectId], delta: f64, margin: f64) -> Result<(), String> {
    let ws = OBox::of(&scene.workspace());
    let (dx, dy) = dir_of(side);
    let start: Vec<OBox> = (0..scene.len()).map(|j| obox(scene, j, scene.current()[j])).collect();
    let near: Vec<f64> = start.iter().map(|b| faces(b, side).0).collect();
    let lead0 = blockers.iter().map(|&b| near[b]).fold(f64::INFINITY, f64::min) - delta;
    let lead1 = faces(&obox(scene, target, scene.goal()[target]), side).1 + delta;
    let steps = ((lead1 - lead0) / SWEEP_STEP).ceil().max(0.0) as usize;
    let others: Vec<ObjectId> = (0..scene.len()).filter(|&j| j != target).collect();
    for k in 0..=steps {
        let lead = (lead0 + k as f64 * SWEEP_STEP).min(lead1);
        let t = obox(scene, target, target_at_lead(scene, target, side, lead));
        if !ws.contains(&t, 0.0) {
            return Err(format!("target leaves the table at lead {lead:.4}"));
        }
        let mut now: Vec<OBox> = start.clone();
        let mut moving = vec![false; scene.len()];
        for &b in blockers {
            let s = (lead - near[b]).max(0.0);
            now[b] = start[b].shifted(dx * s, dy * s);
            moving[b] = s > 0.0;
            if !ws.contains(&now[b], 0.0) {
                return Err(format!("blocker {b} leaves the table at lead {lead:.4}"));
            }
        }
        for &j in &others {
            if t.penetrates(&now[j], EPS) {
                return Err(format!("target contacts object {j} at lead {lead:.4}"));
            }
        }
        for &b in blockers {
            if !moving[b] {
                continue;
            }
            for &j in &others {
                if j != b && now[b].penetrates(&now[j], EPS) {
                    return Err(format!("blocker {b} contacts object {j} at lead {lead:.4}"));
                }
            }
        }
    }
    let safe = ws;
    for &b in blockers {
        let s = (lead1 - near[b]).max(0.0);
        if !safe.contains(&start[b].shifted(dx * s, dy * s), margin) {
            return Err(format!("blocker {b} ends inside the edge margin"));
        }
    }
    Ok(())
}

/// Whole-side verdict: p0 validity plus the discrete sweep.
pub fn oracle_side(scene: &Scene, target: ObjectId, side: Side, delta: f64, margin: f64) -> Result<Vec2, String> {
    let blockers = oracle_blockers(scene, target);
    if blockers.is_empty() {
        return Err("no blockers".into());
    }
    let p0 = oracle_p0(scene, target, side, &blockers, delta);
    if !oracle_p0_valid(scene, target, p0) {
        return Err("pre-push pose invalid".into());
    }
    oracle_sweep(scene, target, side, &blockers, delta, margin)?;
    Ok(p0)
}

/// No pairwise overlap and everything on the table.
pub fn oracle_arrangement_ok(scene: &Scene, poses: &Arrangement) -> bool {
    let ws = OBox::of(&scene.workspace());
    let boxes: Vec<OBox> = (0..scene.len()).map(|j| obox(scene, j, poses[j])).collect();
    boxes.iter().all(|b| ws.contains(b, 0.0))
        && (0..boxes.len()).all(|a| (a + 1..boxes.len()).all(|b| !boxes[a].penetrates(&boxes[b], EPS)))
}

/// Every (target, proposal) returned by `select_push` in `scene`.
pub fn proposals(scene: &Scene) -> Vec<PushProposal> {
    let cfg = PushConfig::default();
    scene
        .unsatisfied()
        .into_iter()
        .filter(|&t| !scene.blockers_of(t).unwrap().is_empty())
        .filter_map(|t| select_push(scene, t, &cfg).unwrap())
        .collect()
}

// ---------------------------------------------------------------- criterion 3

#[derive(Default, Debug)]
pub struct SweepAudit {
    pub targets: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub failures: Vec<String>,
}

/// Checks every blocked target of `scene` against the oracle.
pub fn audit_scene(scene: &Scene, label: &str, audit: &mut SweepAudit) {
    let cfg = PushConfig::default();
    for t in 0..scene.len() {
        let blockers = scene.blockers_of(t).unwrap();
        if blockers.is_empty() {
            continue;
        }
        audit.targets += 1;
        let mut oracle_b = oracle_blockers(scene, t);
        oracle_b.sort_unstable();
        let mut lib_b = blockers.clone();
        lib_b.sort_unstable();
        if oracle_b != lib_b {
            audit.failures.push(format!("{label} target {t}: blockers {lib_b:?} vs oracle {oracle_b:?}"));
            continue;
        }
        match select_push(scene, t, &cfg).unwrap() {
            Some(p) => {
                audit.accepted += 1;
                match oracle_side(scene, t, p.side, DELTA, EDGE_MARGIN) {
                    Ok(p0) => {
                        let d = p0 - p.pre_push;
                        if d.x.abs().max(d.y.abs()) > 1e-9 {
                            audit.failures.push(format!("{label} target {t}: pre-push {} vs oracle {p0}", p.pre_push));
                        }
                    }
                    Err(e) => audit.failures.push(format!("{label} target {t} side {}: accepted but {e}", p.side)),
                }
                for &s in Side::ALL.iter().take_while(|&&s| s != p.side) {
                    if oracle_side(scene, t, s, DELTA, EDGE_MARGIN).is_ok() {
                        audit.failures.push(format!("{label} target {t}: earlier side {s} is admissible"));
                    }
                }
            }
            None => {
                audit.rejected += 1;
                for s in Side::ALL {
                    if oracle_side(scene, t, s, DELTA, EDGE_MARGIN).is_ok() {
                        audit.failures.push(format!("{label} target {t}: rejected but side {s} passes the oracle"));
                    }
                }
            }
        }
    }
}

// ---------------------------------------------------------------- property runner

pub fn run_cases<S: Strategy>(
    name: &str,
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let cfg = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner = TestRunner::new_with_rng(cfg, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&strategy, test).map_err(|e| format!("{name}: {e}"))
}

fn side_strategy() -> impl Strategy<Value = Side> {
    prop_oneof![Just(Side::Left), Just(Side::Right), Just(Side::Up), Just(Side::Down)]
}

fn rect_strategy() -> impl Strategy<Value = Rect> {
    (-1.0..1.0f64, -1.0..1.0f64, 0.001..0.5f64, 0.001..0.5f64).prop_map(|(x, y, w, h)| Rect::from_bounds(x, y, x + w, y + h))
}

fn pcfg(push: bool, expansions: u64, seed: u64) -> PlannerConfig {
    PlannerConfig {
        push_enabled: push,
        budget: Budget::Expansions(expansions),
        seed,
        ..PlannerConfig::default()
    }
}

/// Feasible random action sequence built from the recommender.
pub fn random_actions(scene: &Scene, len: usize, seed: u64) -> Vec<Action> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = PlannerConfig::default();
    let mut s = scene.clone();
    let mut out = Vec::new();
    for _ in 0..len {
        let open = s.unsatisfied();
        if open.is_empty() {
            break;
        }
        let obj = open[rng.random_range(0..open.len())];
        if let Ok(Some(a)) = planner::recommend_action(&s, obj, &cfg, &mut rng) {
            s = s.apply_action(&a).expect("recommended actions are feasible");
            out.push(a);
        }
    }
    out
}

// ---------------------------------------------------------------- geometry

pub fn geometry_overlap_symmetric() -> Result<(), String> {
    run_cases("overlap symmetry", CASES, (rect_strategy(), rect_strategy()), |(a, b)| {
        prop_assert_eq!(a.overlaps(&b), b.overlaps(&a));
        if a.area() > 0.0 {
            prop_assert!(a.overlaps(&a));
        }
        Ok(())
    })
}

pub fn geometry_overlap_area_oracle() -> Result<(), String> {
    run_cases("overlap vs area", CASES, (rect_strategy(), rect_strategy()), |(a, b)| {
        let area = OBox::of(&a).intersection_area(&OBox::of(&b));
        prop_assert_eq!(a.overlaps(&b), area > 0.0, "{:?} {:?} area {}", a, b, area);
        Ok(())
    })
}

pub fn geometry_sweep_point_oracle() -> Result<(), String> {
    let strat = (rect_strategy(), side_strategy(), 0.0..0.5f64, prop::collection::vec((-1.5..2.0f64, -1.5..2.0f64), 16));
    run_cases("sweep vs point sampling", 10_000, strat, |(r, side, d, pts)| {
        let swept = r.sweep(side, d);
        let (dx, dy) = dir_of(side);
        for (x, y) in pts {
            // p is covered iff p - t*dir lies in r for some t in [0, d]
            let inside_at = |t: f64| {
                let (px, py) = (x - dx * t, y - dy * t);
                px >= r.lo.x && px <= r.hi.x && py >= r.lo.y && py <= r.hi.y
            };
            let (lo_t, hi_t) = if dx != 0.0 {
                let a = (x - r.hi.x) / dx;
                let b = (x - r.lo.x) / dx;
                (a.min(b), a.max(b))
            } else {
                let a = (y - r.hi.y) / dy;
                let b = (y - r.lo.y) / dy;
                (a.min(b), a.max(b))
            };
            let (t0, t1) = (lo_t.max(0.0), hi_t.min(d));
            let covered = t0 <= t1 && inside_at(0.5 * (t0 + t1));
            let got = swept.contains_point(Vec2::new(x, y));
            let near_edge = [swept.lo.x, swept.hi.x].iter().any(|e| (x - e).abs() < 1e-9)
                || [swept.lo.y, swept.hi.y].iter().any(|e| (y - e).abs() < 1e-9);
            if !near_edge {
                prop_assert_eq!(got, covered, "rect {:?} side {:?} d {} point ({}, {})", r, side, d, x, y);
            }
        }
        Ok(())
    })
}

pub fn geometry_sweep_convex() -> Result<(), String> {
    let strat = (rect_strategy(), side_strategy(), 0.0..1.0f64);
    run_cases("sweep inside convex workspace", CASES, strat, |(r, side, d)| {
        let ws = Rect::from_bounds(-1.0, -1.0, 1.5, 1.5);
        let (dx, dy) = dir_of(side);
        let moved = r.translate(Vec2::new(dx * d, dy * d));
        if ws.contains(&r) && ws.contains(&moved) {
            prop_assert!(ws.contains(&r.sweep(side, d)));
        }
        Ok(())
    })
}

// ---------------------------------------------------------------- scene

fn random_action(scene: &Scene, rng: &mut ChaCha8Rng) -> Action {
    let obj = rng.random_range(0..scene.len());
    let ws = scene.workspace();
    match rng.random_range(0..3) {
        0 => Action::PickPlace {
            object: obj,
            destination: Vec2::new(rng.random_range(ws.lo.x..ws.hi.x), rng.random_range(ws.lo.y..ws.hi.y)),
        },
        1 => {
            let side = Side::ALL[rng.random_range(0..4)];
            let blockers = oracle_blockers(scene, obj);
            let pre_push = if blockers.is_empty() {
                scene.current()[obj]
            } else {
                oracle_p0(scene, obj, side, &blockers, DELTA)
            };
            Action::PushPlace {
                object: obj,
                side,
                pre_push,
                clearance: DELTA,
            }
        }
        _ => Action::PickPlace {
            object: obj,
            destination: scene.goal()[obj],
        },
    }
}

pub fn scene_apply_action() -> Result<(), String> {
    run_cases("apply_action validity", CASES, (any::<u64>(), 2usize..9), |(seed, n)| {
        let scene = mixed_scene(seed, n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xA5);
        for _ in 0..6 {
            let a = random_action(&scene, &mut rng);
            let r1 = scene.apply_action(&a);
            let r2 = scene.apply_action(&a);
            prop_assert_eq!(&r1, &r2);
            if let Ok(next) = r1 {
                prop_assert!(oracle_arrangement_ok(&next, next.current()));
                let before = scene.satisfied_count();
                let after = next.satisfied_count();
                prop_assert!(after <= n && after + n >= before);
                if let Action::PushPlace { object, .. } = a {
                    prop_assert!(next.is_at_goal(object).unwrap());
                    prop_assert_eq!(next.current()[object], next.goal()[object]);
                }
            }
        }
        Ok(())
    })
}

// ---------------------------------------------------------------- push

pub fn push_proposals_apply_cleanly() -> Result<(), String> {
    run_cases("proposal application", CASES, (any::<u64>(), 3usize..9), |(seed, n)| {
        let scene = dense_scene(seed, n);
        for p in proposals(&scene) {
            let next = scene.apply_action(&p.action()).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert_eq!(next.current()[p.target], scene.goal()[p.target]);
            prop_assert!(oracle_arrangement_ok(&next, next.current()));
            let g = scene.goal()[p.target];
            let aligned = if matches!(p.side, Side::Left | Side::Right) { p.pre_push.y == g.y } else { p.pre_push.x == g.x };
            prop_assert!(aligned);
            for m in &p.blocker_moves {
                prop_assert!(m.displacement > 0.0);
                let after = obox(&scene, m.id, next.current()[m.id]);
                prop_assert!(OBox::of(&scene.workspace()).contains(&after, EDGE_MARGIN));
            }
            prop_assert_eq!(select_push(&scene, p.target, &PushConfig::default()).unwrap(), Some(p.clone()));
        }
        Ok(())
    })
}

pub fn push_check_counts() -> Result<(), String> {
    run_cases("side and check counts", CASES, (any::<u64>(), 3usize..9), |(seed, n)| {
        let scene = mixed_scene(seed, n);
        for t in 0..n {
            let b = scene.blockers_of(t).unwrap().len();
            if b == 0 {
                continue;
            }
            let mut stats = PushStats::default();
            select_push_with_stats(&scene, t, &PushConfig::default(), &mut stats).unwrap();
            prop_assert_eq!(stats.calls, 1);
            prop_assert!(stats.sides_evaluated <= 4);
            prop_assert!(stats.max_checks_per_side <= b);
            prop_assert!(stats.blocker_checks <= 4 * b);
            prop_assert!(stats.pre_push_validations <= stats.sides_evaluated);
        }
        Ok(())
    })
}

pub fn push_chained_contact_freedom() -> Result<(), String> {
    run_cases("chained-contact freedom", CASES, (any::<u64>(), 3usize..9), |(seed, n)| {
        let scene = dense_scene(seed, n);
        for p in proposals(&scene) {
            let b = p.blocker_ids();
            oracle_sweep(&scene, p.target, p.side, &b, DELTA, EDGE_MARGIN).map_err(TestCaseError::fail)?;
        }
        Ok(())
    })
}

// ---------------------------------------------------------------- simulator

pub fn sim_zero_noise_fidelity() -> Result<(), String> {
    run_cases("zero-noise fidelity", CASES, (any::<u64>(), 3usize..9), |(seed, n)| {
        let scene = dense_scene(seed, n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for p in proposals(&scene) {
            let a = p.action();
            let model = scene.apply_action(&a).unwrap();
            let (sim, events) = simulate(&scene, &a, &NoiseConfig::none(), &mut rng).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert!(sim.current().max_abs_diff(model.current()) <= 1e-9);
            prop_assert!(events.iter().all(|e| e.kind == SimEventKind::Pushed));
        }
        Ok(())
    })
}

/// Oracle-p0 pushes on every side for every blocked target, admissible or not.
fn forced_pushes(scene: &Scene) -> Vec<(ObjectId, Side, Vec2, Vec<ObjectId>)> {
    let mut out = Vec::new();
    for t in 0..scene.len() {
        let b = oracle_blockers(scene, t);
        if b.is_empty() {
            continue;
        }
        for s in Side::ALL {
            let p0 = oracle_p0(scene, t, s, &b, DELTA);
            if oracle_p0_valid(scene, t, p0) {
                out.push((t, s, p0, b.clone()));
            }
        }
    }
    out
}

pub fn sim_monotonicity() -> Result<(), String> {
    run_cases("momentum-free monotonicity", CASES, (any::<u64>(), 3usize..9, any::<bool>()), |(seed, n, noisy)| {
        let scene = dense_scene(seed, n);
        let noise = if noisy { NoiseConfig::default() } else { NoiseConfig::none() };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (t, side, p0, _) in forced_pushes(&scene) {
            let a = Action::PushPlace {
                object: t,
                side,
                pre_push: p0,
                clearance: DELTA,
            };
            let Ok((next, events)) = simulate(&scene, &a, &noise, &mut rng) else {
                continue;
            };
            if events.iter().any(|e| e.kind == SimEventKind::LeftTable) {
                continue;
            }
            let (dx, dy) = dir_of(side);
            for j in (0..n).filter(|&j| j != t) {
                let d = next.current()[j] - scene.current()[j];
                prop_assert!(d.x * dx + d.y * dy >= -1e-12, "object {} moved backwards", j);
                if !noisy {
                    let perp = d.x * dy.abs() + d.y * dx.abs();
                    prop_assert_eq!(perp, 0.0, "object {} drifted sideways without noise", j);
                }
            }
        }
        Ok(())
    })
}

pub fn sim_contact_ordering() -> Result<(), String> {
    run_cases("contact ordering", CASES, (any::<u64>(), 3usize..9), |(seed, n)| {
        let scene = dense_scene(seed, n);
        for (t, side, p0, _) in forced_pushes(&scene) {
            let g = scene.goal()[t];
            let (dx, dy) = dir_of(side);
            let travel = (g.x - p0.x) * dx + (g.y - p0.y) * dy + DELTA;
            let to = Vec2::new(p0.x + dx * travel, p0.y + dy * travel);
            let (arr, events) = push_forward(&scene, t, side, p0, to);
            let mut before: Vec<(ObjectId, OBox)> = vec![(t, obox(&scene, t, p0))];
            let mut after: Vec<OBox> = vec![obox(&scene, t, arr[t])];
            for e in &events {
                before.push((e.object, obox(&scene, e.object, scene.current()[e.object])));
                after.push(obox(&scene, e.object, arr[e.object]));
            }
            for a in 0..before.len() {
                for b in 0..before.len() {
                    let (fa, fb) = (faces(&before[a].1, side), faces(&before[b].1, side));
                    let cross = if dx != 0.0 {
                        before[a].1.y0.max(before[b].1.y0) < before[a].1.y1.min(before[b].1.y1)
                    } else {
                        before[a].1.x0.max(before[b].1.x0) < before[a].1.x1.min(before[b].1.x1)
                    };
                    if cross && fa.1 <= fb.0 {
                        prop_assert!(faces(&after[a], side).1 <= faces(&after[b], side).0 + 1e-9, "order of {} and {} flipped", before[a].0, before[b].0);
                    }
                }
            }
        }
        Ok(())
    })
}

pub fn sim_noisy_determinism() -> Result<(), String> {
    run_cases("noisy determinism", CASES, (any::<u64>(), 3usize..9), |(seed, n)| {
        let scene = dense_scene(seed, n);
        for (t, side, p0, _) in forced_pushes(&scene).into_iter().take(4) {
            let a = Action::PushPlace {
                object: t,
                side,
                pre_push: p0,
                clearance: DELTA,
            };
            let run = || simulate(&scene, &a, &NoiseConfig::default(), &mut ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(run(), run());
        }
        Ok(())
    })
}

pub fn sim_secondary_contact_iff() -> Result<(), String> {
    run_cases("secondary-contact completeness", CASES, (any::<u64>(), 3usize..9), |(seed, n)| {
        let scene = dense_scene(seed, n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (t, side, p0, blockers) in forced_pushes(&scene) {
            let a = Action::PushPlace {
                object: t,
                side,
                pre_push: p0,
                clearance: DELTA,
            };
            let Ok((next, events)) = simulate(&scene, &a, &NoiseConfig::none(), &mut rng) else {
                continue;
            };
            let outsider_moved = (0..n).any(|j| j != t && !blockers.contains(&j) && next.current()[j] != scene.current()[j]);
            let flagged = events.iter().any(|e| e.kind == SimEventKind::SecondaryContact);
            prop_assert_eq!(flagged, outsider_moved, "target {} side {:?}", t, side);
        }
        Ok(())
    })
}

// ---------------------------------------------------------------- planner and metrics

pub fn planner_soundness() -> Result<(), String> {
    run_cases("planner soundness", CASES, (any::<u64>(), 2usize..6, any::<bool>()), |(seed, n, push)| {
        let scene = mixed_scene(seed, n);
        let cfg = pcfg(push, 300, seed);
        let Some(plan) = planner::plan(&scene, &cfg) else {
            return Ok(());
        };
        let mut s = scene.clone();
        for a in &plan.actions {
            if !push {
                prop_assert!(!a.is_push());
            }
            s = s.apply_action(a).map_err(|e| TestCaseError::fail(e.to_string()))?;
        }
        prop_assert!(s.all_at_goal());
        let j = plan_cost(&plan, &scene, &cfg.cost, home_pose(&scene)).unwrap();
        prop_assert!((plan.total - j).abs() <= 1e-9 * j.max(1.0));
        prop_assert_eq!(plan.costs.len(), plan.len());
        prop_assert_eq!(planner::plan(&scene, &cfg), Some(plan));
        Ok(())
    })
}

pub fn planner_pick_only_without_push() -> Result<(), String> {
    run_cases("pick-only baseline", CASES, (any::<u64>(), 3usize..9), |(seed, n)| {
        let scene = dense_scene(seed, n);
        if let Some(plan) = planner::plan(&scene, &pcfg(false, 200, seed)) {
            prop_assert_eq!(plan.push_count(), 0);
        }
        Ok(())
    })
}

pub fn metrics_lambda_scaling() -> Result<(), String> {
    run_cases("lambda scaling", CASES, (any::<u64>(), 2usize..9, 0.1..10.0f64), |(seed, n, lambda)| {
        let scene = mixed_scene(seed, n);
        let plan = Plan {
            actions: random_actions(&scene, 8, seed),
            ..Plan::default()
        };
        let home = home_pose(&scene);
        let one = plan_cost(&plan, &scene, &CostModel { lambda: 1.0, ..CostModel::default() }, home).unwrap();
        let scaled = plan_cost(&plan, &scene, &CostModel { lambda, ..CostModel::default() }, home).unwrap();
        prop_assert!((scaled - lambda * one).abs() <= 1e-9 * scaled.abs().max(1.0));
        Ok(())
    })
}

pub fn metrics_additivity() -> Result<(), String> {
    run_cases("cost additivity", CASES, (any::<u64>(), 2usize..9, 0usize..9), |(seed, n, cut)| {
        let scene = mixed_scene(seed, n);
        let actions = random_actions(&scene, 8, seed);
        let cut = cut.min(actions.len());
        let model = CostModel::default();
        let home = home_pose(&scene);
        let whole = plan_cost(&Plan { actions: actions.clone(), ..Plan::default() }, &scene, &model, home).unwrap();
        let head = Plan {
            actions: actions[..cut].to_vec(),
            ..Plan::default()
        };
        let mut mid = scene.clone();
        let mut ee = home;
        for a in &head.actions {
            ee = match *a {
                Action::PickPlace { destination, .. } => destination,
                Action::PushPlace { object, .. } => mid.goal()[object],
            };
            mid = mid.apply_action(a).unwrap();
        }
        let tail = Plan {
            actions: actions[cut..].to_vec(),
            ..Plan::default()
        };
        let sum = plan_cost(&head, &scene, &model, home).unwrap() + plan_cost(&tail, &mid, &model, ee).unwrap();
        prop_assert!((whole - sum).abs() <= 1e-9 * whole.max(1.0));
        Ok(())
    })
}

// ---------------------------------------------------------------- executor

pub fn executor_properties() -> Result<(), String> {
    let strat = (any::<u64>(), 2usize..5, any::<bool>(), any::<bool>(), 1usize..16);
    run_cases("executor contract", CASES, strat, |(seed, n, push, noisy, budget)| {
        let scene = mixed_scene(seed, n);
        let cfg = ExecutorConfig {
            planner: pcfg(push, 200, seed),
            noise: if noisy { NoiseConfig::default() } else { NoiseConfig::none() },
            step_budget: budget,
            ..ExecutorConfig::default()
        };
        let r = execute_with(&scene, &cfg, seed);
        prop_assert!(r.total_actions <= budget);
        prop_assert!(r.steps.len() <= budget);
        prop_assert!((0.0..=1.0).contains(&r.success_rate));
        let final_scene = scene.with_current(r.final_poses.clone()).unwrap();
        prop_assert_eq!(r.terminated_by == Termination::AllAtGoal, final_scene.satisfied_count() == n);

        let mut state = scene.clone();
        for step in &r.steps {
            if step.skipped.is_none() {
                prop_assert!(state.apply_action(&step.executed_action).is_ok(), "executed an infeasible action");
            } else {
                prop_assert_eq!(&step.post_state_summary.poses, state.current());
            }
            state = state.with_current(step.post_state_summary.poses.clone()).unwrap();
        }

        let tight = success_rate_at(&scene, &r.final_poses, 0.002);
        let mid = success_rate_at(&scene, &r.final_poses, 0.005);
        let loose = success_rate_at(&scene, &r.final_poses, 0.02);
        prop_assert!(tight <= mid && mid <= loose);

        if !noisy && r.terminated_by == Termination::AllAtGoal {
            let first = planner::plan(&scene, &PlannerConfig { seed: mix(seed, &[0, 0]), ..cfg.planner.clone() });
            if let Some(p) = first {
                let ol = open_loop(&scene, &p.actions).unwrap();
                prop_assert_eq!(ol.max_abs_diff(&r.final_poses), 0.0);
            }
        }
        Ok(())
    })
}

// ---------------------------------------------------------------- bench

pub fn bench_determinism() -> Result<(), String> {
    run_cases("bench determinism", CASES, any::<u64>(), |seed| {
        let cfg = BenchConfig {
            object_counts: vec![3],
            scenes_per_count: 1,
            runs_per_scene: 1,
            variants: vec![
                Variant::new("MCTS", pcfg(false, 150, 0)),
                Variant::new("MCTS+PP", pcfg(true, 150, 0)),
            ],
            master_seed: seed,
            ..BenchConfig::default()
        };
        let a = run_benchmark(&cfg).unwrap();
        let b = run_benchmark(&cfg).unwrap();
        prop_assert_eq!(a, b);
        Ok(())
    })
}

pub type Invariant = (&'static str, fn() -> Result<(), String>);

pub fn invariants() -> Vec<Invariant> {
    vec![
        ("geometry: overlap symmetry", geometry_overlap_symmetric),
        ("geometry: overlap vs area oracle", geometry_overlap_area_oracle),
        ("geometry: sweep vs point oracle", geometry_sweep_point_oracle),
        ("geometry: sweep within convex workspace", geometry_sweep_convex),
        ("scene: apply_action validity and determinism", scene_apply_action),
        ("push: proposals apply cleanly", push_proposals_apply_cleanly),
        ("push: side and check counts", push_check_counts),
        ("push: chained-contact freedom", push_chained_contact_freedom),
        ("simulator: zero-noise fidelity", sim_zero_noise_fidelity),
        ("simulator: monotonicity", sim_monotonicity),
        ("simulator: contact ordering", sim_contact_ordering),
        ("simulator: noisy determinism", sim_noisy_determinism),
        ("simulator: secondary contact iff outsider moved", sim_secondary_contact_iff),
        ("planner: soundness, cost and determinism", planner_soundness),
        ("planner: pick-only without push", planner_pick_only_without_push),
        ("metrics: lambda scaling", metrics_lambda_scaling),
        ("metrics: additivity", metrics_additivity),
        ("executor: contract", executor_properties),
        ("bench: determinism", bench_determinism),
    ]
}
