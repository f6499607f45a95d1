//! Tabletop rearrangement planning with pick-and-place and push-placement
//! primitives.

pub mod bench;
pub mod cli;
pub mod executor;
pub mod geometry;
pub mod metrics;
pub mod planner;
pub mod primitives;
pub mod render;
pub mod scene;
pub mod seed;
pub mod simulator;

pub use geometry::{HalfDims, Rect, Side, Vec2};
pub use metrics::{percent_reduction, plan_cost, CostModel};
pub use planner::{plan, Budget, Plan, PlannerConfig};
pub use primitives::{select_push, PushConfig, PushProposal};
pub use scene::{Action, Arrangement, ObjectId, Scene, SceneError};
pub use simulator::{simulate, NoiseConfig, SimEvent, SimEventKind};
