//! Deterministic SVG output for scenes, plan frames and benchmark charts.
//! Every coordinate is printed with six decimals.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::bench::Summary;
use crate::geometry::{Rect, Vec2};
use crate::scene::{Action, Scene};

pub const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

const MARGIN: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderStyle {
    pub show_goals: bool,
    pub show_gripper: bool,
    /// Pixels per meter.
    pub scale: f64,
}

impl Default for RenderStyle {
    fn default() -> Self {
        Self {
            show_goals: true,
            show_gripper: true,
            scale: 500.0,
        }
    }
}

impl RenderStyle {
    pub fn validate(&self) -> Result<(), String> {
        if self.scale.is_finite() && self.scale > 0.0 {
            Ok(())
        } else {
            Err(format!("scale {} must be > 0", self.scale))
        }
    }
}

pub fn color_of(scene: &Scene, id: usize) -> String {
    scene.objects()[id]
        .color
        .clone()
        .unwrap_or_else(|| PALETTE[id % PALETTE.len()].to_string())
}

struct Canvas<'a> {
    ws: Rect,
    style: &'a RenderStyle,
    out: String,
}

impl<'a> Canvas<'a> {
    fn new(ws: Rect, style: &'a RenderStyle) -> Self {
        let w = ws.width() * style.scale + 2.0 * MARGIN;
        let h = ws.height() * style.scale + 2.0 * MARGIN;
        let mut out = String::new();
        writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.6}" height="{h:.6}" viewBox="0 0 {w:.6} {h:.6}">"#
        )
        .unwrap();
        Self { ws, style, out }
    }

    fn x(&self, x: f64) -> f64 {
        MARGIN + (x - self.ws.lo.x) * self.style.scale
    }

    fn y(&self, y: f64) -> f64 {
        MARGIN + (self.ws.hi.y - y) * self.style.scale
    }

    fn rect(&mut self, r: &Rect, attrs: &str) {
        let (x, y) = (self.x(r.lo.x), self.y(r.hi.y));
        let (w, h) = (r.width() * self.style.scale, r.height() * self.style.scale);
        writeln!(self.out, r#"  <rect x="{x:.6}" y="{y:.6}" width="{w:.6}" height="{h:.6}" {attrs}/>"#).unwrap();
    }

    fn line(&mut self, a: Vec2, b: Vec2, attrs: &str) {
        let (x1, y1, x2, y2) = (self.x(a.x), self.y(a.y), self.x(b.x), self.y(b.y));
        writeln!(self.out, r#"  <line x1="{x1:.6}" y1="{y1:.6}" x2="{x2:.6}" y2="{y2:.6}" {attrs}/>"#).unwrap();
    }

    fn circle(&mut self, c: Vec2, r: f64, attrs: &str) {
        let (cx, cy) = (self.x(c.x), self.y(c.y));
        writeln!(self.out, r#"  <circle cx="{cx:.6}" cy="{cy:.6}" r="{r:.6}" {attrs}/>"#).unwrap();
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

fn draw_scene(c: &mut Canvas, scene: &Scene) {
    let ws = scene.workspace();
    c.rect(&ws, r##"fill="none" stroke="#000000" stroke-width="2""##);
    if c.style.show_goals {
        for i in 0..scene.len() {
            let attrs = format!(
                r#"fill="none" stroke="{}" stroke-width="1.5" stroke-dasharray="4 3" class="goal" data-id="{i}""#,
                color_of(scene, i)
            );
            c.rect(&scene.goal_footprint(i), &attrs);
        }
    }
    for i in 0..scene.len() {
        let attrs = format!(
            r##"fill="{}" fill-opacity="0.8" stroke="#000000" stroke-width="0.5" class="object" data-id="{i}""##,
            color_of(scene, i)
        );
        c.rect(&scene.footprint(i), &attrs);
    }
}

fn draw_action(c: &mut Canvas, scene: &Scene, action: &Action) {
    let id = action.object();
    let from = scene.current()[id];
    match *action {
        Action::PickPlace { destination, .. } => {
            c.rect(
                &scene.footprint_at(id, destination),
                r##"fill="none" stroke="#000000" stroke-width="1" stroke-dasharray="1 2" class="destination""##,
            );
            c.line(from, destination, r##"stroke="#000000" stroke-width="1" class="transfer""##);
        }
        Action::PushPlace { pre_push, side, .. } => {
            let goal = scene.goal()[id];
            c.rect(
                &scene.footprint_at(id, pre_push),
                r##"fill="none" stroke="#000000" stroke-width="1" stroke-dasharray="1 2" class="pre-push""##,
            );
            c.line(from, pre_push, r##"stroke="#000000" stroke-width="1" class="transfer""##);
            let end = pre_push + side.direction() * side.project(goal - pre_push);
            c.line(pre_push, end, r##"stroke="#d62728" stroke-width="2" class="push""##);
        }
    }
    if c.style.show_gripper {
        c.circle(from, 4.0, r##"fill="#000000" class="gripper""##);
    }
}

pub fn scene_svg(scene: &Scene, style: &RenderStyle) -> String {
    let mut c = Canvas::new(scene.workspace(), style);
    draw_scene(&mut c, scene);
    c.finish()
}

/// Scene with `action` drawn on top: the destination or pre-push outline,
/// the transfer path, and the push stroke.
pub fn action_svg(scene: &Scene, action: &Action, style: &RenderStyle) -> String {
    let mut c = Canvas::new(scene.workspace(), style);
    draw_scene(&mut c, scene);
    draw_action(&mut c, scene, action);
    c.finish()
}

/// One frame per action (state before it, with the action overlaid) and a
/// final frame of the end state. Stops at the first infeasible action.
pub fn plan_frames(scene: &Scene, actions: &[Action], style: &RenderStyle) -> Result<Vec<String>, crate::scene::SceneError> {
    let mut frames = Vec::with_capacity(actions.len() + 1);
    let mut s = scene.clone();
    for a in actions {
        frames.push(action_svg(&s, a, style));
        s = s.apply_action(a)?;
    }
    frames.push(scene_svg(&s, style));
    Ok(frames)
}

/// Mean and standard deviation of one cell column.
type Stat = fn(&crate::bench::CellSummary) -> (f64, f64);

/// Two bar-chart panels, mean cost and mean actions per N, one bar per
/// variant with a one-std whisker.
pub fn summary_chart(summary: &Summary) -> String {
    let mut variants: Vec<&str> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for c in &summary.cells {
        if !variants.contains(&c.variant.as_str()) {
            variants.push(&c.variant);
        }
        if !counts.contains(&c.n) {
            counts.push(c.n);
        }
    }
    counts.sort_unstable();
    let (pw, ph, pad) = (360.0, 240.0, 40.0);
    let width = 2.0 * pw + 3.0 * pad;
    let height = ph + 2.0 * pad + 20.0;
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.6}" height="{height:.6}" viewBox="0 0 {width:.6} {height:.6}">"#
    )
    .unwrap();
    let panels: [(&str, Stat); 2] = [
        ("mean cost", |c| (c.cost_mean, c.cost_std)),
        ("mean actions", |c| (c.actions_mean, c.actions_std)),
    ];
    for (k, (title, get)) in panels.iter().enumerate() {
        let x0 = pad + k as f64 * (pw + pad);
        let y0 = pad;
        let top = summary
            .cells
            .iter()
            .map(|c| {
                let (m, s) = get(c);
                m + s
            })
            .filter(|v| v.is_finite())
            .fold(0.0, f64::max)
            .max(1e-9);
        writeln!(out, r#"  <text x="{:.6}" y="{:.6}" font-size="14">{title}</text>"#, x0, y0 - 10.0).unwrap();
        writeln!(
            out,
            r##"  <rect x="{x0:.6}" y="{y0:.6}" width="{pw:.6}" height="{ph:.6}" fill="none" stroke="#000000"/>"##
        )
        .unwrap();
        let group = pw / counts.len().max(1) as f64;
        let bar = group * 0.8 / variants.len().max(1) as f64;
        for (gi, n) in counts.iter().enumerate() {
            let gx = x0 + gi as f64 * group + group * 0.1;
            writeln!(
                out,
                r#"  <text x="{:.6}" y="{:.6}" font-size="12">N={n}</text>"#,
                gx + group * 0.3,
                y0 + ph + 16.0
            )
            .unwrap();
            for (vi, v) in variants.iter().enumerate() {
                let Some(c) = summary.cells.iter().find(|c| c.variant == *v && c.n == *n) else {
                    continue;
                };
                let (m, s) = get(c);
                if !m.is_finite() {
                    continue;
                }
                let h = m / top * ph;
                let bx = gx + vi as f64 * bar;
                writeln!(
                    out,
                    r#"  <rect x="{bx:.6}" y="{:.6}" width="{bar:.6}" height="{h:.6}" fill="{}" class="bar" data-variant="{v}"/>"#,
                    y0 + ph - h,
                    PALETTE[vi % PALETTE.len()]
                )
                .unwrap();
                let cx = bx + bar / 2.0;
                let (lo, hi) = ((m - s).max(0.0) / top * ph, (m + s) / top * ph);
                writeln!(
                    out,
                    r##"  <line x1="{cx:.6}" y1="{:.6}" x2="{cx:.6}" y2="{:.6}" stroke="#000000"/>"##,
                    y0 + ph - lo,
                    y0 + ph - hi
                )
                .unwrap();
            }
        }
    }
    for (vi, v) in variants.iter().enumerate() {
        let lx = pad + vi as f64 * 120.0;
        let ly = height - 12.0;
        writeln!(
            out,
            r#"  <rect x="{lx:.6}" y="{:.6}" width="10.000000" height="10.000000" fill="{}"/>"#,
            ly - 10.0,
            PALETTE[vi % PALETTE.len()]
        )
        .unwrap();
        writeln!(out, r#"  <text x="{:.6}" y="{ly:.6}" font-size="12">{v}</text>"#, lx + 14.0).unwrap();
    }
    out.push_str("</svg>\n");
    out
}
