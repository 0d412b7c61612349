//! SVG Gantt chart: one lane per UAV, one bar per action, colored by kind.

use std::fmt::Write;

use crate::model::{ActionKind, ProblemInstance, Schedule, Seconds};

const LANE_H: f64 = 28.0;
const LABEL_W: f64 = 70.0;
const PLOT_W: f64 = 900.0;
const TOP: f64 = 30.0;

pub fn action_color(kind: ActionKind) -> &'static str {
    match kind {
        ActionKind::Flight => "#4e79a7",
        ActionKind::TaskExec => "#59a14f",
        ActionKind::Hover => "#f28e2b",
        ActionKind::WaitOnGround => "#bab0ac",
        ActionKind::Recharge => "#e15759",
    }
}

const LEGEND: [(ActionKind, &str); 5] = [
    (ActionKind::Flight, "Flight"),
    (ActionKind::TaskExec, "Task execution"),
    (ActionKind::Hover, "Hover"),
    (ActionKind::WaitOnGround, "Wait on ground"),
    (ActionKind::Recharge, "Recharge"),
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Rough tick spacing giving 5-10 ticks over `span` seconds.
fn tick_step(span: Seconds) -> Seconds {
    let mut base = 1;
    loop {
        for m in [1, 2, 5] {
            if span / (base * m) <= 10 {
                return base * m;
            }
        }
        base *= 10;
    }
}

pub fn gantt_svg(schedule: &Schedule, instance: &ProblemInstance) -> String {
    let span = schedule.makespan().max(1);
    let scale = PLOT_W / span as f64;
    let lanes = schedule.lanes().len();
    let axis_y = TOP + lanes as f64 * LANE_H + 4.0;
    let legend_y = axis_y + 30.0;
    let width = LABEL_W + PLOT_W + 20.0;
    let height = legend_y + 30.0;
    let map = instance.map();

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<text x="{LABEL_W}" y="18">Makespan {} s</text>"#, schedule.makespan());
    for (u, lane) in schedule.lanes().iter().enumerate() {
        let y = TOP + u as f64 * LANE_H;
        let name = instance.uavs().get(u).map_or_else(|| format!("UAV {u}"), |v| v.id.clone());
        let _ = writeln!(s, r#"<text x="4" y="{:.1}">{}</text>"#, y + LANE_H / 2.0 + 4.0, escape(&name));
        for a in lane {
            let x = LABEL_W + a.start as f64 * scale;
            let w = (a.duration() as f64 * scale).max(0.5);
            let mut title = format!("{} {}-{} {}->{}", a.kind.as_str(), a.start, a.end, map.id(a.from), map.id(a.to));
            if let Some(t) = a.task {
                let _ = write!(title, " task {t}");
            }
            let _ = write!(
                s,
                r#"<rect x="{x:.2}" y="{:.1}" width="{w:.2}" height="{:.1}" fill="{}"><title>{}</title></rect>"#,
                y + 3.0,
                LANE_H - 6.0,
                action_color(a.kind),
                escape(&title)
            );
            if let (Some(t), true) = (a.task, w > 14.0) {
                let _ = write!(s, r#"<text x="{:.2}" y="{:.1}" fill="white">{t}</text>"#, x + 3.0, y + LANE_H / 2.0 + 4.0);
            }
            s.push('\n');
        }
    }
    let _ = writeln!(
        s,
        r#"<line x1="{LABEL_W}" y1="{axis_y}" x2="{:.1}" y2="{axis_y}" stroke="black"/>"#,
        LABEL_W + PLOT_W
    );
    let step = tick_step(span);
    let mut t = 0;
    while t <= span {
        let x = LABEL_W + t as f64 * scale;
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{axis_y}" x2="{x:.2}" y2="{:.1}" stroke="black"/><text x="{x:.2}" y="{:.1}" text-anchor="middle">{t}</text>"#,
            axis_y + 4.0,
            axis_y + 16.0
        );
        t += step;
    }
    let mut lx = LABEL_W;
    for (kind, label) in LEGEND {
        let _ = writeln!(
            s,
            r#"<rect x="{lx:.1}" y="{legend_y}" width="12" height="12" fill="{}"/><text x="{:.1}" y="{:.1}">{label}</text>"#,
            action_color(kind),
            lx + 16.0,
            legend_y + 10.0
        );
        lx += 130.0;
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{eat, sample};

    #[test]
    fn ticks() {
        assert_eq!(tick_step(10), 1);
        assert_eq!(tick_step(100), 10);
        assert_eq!(tick_step(4963), 500);
        assert_eq!(tick_step(1500), 200);
    }

    #[test]
    fn svg_has_a_bar_per_action_and_a_legend() {
        let inst = sample::twelve_task_instance();
        let seq = inst.graph().topological_order().unwrap();
        let sched = eat::build_schedule(&seq, &inst).unwrap();
        let svg = gantt_svg(&sched, &inst);
        let actions: usize = sched.lanes().iter().map(Vec::len).sum();
        // bars plus 5 legend swatches
        assert_eq!(svg.matches("<rect").count(), actions + 5);
        for name in ["UAV1", "UAV2", "UAV3", "Wait on ground", "Recharge"] {
            assert!(svg.contains(name));
        }
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert_eq!(svg, gantt_svg(&sched, &inst));
    }
}
