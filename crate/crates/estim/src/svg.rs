//! Standalone SVG heatmaps: one colored cell per PE with a numeric
//! label, plus a color-scale legend. Output is deterministic for
//! identical input down to the byte.

use std::fmt::Write as _;

use cgra_core::power::{HeatScope, HeatUnit, Heatmap};

use crate::report::fmt_sig6;

const CELL: f64 = 72.0;
const GAP: f64 = 4.0;
const MARGIN: f64 = 16.0;
const TITLE_H: f64 = 28.0;
const LEGEND_H: f64 = 52.0;

/// Five-stop dark-blue to yellow ramp, linearly interpolated.
const RAMP: [(u8, u8, u8); 5] = [
    (13, 8, 135),
    (126, 3, 168),
    (204, 71, 120),
    (248, 149, 64),
    (240, 249, 33),
];

fn color_at(t: f64) -> (u8, u8, u8) {
    let t = t.clamp(0.0, 1.0) * (RAMP.len() - 1) as f64;
    let idx = (t.floor() as usize).min(RAMP.len() - 2);
    let frac = t - idx as f64;
    let (r0, g0, b0) = RAMP[idx];
    let (r1, g1, b1) = RAMP[idx + 1];
    let mix = |a: u8, b: u8| (a as f64 + (b as f64 - a as f64) * frac).round() as u8;
    (mix(r0, r1), mix(g0, g1), mix(b0, b1))
}

fn hex(rgb: (u8, u8, u8)) -> String {
    format!("#{:02x}{:02x}{:02x}", rgb.0, rgb.1, rgb.2)
}

fn coord(x: f64) -> String {
    // Fixed two decimals: coordinates must not wobble across platforms.
    format!("{x:.2}")
}

fn title_for(map: &Heatmap) -> String {
    let unit = match map.unit {
        HeatUnit::AvgPowerMw => "average power [mW]",
        HeatUnit::EnergyPj => "energy [pJ]",
    };
    match map.scope {
        HeatScope::Kernel => format!("whole kernel, {unit}"),
        HeatScope::Step(n) => format!("step {n}, {unit}"),
        HeatScope::Instruction(pc) => format!("instruction {pc}, {unit}"),
    }
}

fn xml_escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn heatmap_svg(map: &Heatmap) -> String {
    let rows = map.grid.rows();
    let cols = map.grid.cols();
    let cells = map.grid.cells();
    let lo = cells.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = cells.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // Flat also covers empty grids (lo = +inf, hi = -inf) and NaN cells.
    let flat = hi.partial_cmp(&lo) != Some(core::cmp::Ordering::Greater);
    let t_of = |v: f64| if flat { 0.5 } else { (v - lo) / (hi - lo) };

    let grid_w = cols as f64 * CELL + (cols - 1) as f64 * GAP;
    let grid_h = rows as f64 * CELL + (rows - 1) as f64 * GAP;
    let width = MARGIN * 2.0 + grid_w;
    let height = MARGIN * 2.0 + TITLE_H + grid_h + LEGEND_H;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" \
         viewBox=\"0 0 {} {}\" font-family=\"monospace\">",
        coord(width),
        coord(height),
        coord(width),
        coord(height),
    );
    let _ = writeln!(svg, "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>");
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-size=\"14\" fill=\"#000000\">{}</text>",
        coord(MARGIN),
        coord(MARGIN + 12.0),
        xml_escape(&title_for(map)),
    );

    let top = MARGIN + TITLE_H;
    for row in 0..rows {
        for col in 0..cols {
            let v = *map.grid.get(row, col);
            let t = t_of(v);
            let x = MARGIN + col as f64 * (CELL + GAP);
            let y = top + row as f64 * (CELL + GAP);
            let fill = hex(color_at(t));
            let text_fill = if t > 0.55 { "#1a1a1a" } else { "#f5f5f5" };
            let _ = writeln!(
                svg,
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>",
                coord(x),
                coord(y),
                coord(CELL),
                coord(CELL),
                fill,
            );
            let _ = writeln!(
                svg,
                "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\" fill=\"{}\">{}</text>",
                coord(x + CELL / 2.0),
                coord(y + CELL / 2.0 + 4.0),
                text_fill,
                fmt_sig6(v),
            );
        }
    }

    // Legend: gradient bar with min/max labels.
    let legend_y = top + grid_h + 18.0;
    let bar_w = grid_w;
    let steps = 48;
    let step_w = bar_w / steps as f64;
    for i in 0..steps {
        let t = (i as f64 + 0.5) / steps as f64;
        let _ = writeln!(
            svg,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"12\" fill=\"{}\"/>",
            coord(MARGIN + i as f64 * step_w),
            coord(legend_y),
            coord(step_w + 0.5),
            hex(color_at(t)),
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"#000000\">{}</text>",
        coord(MARGIN),
        coord(legend_y + 26.0),
        fmt_sig6(lo),
    );
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\" fill=\"#000000\">{}</text>",
        coord(MARGIN + bar_w),
        coord(legend_y + 26.0),
        fmt_sig6(hi),
    );
    svg.push_str("</svg>\n");
    svg
}
