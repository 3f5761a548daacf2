//! SVG rendering of a grid, its backbone and a cycle.
//!
//! The unit square maps onto a 1000 x 1000 viewBox with the y axis pointing
//! up. Output is deterministic: coordinates are printed with two decimals
//! and elements are emitted in a fixed order. Layers are `<g>` elements with
//! ids `tiles`, `grid`, `edges`, `bridges`, `nodes` and `legend`.

use std::fmt::Write;

use crate::cycle::cycle_edges;
use crate::grid::{Backbone, GridState};
use crate::sampling::{Instance, Point, HALF};

const SIZE: f64 = 1000.0;

fn sx(x: f64) -> f64 {
    (x + HALF) * SIZE
}

fn sy(y: f64) -> f64 {
    (HALF - y) * SIZE
}

/// Renders nodes, tiles (sparse shaded, backbone highlighted), grid lines
/// and, when `order` is given, the cycle with bridges (length `>= r_n`)
/// dashed.
pub fn render_svg(inst: &Instance, grid: &GridState, backbone: Option<&Backbone>, order: Option<&[usize]>, r_n: f64) -> String {
    let k = grid.k();
    let side = SIZE / k as f64;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 1000 1000" width="1000" height="1000">"#
    );
    let _ = writeln!(s, r##"<rect x="0" y="0" width="1000" height="1000" fill="#ffffff"/>"##);

    let on_backbone = |c| backbone.is_some_and(|b| b.cells.binary_search(&c).is_ok());
    let _ = writeln!(s, r#"<g id="tiles">"#);
    for c in grid.cells() {
        let fill = if on_backbone(c) {
            "#f6d36b"
        } else if !grid.is_dense(c) {
            "#d0d0d0"
        } else {
            continue;
        };
        let x = c.col as f64 * side;
        let y = SIZE - (c.row + 1) as f64 * side;
        let _ = writeln!(s, r#"<rect x="{x:.2}" y="{y:.2}" width="{side:.2}" height="{side:.2}" fill="{fill}"/>"#);
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r##"<g id="grid" stroke="#9a9a9a" stroke-width="0.5">"##);
    for i in 0..=k {
        let v = i as f64 * side;
        let _ = writeln!(s, r#"<line x1="{v:.2}" y1="0.00" x2="{v:.2}" y2="1000.00"/>"#);
        let _ = writeln!(s, r#"<line x1="0.00" y1="{v:.2}" x2="1000.00" y2="{v:.2}"/>"#);
    }
    let _ = writeln!(s, "</g>");

    let pts = &inst.points;
    let line = |s: &mut String, a: &Point, b: &Point| {
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#, sx(a.x), sy(a.y), sx(b.x), sy(b.y));
    };
    let (mut short, mut long) = (String::new(), String::new());
    if let Some(order) = order {
        for (i, j) in cycle_edges(order) {
            let (a, b) = (&pts[i], &pts[j]);
            line(if a.dist(b) >= r_n { &mut long } else { &mut short }, a, b);
        }
    }
    let _ = writeln!(s, r##"<g id="edges" stroke="#1f4e9c" stroke-width="1.2" fill="none">"##);
    s.push_str(&short);
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r##"<g id="bridges" stroke="#d62728" stroke-width="1.6" stroke-dasharray="6 4" fill="none">"##);
    s.push_str(&long);
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r##"<g id="nodes" fill="#111111">"##);
    for p in pts {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.00"/>"#, sx(p.x), sy(p.y));
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r#"<g id="legend" font-family="sans-serif" font-size="14">"#);
    let _ = writeln!(
        s,
        r##"<rect x="10" y="10" width="230" height="118" fill="#ffffff" fill-opacity="0.85" stroke="#555555"/>"##
    );
    let items = [
        (r##"<rect x="20" y="20" width="16" height="16" fill="#d0d0d0"/>"##, "sparse tile"),
        (r##"<rect x="20" y="44" width="16" height="16" fill="#f6d36b"/>"##, "backbone tile"),
        (r##"<line x1="18" y1="76" x2="38" y2="76" stroke="#1f4e9c" stroke-width="1.2"/>"##, "edge"),
        (
            r##"<line x1="18" y1="100" x2="38" y2="100" stroke="#d62728" stroke-width="1.6" stroke-dasharray="6 4"/>"##,
            "bridge",
        ),
    ];
    for (i, (mark, label)) in items.iter().enumerate() {
        let _ = writeln!(s, "{mark}");
        let _ = writeln!(s, r#"<text x="46" y="{}">{label}</text>"#, 33 + 24 * i);
    }
    let _ = writeln!(s, r#"<text x="20" y="124">K = {k}, n = {}, r_n = {r_n:.5}</text>"#, pts.len());
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    s
}
