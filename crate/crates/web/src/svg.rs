//! Draws a class graph as SVG with vertices evenly spaced on a circle.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use templet::graph::{EdgeStyle, Graph, Shape};

const NODE_RADIUS: f64 = 34.0;
const MARGIN: f64 = 70.0;

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

fn layout_radius(n: usize) -> f64 {
    if n <= 1 {
        0.0
    } else {
        // keep neighbours about three node radii apart
        (3.0 * NODE_RADIUS * n as f64 / (2.0 * PI)).max(110.0)
    }
}

fn dash(style: EdgeStyle) -> (&'static str, f64) {
    match style {
        EdgeStyle::Solid => ("", 1.5),
        EdgeStyle::Dotted => (" stroke-dasharray=\"2 4\"", 1.5),
        EdgeStyle::Bold => ("", 3.0),
        EdgeStyle::Dashed => (" stroke-dasharray=\"8 5\"", 1.5),
    }
}

pub fn render(g: &Graph) -> String {
    let n = g.nodes.len();
    let r = layout_radius(n);
    let size = 2.0 * (r + NODE_RADIUS + MARGIN);
    let c = size / 2.0;
    let pos: HashMap<&str, (f64, f64)> = g
        .nodes
        .iter()
        .enumerate()
        .map(|(i, node)| {
            let a = -PI / 2.0 + 2.0 * PI * i as f64 / n.max(1) as f64;
            (node.id.as_str(), (c + r * a.cos(), c + r * a.sin()))
        })
        .collect();

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {size:.0} {size:.0}\" \
         width=\"{size:.0}\" height=\"{size:.0}\" font-family=\"sans-serif\" font-size=\"11\">\
         <defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"10\" refY=\"5\" \
         markerWidth=\"7\" markerHeight=\"7\" orient=\"auto-start-reverse\">\
         <path d=\"M0,0 L10,5 L0,10 z\" fill=\"#444\"/></marker></defs>"
    );
    let _ = write!(svg, "<title>{}</title>", escape(&g.name));

    // Parallel edges between the same pair get increasing curvature.
    let mut seen: HashMap<(&str, &str), usize> = HashMap::new();
    for e in &g.edges {
        let (Some(&(x1, y1)), Some(&(x2, y2))) = (pos.get(e.from.as_str()), pos.get(e.to.as_str())) else {
            continue;
        };
        let (dasharray, width) = dash(e.style);
        let k = seen.entry((e.from.as_str(), e.to.as_str())).or_insert(0);
        *k += 1;
        let (path, lx, ly) = if e.from == e.to {
            // loop above the node, away from the centre
            let (dx, dy) = (x1 - c, y1 - c);
            let len = dx.hypot(dy).max(1.0);
            let (ux, uy) = if r == 0.0 { (0.0, -1.0) } else { (dx / len, dy / len) };
            let (px, py) = (-uy, ux);
            let (sx, sy) = (x1 + NODE_RADIUS * (ux + 0.5 * px), y1 + NODE_RADIUS * (uy + 0.5 * py));
            let (ex, ey) = (x1 + NODE_RADIUS * (ux - 0.5 * px), y1 + NODE_RADIUS * (uy - 0.5 * py));
            let reach = NODE_RADIUS * (1.6 + 0.5 * *k as f64);
            let (qx, qy) = (x1 + ux * (NODE_RADIUS + reach), y1 + uy * (NODE_RADIUS + reach));
            (
                format!(
                    "M{sx:.1},{sy:.1} C{:.1},{:.1} {:.1},{:.1} {ex:.1},{ey:.1}",
                    qx + px * reach * 0.6,
                    qy + py * reach * 0.6,
                    qx - px * reach * 0.6,
                    qy - py * reach * 0.6
                ),
                qx,
                qy,
            )
        } else {
            let (dx, dy) = (x2 - x1, y2 - y1);
            let len = dx.hypot(dy).max(1.0);
            let (ux, uy) = (dx / len, dy / len);
            let (sx, sy) = (x1 + ux * NODE_RADIUS, y1 + uy * NODE_RADIUS);
            let (ex, ey) = (x2 - ux * NODE_RADIUS, y2 - uy * NODE_RADIUS);
            let bend = 18.0 * *k as f64;
            let (mx, my) = ((sx + ex) / 2.0 - uy * bend, (sy + ey) / 2.0 + ux * bend);
            (
                format!("M{sx:.1},{sy:.1} Q{mx:.1},{my:.1} {ex:.1},{ey:.1}"),
                mx,
                my,
            )
        };
        let _ = write!(
            svg,
            "<path d=\"{path}\" fill=\"none\" stroke=\"#444\" stroke-width=\"{width}\"{dasharray} \
             marker-end=\"url(#arrow)\"/>"
        );
        if let Some(l) = &e.label {
            let _ = write!(
                svg,
                "<text x=\"{lx:.1}\" y=\"{ly:.1}\" text-anchor=\"middle\" fill=\"#036\" \
                 paint-order=\"stroke\" stroke=\"#fff\" stroke-width=\"3\">{}</text>",
                escape(l)
            );
        }
    }

    for node in &g.nodes {
        let (x, y) = pos[node.id.as_str()];
        match node.shape {
            Shape::DoubleCircle => {
                let _ = write!(
                    svg,
                    "<circle cx=\"{x:.1}\" cy=\"{y:.1}\" r=\"{NODE_RADIUS}\" fill=\"#fff4d6\" stroke=\"#333\"/>\
                     <circle cx=\"{x:.1}\" cy=\"{y:.1}\" r=\"{}\" fill=\"none\" stroke=\"#333\"/>",
                    NODE_RADIUS - 4.0
                );
            }
            Shape::Box => {
                let _ = write!(
                    svg,
                    "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{}\" height=\"{}\" rx=\"4\" fill=\"#e4efff\" stroke=\"#333\"/>",
                    x - NODE_RADIUS,
                    y - NODE_RADIUS * 0.7,
                    2.0 * NODE_RADIUS,
                    1.4 * NODE_RADIUS
                );
            }
            Shape::Ellipse => {
                let _ = write!(
                    svg,
                    "<ellipse cx=\"{x:.1}\" cy=\"{y:.1}\" rx=\"{NODE_RADIUS}\" ry=\"{}\" fill=\"#eef7ea\" stroke=\"#333\"/>",
                    NODE_RADIUS * 0.7
                );
            }
        }
        let label = node.label.as_deref().unwrap_or(&node.id);
        let _ = write!(
            svg,
            "<text x=\"{x:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
            y + 4.0,
            escape(label)
        );
    }
    svg.push_str("</svg>");
    svg
}
