//! Static SVG scatter plots of 2-D projections.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::dataset::{Dataset, ItemClass};
use crate::error::{Error, Result};
use crate::projection::Projection;
use crate::scalar::Real;

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 720.0;
const MARGIN: f64 = 40.0;
const LEGEND_WIDTH: f64 = 200.0;
const GLYPH: f64 = 5.0;

const PALETTE: [&str; 12] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22",
    "#17becf", "#393b79", "#637939",
];

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            _ => out.push(c),
        }
    }
    out
}

/// SVG markup for one glyph of `class` centred at (x, y).
fn glyph(class: ItemClass, x: f64, y: f64, fill: &str, title: &str) -> String {
    let r = GLYPH;
    let shape = match class {
        ItemClass::Meaningful => format!(r#"<circle class="glyph" cx="{x:.2}" cy="{y:.2}" r="{r}" fill="{fill}">"#),
        ItemClass::Structural => format!(
            r#"<rect class="glyph" x="{:.2}" y="{:.2}" width="{}" height="{}" fill="{fill}">"#,
            x - r,
            y - r,
            2.0 * r,
            2.0 * r
        ),
        ItemClass::Borderline => format!(
            r#"<polygon class="glyph" points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{fill}">"#,
            x,
            y - r,
            x + r,
            y,
            x,
            y + r,
            x - r,
            y
        ),
        ItemClass::Functional => format!(
            r#"<polygon class="glyph" points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{fill}">"#,
            x,
            y - r,
            x + r,
            y + r,
            x - r,
            y + r
        ),
        ItemClass::Compositional => format!(
            r#"<polygon class="glyph" points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="none" stroke="{fill}" stroke-width="2">"#,
            x - r,
            y - r,
            x + r,
            y + r,
            x + r,
            y - r,
            x - r,
            y + r
        ),
    };
    let close = if shape.starts_with("<circle") {
        "</circle>"
    } else if shape.starts_with("<rect") {
        "</rect>"
    } else {
        "</polygon>"
    };
    format!("{shape}<title>{}</title>{close}", escape(title))
}

/// Scatter plot: colour by category, shape by item class, one text label per
/// item, legend on the right. Output depends only on the inputs.
pub fn plot_svg<T: Real>(projection: &Projection<T>, dataset: &Dataset) -> Result<String> {
    if projection.out_dims() != 2 {
        return Err(Error::param(format!(
            "plots need a 2-D projection, got {} dimensions; use the explorer UI for 3-D views",
            projection.out_dims()
        )));
    }
    let ds = dataset.restrict_to(&projection.labels)?;
    let categories: Vec<&str> = ds
        .items
        .iter()
        .map(|i| i.category.as_str())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let colour = |cat: &str| {
        let i = categories.iter().position(|c| *c == cat).unwrap_or(0);
        PALETTE[i % PALETTE.len()]
    };
    let classes: BTreeSet<ItemClass> = ds.items.iter().map(|i| i.item_class).collect();

    let xs: Vec<f64> = projection.coords.column(0).iter().map(|v| v.as_f64()).collect();
    let ys: Vec<f64> = projection.coords.column(1).iter().map(|v| v.as_f64()).collect();
    let range = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi > lo { (lo, hi - lo) } else { (lo - 0.5, 1.0) }
    };
    let (x0, wx) = range(&xs);
    let (y0, wy) = range(&ys);
    let plot_w = WIDTH - LEGEND_WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let sx = |x: f64| MARGIN + (x - x0) / wx * plot_w;
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / wy * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">"#
    );
    let _ = writeln!(
        s,
        r#"<title>{} · {}</title>"#,
        escape(&projection.dataset_id),
        projection.method
    );
    let _ = writeln!(s, r##"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>"##);
    let _ = writeln!(s, r#"<g class="points">"#);
    for (i, item) in ds.items.iter().enumerate() {
        let (px, py) = (sx(xs[i]), sy(ys[i]));
        let title = if item.gloss.is_empty() {
            format!("{} [{}]", item.label, item.item_class)
        } else {
            format!("{} — {} [{}]", item.label, item.gloss, item.item_class)
        };
        let _ = writeln!(s, "{}", glyph(item.item_class, px, py, colour(&item.category), &title));
        let _ = writeln!(
            s,
            r#"<text class="label" x="{:.2}" y="{:.2}" font-size="10">{}</text>"#,
            px + GLYPH + 2.0,
            py + 3.0,
            escape(&item.label)
        );
    }
    let _ = writeln!(s, "</g>");
    let lx = WIDTH - LEGEND_WIDTH + 10.0;
    let mut ly = MARGIN;
    let _ = writeln!(s, r#"<g class="legend">"#);
    for cat in &categories {
        let _ = writeln!(
            s,
            r#"<rect class="legend-color" x="{lx}" y="{:.2}" width="12" height="12" fill="{}"/><text x="{}" y="{:.2}" font-size="12">{}</text>"#,
            ly - 10.0,
            colour(cat),
            lx + 18.0,
            ly,
            escape(cat)
        );
        ly += 18.0;
    }
    ly += 10.0;
    for class in classes {
        let mark = glyph(class, lx + 6.0, ly - 4.0, "#444444", class.as_str()).replacen("class=\"glyph\"", "class=\"legend-shape\"", 1);
        let _ = writeln!(s, r#"{mark}<text x="{}" y="{:.2}" font-size="12">{}</text>"#, lx + 18.0, ly, class);
        ly += 18.0;
    }
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    Ok(s)
}
