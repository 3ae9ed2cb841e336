//! Self-contained SVG heatmaps.
//!
//! Output depends only on the input values, so identical inputs give
//! identical bytes.

use crate::error::{Error, Result};
use crate::graphon::StepGraphon;
use crate::regions::{Label, RegionMap};
use std::fmt::Write as _;
use std::path::Path;

/// Pixel size of the whole image along each axis.
const IMAGE_PX: usize = 600;

/// Stratum colours, cycled by level.
const PALETTE: [&str; 8] = [
    "#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#1f78b4",
];

fn header(out: &mut String, cells: usize, extra: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{IMAGE_PX}" height="{IMAGE_PX}" viewBox="0 0 {cells} {cells}" shape-rendering="crispEdges"{extra}>"#
    );
}

/// Grey level for `v`: `min` is white, `max` black.
fn shade(v: f64, lo: f64, hi: f64) -> u8 {
    if hi <= lo {
        return 128;
    }
    let t = ((v - lo) / (hi - lo)).clamp(0.0, 1.0);
    (255.0 - 255.0 * t).round() as u8
}

/// One rect per cell, row `i` drawn at height `i` (the origin is top-left).
pub fn heatmap_svg(w: &StepGraphon, title: &str) -> String {
    let n = w.n();
    let (lo, hi) = (w.min(), w.max());
    let constant = lo == hi;
    let mut out = String::with_capacity(n * n * 64 + 512);
    header(
        &mut out,
        n,
        &format!(
            r#" data-min="{lo:e}" data-max="{hi:e}" data-constant="{constant}""#
        ),
    );
    let _ = writeln!(out, "<title>{}</title>", escape(title));
    let _ = writeln!(
        out,
        r#"<metadata>{{"min":{},"max":{},"constant":{constant},"n":{n}}}</metadata>"#,
        json_num(lo),
        json_num(hi)
    );
    for i in 0..n {
        for j in 0..n {
            let g = shade(w.get(i, j), lo, hi);
            let _ = writeln!(
                out,
                r##"<rect x="{j}" y="{i}" width="1" height="1" fill="#{g:02x}{g:02x}{g:02x}"/>"##
            );
        }
    }
    let _ = writeln!(
        out,
        r#"<text x="0.5" y="{}" font-size="{}" fill="red">min {lo:.6} max {hi:.6}</text>"#,
        n as f64 - 0.5,
        (n as f64 / 30.0).max(0.2)
    );
    out.push_str("</svg>\n");
    out
}

/// Region labels: strata coloured by level, grey pixels grey, below-diagonal white.
pub fn regions_svg(rm: &RegionMap, title: &str) -> String {
    let r = rm.raster;
    let mut out = String::with_capacity(r * r * 64 + 512);
    header(
        &mut out,
        r,
        &format!(
            r#" data-m="{}" data-big-m="{}" data-alpha="{:e}""#,
            rm.m, rm.big_m, rm.alpha
        ),
    );
    let _ = writeln!(out, "<title>{}</title>", escape(title));
    for i in 0..r {
        for j in 0..r {
            let p = i * r + j;
            let fill = match rm.labels[p] {
                Label::Outside => continue,
                Label::Grey => "#9e9e9e",
                Label::Stratum => PALETTE[rm.k_index[p] % PALETTE.len()],
            };
            // x along the first coordinate, y increasing upwards.
            let _ = writeln!(
                out,
                r#"<rect x="{i}" y="{}" width="1" height="1" fill="{fill}"/>"#,
                r - 1 - j
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

fn json_num(v: f64) -> String {
    serde_json::to_string(&v).unwrap_or_else(|_| "null".into())
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn write_svg(svg: &str, path: &Path) -> Result<()> {
    std::fs::write(path, svg).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
