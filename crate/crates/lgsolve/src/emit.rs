//! Output emission: sampled CSV fields, level-line SVG plots, and loading of
//! CSV fields back in as verification candidates. Output bytes are
//! deterministic for fixed inputs.

use crate::chord::SolutionField;
use crate::geom::{pt, Bbox, Point};
use crate::geometry::{Domain, PointLocation};
use crate::oracle::ScalarField;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

/// Write `x,y,u` rows on a regular n-by-n sample grid over the domain
/// bounding box (rows only for in-domain points).
pub fn write_grid_csv(
    field: &SolutionField,
    path: &Path,
    n: usize,
) -> std::io::Result<()> {
    let mut out = String::from("x,y,u\n");
    let bb = Bbox::of(field.domain.verts());
    for j in 0..n {
        for i in 0..n {
            let p = pt(
                bb.lo.x + (bb.hi.x - bb.lo.x) * (i as f64 + 0.5) / n as f64,
                bb.lo.y + (bb.hi.y - bb.lo.y) * (j as f64 + 0.5) / n as f64,
            );
            if field.domain.point_location(p) == PointLocation::Inside {
                out.push_str(&format!("{:.6},{:.6},{:.6}\n", p.x, p.y, field.eval(p)));
            }
        }
    }
    write_file(path, out.as_bytes())
}

/// Level-line plot: the domain outline plus one group of chords per level,
/// color-mapped by level; escaping chords get arrow markers.
pub fn write_levels_svg(
    field: &SolutionField,
    path: &Path,
) -> std::io::Result<()> {
    let domain = &field.domain;
    let bb = Bbox::of(domain.verts()).inflate(0.05 * domain.diameter());
    let w = bb.hi.x - bb.lo.x;
    let h = bb.hi.y - bb.lo.y;
    let scale = 800.0 / w.max(h);
    let map = |p: Point| -> (f64, f64) {
        ((p.x - bb.lo.x) * scale, (bb.hi.y - p.y) * scale)
    };
    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{:.0}\" height=\"{:.0}\" viewBox=\"0 0 {:.2} {:.2}\">\n",
        w * scale,
        h * scale,
        w * scale,
        h * scale
    ));
    s.push_str("<defs><marker id=\"arrow\" markerWidth=\"8\" markerHeight=\"8\" refX=\"6\" refY=\"3\" orient=\"auto\"><path d=\"M0,0 L6,3 L0,6 z\" fill=\"#444444\"/></marker></defs>\n");
    // Domain outline.
    s.push_str("<polygon points=\"");
    for v in decimated_outline(domain) {
        let (x, y) = map(v);
        s.push_str(&format!("{:.2},{:.2} ", x, y));
    }
    s.push_str("\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1.5\"/>\n");
    let levels = &field.family.levels;
    if !levels.is_empty() {
        let (tmin, tmax) = (levels[0].t, levels.last().unwrap().t);
        for l in levels {
            let frac = if tmax > tmin { (l.t - tmin) / (tmax - tmin) } else { 0.5 };
            let color = colormap(frac);
            s.push_str(&format!("<g stroke=\"{}\" stroke-width=\"1\">\n", color));
            for (i, (a, b)) in l.chords().iter().enumerate() {
                let (x1, y1) = map(*a);
                let (x2, y2) = map(*b);
                let synthetic = {
                    let (ia, ib) = l.matching.pairs[i];
                    domain.param_is_synthetic(l.crossings[ia].s)
                        || domain.param_is_synthetic(l.crossings[ib].s)
                };
                if synthetic {
                    s.push_str(&format!(
                        "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" marker-end=\"url(#arrow)\"/>\n"
                    ));
                } else {
                    s.push_str(&format!(
                        "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\"/>\n"
                    ));
                }
            }
            s.push_str("</g>\n");
        }
        // Legend.
        s.push_str(&format!(
            "<text x=\"8\" y=\"16\" font-size=\"14\" fill=\"#000000\">levels {:.3} .. {:.3}</text>\n",
            tmin, tmax
        ));
    }
    s.push_str("</svg>\n");
    write_file(path, s.as_bytes())
}

fn decimated_outline(domain: &Arc<Domain>) -> Vec<Point> {
    let v = domain.verts();
    let stride = (v.len() / 512).max(1);
    v.iter().step_by(stride).cloned().collect()
}

/// Blue-to-red map with fixed hex formatting (deterministic bytes).
fn colormap(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let r = (255.0 * t) as u8;
    let b = (255.0 * (1.0 - t)) as u8;
    let g = (96.0 * (1.0 - (2.0 * t - 1.0).abs())) as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

fn write_file(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(bytes)
}

/// A scalar field loaded from a `x,y,u` CSV sample grid; evaluation is
/// nearest-sample, coverage is within one grid step of a sample.
pub struct CsvField {
    pts: Vec<(Point, f64)>,
    step: f64,
}

impl CsvField {
    pub fn load(path: &Path) -> std::io::Result<CsvField> {
        let text = std::fs::read_to_string(path)?;
        let mut pts = Vec::new();
        for line in text.lines().skip(1) {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 3 {
                continue;
            }
            let x: f64 = cols[0].trim().parse().map_err(bad_csv)?;
            let y: f64 = cols[1].trim().parse().map_err(bad_csv)?;
            let u: f64 = cols[2].trim().parse().map_err(bad_csv)?;
            pts.push((pt(x, y), u));
        }
        if pts.len() < 9 {
            return Err(std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                "too few samples in CSV field",
            ));
        }
        // Estimate the grid step from the smallest positive x-gap.
        let mut xs: Vec<f64> = pts.iter().map(|(p, _)| p.x).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut step = f64::INFINITY;
        for w in xs.windows(2) {
            let d = w[1] - w[0];
            if d > 1e-12 {
                step = step.min(d);
            }
        }
        Ok(CsvField { pts, step })
    }

    fn nearest(&self, p: Point) -> Option<(f64, f64)> {
        let mut best: Option<(f64, f64)> = None;
        for (q, u) in &self.pts {
            let d = q.dist(p);
            if best.map_or(true, |(bd, _)| d < bd) {
                best = Some((d, *u));
            }
        }
        best
    }
}

fn bad_csv(e: std::num::ParseFloatError) -> std::io::Error {
    std::io::Error::new(std::io::ErrorKind::InvalidData, e)
}

impl ScalarField for CsvField {
    fn eval_at(&self, p: Point) -> f64 {
        self.nearest(p).map(|(_, u)| u).unwrap_or(0.0)
    }

    fn covers(&self, p: Point, _margin: f64) -> bool {
        // Coverage is the sample grid itself; the grid step plays the role
        // of the margin.
        self.nearest(p).map_or(false, |(d, _)| d <= 1.5 * self.step)
    }
}
