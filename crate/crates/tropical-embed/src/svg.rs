//! Deterministic SVG rendering of embedded complexes.
//!
//! Rendering is the one place approximation is allowed: coordinates are
//! printed as fixed-precision decimals of the exact values (midpoints of
//! their enclosures in value-group mode). Everything else stays exact,
//! including the clip parameter where a ray meets the window border.
//! Output depends only on the complex and the options, never on
//! iteration order or time, so renders diff cleanly.

use num_rational::BigRational;
use num_traits::Zero;

use crate::error::Result;
use crate::lambda::LambdaScalar;
use crate::lattice::{Complex, Point};
use crate::pipeline::{EdgeImage, EmbeddingMap};
use crate::rat::{decimal_approx, rat};

/// Rendering options; the default draws the whole complex with a 10%
/// margin and marks every transversal crossing.
pub struct RenderOptions<'a> {
    /// Fractional digits in emitted coordinates.
    pub places: u32,
    /// Clip window `(x0, y0, x1, y1)`; rays are truncated at its border.
    /// `None` uses the vertex bounding box padded by 10%.
    pub window: Option<(BigRational, BigRational, BigRational, BigRational)>,
    /// Circle every transversal crossing.
    pub mark_crossings: bool,
    /// Highlight the graph-edge images of this map underneath the
    /// complex, to tell the realized graph from balancing structure.
    pub overlay: Option<&'a EmbeddingMap>,
}

impl Default for RenderOptions<'_> {
    fn default() -> RenderOptions<'static> {
        RenderOptions {
            places: 6,
            window: None,
            mark_crossings: true,
            overlay: None,
        }
    }
}

/// Rational stand-in for a coordinate: exact when rational, enclosure
/// midpoint otherwise.
fn mid(s: &LambdaScalar) -> BigRational {
    let (lo, hi) = s.approx_interval();
    (lo + hi) / BigRational::from_integer(2.into())
}

fn mid_point(p: &Point) -> (BigRational, BigRational) {
    (mid(&p.x), mid(&p.y))
}

/// Render a complex as standalone SVG 1.1.
///
/// Fails only when crossing marks are requested and the complex has
/// degenerately overlapping elements, where crossing counts are
/// undefined.
pub fn render_svg(complex: &Complex, opts: &RenderOptions) -> Result<String> {
    let pts: Vec<(BigRational, BigRational)> =
        complex.vertices.iter().map(mid_point).collect();

    let window = match &opts.window {
        Some(w) => w.clone(),
        None => padded_bbox(&pts),
    };
    let (x0, y0, x1, y1) = &window;
    let width = x1 - x0;
    let height = y1 - y0;
    let size = if width > height { width.clone() } else { height.clone() };
    let sw = &size / BigRational::from_integer(400.into());

    let d = |r: &BigRational| decimal_approx(r, opts.places);
    // SVG y grows downward; emit mirrored y so the plane reads normally.
    let dy = |r: &BigRational| decimal_approx(&-r, opts.places);

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"{} {} {} {}\">\n",
        d(x0),
        dy(y1),
        d(&width),
        d(&height)
    ));
    out.push_str(&format!(
        "<style>\n\
         .segment {{ stroke: #1f2937; stroke-width: {sw}; stroke-linecap: round; }}\n\
         .ray {{ stroke: #64748b; stroke-width: {sw}; stroke-linecap: round; }}\n\
         .gamma {{ stroke: #fdba74; stroke-width: {gw}; stroke-linecap: round; }}\n\
         .vertex {{ fill: #1f2937; }}\n\
         .crossing {{ fill: none; stroke: #dc2626; stroke-width: {sw}; }}\n\
         .weight {{ font: {fs}px monospace; fill: #7c2d12; text-anchor: middle; }}\n\
         </style>\n",
        sw = d(&sw),
        gw = d(&(&sw * rat(3, 1))),
        fs = d(&(&sw * rat(12, 1)))
    ));

    let seg_line = |i: usize| -> ((BigRational, BigRational), (BigRational, BigRational)) {
        let s = &complex.segments[i];
        (pts[s.a].clone(), pts[s.b].clone())
    };
    // Exact parameter where the ray leaves the window; None when it
    // never enters positive time.
    let ray_line = |i: usize| -> Option<((BigRational, BigRational), (BigRational, BigRational))> {
        let r = &complex.rays[i];
        let (ax, ay) = pts[r.apex].clone();
        let mut t: Option<BigRational> = None;
        for (a, dir, lo, hi) in [(&ax, &r.dir.m, x0, x1), (&ay, &r.dir.n, y0, y1)] {
            if dir.is_zero() {
                continue;
            }
            let dirq = BigRational::from_integer(dir.clone());
            let bound = if dir > &0.into() { hi } else { lo };
            let cand = (bound - a) / &dirq;
            t = Some(match t {
                None => cand,
                Some(prev) => {
                    if cand < prev {
                        cand
                    } else {
                        prev
                    }
                }
            });
        }
        let t = t.expect("primitive direction is nonzero");
        if t <= BigRational::zero() {
            return None;
        }
        let ex = &ax + &t * BigRational::from_integer(r.dir.m.clone());
        let ey = &ay + &t * BigRational::from_integer(r.dir.n.clone());
        Some(((ax, ay), (ex, ey)))
    };
    let line = |out: &mut String, class: &str, a: &(BigRational, BigRational), b: &(BigRational, BigRational)| {
        out.push_str(&format!(
            "<line class=\"{class}\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>\n",
            d(&a.0),
            dy(&a.1),
            d(&b.0),
            dy(&b.1)
        ));
    };

    // Graph-edge images first, as a wide highlight under everything.
    if let Some(map) = opts.overlay {
        out.push_str("<g>\n");
        for image in map.edge_images.values() {
            match image {
                EdgeImage::Chain { segments } => {
                    for &s in segments {
                        let (a, b) = seg_line(s);
                        line(&mut out, "gamma", &a, &b);
                    }
                }
                EdgeImage::Ray { ray } => {
                    if let Some((a, b)) = ray_line(*ray) {
                        line(&mut out, "gamma", &a, &b);
                    }
                }
            }
        }
        out.push_str("</g>\n");
    }

    out.push_str("<g>\n");
    for i in 0..complex.segments.len() {
        let (a, b) = seg_line(i);
        line(&mut out, "segment", &a, &b);
    }
    for i in 0..complex.rays.len() {
        if let Some((a, b)) = ray_line(i) {
            line(&mut out, "ray", &a, &b);
        }
    }
    out.push_str("</g>\n");

    out.push_str("<g>\n");
    for p in &pts {
        out.push_str(&format!(
            "<circle class=\"vertex\" cx=\"{}\" cy=\"{}\" r=\"{}\"/>\n",
            d(&p.0),
            dy(&p.1),
            d(&(&sw * rat(2, 1)))
        ));
    }
    out.push_str("</g>\n");

    // Weight labels beside the midpoint of every element of weight > 1.
    let one = num_bigint::BigInt::from(1);
    let mut labels = String::new();
    let half = rat(1, 2);
    for (i, s) in complex.segments.iter().enumerate() {
        if s.weight > one {
            let (a, b) = seg_line(i);
            let mx = (&a.0 + &b.0) * &half;
            let my = (&a.1 + &b.1) * &half;
            labels.push_str(&format!(
                "<text class=\"weight\" x=\"{}\" y=\"{}\">{}</text>\n",
                d(&(&mx + &sw * rat(8, 1))),
                dy(&my),
                s.weight
            ));
        }
    }
    for (i, r) in complex.rays.iter().enumerate() {
        if r.weight > one {
            if let Some((a, b)) = ray_line(i) {
                let mx = (&a.0 + &b.0) * &half;
                let my = (&a.1 + &b.1) * &half;
                labels.push_str(&format!(
                    "<text class=\"weight\" x=\"{}\" y=\"{}\">{}</text>\n",
                    d(&(&mx + &sw * rat(8, 1))),
                    dy(&my),
                    r.weight
                ));
            }
        }
    }
    if !labels.is_empty() {
        out.push_str("<g>\n");
        out.push_str(&labels);
        out.push_str("</g>\n");
    }

    if opts.mark_crossings {
        let crossings = complex.crossings(None)?;
        if !crossings.is_empty() {
            out.push_str("<g>\n");
            for c in &crossings {
                let (cx, cy) = mid_point(&c.point);
                out.push_str(&format!(
                    "<circle class=\"crossing\" cx=\"{}\" cy=\"{}\" r=\"{}\"/>\n",
                    d(&cx),
                    dy(&cy),
                    d(&(&sw * rat(5, 1)))
                ));
            }
            out.push_str("</g>\n");
        }
    }

    out.push_str("</svg>\n");
    Ok(out)
}

/// Vertex bounding box padded by a tenth of the larger dimension; unit
/// box fallbacks keep degenerate complexes renderable.
fn padded_bbox(
    pts: &[(BigRational, BigRational)],
) -> (BigRational, BigRational, BigRational, BigRational) {
    let Some(first) = pts.first() else {
        return (rat(0, 1), rat(0, 1), rat(1, 1), rat(1, 1));
    };
    let mut x0 = first.0.clone();
    let mut x1 = first.0.clone();
    let mut y0 = first.1.clone();
    let mut y1 = first.1.clone();
    for (x, y) in pts {
        if x < &x0 {
            x0 = x.clone();
        }
        if x > &x1 {
            x1 = x.clone();
        }
        if y < &y0 {
            y0 = y.clone();
        }
        if y > &y1 {
            y1 = y.clone();
        }
    }
    let mut size = {
        let w = &x1 - &x0;
        let h = &y1 - &y0;
        if w > h {
            w
        } else {
            h
        }
    };
    if size.is_zero() {
        size = rat(1, 1);
    }
    let pad = size / BigRational::from_integer(10.into());
    (&x0 - &pad, &y0 - &pad, &x1 + &pad, &y1 + &pad)
}
