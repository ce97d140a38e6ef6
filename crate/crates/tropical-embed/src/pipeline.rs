//! End-to-end realization of a metric graph as a balanced plane complex.
//!
//! Stages, in fixed order: validate and normalize the graph (loops and
//! parallel edges subdivided away), plan crossings for the finite part
//! (exact or heuristic), draw the planarization with straight lines,
//! reroute every crossing to primitive directions (1,0) × (0,1), scale
//! the drawing so every piece is strictly shorter than its share of the
//! edge length, insert a créneau on every piece to restore the length
//! exactly, attach one ray per infinite edge, and balance what remains
//! with explicit rays. A geometric audit then certifies the complex;
//! coincidences it finds are repaired by deterministic local moves
//! (re-aim an infinite ray, change a balancing scheme, bump a tooth
//! count) and the assembly re-runs.
//!
//! Two facts carry the construction. First, each piece's share of its
//! edge length is proportional to the piece's drawn length, so one
//! global scale makes every piece strictly short simultaneously; equal
//! shares would instead force tooth counts proportional to the ratio of
//! drawing scale to gadget scale. Second, créneaux are confined to
//! corridors around the middle third of their piece, sized from the
//! exact minimum distance to the rest of the drawing, so staircases of
//! different pieces can never meet: a staircase stays within h ≤ β/4 of
//! its middle third, two middle thirds are at least max(β₁, β₂) apart,
//! and β₁/4 + β₂/4 ≤ half that distance.
//!
//! Crossings between two finite-edge images are the complex's crossing
//! number and must match the planner's count. Crossings involving a ray
//! (créneau corner rays, balancing rays, infinite-edge rays) are
//! reported separately and are not bounded: a graph whose finite part is
//! planar can still force a ray through an edge image (attach four
//! infinite leaves to K4: routing the leaf rays to infinity subdivides
//! K5), so no minimality claim is made for them.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::creneau::{creneau_params, insert_creneau_staggered, lambda_tooth_count, CreneauSpec};
use crate::error::{Error, Result};
use crate::lambda::LambdaScalar;
use crate::lattice::{
    direction_and_length, primitive_vector, tropical_length, Complex, Point, PrimitiveVector, Ray,
    Segment,
};
use crate::layout::{
    crossing_number_exact, orthogonalize_crossings, planarize_heuristic, sq_dist_point_segment,
    straight_line_draw, Drawing, LayoutGraph, Planarization, Q, QPoint,
};
use crate::metric_graph::{normalize_simple, MetricGraph, ModificationTrace, VertexKind};
use crate::rat::{pow2_below, to_f64};
use crate::verify::{verify, Report};

/// Coordinate field for the embedding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// All lengths and coordinates rational.
    Rational,
    /// Lengths may mix rationals with declared irrational generators;
    /// vertices stay in Λ².
    Lambda,
}

/// How the crossing number of the finite part is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CrossingSolver {
    /// Exhaustive search; the count is exact or the budget error is
    /// propagated.
    Exact { budget: u64 },
    /// Randomized insertion heuristic; the count is an upper bound.
    Heuristic { seed: u64 },
}

/// Options for [`embed_isometric`].
#[derive(Clone, Debug)]
pub struct EmbedOptions {
    pub mode: Mode,
    pub solver: CrossingSolver,
    /// Optional upper bound on every corridor half-width, in tropical
    /// units. Smaller corridors force more, shorter teeth.
    pub epsilon_cap: Option<BigRational>,
}

impl Default for EmbedOptions {
    fn default() -> EmbedOptions {
        EmbedOptions {
            mode: Mode::Rational,
            solver: CrossingSolver::Exact { budget: 1 << 22 },
            epsilon_cap: None,
        }
    }
}

/// Image of one graph edge inside the complex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EdgeImage {
    /// A finite edge maps to a chain of unit-weight segments.
    Chain { segments: Vec<usize> },
    /// An infinite edge maps to a single unit-weight ray.
    Ray { ray: usize },
}

/// How the embedded complex realizes the (normalized) graph.
#[derive(Clone, Debug)]
pub struct EmbeddingMap {
    /// The embedded modification of the input graph: loops and parallel
    /// edges subdivided away.
    pub graph: MetricGraph,
    /// Replayable derivation of `graph` from the input.
    pub trace: ModificationTrace,
    /// Finite graph vertex → complex vertex.
    pub vertex_image: BTreeMap<usize, usize>,
    /// Graph edge → its image.
    pub edge_images: BTreeMap<usize, EdgeImage>,
    /// Crossings among finite-edge images claimed by the planner.
    pub claimed_crossings: u32,
    /// Whether the claim is the exact crossing number (vs. an upper
    /// bound).
    pub crossings_exact: bool,
    /// Whether the embedding was built in value-group mode.
    pub lambda_mode: bool,
}

/// The balancing ray for a vertex with direction defect `d`: `None` when
/// the vertex is already balanced, otherwise weight `gcd(d)` in the
/// primitive direction of `−d`.
pub fn balancing_ray(defect: &(BigInt, BigInt)) -> Option<(PrimitiveVector, BigInt)> {
    if defect.0.is_zero() && defect.1.is_zero() {
        return None;
    }
    let g = defect.0.gcd(&defect.1);
    Some((
        PrimitiveVector {
            m: -&defect.0 / &g,
            n: -&defect.1 / &g,
        },
        g,
    ))
}

/// The canonical scale for fitting drawn pieces under their targets:
/// the largest power of two at most 1 that is certified strictly below
/// every `target/current` ratio. Scaling by it leaves every piece
/// strictly shorter than its target, which the créneau stage needs.
pub fn scale_to_fit(current: &[LambdaScalar], targets: &[LambdaScalar]) -> Result<BigRational> {
    assert_eq!(
        current.len(),
        targets.len(),
        "one target per drawn piece length"
    );
    let mut min_ratio: Option<BigRational> = None;
    for (x, t) in current.iter().zip(targets) {
        if x.sign()? <= 0 || t.sign()? <= 0 {
            return Err(Error::InvalidTarget {
                reason: format!("lengths must be positive; got {x} under target {t}"),
            });
        }
        // Certified lower bound on t/x: both factors are positive.
        let (t_lo, _) = t.approx_interval();
        let (_, x_hi) = x.approx_interval();
        if !t_lo.is_positive() {
            return Err(Error::UndecidableSign {
                value: format!("{t}"),
            });
        }
        let r = t_lo / x_hi;
        if min_ratio.as_ref().is_none_or(|m| &r < m) {
            min_ratio = Some(r);
        }
    }
    let one = BigRational::one();
    Ok(match min_ratio {
        None => one,
        Some(r) => pow2_below(&r).min(one),
    })
}

/// Power of two near `x`, from a float estimate; the caller certifies
/// the final scale separately, so this only has to be a good guess.
fn pow2_guess(x: f64) -> BigRational {
    if !x.is_finite() || x <= 0.0 {
        return BigRational::one();
    }
    let e = x.log2().floor().clamp(-512.0, 512.0) as i64;
    if e >= 0 {
        BigRational::from_integer(BigInt::one() << (e as usize))
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << ((-e) as usize))
    }
}

/// Primitive integer direction and tropical length of a rational
/// segment.
fn q_primitive(a: &QPoint, b: &QPoint) -> ((BigInt, BigInt), Q) {
    let dx = &b.0 - &a.0;
    let dy = &b.1 - &a.1;
    assert!(!(dx.is_zero() && dy.is_zero()), "degenerate drawing piece");
    let l = dx.denom().lcm(dy.denom());
    let ix = dx.numer() * (&l / dx.denom());
    let iy = dy.numer() * (&l / dy.denom());
    let g = ix.gcd(&iy);
    ((&ix / &g, &iy / &g), BigRational::new(g, l))
}

/// All primitive directions with coordinates bounded by `bound`, sorted
/// by squared norm and then counterclockwise from (1,0).
fn candidate_directions(bound: i64) -> Vec<(BigInt, BigInt)> {
    let mut dirs = Vec::new();
    for m in -bound..=bound {
        for n in -bound..=bound {
            if (m, n) == (0, 0) {
                continue;
            }
            if m.gcd(&n) == 1 {
                dirs.push((m, n));
            }
        }
    }
    dirs.sort_by(|a, b| {
        let na = a.0 * a.0 + a.1 * a.1;
        let nb = b.0 * b.0 + b.1 * b.1;
        na.cmp(&nb).then_with(|| {
            let half = |v: &(i64, i64)| usize::from(!(v.1 > 0 || (v.1 == 0 && v.0 > 0)));
            half(a).cmp(&half(b)).then_with(|| {
                let cross = a.0 * b.1 - a.1 * b.0;
                0.cmp(&cross)
            })
        })
    });
    dirs.into_iter()
        .map(|(m, n)| (BigInt::from(m), BigInt::from(n)))
        .collect()
}

// ---------------------------------------------------------------------
// Geometric audit: exact crossing counts and coincidence detection.
// ---------------------------------------------------------------------

/// One side of a coincidence found by the audit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Party {
    Vertex(usize),
    Seg(usize),
    Ray(usize),
}

#[derive(Clone, Debug)]
struct Conflict {
    a: Party,
    b: Party,
    reason: String,
}

struct Audit {
    /// Proper segment × segment crossings: indices and exact location.
    gamma: Vec<(usize, usize, Point)>,
    conflicts: Vec<Conflict>,
}

/// Float enclosure of a scalar (midpoint and an error bound that also
/// covers the conversion).
fn fbounds(s: &LambdaScalar) -> (f64, f64) {
    let (lo, hi) = s.approx_interval();
    let flo = to_f64(&lo);
    let fhi = to_f64(&hi);
    let mid = 0.5 * (flo + fhi);
    let pad = 0.5001 * (fhi - flo).abs() + mid.abs() * 1e-12 + 1e-300;
    (mid, pad)
}

#[derive(Clone, Copy)]
struct FPoint {
    x: f64,
    y: f64,
    pad: f64,
}

fn fpoint(p: &Point) -> FPoint {
    let (x, px) = fbounds(&p.x);
    let (y, py) = fbounds(&p.y);
    FPoint {
        x,
        y,
        pad: px.max(py),
    }
}

/// Canonical key identifying the line an element lies on: the primitive
/// direction with flipped sign when needed, plus the exact offset
/// `p × dir` rendered canonically.
fn line_key(p: &Point, dir: &(BigInt, BigInt)) -> (BigInt, BigInt, String) {
    let flip = dir.0.is_negative() || (dir.0.is_zero() && dir.1.is_negative());
    let (m, n) = if flip {
        (-&dir.0, -&dir.1)
    } else {
        (dir.0.clone(), dir.1.clone())
    };
    let off = p.x.scale_int(&n).sub(&p.y.scale_int(&m));
    let mut repr = format!("{}", off.rat_part());
    for (idx, c) in off.irr_coeffs() {
        repr.push_str(&format!(";{idx}={c}"));
    }
    (m, n, repr)
}

struct SegRec {
    a: usize,
    b: usize,
    prim: (BigInt, BigInt),
    fprim: (f64, f64),
    len: LambdaScalar,
    line: (BigInt, BigInt, String),
    lo: (f64, f64),
    hi: (f64, f64),
}

struct RayRec {
    apex: usize,
    dir: (BigInt, BigInt),
    fdir: (f64, f64),
    line: (BigInt, BigInt, String),
    lo: (f64, f64),
    hi: (f64, f64),
}

/// Decisive float test that `v` lies OFF the line through `apex` with
/// direction `dir`: true only when the approximate cross product clears
/// its error bound, so a `false` means "maybe on the line, check
/// exactly". Directions too large for f64 yield an infinite pad and
/// fall through to the exact path.
fn off_line(v: &FPoint, apex: &FPoint, fdir: &(f64, f64)) -> bool {
    let dx = v.x - apex.x;
    let dy = v.y - apex.y;
    let cross = dx * fdir.1 - dy * fdir.0;
    let spread = v.pad + apex.pad + 1e-12 * (dx.abs() + dy.abs()) + 1e-300;
    cross.abs() > spread * (fdir.0.abs() + fdir.1.abs())
}

fn fdir_of(dir: &(BigInt, BigInt)) -> (f64, f64) {
    use num_traits::ToPrimitive;
    (
        dir.0.to_f64().unwrap_or(f64::INFINITY),
        dir.1.to_f64().unwrap_or(f64::INFINITY),
    )
}

/// Exact audit of an assembled complex: proper segment × segment
/// crossings are enumerated exactly, and every forbidden coincidence —
/// duplicate vertices, a vertex interior to an element, collinear
/// overlaps — is collected for the repair loop. Transversal crossings
/// that involve a ray are legal and unbounded, so they are not
/// examined here; the certification stage counts them for the report.
fn audit_complex(points: &[Point], segments: &[Segment], rays: &[Ray]) -> Result<Audit> {
    let fpts: Vec<FPoint> = points.iter().map(fpoint).collect();
    let mut conflicts = Vec::new();

    let mut segs = Vec::with_capacity(segments.len());
    for s in segments {
        let (pv, len) = direction_and_length(&points[s.a], &points[s.b])?;
        let prim = (pv.m, pv.n);
        let (pa, pb) = (&fpts[s.a], &fpts[s.b]);
        let lo = (
            pa.x.min(pb.x) - pa.pad - pb.pad,
            pa.y.min(pb.y) - pa.pad - pb.pad,
        );
        let hi = (
            pa.x.max(pb.x) + pa.pad + pb.pad,
            pa.y.max(pb.y) + pa.pad + pb.pad,
        );
        segs.push(SegRec {
            a: s.a,
            b: s.b,
            line: line_key(&points[s.a], &prim),
            fprim: fdir_of(&prim),
            prim,
            len,
            lo,
            hi,
        });
    }
    let mut rrecs = Vec::with_capacity(rays.len());
    for r in rays {
        let dir = (r.dir.m.clone(), r.dir.n.clone());
        let ap = &fpts[r.apex];
        let lo = (
            if dir.0 >= BigInt::zero() { ap.x - ap.pad } else { f64::NEG_INFINITY },
            if dir.1 >= BigInt::zero() { ap.y - ap.pad } else { f64::NEG_INFINITY },
        );
        let hi = (
            if dir.0 <= BigInt::zero() { ap.x + ap.pad } else { f64::INFINITY },
            if dir.1 <= BigInt::zero() { ap.y + ap.pad } else { f64::INFINITY },
        );
        rrecs.push(RayRec {
            apex: r.apex,
            line: line_key(&points[r.apex], &dir),
            fdir: fdir_of(&dir),
            dir,
            lo,
            hi,
        });
    }

    // Pass 1: duplicate vertices and vertices interior to elements.
    vertex_incidences(points, &fpts, &segs, &rrecs, &mut conflicts)?;

    // Pass 2: collinear overlaps within each line group.
    line_overlaps(points, &segs, &rrecs, &mut conflicts)?;

    // Pass 3: proper segment × segment crossings.
    let mut gamma = Vec::new();
    for i in 0..segs.len() {
        for j in (i + 1)..segs.len() {
            let (si, sj) = (&segs[i], &segs[j]);
            if si.a == sj.a || si.a == sj.b || si.b == sj.a || si.b == sj.b {
                continue;
            }
            if si.hi.0 < sj.lo.0 || sj.hi.0 < si.lo.0 || si.hi.1 < sj.lo.1 || sj.hi.1 < si.lo.1 {
                continue;
            }
            if si.line == sj.line {
                continue;
            }
            if let Some(p) = seg_seg_crossing(points, si, sj)? {
                gamma.push((i, j, p));
            }
        }
    }

    Ok(Audit { gamma, conflicts })
}

/// Pass 1 body: flag duplicate coordinates and any vertex lying on a
/// non-incident element.
fn vertex_incidences(
    points: &[Point],
    fpts: &[FPoint],
    segs: &[SegRec],
    rays: &[RayRec],
    conflicts: &mut Vec<Conflict>,
) -> Result<()> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| fpts[i].x.partial_cmp(&fpts[j].x).unwrap());
    let max_pad = fpts.iter().map(|p| p.pad).fold(0.0f64, f64::max);

    let candidates = |lo: f64, hi: f64| -> &[usize] {
        let start = order.partition_point(|&v| fpts[v].x < lo - max_pad - 1e-300);
        let end = order.partition_point(|&v| fpts[v].x <= hi + max_pad + 1e-300);
        &order[start..end]
    };

    // Duplicate vertices.
    for (rank, &i) in order.iter().enumerate() {
        for &j in &order[rank + 1..] {
            if fpts[j].x - fpts[i].x > fpts[i].pad + fpts[j].pad + 1e-300 {
                break;
            }
            if points[i] == points[j] {
                conflicts.push(Conflict {
                    a: Party::Vertex(i.min(j)),
                    b: Party::Vertex(i.max(j)),
                    reason: "two vertices share exact coordinates".into(),
                });
            }
        }
    }

    for (si, s) in segs.iter().enumerate() {
        for &v in candidates(s.lo.0, s.hi.0) {
            if v == s.a || v == s.b {
                continue;
            }
            let f = &fpts[v];
            if f.y + f.pad < s.lo.1 || f.y - f.pad > s.hi.1 {
                continue;
            }
            if off_line(f, &fpts[s.a], &s.fprim) {
                continue;
            }
            if point_interior_to_segment(points, v, s)? {
                conflicts.push(Conflict {
                    a: Party::Vertex(v),
                    b: Party::Seg(si),
                    reason: "vertex lies interior to a segment".into(),
                });
            }
        }
    }
    for (ri, r) in rays.iter().enumerate() {
        for &v in candidates(r.lo.0, r.hi.0) {
            if v == r.apex {
                continue;
            }
            let f = &fpts[v];
            if f.y + f.pad < r.lo.1 || f.y - f.pad > r.hi.1 {
                continue;
            }
            if off_line(f, &fpts[r.apex], &r.fdir) {
                continue;
            }
            if point_on_ray(points, v, r)? {
                conflicts.push(Conflict {
                    a: Party::Vertex(v),
                    b: Party::Ray(ri),
                    reason: "vertex lies on a ray".into(),
                });
            }
        }
    }
    Ok(())
}

/// Exact test: vertex `v` strictly between the endpoints of `s`.
fn point_interior_to_segment(points: &[Point], v: usize, s: &SegRec) -> Result<bool> {
    let (dx, dy) = points[s.a].delta(&points[v]);
    if !dx.scale_int(&s.prim.1).sub(&dy.scale_int(&s.prim.0)).is_zero() {
        return Ok(false);
    }
    let t = param_along(&dx, &dy, &s.prim);
    Ok(t.sign()? > 0 && t.sub(&s.len).sign()? < 0)
}

/// Exact test: vertex `v` on ray `r` strictly beyond the apex.
fn point_on_ray(points: &[Point], v: usize, r: &RayRec) -> Result<bool> {
    let (dx, dy) = points[r.apex].delta(&points[v]);
    if !dx.scale_int(&r.dir.1).sub(&dy.scale_int(&r.dir.0)).is_zero() {
        return Ok(false);
    }
    Ok(param_along(&dx, &dy, &r.dir).sign()? > 0)
}

/// Parameter t with `(dx, dy) = t · dir`, valid when collinear.
fn param_along(dx: &LambdaScalar, dy: &LambdaScalar, dir: &(BigInt, BigInt)) -> LambdaScalar {
    if !dir.0.is_zero() {
        dx.div_rat(&BigRational::from(dir.0.clone()))
    } else {
        dy.div_rat(&BigRational::from(dir.1.clone()))
    }
}

/// Pass 2 body: group elements by their supporting line and flag any
/// positive-length overlap. Touching at a point is legal only as a
/// shared endpoint, and endpoint coincidences are pass 1's job.
fn line_overlaps(
    points: &[Point],
    segs: &[SegRec],
    rays: &[RayRec],
    conflicts: &mut Vec<Conflict>,
) -> Result<()> {
    // Interval along the line: measured by p·dir (monotone along the
    // canonical direction). None = unbounded on that side.
    struct Iv {
        lo: Option<LambdaScalar>,
        hi: Option<LambdaScalar>,
        party: Party,
    }
    let t_of = |v: usize, key: &(BigInt, BigInt, String)| {
        points[v]
            .x
            .scale_int(&key.0)
            .add(&points[v].y.scale_int(&key.1))
    };
    let mut groups: BTreeMap<&(BigInt, BigInt, String), Vec<Iv>> = BTreeMap::new();
    for (i, s) in segs.iter().enumerate() {
        let (ta, tb) = (t_of(s.a, &s.line), t_of(s.b, &s.line));
        let (lo, hi) = match ta.try_cmp(&tb)? {
            std::cmp::Ordering::Greater => (tb, ta),
            _ => (ta, tb),
        };
        groups.entry(&s.line).or_default().push(Iv {
            lo: Some(lo),
            hi: Some(hi),
            party: Party::Seg(i),
        });
    }
    for (i, r) in rays.iter().enumerate() {
        let t = t_of(r.apex, &r.line);
        // Canonical direction has positive self-dot with the ray's
        // direction exactly when the signs agree.
        let forward = r.dir == (r.line.0.clone(), r.line.1.clone());
        let (lo, hi) = if forward { (Some(t), None) } else { (None, Some(t)) };
        groups.entry(&r.line).or_default().push(Iv {
            lo,
            hi,
            party: Party::Ray(i),
        });
    }

    for (_, mut ivs) in groups {
        if ivs.len() < 2 {
            continue;
        }
        // Sort by lower end; unbounded-below first.
        sort_fallible(&mut ivs, |a, b| match (&a.lo, &b.lo) {
            (None, None) => Ok(std::cmp::Ordering::Equal),
            (None, Some(_)) => Ok(std::cmp::Ordering::Less),
            (Some(_), None) => Ok(std::cmp::Ordering::Greater),
            (Some(x), Some(y)) => x.try_cmp(y),
        })?;
        let mut reach: Option<(Option<LambdaScalar>, Party)> = None;
        for iv in &ivs {
            if let Some((hi, holder)) = &reach {
                let overlaps = match (hi, &iv.lo) {
                    (None, _) => true,
                    (Some(_), None) => true,
                    (Some(h), Some(l)) => h.try_cmp(l)? == std::cmp::Ordering::Greater,
                };
                if overlaps {
                    conflicts.push(Conflict {
                        a: *holder,
                        b: iv.party,
                        reason: "collinear elements overlap".into(),
                    });
                }
            }
            let further = match &reach {
                None => true,
                Some((None, _)) => false,
                Some((Some(h), _)) => match &iv.hi {
                    None => true,
                    Some(x) => x.try_cmp(h)? == std::cmp::Ordering::Greater,
                },
            };
            if further {
                reach = Some((iv.hi.clone(), iv.party));
            }
        }
    }
    Ok(())
}

/// Exact interior × interior crossing of two segments on distinct,
/// non-parallel lines. Boundary contacts are pass 1 coincidences.
fn seg_seg_crossing(points: &[Point], s1: &SegRec, s2: &SegRec) -> Result<Option<Point>> {
    let det = &s1.prim.0 * &s2.prim.1 - &s1.prim.1 * &s2.prim.0;
    if det.is_zero() {
        return Ok(None);
    }
    let (rx, ry) = points[s1.a].delta(&points[s2.a]);
    let dq = BigRational::from(det);
    // t along s1, s along s2, from Cramer's rule.
    let t = rx.scale_int(&s2.prim.1).sub(&ry.scale_int(&s2.prim.0)).div_rat(&dq);
    if !(t.sign()? > 0 && t.sub(&s1.len).sign()? < 0) {
        return Ok(None);
    }
    let s = rx.scale_int(&s1.prim.1).sub(&ry.scale_int(&s1.prim.0)).div_rat(&dq);
    if !(s.sign()? > 0 && s.sub(&s2.len).sign()? < 0) {
        return Ok(None);
    }
    let pv = PrimitiveVector {
        m: s1.prim.0.clone(),
        n: s1.prim.1.clone(),
    };
    Ok(Some(points[s1.a].advance(&pv, &t)))
}

/// Merge sort with a fallible comparator (certified sign evaluations
/// can refuse to decide; the audit propagates that honestly).
fn sort_fallible<T>(
    items: &mut Vec<T>,
    cmp: impl Fn(&T, &T) -> Result<std::cmp::Ordering> + Copy,
) -> Result<()> {
    fn merge<T>(
        mut items: Vec<T>,
        cmp: impl Fn(&T, &T) -> Result<std::cmp::Ordering> + Copy,
    ) -> Result<Vec<T>> {
        if items.len() <= 1 {
            return Ok(items);
        }
        let right = items.split_off(items.len() / 2);
        let left = merge(items, cmp)?;
        let right = merge(right, cmp)?;
        let mut out = Vec::with_capacity(left.len() + right.len());
        let (mut li, mut ri) = (left.into_iter().peekable(), right.into_iter().peekable());
        loop {
            match (li.peek(), ri.peek()) {
                (None, None) => break,
                (Some(_), None) => out.push(li.next().unwrap()),
                (None, Some(_)) => out.push(ri.next().unwrap()),
                (Some(a), Some(b)) => {
                    if cmp(b, a)? == std::cmp::Ordering::Less {
                        out.push(ri.next().unwrap());
                    } else {
                        out.push(li.next().unwrap());
                    }
                }
            }
        }
        Ok(out)
    }
    let taken = std::mem::take(items);
    *items = merge(taken, cmp)?;
    Ok(())
}

// ---------------------------------------------------------------------
// The pipeline.
// ---------------------------------------------------------------------

/// Per-piece construction data, fixed once the drawing is scaled.
struct PieceData {
    chain: usize,
    ai: usize,
    bi: usize,
    a: Point,
    b: Point,
    target: LambdaScalar,
    epsilon: LambdaScalar,
    base_teeth: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum RayOwner {
    Creneau(usize),
    InfEdge(usize),
    Balance(usize),
}

/// Repair knobs, in preference order: re-aiming an infinite ray is the
/// cheapest, changing a balancing scheme next, staggering a staircase
/// slides its wave along the host (the only knob that moves the wave's
/// boundary corners), bumping a tooth count rebuilds one staircase.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Knob {
    Inf(usize),
    Bal(usize),
    Phase(usize),
    Tooth(usize),
}

struct Assembly {
    points: Vec<Point>,
    segments: Vec<Segment>,
    rays: Vec<Ray>,
    seg_owner: Vec<(usize, bool)>,        // (piece, interior-of-staircase)
    ray_owner: Vec<RayOwner>,
    vert_piece: Vec<Option<usize>>,       // staircase interior vertices
    pinned: Vec<bool>,                    // wave boundary corners: tooth bumps never move them
    chain_segments: Vec<Vec<usize>>,      // per finite edge, in order
    inf_ray: BTreeMap<usize, usize>,      // infinite edge → ray index
    base_vertex: BTreeMap<usize, usize>,  // drawing point → complex vertex
}

/// Realize `g` as a balanced plane complex with exact tropical lengths,
/// minimal (or claimed upper-bound) crossings among finite-edge images,
/// and an independently produced certification report.
pub fn embed_isometric(
    g: &MetricGraph,
    opts: &EmbedOptions,
) -> Result<(Complex, EmbeddingMap, Report)> {
    g.validate()?;
    if let Some(cap) = &opts.epsilon_cap {
        if !cap.is_positive() {
            return Err(Error::InvalidTarget {
                reason: format!("corridor cap must be positive, got {cap}"),
            });
        }
    }
    if opts.mode == Mode::Rational {
        for e in g.edge_ids() {
            if let Some(l) = g.edge(e).unwrap().length.finite() {
                if !l.is_rational() {
                    return Err(Error::NotInLambda {
                        what: format!("edge {e} has an irrational length in rational mode"),
                    });
                }
            }
        }
    }

    let (gp, trace) = normalize_simple(g)?;

    // Finite vertices in id order become layout vertices 0..n.
    let finite_vertices: Vec<usize> = gp
        .vertex_ids()
        .filter(|&v| gp.vertex_kind(v) == Some(VertexKind::Finite))
        .collect();
    let vidx: BTreeMap<usize, usize> = finite_vertices
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i))
        .collect();
    let finite_edges: Vec<usize> = gp
        .edge_ids()
        .filter(|&e| !gp.edge(e).unwrap().length.is_infinite())
        .collect();
    let inf_edges: Vec<usize> = gp
        .edge_ids()
        .filter(|&e| gp.edge(e).unwrap().length.is_infinite())
        .collect();

    let lg = LayoutGraph::new(
        finite_vertices.len(),
        finite_edges
            .iter()
            .map(|&e| {
                let ed = gp.edge(e).unwrap();
                (vidx[&ed.u], vidx[&ed.v])
            })
            .collect(),
    );

    let plan: Planarization = match opts.solver {
        CrossingSolver::Exact { budget } => crossing_number_exact(&lg, budget)?.1,
        CrossingSolver::Heuristic { seed } => planarize_heuristic(&lg, seed).1,
    };
    let drawing = straight_line_draw(&plan)?;
    let mut drawing = orthogonalize_crossings(&drawing, None)?;

    // Scale: a float guess brings the minimum target/length ratio near
    // one, then the certified fit scale finishes the job.
    let chain_lengths: Vec<LambdaScalar> = finite_edges
        .iter()
        .map(|&e| gp.edge(e).unwrap().length.finite().unwrap().clone())
        .collect();
    let mut raw_pieces: Vec<(usize, usize, usize)> = Vec::new(); // (chain, ai, bi)
    for (k, chain) in drawing.chains.iter().enumerate() {
        for w in chain.windows(2) {
            raw_pieces.push((k, w[0], w[1]));
        }
    }
    let scale = if raw_pieces.is_empty() {
        BigRational::one()
    } else {
        let mut chain_ink: Vec<Q> = vec![Q::zero(); drawing.chains.len()];
        let mut piece_trops: Vec<Q> = Vec::with_capacity(raw_pieces.len());
        for &(k, a, b) in &raw_pieces {
            let (_, trop) = q_primitive(&drawing.points[a], &drawing.points[b]);
            chain_ink[k] = &chain_ink[k] + &trop;
            piece_trops.push(trop);
        }
        let mut est = f64::INFINITY;
        for (k, l) in chain_lengths.iter().enumerate() {
            let (lo, hi) = l.approx_interval();
            let mid = 0.5 * (to_f64(&lo) + to_f64(&hi));
            est = est.min(mid / to_f64(&chain_ink[k]));
        }
        let guess = pow2_guess(est);
        let current: Vec<LambdaScalar> = piece_trops
            .iter()
            .map(|t| LambdaScalar::from_rat(t * &guess))
            .collect();
        let targets: Vec<LambdaScalar> = raw_pieces
            .iter()
            .zip(&piece_trops)
            .map(|(&(k, _, _), t)| chain_lengths[k].scale_rat(&(t / &chain_ink[k])))
            .collect();
        &guess * scale_to_fit(&current, &targets)?
    };
    for p in &mut drawing.points {
        *p = (&p.0 * &scale, &p.1 * &scale);
    }

    // Piece data on the scaled drawing: proportional targets and local
    // corridor half-widths.
    let mut chain_ink: Vec<Q> = vec![Q::zero(); drawing.chains.len()];
    let mut scaled: Vec<((BigInt, BigInt), Q)> = Vec::with_capacity(raw_pieces.len());
    for &(k, a, b) in &raw_pieces {
        let pr = q_primitive(&drawing.points[a], &drawing.points[b]);
        chain_ink[k] = &chain_ink[k] + &pr.1;
        scaled.push(pr);
    }
    let mut pieces: Vec<PieceData> = Vec::with_capacity(raw_pieces.len());
    for (j, &(k, ai, bi)) in raw_pieces.iter().enumerate() {
        let (prim, trop) = &scaled[j];
        let target = chain_lengths[k].scale_rat(&(trop / &chain_ink[k]));
        let epsilon = corridor_epsilon(&drawing, &raw_pieces, j, prim, trop, &opts.epsilon_cap);
        let trop_s = LambdaScalar::from_rat(trop.clone());
        let eps_s = LambdaScalar::from_rat(epsilon);
        let base_teeth = match opts.mode {
            Mode::Rational => creneau_params(&trop_s, &target, &eps_s)?.0,
            Mode::Lambda => 2 * lambda_tooth_count(&trop_s, &target, &eps_s)?,
        };
        let (pa, pb) = (&drawing.points[ai], &drawing.points[bi]);
        pieces.push(PieceData {
            chain: k,
            ai,
            bi,
            a: Point::from_rats(pa.0.clone(), pa.1.clone()),
            b: Point::from_rats(pb.0.clone(), pb.1.clone()),
            target,
            epsilon: eps_s,
            base_teeth,
        });
    }

    // Repair loop: rebuild with adjusted knobs until the audit is clean.
    let mut bumps: BTreeMap<usize, u64> = BTreeMap::new();
    let mut phase: BTreeMap<usize, u32> = BTreeMap::new();
    let mut inf_choice: BTreeMap<usize, usize> = BTreeMap::new();
    let mut bal_esc: BTreeMap<usize, u32> = BTreeMap::new();
    let cands = candidate_directions(12);
    let mut last_reason = String::new();
    for _attempt in 0..48 {
        let asm = assemble(
            &gp, &drawing, &pieces, &finite_edges, &inf_edges, &vidx, &bumps, &phase,
            &inf_choice, &bal_esc, &cands,
        )?;
        let audit = audit_complex(&asm.points, &asm.segments, &asm.rays)?;
        if audit.conflicts.is_empty() {
            if audit.gamma.len() != drawing.marks.len() {
                return Err(Error::Schema {
                    message: format!(
                        "assembly drifted: {} crossings among finite-edge images, planner placed {}",
                        audit.gamma.len(),
                        drawing.marks.len()
                    ),
                });
            }
            let complex = Complex {
                vertices: asm.points,
                segments: asm.segments,
                rays: asm.rays,
            };
            let mut edge_images = BTreeMap::new();
            for (k, &e) in finite_edges.iter().enumerate() {
                edge_images.insert(
                    e,
                    EdgeImage::Chain {
                        segments: asm.chain_segments[k].clone(),
                    },
                );
            }
            for (&e, &r) in &asm.inf_ray {
                edge_images.insert(e, EdgeImage::Ray { ray: r });
            }
            let vertex_image = finite_vertices
                .iter()
                .map(|&v| (v, asm.base_vertex[&vidx[&v]]))
                .collect();
            let map = EmbeddingMap {
                graph: gp,
                trace,
                vertex_image,
                edge_images,
                claimed_crossings: plan.crossings,
                crossings_exact: plan.exact,
                lambda_mode: opts.mode == Mode::Lambda,
            };
            let report = verify(&complex, &map, g);
            return Ok((complex, map, report));
        }

        // Deterministic repair: fix the first conflict via the cheapest
        // knob either side offers. Staircase elements whose position is
        // pinned under tooth bumps (the wave boundary corners and the
        // rays attached there) answer to the stagger knob instead.
        let c = &audit.conflicts[0];
        last_reason = c.reason.clone();
        let staircase_knob =
            |j: usize, v: usize| if asm.pinned[v] { Knob::Phase(j) } else { Knob::Tooth(j) };
        let knob_of = |p: &Party| -> Option<Knob> {
            match *p {
                Party::Ray(r) => Some(match asm.ray_owner[r] {
                    RayOwner::InfEdge(e) => Knob::Inf(e),
                    RayOwner::Balance(v) => Knob::Bal(v),
                    RayOwner::Creneau(j) => staircase_knob(j, asm.rays[r].apex),
                }),
                Party::Seg(s) => {
                    let (piece, interior) = asm.seg_owner[s];
                    interior.then_some(Knob::Tooth(piece))
                }
                Party::Vertex(v) => asm.vert_piece[v].map(|j| staircase_knob(j, v)),
            }
        };
        let rank = |k: &Knob| match k {
            Knob::Inf(_) => 0,
            Knob::Bal(_) => 1,
            Knob::Phase(_) => 2,
            Knob::Tooth(_) => 3,
        };
        let mut options: Vec<Knob> = [knob_of(&c.a), knob_of(&c.b)].into_iter().flatten().collect();
        options.sort_by_key(rank);
        match options.first() {
            Some(Knob::Inf(e)) => {
                *inf_choice.entry(*e).or_insert(0) += 1;
            }
            Some(Knob::Bal(v)) => {
                *bal_esc.entry(*v).or_insert(0) += 1;
            }
            Some(Knob::Phase(j)) => {
                *phase.entry(*j).or_insert(0) += 1;
            }
            Some(Knob::Tooth(j)) => {
                *bumps.entry(*j).or_insert(0) += 1;
            }
            None => {
                return Err(Error::PerturbationFailed {
                    reason: format!(
                        "coincidence between fixed drawing elements: {}",
                        c.reason
                    ),
                });
            }
        }
    }
    Err(Error::PerturbationFailed {
        reason: format!("repair budget exhausted; last coincidence: {last_reason}"),
    })
}

/// Corridor half-width for piece `j`, in tropical units: a quarter of
/// the exact minimum distance from the piece's middle third to every
/// other piece (as a power of two), divided by the direction norm. With
/// nothing else around, a quarter of the piece's own length.
fn corridor_epsilon(
    drawing: &Drawing,
    raw_pieces: &[(usize, usize, usize)],
    j: usize,
    prim: &(BigInt, BigInt),
    trop: &Q,
    cap: &Option<BigRational>,
) -> Q {
    let (_, a, b) = raw_pieces[j];
    let (pa, pb) = (&drawing.points[a], &drawing.points[b]);
    let third = |num: i64| {
        (
            &pa.0 + (&pb.0 - &pa.0) * crate::rat::rat(num, 3),
            &pa.1 + (&pb.1 - &pa.1) * crate::rat::rat(num, 3),
        )
    };
    let (m1, m2) = (third(1), third(2));
    let mut best: Option<Q> = None;
    for (i, &(_, c, d)) in raw_pieces.iter().enumerate() {
        if i == j {
            continue;
        }
        let (pc, pd) = (&drawing.points[c], &drawing.points[d]);
        let s = seg_seg_sq_dist(&m1, &m2, pc, pd);
        if best.as_ref().is_none_or(|b| &s < b) {
            best = Some(s);
        }
    }
    let norm = crate::rat::ceil_sqrt(&(&prim.0 * &prim.0 + &prim.1 * &prim.1));
    let four = Q::from_integer(4.into());
    let mut eps = match best {
        Some(b2) if b2.is_positive() => {
            crate::layout::pow2_sq_below(&b2) / &four / Q::from_integer(norm)
        }
        _ => trop / &four,
    };
    if let Some(c) = cap {
        if c < &eps {
            eps = c.clone();
        }
    }
    eps
}

/// Exact squared distance between two closed segments; zero only if
/// they intersect.
fn seg_seg_sq_dist(a: &QPoint, b: &QPoint, c: &QPoint, d: &QPoint) -> Q {
    if crate::layout::proper_crossing(a, b, c, d).is_some() {
        return Q::zero();
    }
    let m1 = sq_dist_point_segment(a, c, d);
    let m2 = sq_dist_point_segment(b, c, d);
    let m3 = sq_dist_point_segment(c, a, b);
    let m4 = sq_dist_point_segment(d, a, b);
    m1.min(m2).min(m3).min(m4)
}

/// One assembly pass with the current knob settings.
#[allow(clippy::too_many_arguments)]
fn assemble(
    gp: &MetricGraph,
    drawing: &Drawing,
    pieces: &[PieceData],
    finite_edges: &[usize],
    inf_edges: &[usize],
    vidx: &BTreeMap<usize, usize>,
    bumps: &BTreeMap<usize, u64>,
    phase: &BTreeMap<usize, u32>,
    inf_choice: &BTreeMap<usize, usize>,
    bal_esc: &BTreeMap<usize, u32>,
    cands: &[(BigInt, BigInt)],
) -> Result<Assembly> {
    // Base vertices: drawing points referenced by chains, or every
    // layout vertex when there are no finite edges.
    let referenced: BTreeSet<usize> = if drawing.chains.is_empty() {
        (0..drawing.points.len()).collect()
    } else {
        drawing.chains.iter().flatten().copied().collect()
    };
    let mut points: Vec<Point> = Vec::new();
    let mut base_vertex = BTreeMap::new();
    for &i in &referenced {
        base_vertex.insert(i, points.len());
        points.push(Point::from_rats(
            drawing.points[i].0.clone(),
            drawing.points[i].1.clone(),
        ));
    }
    let mut vert_piece: Vec<Option<usize>> = vec![None; points.len()];
    let mut pinned: Vec<bool> = vec![false; points.len()];
    let mut segments: Vec<Segment> = Vec::new();
    let mut rays: Vec<Ray> = Vec::new();
    let mut seg_owner: Vec<(usize, bool)> = Vec::new();
    let mut ray_owner: Vec<RayOwner> = Vec::new();
    let mut defects: Vec<(BigInt, BigInt)> = vec![(BigInt::zero(), BigInt::zero()); points.len()];
    let mut incident: Vec<BTreeSet<(BigInt, BigInt)>> = vec![BTreeSet::new(); points.len()];

    let add_defect = |defects: &mut Vec<(BigInt, BigInt)>, v: usize, d: (BigInt, BigInt)| {
        defects[v].0 += d.0;
        defects[v].1 += d.1;
    };

    // Stage 1: créneaux, one per piece, in piece order.
    let mut chain_segments: Vec<Vec<usize>> = vec![Vec::new(); finite_edges.len()];
    for (j, piece) in pieces.iter().enumerate() {
        let spec = CreneauSpec::new(
            piece.a.clone(),
            piece.b.clone(),
            piece.target.clone(),
            piece.epsilon.clone(),
        );
        let teeth = piece.base_teeth + 2 * bumps.get(&j).copied().unwrap_or(0);
        let inset = match phase.get(&j) {
            None => LambdaScalar::zero(),
            Some(&c) => {
                let x = tropical_length(&piece.a, &piece.b)?;
                x.div_rat(&BigRational::from(BigInt::from(1u64 << (3 + c.min(40)))))
            }
        };
        let path = insert_creneau_staggered(&spec, teeth, &inset)?;
        debug_assert_eq!(
            path.total_tropical_length()?.try_cmp(&piece.target)?,
            std::cmp::Ordering::Equal
        );
        let mut idx: Vec<usize> = Vec::with_capacity(path.points.len());
        for (pi, p) in path.points.iter().enumerate() {
            if pi == 0 {
                idx.push(base_vertex[&piece.ai]);
            } else if pi + 1 == path.points.len() {
                idx.push(base_vertex[&piece.bi]);
            } else {
                idx.push(points.len());
                points.push(p.clone());
                vert_piece.push(Some(j));
                pinned.push(pi == 1 || pi + 2 == path.points.len());
                defects.push((BigInt::zero(), BigInt::zero()));
                incident.push(BTreeSet::new());
            }
        }
        for (w, pair) in idx.windows(2).enumerate() {
            let (va, vb) = (pair[0], pair[1]);
            let pv = primitive_vector(&points[va], &points[vb])?;
            add_defect(&mut defects, va, (pv.m.clone(), pv.n.clone()));
            add_defect(&mut defects, vb, (-&pv.m, -&pv.n));
            incident[va].insert((pv.m.clone(), pv.n.clone()));
            incident[vb].insert((-&pv.m, -&pv.n));
            let interior = w != 0 && w != idx.len() - 2;
            chain_segments[piece.chain].push(segments.len());
            seg_owner.push((j, interior));
            segments.push(Segment {
                a: va,
                b: vb,
                weight: BigInt::one(),
            });
        }
        for cr in &path.rays {
            let apex = idx[cr.at];
            add_defect(
                &mut defects,
                apex,
                (&cr.dir.m * &cr.weight, &cr.dir.n * &cr.weight),
            );
            incident[apex].insert((cr.dir.m.clone(), cr.dir.n.clone()));
            ray_owner.push(RayOwner::Creneau(j));
            rays.push(Ray {
                apex,
                dir: cr.dir.clone(),
                weight: cr.weight.clone(),
            });
        }
    }

    // Stage 2: one ray per infinite edge. The last infinite edge at a
    // vertex tries the direction that would also balance it.
    let mut inf_ray = BTreeMap::new();
    let mut last_inf_at: BTreeMap<usize, usize> = BTreeMap::new();
    for &e in inf_edges {
        let ed = gp.edge(e).unwrap();
        let u = if gp.vertex_kind(ed.u) == Some(VertexKind::Finite) {
            ed.u
        } else {
            ed.v
        };
        last_inf_at.insert(base_vertex[&vidx[&u]], e);
    }
    for &e in inf_edges {
        let ed = gp.edge(e).unwrap();
        let u = if gp.vertex_kind(ed.u) == Some(VertexKind::Finite) {
            ed.u
        } else {
            ed.v
        };
        let cv = base_vertex[&vidx[&u]];
        let offset = inf_choice.get(&e).copied().unwrap_or(0);
        let mut options: Vec<(BigInt, BigInt)> = Vec::new();
        if last_inf_at.get(&cv) == Some(&e) {
            let d = &defects[cv];
            let g = d.0.gcd(&d.1);
            if g.is_one() {
                let dir = (-&d.0, -&d.1);
                if !incident[cv].contains(&dir) {
                    options.push(dir);
                }
            }
        }
        options.extend(cands.iter().filter(|c| !incident[cv].contains(*c)).cloned());
        let Some(dir) = options.into_iter().nth(offset) else {
            return Err(Error::PerturbationFailed {
                reason: format!("no free direction left for infinite edge {e}"),
            });
        };
        add_defect(&mut defects, cv, dir.clone());
        incident[cv].insert(dir.clone());
        inf_ray.insert(e, rays.len());
        ray_owner.push(RayOwner::InfEdge(e));
        rays.push(Ray {
            apex: cv,
            dir: PrimitiveVector {
                m: dir.0,
                n: dir.1,
            },
            weight: BigInt::one(),
        });
    }

    // Stage 3: balance every remaining vertex. The single-ray rule is
    // preferred; vertices under escalation, or whose single ray would
    // overlap an incident direction, split the defect into an axis ray
    // plus a complementary ray.
    for cv in 0..points.len() {
        let d = defects[cv].clone();
        if d.0.is_zero() && d.1.is_zero() {
            continue;
        }
        let esc = bal_esc.get(&cv).copied().unwrap_or(0);
        if esc == 0 {
            if let Some((dir, w)) = balancing_ray(&d) {
                let key = (dir.m.clone(), dir.n.clone());
                if !incident[cv].contains(&key) {
                    add_defect(&mut defects, cv, (&dir.m * &w, &dir.n * &w));
                    incident[cv].insert(key);
                    ray_owner.push(RayOwner::Balance(cv));
                    rays.push(Ray {
                        apex: cv,
                        dir,
                        weight: w,
                    });
                    continue;
                }
            }
        }
        let mut placed = false;
        'outer: for n in esc.max(1)..esc.max(1) + 64 {
            for s in [1i64, -1] {
                let e2 = (BigInt::zero(), BigInt::from(s));
                let w2 = BigInt::from(n);
                let r = (-&d.0, -&d.1 - &e2.1 * &w2);
                if r.0.is_zero() && r.1.is_zero() {
                    continue;
                }
                let g = r.0.gcd(&r.1);
                let e1 = (&r.0 / &g, &r.1 / &g);
                if e1 == e2 || incident[cv].contains(&e1) || incident[cv].contains(&e2) {
                    continue;
                }
                for (dir, w) in [(e1, g), (e2, w2)] {
                    add_defect(&mut defects, cv, (&dir.0 * &w, &dir.1 * &w));
                    incident[cv].insert(dir.clone());
                    ray_owner.push(RayOwner::Balance(cv));
                    rays.push(Ray {
                        apex: cv,
                        dir: PrimitiveVector {
                            m: dir.0,
                            n: dir.1,
                        },
                        weight: w,
                    });
                }
                placed = true;
                break 'outer;
            }
        }
        if !placed {
            return Err(Error::PerturbationFailed {
                reason: format!("no balancing scheme found at vertex {cv}"),
            });
        }
        debug_assert!(defects[cv].0.is_zero() && defects[cv].1.is_zero());
    }

    Ok(Assembly {
        points,
        segments,
        rays,
        seg_owner,
        ray_owner,
        vert_piece,
        pinned,
        chain_segments,
        inf_ray,
        base_vertex,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{balance_defect, tropical_length};
    use crate::rat::rat;

    fn unit() -> LambdaScalar {
        LambdaScalar::one()
    }

    #[test]
    fn balancing_ray_matches_gcd_rule() {
        let r = balancing_ray(&(BigInt::from(1), BigInt::from(1))).unwrap();
        assert_eq!((r.0.m.clone(), r.0.n.clone()), ((-1).into(), (-1).into()));
        assert_eq!(r.1, 1.into());
        let r = balancing_ray(&(BigInt::from(2), BigInt::from(4))).unwrap();
        assert_eq!((r.0.m.clone(), r.0.n.clone()), ((-1).into(), (-2).into()));
        assert_eq!(r.1, 2.into());
        assert!(balancing_ray(&(BigInt::zero(), BigInt::zero())).is_none());
    }

    #[test]
    fn balancing_ray_is_idempotent() {
        // Adding the ray zeroes the defect, so a second call returns None.
        let d = (BigInt::from(3), BigInt::from(-6));
        let (dir, w) = balancing_ray(&d).unwrap();
        let after = (&d.0 + &dir.m * &w, &d.1 + &dir.n * &w);
        assert!(balancing_ray(&after).is_none());
    }

    #[test]
    fn scale_to_fit_triangle_example() {
        let current = vec![
            LambdaScalar::from_int(3),
            LambdaScalar::from_int(3),
            LambdaScalar::from_int(3),
        ];
        let targets = vec![unit(), unit(), unit()];
        assert_eq!(scale_to_fit(&current, &targets).unwrap(), rat(1, 4));
    }

    #[test]
    fn scale_to_fit_keeps_small_drawings() {
        let current = vec![LambdaScalar::from_rat(rat(1, 3))];
        let targets = vec![unit()];
        assert_eq!(scale_to_fit(&current, &targets).unwrap(), rat(1, 1));
    }

    fn embed_all_pass(g: &MetricGraph, opts: &EmbedOptions) -> (Complex, EmbeddingMap, Report) {
        let (c, m, r) = embed_isometric(g, opts).unwrap();
        assert!(r.all_pass(), "report failures: {:?}", r.failures());
        (c, m, r)
    }

    #[test]
    fn single_edge_gets_balancing_rays_at_both_ends() {
        let mut g = MetricGraph::new();
        let a = g.add_vertex();
        let b = g.add_vertex();
        g.add_edge(a, b, LambdaScalar::from_int(5)).unwrap();
        let (c, map, report) = embed_all_pass(&g, &EmbedOptions::default());
        assert_eq!(report.crossings_on_gamma, 0);
        // Both endpoint images carry a balancing ray; the staircase
        // corners add more.
        let iu = map.vertex_image[&a];
        let iv = map.vertex_image[&b];
        assert!(c.rays.iter().any(|r| r.apex == iu));
        assert!(c.rays.iter().any(|r| r.apex == iv));
        // Chain length is exactly 5.
        let EdgeImage::Chain { segments } = &map.edge_images[&0] else {
            panic!("finite edge must map to a chain")
        };
        let mut total = LambdaScalar::zero();
        for &s in segments {
            let seg = &c.segments[s];
            total = total.add(&tropical_length(&c.vertices[seg.a], &c.vertices[seg.b]).unwrap());
        }
        assert_eq!(total, LambdaScalar::from_int(5));
    }

    #[test]
    fn triangle_with_three_leaves_is_planar_and_balanced() {
        let mut g = MetricGraph::new();
        let a = g.add_vertex();
        let b = g.add_vertex();
        let c = g.add_vertex();
        g.add_edge(a, b, unit()).unwrap();
        g.add_edge(b, c, unit()).unwrap();
        g.add_edge(c, a, unit()).unwrap();
        let (g, _) = g.add_infinite_leaf(a).unwrap();
        let (g, _) = g.add_infinite_leaf(b).unwrap();
        let (g, _) = g.add_infinite_leaf(c).unwrap();
        let (complex, map, report) = embed_all_pass(&g, &EmbedOptions::default());
        assert_eq!(report.crossings_on_gamma, 0);
        assert!(report.crossings_exact);
        for v in 0..complex.vertices.len() {
            assert_eq!(
                balance_defect(&complex, v).unwrap(),
                (BigInt::zero(), BigInt::zero())
            );
        }
        assert_eq!(map.edge_images.len(), 6);
    }

    #[test]
    fn lone_vertex_with_two_leaves_becomes_a_line() {
        let mut g = MetricGraph::new();
        let a = g.add_vertex();
        let (g, _) = g.add_infinite_leaf(a).unwrap();
        let (g, _) = g.add_infinite_leaf(a).unwrap();
        let (complex, _, report) = embed_all_pass(&g, &EmbedOptions::default());
        assert_eq!(complex.vertices.len(), 1);
        assert_eq!(complex.segments.len(), 0);
        assert_eq!(complex.rays.len(), 2);
        assert!(report.balanced);
    }

    #[test]
    fn k4_embeds_without_crossings() {
        let mut g = MetricGraph::new();
        let vs: Vec<usize> = (0..4).map(|_| g.add_vertex()).collect();
        for i in 0..4 {
            for j in (i + 1)..4 {
                g.add_edge(vs[i], vs[j], unit()).unwrap();
            }
        }
        let (_, map, report) = embed_all_pass(&g, &EmbedOptions::default());
        assert_eq!(report.crossings_on_gamma, 0);
        assert!(map.crossings_exact);
    }

    #[test]
    fn k5_embeds_with_exactly_one_counted_crossing() {
        let mut g = MetricGraph::new();
        let vs: Vec<usize> = (0..5).map(|_| g.add_vertex()).collect();
        for i in 0..5 {
            for j in (i + 1)..5 {
                g.add_edge(vs[i], vs[j], unit()).unwrap();
            }
        }
        let (_, map, report) = embed_all_pass(&g, &EmbedOptions::default());
        assert_eq!(map.claimed_crossings, 1);
        assert!(map.crossings_exact);
        assert_eq!(report.crossings_on_gamma, 1);
    }

    #[test]
    fn exact_solver_propagates_budget_exhaustion() {
        let mut g = MetricGraph::new();
        let vs: Vec<usize> = (0..5).map(|_| g.add_vertex()).collect();
        for i in 0..5 {
            for j in (i + 1)..5 {
                g.add_edge(vs[i], vs[j], unit()).unwrap();
            }
        }
        let opts = EmbedOptions {
            solver: CrossingSolver::Exact { budget: 1 },
            ..EmbedOptions::default()
        };
        match embed_isometric(&g, &opts) {
            Err(Error::BudgetExceeded { .. }) => {}
            other => panic!("expected budget exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn rational_mode_rejects_irrational_lengths() {
        use crate::lambda::{Generator, LambdaContext};
        let ctx = LambdaContext::new(vec![
            Generator::from_decimal("sqrt2", "1.41421356237309504880168872420969807857").unwrap(),
        ])
        .unwrap();
        let mut g = MetricGraph::new();
        let a = g.add_vertex();
        let b = g.add_vertex();
        g.add_edge(a, b, LambdaScalar::generator(&ctx, 0)).unwrap();
        match embed_isometric(&g, &EmbedOptions::default()) {
            Err(Error::NotInLambda { .. }) => {}
            other => panic!("expected a value-group error, got {other:?}"),
        }
    }
}
