//! Exact plane lattice geometry: primitive vectors, tropical length,
//! weighted complexes, balancing, and crossing enumeration.
//!
//! Coordinates are [`LambdaScalar`]s, so the same predicates serve the
//! rational case and the value-group case. Every predicate factors through
//! integer direction vectors: directions of rational-slope elements are
//! coprime integer pairs, so line intersections, collinearity, and overlap
//! tests only ever scale Λ-elements by integers and rationals. No product
//! of two Λ-scalars is formed anywhere.
//!
//! The tropical length of a segment is the factor `α > 0` with
//! `α · (primitive direction) = endpoint difference`; it is the intrinsic
//! metric on tropical curves and the quantity every gadget downstream
//! preserves exactly.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::lambda::LambdaScalar;

/// A point of the plane with value-group coordinates.
#[derive(Clone, PartialEq, Eq)]
pub struct Point {
    pub x: LambdaScalar,
    pub y: LambdaScalar,
}

impl Point {
    pub fn new(x: LambdaScalar, y: LambdaScalar) -> Point {
        Point { x, y }
    }

    pub fn from_rats(x: BigRational, y: BigRational) -> Point {
        Point {
            x: LambdaScalar::from_rat(x),
            y: LambdaScalar::from_rat(y),
        }
    }

    pub fn from_ints(x: i64, y: i64) -> Point {
        Point {
            x: LambdaScalar::from_int(x),
            y: LambdaScalar::from_int(y),
        }
    }

    /// Componentwise difference `to - self`.
    pub fn delta(&self, to: &Point) -> (LambdaScalar, LambdaScalar) {
        (to.x.sub(&self.x), to.y.sub(&self.y))
    }

    /// `self + λ·dir` with an integer direction; exact, stays in Λ².
    pub fn advance(&self, dir: &PrimitiveVector, lambda: &LambdaScalar) -> Point {
        Point {
            x: self.x.add(&lambda.scale_int(&dir.m)),
            y: self.y.add(&lambda.scale_int(&dir.n)),
        }
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Coprime integer direction vector, never zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PrimitiveVector {
    pub m: BigInt,
    pub n: BigInt,
}

impl PrimitiveVector {
    /// Normalize an integer vector to its primitive (divide by the gcd).
    pub fn from_ints(m: i64, n: i64) -> Result<PrimitiveVector> {
        PrimitiveVector::from_bigints(BigInt::from(m), BigInt::from(n))
    }

    pub fn from_bigints(m: BigInt, n: BigInt) -> Result<PrimitiveVector> {
        if m.is_zero() && n.is_zero() {
            return Err(Error::DegenerateSegment);
        }
        let g = m.gcd(&n);
        Ok(PrimitiveVector {
            m: m / &g,
            n: n / &g,
        })
    }

    pub fn neg(&self) -> PrimitiveVector {
        PrimitiveVector {
            m: -&self.m,
            n: -&self.n,
        }
    }

    /// The fixed perpendicular `(-n, m)`: a quarter turn, also primitive.
    pub fn perp(&self) -> PrimitiveVector {
        PrimitiveVector {
            m: -&self.n,
            n: self.m.clone(),
        }
    }

    /// Integer cross product `self.m·other.n - self.n·other.m`.
    pub fn cross(&self, other: &PrimitiveVector) -> BigInt {
        &self.m * &other.n - &self.n * &other.m
    }
}

impl fmt::Debug for PrimitiveVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.m, self.n)
    }
}

/// The coprime integer direction positively proportional to `to - from`.
pub fn primitive_vector(from: &Point, to: &Point) -> Result<PrimitiveVector> {
    let (dir, _) = direction_and_length(from, to)?;
    Ok(dir)
}

/// The unique `α > 0` with `α · primitive = to - from`.
pub fn tropical_length(from: &Point, to: &Point) -> Result<LambdaScalar> {
    let (_, len) = direction_and_length(from, to)?;
    Ok(len)
}

/// Primitive direction plus tropical length in one pass.
///
/// For value-group points the direction is recovered from coefficient
/// proportionality: `to - from = α·(m,n)` with `α ∈ Λ` forces the x and y
/// displacement to be rational multiples of each other, and the multiple is
/// read off any shared nonzero coefficient. Displacements that are not
/// rationally proportional have no primitive direction (irrational slope)
/// and are rejected.
pub fn direction_and_length(from: &Point, to: &Point) -> Result<(PrimitiveVector, LambdaScalar)> {
    let (dx, dy) = from.delta(to);
    if dx.is_zero() && dy.is_zero() {
        return Err(Error::DegenerateSegment);
    }
    if dx.is_zero() {
        let s = dy.sign()?;
        let dir = PrimitiveVector {
            m: BigInt::zero(),
            n: BigInt::from(s),
        };
        let len = dy.scale_int(&BigInt::from(s));
        return Ok((dir, len));
    }
    if dy.is_zero() {
        let s = dx.sign()?;
        let dir = PrimitiveVector {
            m: BigInt::from(s),
            n: BigInt::zero(),
        };
        let len = dx.scale_int(&BigInt::from(s));
        return Ok((dir, len));
    }
    // Ratio dy/dx from the first nonzero coefficient of dx, then verified
    // structurally across every coefficient.
    let cx_cy: Option<(BigRational, BigRational)> = if !dx.rat_part().is_zero() {
        Some((dx.rat_part().clone(), dy.rat_part().clone()))
    } else {
        dx.irr_coeffs()
            .next()
            .map(|(idx, c)| (c.clone(), dy.coeff(idx)))
    };
    let (cx, cy) = cx_cy.expect("nonzero scalar has a nonzero coefficient");
    let ratio = cy / cx;
    if dx.scale_rat(&ratio) != dy {
        return Err(Error::Schema {
            message: "segment has irrational slope; no primitive direction exists".into(),
        });
    }
    // dy/dx = p/q in lowest terms with q > 0, so (m,n) = ±(q,p).
    let (p, q) = (ratio.numer().clone(), ratio.denom().clone());
    let sign_dx = dx.sign()?;
    let (m, n) = if sign_dx > 0 { (q, p) } else { (-q, -p) };
    let len = dx.div_rat(&BigRational::from(m.clone()));
    Ok((PrimitiveVector { m, n }, len))
}

/// Bounded weighted edge of a complex, endpoints given as vertex indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub a: usize,
    pub b: usize,
    /// Positive integer weight.
    pub weight: BigInt,
}

/// Weighted ray: an apex vertex plus a primitive direction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ray {
    pub apex: usize,
    pub dir: PrimitiveVector,
    /// Positive integer weight.
    pub weight: BigInt,
}

/// A weighted rational 1-dimensional polyhedral complex.
///
/// Fields are public plain data so external files can be loaded and audited
/// even when corrupt; all invariants (balancing, weights, geometry) are
/// checked by functions, never assumed from the types.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Complex {
    pub vertices: Vec<Point>,
    pub segments: Vec<Segment>,
    pub rays: Vec<Ray>,
}

/// Identifier of one element of a complex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Element {
    Segment(usize),
    Ray(usize),
}

/// A transversal interior intersection of two elements.
#[derive(Clone, Debug)]
pub struct Crossing {
    pub first: Element,
    pub second: Element,
    pub point: Point,
}

/// Exact integer defect `Σ weight · outgoing primitive` at one vertex;
/// `(0,0)` iff the balancing condition holds there.
pub fn balance_defect(c: &Complex, vertex: usize) -> Result<(BigInt, BigInt)> {
    if vertex >= c.vertices.len() {
        return Err(Error::UnknownVertex { vertex });
    }
    let mut dx = BigInt::zero();
    let mut dy = BigInt::zero();
    let mut add = |dir: &PrimitiveVector, w: &BigInt| {
        dx += &dir.m * w;
        dy += &dir.n * w;
    };
    for s in &c.segments {
        if s.a == vertex {
            let dir = primitive_vector(&c.vertices[s.a], &c.vertices[s.b])?;
            add(&dir, &s.weight);
        } else if s.b == vertex {
            let dir = primitive_vector(&c.vertices[s.b], &c.vertices[s.a])?;
            add(&dir, &s.weight);
        }
    }
    for r in &c.rays {
        if r.apex == vertex {
            add(&r.dir, &r.weight);
        }
    }
    Ok((dx, dy))
}

/// True iff the balancing condition holds at every vertex.
pub fn is_balanced(c: &Complex) -> Result<bool> {
    for v in 0..c.vertices.len() {
        let (dx, dy) = balance_defect(c, v)?;
        if !dx.is_zero() || !dy.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Parametric form of one element: `start + t·dir` for `t ∈ [0, len]`,
/// with `len = None` meaning a ray (`t ∈ [0, ∞)`).
struct Param {
    elem: Element,
    start: Point,
    dir: PrimitiveVector,
    len: Option<LambdaScalar>,
    // Conservative rational bounding box; None is unbounded.
    x_lo: Option<BigRational>,
    x_hi: Option<BigRational>,
    y_lo: Option<BigRational>,
    y_hi: Option<BigRational>,
}

fn min_opt(a: &BigRational, b: &BigRational) -> BigRational {
    if a < b { a.clone() } else { b.clone() }
}

fn max_opt(a: &BigRational, b: &BigRational) -> BigRational {
    if a > b { a.clone() } else { b.clone() }
}

impl Param {
    fn for_segment(c: &Complex, i: usize) -> Result<Param> {
        let s = &c.segments[i];
        let a = &c.vertices[s.a];
        let b = &c.vertices[s.b];
        let (dir, len) = direction_and_length(a, b)?;
        let (ax_lo, ax_hi) = a.x.approx_interval();
        let (ay_lo, ay_hi) = a.y.approx_interval();
        let (bx_lo, bx_hi) = b.x.approx_interval();
        let (by_lo, by_hi) = b.y.approx_interval();
        Ok(Param {
            elem: Element::Segment(i),
            start: a.clone(),
            dir,
            len: Some(len),
            x_lo: Some(min_opt(&ax_lo, &bx_lo)),
            x_hi: Some(max_opt(&ax_hi, &bx_hi)),
            y_lo: Some(min_opt(&ay_lo, &by_lo)),
            y_hi: Some(max_opt(&ay_hi, &by_hi)),
        })
    }

    fn for_ray(c: &Complex, i: usize) -> Param {
        let r = &c.rays[i];
        let apex = &c.vertices[r.apex];
        let (x_lo, x_hi) = apex.x.approx_interval();
        let (y_lo, y_hi) = apex.y.approx_interval();
        let sgn = |v: &BigInt| v.cmp(&BigInt::zero());
        use std::cmp::Ordering::*;
        let (x_lo, x_hi) = match sgn(&r.dir.m) {
            Greater => (Some(x_lo), None),
            Less => (None, Some(x_hi)),
            Equal => (Some(x_lo), Some(x_hi)),
        };
        let (y_lo, y_hi) = match sgn(&r.dir.n) {
            Greater => (Some(y_lo), None),
            Less => (None, Some(y_hi)),
            Equal => (Some(y_lo), Some(y_hi)),
        };
        Param {
            elem: Element::Ray(i),
            start: apex.clone(),
            dir: r.dir.clone(),
            len: None,
            x_lo,
            x_hi,
            y_lo,
            y_hi,
        }
    }

    fn boxes_may_touch(&self, other: &Param) -> bool {
        fn le(lo: &Option<BigRational>, hi: &Option<BigRational>) -> bool {
            match (lo, hi) {
                (Some(l), Some(h)) => l <= h,
                // An unbounded side never separates.
                _ => true,
            }
        }
        le(&self.x_lo, &other.x_hi)
            && le(&other.x_lo, &self.x_hi)
            && le(&self.y_lo, &other.y_hi)
            && le(&other.y_lo, &self.y_hi)
    }
}

/// Where a parameter value sits relative to an element's range `[0, len]`.
enum Place {
    Outside,
    Boundary,
    Interior,
}

fn place(t: &LambdaScalar, len: &Option<LambdaScalar>) -> Result<Place> {
    let s0 = t.sign()?;
    if s0 < 0 {
        return Ok(Place::Outside);
    }
    if s0 == 0 {
        return Ok(Place::Boundary);
    }
    match len {
        None => Ok(Place::Interior),
        Some(l) => {
            let d = l.sub(t);
            let s1 = d.sign()?;
            Ok(if s1 < 0 {
                Place::Outside
            } else if s1 == 0 {
                Place::Boundary
            } else {
                Place::Interior
            })
        }
    }
}

/// Cross product of a Λ-vector with an integer vector; Λ-linear.
fn cross_scalar(dx: &LambdaScalar, dy: &LambdaScalar, v: &PrimitiveVector) -> LambdaScalar {
    dx.scale_int(&v.n).sub(&dy.scale_int(&v.m))
}

fn overlap_err(a: Element, b: Element, why: &str) -> Error {
    let name = |e: Element| match e {
        Element::Segment(i) => format!("segment {i}"),
        Element::Ray(i) => format!("ray {i}"),
    };
    Error::Overlap {
        first: format!("{} ({why})", name(a)),
        second: name(b),
    }
}

/// Intersection analysis of one element pair. `Ok(None)`: disjoint or
/// sharing only endpoints. `Ok(Some(p))`: transversal interior crossing at
/// `p`. `Err(Overlap)`: positive-length overlap or a tangential touch
/// (endpoint of one in the interior of the other); both are invalid
/// geometry, never counted as crossings.
fn pair_crossing(p: &Param, q: &Param) -> Result<Option<Point>> {
    let (dx, dy) = p.start.delta(&q.start);
    let cross_uv = p.dir.cross(&q.dir);
    if !cross_uv.is_zero() {
        // t·u - s·v = q.start - p.start has the unique solution below.
        let cr = BigRational::from(cross_uv);
        let t = cross_scalar(&dx, &dy, &q.dir).div_rat(&cr);
        let s = cross_scalar(&dx, &dy, &p.dir).div_rat(&cr);
        let pt = place(&t, &p.len)?;
        let ps = place(&s, &q.len)?;
        return match (pt, ps) {
            (Place::Outside, _) | (_, Place::Outside) => Ok(None),
            (Place::Boundary, Place::Boundary) => Ok(None),
            (Place::Interior, Place::Interior) => {
                Ok(Some(p.start.advance(&p.dir, &t)))
            }
            _ => Err(overlap_err(p.elem, q.elem, "tangential touch")),
        };
    }
    // Parallel: coprime directions force v = ±u.
    if !cross_scalar(&dx, &dy, &p.dir).is_zero() {
        return Ok(None); // distinct parallel lines
    }
    // Collinear. Express q's range on p's parameter axis.
    let t0 = if !p.dir.m.is_zero() {
        dx.div_rat(&BigRational::from(p.dir.m.clone()))
    } else {
        dy.div_rat(&BigRational::from(p.dir.n.clone()))
    };
    let same_dir = p.dir == q.dir;
    // q occupies [lo, hi] where an infinite end is None.
    let (q_lo, q_hi) = if same_dir {
        (
            Some(t0.clone()),
            q.len.as_ref().map(|l| t0.add(l)),
        )
    } else {
        (
            q.len.as_ref().map(|l| t0.sub(l)),
            Some(t0.clone()),
        )
    };
    // p occupies [0, p_hi].
    let p_lo = LambdaScalar::zero();
    let p_hi = p.len.clone();
    // Positive-length overlap iff max(lo) < min(hi), with None as ∓∞.
    let lo = match &q_lo {
        None => p_lo.clone(),
        Some(ql) => {
            if ql.try_cmp(&p_lo)? == std::cmp::Ordering::Greater {
                ql.clone()
            } else {
                p_lo.clone()
            }
        }
    };
    let hi = match (&p_hi, &q_hi) {
        (None, None) => None,
        (Some(a), None) => Some(a.clone()),
        (None, Some(b)) => Some(b.clone()),
        (Some(a), Some(b)) => Some(if a.try_cmp(b)? == std::cmp::Ordering::Less {
            a.clone()
        } else {
            b.clone()
        }),
    };
    let positive_overlap = match &hi {
        None => true, // both unbounded above on the same line
        Some(h) => lo.try_cmp(h)? == std::cmp::Ordering::Less,
    };
    if positive_overlap {
        return Err(overlap_err(p.elem, q.elem, "collinear overlap"));
    }
    // Touching in at most one point; endpoint-to-endpoint is legal.
    Ok(None)
}

impl Complex {
    /// All transversal interior crossings among the elements selected by
    /// `restrict` (all elements when `None`), sorted by element ids.
    ///
    /// Shared endpoints are not crossings. Overlaps and tangential touches
    /// are invalid geometry and fail with [`Error::Overlap`].
    pub fn crossings(&self, restrict: Option<&BTreeSet<Element>>) -> Result<Vec<Crossing>> {
        let keep = |e: Element| restrict.map(|set| set.contains(&e)).unwrap_or(true);
        let mut params = Vec::new();
        for i in 0..self.segments.len() {
            if keep(Element::Segment(i)) {
                params.push(Param::for_segment(self, i)?);
            }
        }
        for i in 0..self.rays.len() {
            if keep(Element::Ray(i)) {
                params.push(Param::for_ray(self, i));
            }
        }
        let mut out = Vec::new();
        for i in 0..params.len() {
            for j in (i + 1)..params.len() {
                if !params[i].boxes_may_touch(&params[j]) {
                    continue;
                }
                if let Some(point) = pair_crossing(&params[i], &params[j])? {
                    out.push(Crossing {
                        first: params[i].elem,
                        second: params[j].elem,
                        point,
                    });
                }
            }
        }
        Ok(out)
    }

    /// Vertices incident to no segment and no ray.
    pub fn isolated_vertices(&self) -> Vec<usize> {
        let mut used = vec![false; self.vertices.len()];
        for s in &self.segments {
            used[s.a] = true;
            used[s.b] = true;
        }
        for r in &self.rays {
            used[r.apex] = true;
        }
        used.iter()
            .enumerate()
            .filter(|(_, u)| !**u)
            .map(|(i, _)| i)
            .collect()
    }

    /// True when the segment graph connects all non-isolated vertices.
    /// Rays do not connect anything.
    pub fn is_connected(&self) -> bool {
        let n = self.vertices.len();
        if n == 0 {
            return true;
        }
        let mut adj = vec![Vec::new(); n];
        for s in &self.segments {
            adj[s.a].push(s.b);
            adj[s.b].push(s.a);
        }
        let isolated: BTreeSet<usize> = self.isolated_vertices().into_iter().collect();
        let Some(start) = (0..n).find(|v| !isolated.contains(v)) else {
            return true;
        };
        let mut seen = vec![false; n];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        (0..n).all(|v| seen[v] || isolated.contains(&v))
    }
}

/// Apply `p ↦ M·p + t` with an integer matrix of determinant ±1.
///
/// Unimodular maps preserve primitivity (so directions are mapped, never
/// re-normalized), tropical lengths, weights, and crossing combinatorics.
pub fn unimodular_transform(
    c: &Complex,
    m: [[i64; 2]; 2],
    t: (LambdaScalar, LambdaScalar),
) -> Result<Complex> {
    let [[a, b], [cc, d]] = m;
    let det = a
        .checked_mul(d)
        .and_then(|ad| b.checked_mul(cc).map(|bc| ad - bc))
        .ok_or(Error::NotUnimodular {
            a,
            b,
            c: cc,
            d,
            det: 0,
        })?;
    if det != 1 && det != -1 {
        return Err(Error::NotUnimodular {
            a,
            b,
            c: cc,
            d,
            det,
        });
    }
    let (ba, bb, bc, bd) = (
        BigInt::from(a),
        BigInt::from(b),
        BigInt::from(cc),
        BigInt::from(d),
    );
    let vertices = c
        .vertices
        .iter()
        .map(|p| Point {
            x: p.x.scale_int(&ba).add(&p.y.scale_int(&bb)).add(&t.0),
            y: p.x.scale_int(&bc).add(&p.y.scale_int(&bd)).add(&t.1),
        })
        .collect();
    let rays = c
        .rays
        .iter()
        .map(|r| Ray {
            apex: r.apex,
            dir: PrimitiveVector {
                m: &ba * &r.dir.m + &bb * &r.dir.n,
                n: &bc * &r.dir.m + &bd * &r.dir.n,
            },
            weight: r.weight.clone(),
        })
        .collect();
    Ok(Complex {
        vertices,
        segments: c.segments.clone(),
        rays,
    })
}
