//! Coordinate projections of an embedded complex, certified as
//! continuous piecewise-affine functions with integer slopes.
//!
//! Composing an embedding with the projection to either coordinate axis
//! yields a function on the embedded graph that is affine on every
//! segment. Its slope there, measured against tropical length, is the
//! matching component of the segment's primitive direction: a segment
//! from `p` to `q` with primitive `(m, n)` and tropical length `λ`
//! satisfies `q - p = λ·(m, n)`, so the x-projection changes by `λ·m`
//! and the y-projection by `λ·n`. The slopes are therefore integers and
//! componentwise coprime, and every breakpoint is a vertex of the
//! complex, which in value-group mode lies in Λ². [`projections`] builds
//! the pair of functions and checks each of these claims instead of
//! assuming them.
//!
//! The module also houses the two point-level value-group facts the
//! projections rest on: advancing a Λ² point by a positive value-group
//! length along an integer direction stays in Λ²
//! ([`advance_point`]), and a point of a segment with Λ² endpoints lies
//! in Λ² exactly when its tropical distance to an endpoint lies in Λ
//! ([`point_on_segment_in_lambda`]).

use std::cmp::Ordering;
use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;

use crate::error::{Error, Result};
use crate::lambda::LambdaScalar;
use crate::lattice::{direction_and_length, tropical_length, Complex, Point, PrimitiveVector};
use crate::pipeline::EmbeddingMap;

/// `start + λ·dir` for strictly positive `λ`.
///
/// The checked form of [`Point::advance`]: the result lies in Λ² by
/// construction because each coordinate moves by an integer multiple of
/// a value-group element, so positivity is the only thing left to
/// certify.
pub fn advance_point(
    start: &Point,
    dir: &PrimitiveVector,
    lambda: &LambdaScalar,
) -> Result<Point> {
    if lambda.sign()? <= 0 {
        return Err(Error::NonPositiveLength {
            got: lambda.to_string(),
        });
    }
    Ok(start.advance(dir, lambda))
}

/// Whether a point of a segment is a value-group point.
///
/// `span` holds the generator indices of the declared value group
/// (empty for Λ = ℚ). Both endpoints must lie in Λ²; then the point
/// does too exactly when its tropical distance to an endpoint lies in
/// Λ. The distance criterion (from either end) and the coordinate
/// criterion are all evaluated and must agree; their agreement is
/// asserted, not assumed.
///
/// Errors: [`Error::NotInLambda`] when an endpoint is outside Λ²,
/// [`Error::NotOnSegment`] when the point is not on the segment.
pub fn point_on_segment_in_lambda(
    a: &Point,
    b: &Point,
    p: &Point,
    span: &BTreeSet<u32>,
) -> Result<bool> {
    for (which, end) in [("first", a), ("second", b)] {
        if !end.x.in_qspan(span) || !end.y.in_qspan(span) {
            return Err(Error::NotInLambda {
                what: format!("{which} segment endpoint"),
            });
        }
    }
    let (dir, len) = direction_and_length(a, b)?;
    let t = if p == a {
        LambdaScalar::zero()
    } else {
        match direction_and_length(a, p) {
            // Wrong primitive: on the line beyond either end, or off it.
            Ok((dp, t)) if dp == dir => t,
            Ok(_) => return Err(Error::NotOnSegment),
            // Displacement with irrational slope is off every rational line.
            Err(Error::Schema { .. }) => return Err(Error::NotOnSegment),
            Err(e) => return Err(e),
        }
    };
    if t.try_cmp(&len)? == Ordering::Greater {
        return Err(Error::NotOnSegment);
    }
    let from_a = t.in_qspan(span);
    let from_b = len.sub(&t).in_qspan(span);
    let by_coords = p.x.in_qspan(span) && p.y.in_qspan(span);
    // With Λ² endpoints the total length is in Λ, so the three criteria
    // are equivalent; a split would be an arithmetic bug.
    assert!(
        from_a == from_b && from_a == by_coords,
        "distance and coordinate membership criteria disagree"
    );
    Ok(from_a)
}

/// Continuous piecewise-affine function with integer slopes on an
/// embedded complex.
///
/// Stored as one value per vertex plus one slope per element, the slope
/// read along `a → b` for segments and away from the apex for rays.
/// Integrality of slopes is structural; continuity (value difference
/// equals slope times tropical length on every segment) is a property
/// of the data and is certified by [`PAFunction::check_continuity`],
/// never assumed.
#[derive(Clone, Debug, PartialEq)]
pub struct PAFunction {
    pub vertex_values: Vec<LambdaScalar>,
    pub segment_slopes: Vec<BigInt>,
    pub ray_slopes: Vec<BigInt>,
}

impl PAFunction {
    /// Value at tropical distance `t` from endpoint `a` of segment `seg`.
    ///
    /// Panics when `seg` is not a segment of `complex`; errors with
    /// [`Error::NotOnSegment`] when `t` is outside `[0, length]`.
    pub fn eval_on_segment(
        &self,
        complex: &Complex,
        seg: usize,
        t: &LambdaScalar,
    ) -> Result<LambdaScalar> {
        let s = &complex.segments[seg];
        let len = tropical_length(&complex.vertices[s.a], &complex.vertices[s.b])?;
        if t.sign()? < 0 || t.try_cmp(&len)? == Ordering::Greater {
            return Err(Error::NotOnSegment);
        }
        Ok(self.vertex_values[s.a].add(&t.scale_int(&self.segment_slopes[seg])))
    }

    /// Certify that the stored values and slopes describe one continuous
    /// function on the geometry: along every segment the value difference
    /// is exactly slope × tropical length. Chains of segments need no
    /// separate treatment, they share vertices and hence values.
    pub fn check_continuity(&self, complex: &Complex) -> Result<()> {
        if self.vertex_values.len() != complex.vertices.len()
            || self.segment_slopes.len() != complex.segments.len()
            || self.ray_slopes.len() != complex.rays.len()
        {
            return Err(Error::Schema {
                message: "function data does not match the complex shape".into(),
            });
        }
        for (i, s) in complex.segments.iter().enumerate() {
            let len = tropical_length(&complex.vertices[s.a], &complex.vertices[s.b])?;
            let rise = self.vertex_values[s.b].sub(&self.vertex_values[s.a]);
            if rise != len.scale_int(&self.segment_slopes[i]) {
                return Err(Error::Schema {
                    message: format!(
                        "discontinuity on segment {i}: value difference {} is not slope {} times length {}",
                        rise, self.segment_slopes[i], len
                    ),
                });
            }
        }
        Ok(())
    }

    /// Exact sum of slope × tropical length along a closed walk.
    ///
    /// Each step is a segment index and an orientation flag (`true` for
    /// `a → b`). The walk must chain up and return to its start. For a
    /// continuous function the sum telescopes to zero; the raw value is
    /// returned so callers assert that fact explicitly.
    pub fn cycle_sum(&self, complex: &Complex, walk: &[(usize, bool)]) -> Result<LambdaScalar> {
        let ends = |&(seg, fwd): &(usize, bool)| {
            let s = &complex.segments[seg];
            if fwd {
                (s.a, s.b)
            } else {
                (s.b, s.a)
            }
        };
        let Some(first) = walk.first() else {
            return Err(Error::Schema {
                message: "empty walk has no cycle sum".into(),
            });
        };
        let start = ends(first).0;
        let mut at = start;
        let mut sum = LambdaScalar::zero();
        for step in walk {
            let (from, to) = ends(step);
            if from != at {
                return Err(Error::Schema {
                    message: format!("walk jumps from vertex {at} to segment endpoint {from}"),
                });
            }
            let len = tropical_length(&complex.vertices[from], &complex.vertices[to])?;
            let slope = &self.segment_slopes[step.0];
            let signed = if step.1 { slope.clone() } else { -slope };
            sum = sum.add(&len.scale_int(&signed));
            at = to;
        }
        if at != start {
            return Err(Error::Schema {
                message: format!("walk ends at vertex {at}, started at {start}"),
            });
        }
        Ok(sum)
    }
}

/// The pair of coordinate projections of an embedded complex, as
/// certified piecewise-affine functions.
///
/// The first function reads off x-coordinates, the second y-coordinates.
/// On every element the slope pair equals the element's primitive
/// direction, so the slopes are integers with `gcd = 1` per segment.
/// Before returning, this certifies that every vertex of the complex
/// lies in Λ² for the value group spanned by the graph's edge-length
/// generators (so every breakpoint of either function is a Λ-point) and
/// that both functions are continuous.
///
/// Errors: [`Error::NotInLambda`] when a vertex coordinate leaves the
/// value group.
pub fn projections(complex: &Complex, map: &EmbeddingMap) -> Result<(PAFunction, PAFunction)> {
    let mut span: BTreeSet<u32> = BTreeSet::new();
    for e in map.graph.edge_ids() {
        if let Some(l) = map.graph.edge(e).unwrap().length.finite() {
            for (i, _) in l.irr_coeffs() {
                span.insert(i);
            }
        }
    }
    project_complex(complex, &span)
}

fn project_complex(complex: &Complex, span: &BTreeSet<u32>) -> Result<(PAFunction, PAFunction)> {
    for (i, v) in complex.vertices.iter().enumerate() {
        if !v.x.in_qspan(span) || !v.y.in_qspan(span) {
            return Err(Error::NotInLambda {
                what: format!("complex vertex {i}"),
            });
        }
    }
    let coprime = |m: &BigInt, n: &BigInt| m.gcd(n).is_one();
    let mut seg_mx = Vec::with_capacity(complex.segments.len());
    let mut seg_ny = Vec::with_capacity(complex.segments.len());
    for s in &complex.segments {
        let (dir, _) = direction_and_length(&complex.vertices[s.a], &complex.vertices[s.b])?;
        assert!(coprime(&dir.m, &dir.n), "primitive direction not coprime");
        seg_mx.push(dir.m);
        seg_ny.push(dir.n);
    }
    let mut ray_mx = Vec::with_capacity(complex.rays.len());
    let mut ray_ny = Vec::with_capacity(complex.rays.len());
    for r in &complex.rays {
        assert!(coprime(&r.dir.m, &r.dir.n), "primitive direction not coprime");
        ray_mx.push(r.dir.m.clone());
        ray_ny.push(r.dir.n.clone());
    }
    let f = PAFunction {
        vertex_values: complex.vertices.iter().map(|p| p.x.clone()).collect(),
        segment_slopes: seg_mx,
        ray_slopes: ray_mx,
    };
    let g = PAFunction {
        vertex_values: complex.vertices.iter().map(|p| p.y.clone()).collect(),
        segment_slopes: seg_ny,
        ray_slopes: ray_ny,
    };
    // Continuity of the x-projection along a segment is the statement
    // x_b − x_a = m·λ, which is the slope certificate itself.
    f.check_continuity(complex)?;
    g.check_continuity(complex)?;
    Ok((f, g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lambda::{Generator, LambdaContext};
    use crate::lattice::primitive_vector;
    use crate::metric_graph::MetricGraph;
    use crate::pipeline::{embed_isometric, EdgeImage, EmbedOptions, Mode};
    use crate::rat::rat;
    use std::sync::Arc;

    fn ctx2() -> Arc<LambdaContext> {
        LambdaContext::new(vec![
            Generator::from_decimal("sqrt2", "1.41421356237309504880168872420969807857").unwrap(),
            Generator::from_decimal("sqrt3", "1.73205080756887729352744634150587236694").unwrap(),
        ])
        .unwrap()
    }

    fn gen(ctx: &Arc<LambdaContext>, i: u32) -> LambdaScalar {
        LambdaScalar::generator(ctx, i)
    }

    fn pt(x: i64, y: i64) -> Point {
        Point::from_ints(x, y)
    }

    #[test]
    fn advance_moves_by_positive_lengths_only() {
        let dir = PrimitiveVector::from_ints(1, 2).unwrap();
        let p = advance_point(&pt(0, 0), &dir, &LambdaScalar::from_int(2)).unwrap();
        assert_eq!(p, pt(2, 4));

        let ctx = ctx2();
        let up = PrimitiveVector::from_ints(0, 1).unwrap();
        let start = Point::new(gen(&ctx, 0), gen(&ctx, 0));
        let q = advance_point(&start, &up, &gen(&ctx, 1)).unwrap();
        assert_eq!(q.x, gen(&ctx, 0));
        assert_eq!(q.y, gen(&ctx, 0).add(&gen(&ctx, 1)));

        for bad in [LambdaScalar::zero(), LambdaScalar::from_int(-3)] {
            match advance_point(&pt(0, 0), &dir, &bad) {
                Err(Error::NonPositiveLength { .. }) => {}
                other => panic!("expected a positivity error, got {other:?}"),
            }
        }
    }

    #[test]
    fn length_then_advance_round_trips() {
        let ctx = ctx2();
        let cases = [
            (pt(0, 0), pt(2, 4)),
            (pt(-1, 5), pt(3, -2)),
            (
                Point::new(gen(&ctx, 0), LambdaScalar::zero()),
                Point::new(
                    gen(&ctx, 0).scale_int(&3.into()),
                    gen(&ctx, 0).scale_int(&4.into()),
                ),
            ),
        ];
        for (a, b) in cases {
            let dir = primitive_vector(&a, &b).unwrap();
            let len = tropical_length(&a, &b).unwrap();
            assert_eq!(advance_point(&a, &dir, &len).unwrap(), b);
        }
        // The irrational case pins down both outputs: primitive (1,2),
        // length 2·sqrt2.
        let a = Point::new(gen(&ctx, 0), LambdaScalar::zero());
        let b = Point::new(
            gen(&ctx, 0).scale_int(&3.into()),
            gen(&ctx, 0).scale_int(&4.into()),
        );
        let (dir, len) = direction_and_length(&a, &b).unwrap();
        assert_eq!(dir, PrimitiveVector::from_ints(1, 2).unwrap());
        assert_eq!(len, gen(&ctx, 0).scale_int(&2.into()));
    }

    #[test]
    fn membership_follows_the_distance_criterion() {
        let a = pt(0, 0);
        let b = pt(2, 4);
        let rational = BTreeSet::new();
        let mid = Point::from_rats(rat(1, 1), rat(2, 1));
        assert!(point_on_segment_in_lambda(&a, &b, &mid, &rational).unwrap());

        // sqrt2 of the way along: on the segment, but the distance to
        // each endpoint is irrational, so not a ℚ-point.
        let ctx = ctx2();
        let s2 = gen(&ctx, 0);
        let p = Point::new(s2.clone(), s2.scale_int(&2.into()));
        assert!(!point_on_segment_in_lambda(&a, &b, &p, &rational).unwrap());
        // The same point is a Λ-point once sqrt2 generates Λ.
        let with_s2: BTreeSet<u32> = [0].into();
        assert!(point_on_segment_in_lambda(&a, &b, &p, &with_s2).unwrap());
    }

    #[test]
    fn points_off_the_segment_are_rejected() {
        let a = pt(0, 0);
        let b = pt(2, 4);
        let span = BTreeSet::new();
        let ctx = ctx2();
        let off = [
            pt(1, 1),   // off the line
            pt(3, 6),   // past b
            pt(-1, -2), // behind a
            Point::new(LambdaScalar::one(), gen(&ctx, 0)), // irrational slope from a
        ];
        for p in off {
            match point_on_segment_in_lambda(&a, &b, &p, &span) {
                Err(Error::NotOnSegment) => {}
                other => panic!("expected rejection of {p:?}, got {other:?}"),
            }
        }
        let outside = Point::new(gen(&ctx, 0), LambdaScalar::zero());
        match point_on_segment_in_lambda(&outside, &b, &a, &span) {
            Err(Error::NotInLambda { .. }) => {}
            other => panic!("expected an endpoint membership error, got {other:?}"),
        }
    }

    #[test]
    fn slopes_are_the_primitive_components() {
        // Horizontal segment, then a (2,3) segment, then a west ray.
        let c = Complex {
            vertices: vec![pt(0, 0), pt(3, 0), pt(5, 3)],
            segments: vec![
                crate::lattice::Segment { a: 0, b: 1, weight: 1.into() },
                crate::lattice::Segment { a: 1, b: 2, weight: 1.into() },
            ],
            rays: vec![crate::lattice::Ray {
                apex: 0,
                dir: PrimitiveVector::from_ints(-1, 0).unwrap(),
                weight: 1.into(),
            }],
        };
        let (f, g) = project_complex(&c, &BTreeSet::new()).unwrap();
        assert_eq!(f.segment_slopes, vec![BigInt::from(1), BigInt::from(2)]);
        assert_eq!(g.segment_slopes, vec![BigInt::from(0), BigInt::from(3)]);
        assert_eq!(f.ray_slopes, vec![BigInt::from(-1)]);
        assert_eq!(g.ray_slopes, vec![BigInt::from(0)]);

        // Halfway down the horizontal segment f has grown by 3/2, g not.
        let half = LambdaScalar::from_rat(rat(3, 2));
        assert_eq!(f.eval_on_segment(&c, 0, &half).unwrap(), half);
        assert_eq!(g.eval_on_segment(&c, 0, &half).unwrap(), LambdaScalar::zero());
        match f.eval_on_segment(&c, 0, &LambdaScalar::from_int(4)) {
            Err(Error::NotOnSegment) => {}
            other => panic!("expected an out-of-range error, got {other:?}"),
        }
    }

    #[test]
    fn corrupted_values_fail_the_continuity_check() {
        let c = Complex {
            vertices: vec![pt(0, 0), pt(2, 1)],
            segments: vec![crate::lattice::Segment { a: 0, b: 1, weight: 1.into() }],
            rays: vec![],
        };
        let (mut f, _) = project_complex(&c, &BTreeSet::new()).unwrap();
        f.vertex_values[1] = LambdaScalar::from_int(7);
        match f.check_continuity(&c) {
            Err(Error::Schema { message }) => assert!(message.contains("discontinuity")),
            other => panic!("expected a continuity failure, got {other:?}"),
        }
    }

    #[test]
    fn irrational_vertex_is_rejected_over_the_rationals() {
        let ctx = ctx2();
        let c = Complex {
            vertices: vec![Point::new(gen(&ctx, 0), LambdaScalar::zero()), pt(2, 1)],
            segments: vec![],
            rays: vec![],
        };
        match project_complex(&c, &BTreeSet::new()) {
            Err(Error::NotInLambda { .. }) => {}
            other => panic!("expected a membership error, got {other:?}"),
        }
    }

    /// Orient a chain of segment indices into (segment, forward) steps
    /// starting at `start`, following shared vertices.
    fn orient(c: &Complex, start: usize, segs: &[usize]) -> Vec<(usize, bool)> {
        let mut at = start;
        segs.iter()
            .map(|&s| {
                let seg = &c.segments[s];
                let fwd = if seg.a == at {
                    true
                } else if seg.b == at {
                    false
                } else {
                    panic!("chain does not pass through vertex {at}")
                };
                at = if fwd { seg.b } else { seg.a };
                (s, fwd)
            })
            .collect()
    }

    fn chain(map: &crate::pipeline::EmbeddingMap, edge: usize) -> Vec<usize> {
        match &map.edge_images[&edge] {
            EdgeImage::Chain { segments } => segments.clone(),
            EdgeImage::Ray { .. } => panic!("edge {edge} maps to a ray"),
        }
    }

    #[test]
    fn triangle_cycle_sums_vanish() {
        let mut g = MetricGraph::new();
        let a = g.add_vertex();
        let b = g.add_vertex();
        let c = g.add_vertex();
        g.add_edge(a, b, LambdaScalar::one()).unwrap();
        g.add_edge(b, c, LambdaScalar::one()).unwrap();
        g.add_edge(c, a, LambdaScalar::one()).unwrap();
        let (complex, map, report) = embed_isometric(&g, &EmbedOptions::default()).unwrap();
        assert!(report.all_pass(), "{:?}", report.failures());
        let (f, gg) = projections(&complex, &map).unwrap();

        // Slopes agree with freshly derived primitives on every segment.
        for (i, s) in complex.segments.iter().enumerate() {
            let dir = primitive_vector(&complex.vertices[s.a], &complex.vertices[s.b]).unwrap();
            assert_eq!(f.segment_slopes[i], dir.m);
            assert_eq!(gg.segment_slopes[i], dir.n);
            assert!(dir.m.gcd(&dir.n).is_one());
        }

        // The three edge chains concatenate to a closed walk; both
        // projections telescope to zero around it.
        let mut walk = Vec::new();
        walk.extend(chain(&map, 0));
        walk.extend(chain(&map, 1));
        walk.extend(chain(&map, 2));
        let walk = orient(&complex, map.vertex_image[&a], &walk);
        assert!(f.cycle_sum(&complex, &walk).unwrap().is_zero());
        assert!(gg.cycle_sum(&complex, &walk).unwrap().is_zero());
    }

    #[test]
    fn value_group_triangle_is_certified() {
        let ctx = ctx2();
        let mut g = MetricGraph::new();
        let a = g.add_vertex();
        let b = g.add_vertex();
        let c = g.add_vertex();
        g.add_edge(a, b, LambdaScalar::one()).unwrap();
        g.add_edge(b, c, LambdaScalar::one()).unwrap();
        g.add_edge(c, a, gen(&ctx, 0)).unwrap();
        let opts = EmbedOptions {
            mode: Mode::Lambda,
            ..EmbedOptions::default()
        };
        let (complex, map, report) = embed_isometric(&g, &opts).unwrap();
        assert!(report.all_pass(), "{:?}", report.failures());
        assert_eq!(report.lambda_certified, Some(true));
        let (f, gg) = projections(&complex, &map).unwrap();

        // The sqrt2 edge makes some vertex values genuinely irrational.
        assert!(f.vertex_values.iter().chain(&gg.vertex_values).any(|v| !v.is_rational()));

        let mut walk = Vec::new();
        walk.extend(chain(&map, 0));
        walk.extend(chain(&map, 1));
        walk.extend(chain(&map, 2));
        let walk = orient(&complex, map.vertex_image[&a], &walk);
        assert!(f.cycle_sum(&complex, &walk).unwrap().is_zero());
        assert!(gg.cycle_sum(&complex, &walk).unwrap().is_zero());
    }
}
