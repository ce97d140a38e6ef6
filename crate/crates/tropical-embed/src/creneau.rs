//! Créneau staircases: exact tropical-length elongation inside a corridor.
//!
//! A créneau replaces the middle third of a host segment by a square wave
//! of `m` teeth legs (m even), built in the lattice frame `(u, v)` where
//! `u` is the host's primitive direction and `v = u.perp()`. Every step is
//! a Λ-scalar multiple of `u` or `v`, so step tropical lengths equal the
//! multipliers and the elongation is exact by coefficient arithmetic: the
//! host keeps its `u`-extent `x` while gaining `m·δ` of `v`-extent, for a
//! total of exactly the target. Euclidean rotation factors never appear;
//! the construction lives entirely in lattice coordinates.
//!
//! Layout along `u` (in tropical units): outer thirds of length `x/3`,
//! teeth legs of length `δ` along `±v`, and `m−1` inner runs of length
//! `x/(3(m−1))` between them. Every interior vertex is a quarter turn in
//! the frame and receives one balancing ray in direction `−s/gcd(s)` with
//! weight `gcd(s)`, where `s = ±u ± v` is the sum of its two outgoing
//! primitives; with the rays attached every interior vertex is balanced.
//!
//! Two tooth-count rules exist. The generic rule picks the smallest even
//! `m` strictly greater than `(target − x)/ε`, giving `δ = (target−x)/m < ε`.
//! The value-group rule picks the minimal `n ≥ 1` with `(target−x)/(2n) ≤ ε`
//! and uses `m = 2n`. Both keep every vertex inside the corridor `|v| ≤ ε`
//! and inside the host span, and both keep all coordinates in Λ².

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::lambda::LambdaScalar;
use crate::lattice::{direction_and_length, Point, PrimitiveVector};
use crate::rat::rat;

/// Hard ceiling on the tooth count; beyond this the gadget would be
/// astronomically fine and the caller should widen the corridor instead.
const MAX_TEETH: u64 = 1 << 20;

/// What to elongate, to which target, inside which corridor.
#[derive(Clone, Debug)]
pub struct CreneauSpec {
    pub start: Point,
    pub end: Point,
    /// Target tropical length; must exceed the host's length.
    pub target: LambdaScalar,
    /// Corridor half-width in tropical units along the perpendicular.
    pub epsilon: LambdaScalar,
    /// Teeth point toward `u.perp()` by default; `flip` mirrors them.
    pub flip: bool,
}

impl CreneauSpec {
    pub fn new(start: Point, end: Point, target: LambdaScalar, epsilon: LambdaScalar) -> CreneauSpec {
        CreneauSpec {
            start,
            end,
            target,
            epsilon,
            flip: false,
        }
    }
}

/// Balancing ray attached at one staircase vertex.
#[derive(Clone, Debug)]
pub struct CreneauRay {
    /// Index into [`CreneauPath::points`].
    pub at: usize,
    pub dir: PrimitiveVector,
    pub weight: BigInt,
}

/// The generated staircase: a polyline from the host start to the host
/// end, plus one balancing ray per interior vertex.
#[derive(Clone, Debug)]
pub struct CreneauPath {
    pub points: Vec<Point>,
    /// Number of teeth legs (even).
    pub teeth: u64,
    /// Tropical length of each tooth leg.
    pub delta: LambdaScalar,
    pub rays: Vec<CreneauRay>,
}

impl CreneauPath {
    pub fn segment_count(&self) -> usize {
        self.points.len() - 1
    }

    /// Exact sum of the tropical lengths of all path segments.
    pub fn total_tropical_length(&self) -> Result<LambdaScalar> {
        let mut sum = LambdaScalar::zero();
        for w in self.points.windows(2) {
            let (_, len) = direction_and_length(&w[0], &w[1])?;
            sum = sum.add(&len);
        }
        Ok(sum)
    }
}

fn require_positive(value: &LambdaScalar, what: &str) -> Result<()> {
    if value.sign()? <= 0 {
        return Err(Error::InvalidTarget {
            reason: format!("{what} must be positive, got {value}"),
        });
    }
    Ok(())
}

/// Floor of an exact rational, as i64 (clamped into range).
fn floor_i64(r: &BigRational) -> i64 {
    use num_traits::ToPrimitive;
    r.floor().to_integer().to_i64().unwrap_or(if r.is_negative() {
        i64::MIN
    } else {
        i64::MAX
    })
}

/// Conservative candidate start for tooth-count scans: a lower bound on
/// `(target - x) / ε` from the enclosure intervals. Both quantities have
/// certified-positive enclosures by the time this runs.
fn ratio_lower_bound(excess: &LambdaScalar, epsilon: &LambdaScalar) -> i64 {
    let (d_lo, _) = excess.approx_interval();
    let (_, e_hi) = epsilon.approx_interval();
    if !d_lo.is_positive() || !e_hi.is_positive() {
        return 0;
    }
    floor_i64(&(d_lo / e_hi))
}

/// Tooth count and leg length for the generic rule: the smallest even `m`
/// with `m·ε > target − x` exactly, and `δ = (target − x)/m ≤ ε`.
pub fn creneau_params(
    x: &LambdaScalar,
    target: &LambdaScalar,
    epsilon: &LambdaScalar,
) -> Result<(u64, LambdaScalar)> {
    let excess = target.sub(x);
    require_positive(x, "host length")?;
    if excess.sign()? <= 0 {
        return Err(Error::InvalidTarget {
            reason: format!("target {target} does not exceed the host length {x}"),
        });
    }
    require_positive(epsilon, "corridor half-width")?;
    let lb = ratio_lower_bound(&excess, epsilon).max(0);
    let mut m = (lb as u64) & !1; // largest even ≤ lb
    if m < 2 {
        m = 2;
    }
    loop {
        if m > MAX_TEETH {
            return Err(Error::InvalidTarget {
                reason: format!("tooth count exceeds {MAX_TEETH}; widen the corridor"),
            });
        }
        // m·ε − (target − x) > 0, certified.
        let slack = epsilon.scale_int(&BigInt::from(m)).sub(&excess);
        if slack.sign()? > 0 {
            let delta = excess.div_rat(&BigRational::from(BigInt::from(m)));
            return Ok((m, delta));
        }
        m += 2;
    }
}

/// Tooth count for the value-group rule: minimal `n ≥ 1` with
/// `(target − x)/(2n) ≤ ε`; the staircase then uses `m = 2n` teeth.
pub fn lambda_tooth_count(
    x: &LambdaScalar,
    target: &LambdaScalar,
    epsilon: &LambdaScalar,
) -> Result<u64> {
    let excess = target.sub(x);
    require_positive(x, "host length")?;
    if excess.sign()? <= 0 {
        return Err(Error::InvalidTarget {
            reason: format!("target {target} does not exceed the host length {x}"),
        });
    }
    require_positive(epsilon, "corridor half-width")?;
    let lb = ratio_lower_bound(&excess, epsilon).max(0) / 2;
    let mut n = (lb as u64).max(1);
    // The scan start is a lower bound minus slack; walk back to the first
    // n that fails, then forward to the first that holds.
    while n > 1 {
        let slack = epsilon.scale_int(&BigInt::from(2 * (n - 1))).sub(&excess);
        if slack.sign()? >= 0 {
            n -= 1;
        } else {
            break;
        }
    }
    loop {
        if n > MAX_TEETH / 2 {
            return Err(Error::InvalidTarget {
                reason: format!("tooth count exceeds {MAX_TEETH}; widen the corridor"),
            });
        }
        let slack = epsilon.scale_int(&BigInt::from(2 * n)).sub(&excess);
        if slack.sign()? >= 0 {
            return Ok(n);
        }
        n += 1;
    }
}

/// Shared staircase builder for a fixed even tooth count. The wave sits
/// inside the middle third shrunk by `inset` at both ends; the straight
/// prefix and suffix grow by the same amount, so the elongation (and
/// with it the total tropical length) is untouched.
fn build(spec: &CreneauSpec, m: u64, delta: &LambdaScalar, inset: &LambdaScalar) -> Result<CreneauPath> {
    assert!(m >= 2 && m % 2 == 0, "tooth count must be even and ≥ 2");
    let (u, x) = direction_and_length(&spec.start, &spec.end)?;
    let v = if spec.flip { u.perp().neg() } else { u.perp() };
    let third = x.div_rat(&rat(3, 1));
    if inset.sign()? < 0 {
        return Err(Error::InvalidTarget {
            reason: format!("stagger inset must not be negative, got {inset}"),
        });
    }
    let wave = third.sub(inset).sub(inset);
    require_positive(&wave, "wave span (middle third minus insets)")?;
    let straight = third.add(inset);
    let run = wave.div_rat(&BigRational::from(BigInt::from(m - 1)));
    let mut points = vec![spec.start.clone()];
    let mut p = spec.start.advance(&u, &straight);
    points.push(p.clone());
    for i in 0..m {
        let leg = if i % 2 == 0 { v.clone() } else { v.neg() };
        p = p.advance(&leg, delta);
        points.push(p.clone());
        if i + 1 < m {
            p = p.advance(&u, &run);
            points.push(p.clone());
        }
    }
    p = p.advance(&u, &straight);
    assert!(
        p == spec.end,
        "staircase must land exactly on the host endpoint"
    );
    points.push(spec.end.clone());

    // One balancing ray per interior vertex: s is the sum of the two
    // outgoing primitives (always ±u ± v at a quarter turn).
    let mut rays = Vec::new();
    for k in 1..points.len() - 1 {
        let back = crate::lattice::primitive_vector(&points[k], &points[k - 1])?;
        let fwd = crate::lattice::primitive_vector(&points[k], &points[k + 1])?;
        let sx = &back.m + &fwd.m;
        let sy = &back.n + &fwd.n;
        assert!(!(sx.is_zero() && sy.is_zero()), "quarter turns never cancel");
        let g = sx.gcd(&sy);
        rays.push(CreneauRay {
            at: k,
            dir: PrimitiveVector {
                m: -&sx / &g,
                n: -&sy / &g,
            },
            weight: g,
        });
    }
    Ok(CreneauPath {
        points,
        teeth: m,
        delta: delta.clone(),
        rays,
    })
}

/// Axis-aligned créneau: host direction `(±1,0)` or `(0,±1)`, generic
/// tooth rule.
pub fn insert_creneau(spec: &CreneauSpec) -> Result<CreneauPath> {
    let (u, _) = direction_and_length(&spec.start, &spec.end)?;
    if !u.m.is_zero() && !u.n.is_zero() {
        return Err(Error::InvalidTarget {
            reason: format!(
                "host direction {u:?} is not axis-aligned; use the rotated constructor"
            ),
        });
    }
    insert_creneau_rotated(spec)
}

/// Créneau along an arbitrary primitive host direction, generic tooth
/// rule. Reduces exactly to the axis-aligned case when `u = (1,0)`.
pub fn insert_creneau_rotated(spec: &CreneauSpec) -> Result<CreneauPath> {
    let (_, x) = direction_and_length(&spec.start, &spec.end)?;
    let (m, delta) = creneau_params(&x, &spec.target, &spec.epsilon)?;
    build(spec, m, &delta, &LambdaScalar::zero())
}

/// Créneau with a pinned even tooth count instead of the smallest
/// admissible one. Raising the count shrinks the legs (`δ = excess/m`,
/// still at most the corridor half-width whenever the generic count
/// already fit) and moves every corner, which resolves coincidences
/// between this staircase's corner rays and faraway elements.
pub fn insert_creneau_with_teeth(spec: &CreneauSpec, teeth: u64) -> Result<CreneauPath> {
    insert_creneau_staggered(spec, teeth, &LambdaScalar::zero())
}

/// Créneau with a pinned tooth count and a stagger inset. The wave
/// occupies the middle third shrunk by `inset` at each end (so `inset`
/// must stay below a sixth of the host length), which slides the wave's
/// boundary corners along the host. Tooth-count changes never move
/// those corners, so the inset is the knob that breaks coincidences
/// involving them; the elongation lives entirely in the legs and the
/// total length is unchanged.
pub fn insert_creneau_staggered(
    spec: &CreneauSpec,
    teeth: u64,
    inset: &LambdaScalar,
) -> Result<CreneauPath> {
    if teeth < 2 || teeth % 2 != 0 || teeth > MAX_TEETH {
        return Err(Error::InvalidTarget {
            reason: format!("pinned tooth count {teeth} is not an even number in [2, {MAX_TEETH}]"),
        });
    }
    let (_, x) = direction_and_length(&spec.start, &spec.end)?;
    let excess = spec.target.sub(&x);
    require_positive(&x, "host length")?;
    if excess.sign()? <= 0 {
        return Err(Error::InvalidTarget {
            reason: format!(
                "target {} does not exceed the host length {x}",
                spec.target
            ),
        });
    }
    let delta = excess.div_rat(&BigRational::from(BigInt::from(teeth)));
    build(spec, teeth, &delta, inset)
}

/// Créneau with the value-group tooth rule: `2n` teeth legs of length
/// `(target−x)/(2n)`, `2n−1` inner runs of `x/(6n−3)`, outer thirds `x/3`,
/// totalling `x + (target − x) = target` exactly. Every vertex stays in
/// Λ² because each step scales an integer direction by a Λ-scalar.
pub fn insert_creneau_lambda(spec: &CreneauSpec) -> Result<CreneauPath> {
    let (_, x) = direction_and_length(&spec.start, &spec.end)?;
    let n = lambda_tooth_count(&x, &spec.target, &spec.epsilon)?;
    let delta = spec
        .target
        .sub(&x)
        .div_rat(&BigRational::from(BigInt::from(2 * n)));
    build(spec, 2 * n, &delta, &LambdaScalar::zero())
}

/// Coordinates of `p` in the lattice frame `(origin, u, u.perp())`, in
/// tropical units: `p = origin + t·u + s·u.perp()`.
pub fn frame_coordinates(
    origin: &Point,
    u: &PrimitiveVector,
    p: &Point,
) -> (LambdaScalar, LambdaScalar) {
    let (dx, dy) = origin.delta(p);
    let norm2 = BigRational::from(&u.m * &u.m + &u.n * &u.n);
    let t = dx.scale_int(&u.m).add(&dy.scale_int(&u.n)).div_rat(&norm2);
    let s = dy.scale_int(&u.m).sub(&dx.scale_int(&u.n)).div_rat(&norm2);
    (t, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lambda::{Generator, LambdaContext};
    use crate::lattice::{balance_defect, Complex, Ray, Segment, tropical_length};
    use num_traits::One;

    fn pt(x: i64, y: i64) -> Point {
        Point::from_ints(x, y)
    }

    fn lam(n: i64, d: i64) -> LambdaScalar {
        LambdaScalar::from_rat(rat(n, d))
    }

    #[test]
    fn params_pick_smallest_even_strictly_above_the_ratio() {
        // ratio 10/3: smallest even above is 4, δ = 1/4 ≤ 3/10.
        let (m, delta) = creneau_params(&lam(1, 1), &lam(2, 1), &lam(3, 10)).unwrap();
        assert_eq!(m, 4);
        assert_eq!(delta, lam(1, 4));
        // ratio exactly 1: strictly above, so m = 2, δ = 1/4.
        let (m, delta) = creneau_params(&lam(1, 1), &lam(3, 2), &lam(1, 2)).unwrap();
        assert_eq!(m, 2);
        assert_eq!(delta, lam(1, 4));
        // ratio exactly 2: the bound is strict, so 4, not 2.
        let (m, _) = creneau_params(&lam(1, 1), &lam(2, 1), &lam(1, 2)).unwrap();
        assert_eq!(m, 4);
        // target = host: nothing to elongate.
        assert!(matches!(
            creneau_params(&lam(1, 1), &lam(1, 1), &lam(1, 2)),
            Err(Error::InvalidTarget { .. })
        ));
    }

    #[test]
    fn lambda_rule_picks_minimal_n_with_non_strict_bound() {
        // (l-x)/(2n) ≤ 1/4 with l-x = 1 needs n = 2.
        assert_eq!(lambda_tooth_count(&lam(1, 1), &lam(2, 1), &lam(1, 4)).unwrap(), 2);
        // Equality counts: (l-x)/2 = 1/2 = ε gives n = 1.
        assert_eq!(lambda_tooth_count(&lam(1, 1), &lam(2, 1), &lam(1, 2)).unwrap(), 1);
        assert!(matches!(
            lambda_tooth_count(&lam(1, 1), &lam(1, 2), &lam(1, 2)),
            Err(Error::InvalidTarget { .. })
        ));
    }

    #[test]
    fn axis_creneau_reaches_the_target_exactly() {
        let spec = CreneauSpec::new(pt(0, 0), pt(1, 0), lam(2, 1), lam(3, 10));
        let path = insert_creneau(&spec).unwrap();
        assert_eq!(path.teeth, 4);
        assert_eq!(path.total_tropical_length().unwrap(), lam(2, 1));
        // Four vertical legs of tropical length 1/4 each.
        let mut verticals = 0;
        for w in path.points.windows(2) {
            let (dir, len) = direction_and_length(&w[0], &w[1]).unwrap();
            if dir.m.is_zero() {
                verticals += 1;
                assert_eq!(len, lam(1, 4));
            }
        }
        assert_eq!(verticals, 4);
        // Non-axis host is the rotated constructor's job.
        let skew = CreneauSpec::new(pt(0, 0), pt(1, 1), lam(4, 1), lam(1, 2));
        assert!(matches!(
            insert_creneau(&skew),
            Err(Error::InvalidTarget { .. })
        ));
        assert!(insert_creneau_rotated(&skew).is_ok());
    }

    #[test]
    fn rotated_creneau_on_a_skew_host() {
        // Host (0,0)-(2,4): u = (1,2), x = 2; target 3 with ε = 1/5 gives
        // ratio 5, so m = 6 and δ = 1/6.
        let spec = CreneauSpec::new(pt(0, 0), pt(2, 4), lam(3, 1), lam(1, 5));
        let path = insert_creneau_rotated(&spec).unwrap();
        assert_eq!(path.teeth, 6);
        assert_eq!(path.delta, lam(1, 6));
        assert_eq!(path.total_tropical_length().unwrap(), lam(3, 1));
        assert_eq!(path.points.first().unwrap(), &pt(0, 0));
        assert_eq!(path.points.last().unwrap(), &pt(2, 4));
    }

    #[test]
    fn containment_in_the_corridor_and_host_span() {
        let spec = CreneauSpec::new(pt(0, 0), pt(2, 4), lam(3, 1), lam(1, 5));
        let path = insert_creneau_rotated(&spec).unwrap();
        let u = crate::lattice::primitive_vector(&pt(0, 0), &pt(2, 4)).unwrap();
        let x = tropical_length(&pt(0, 0), &pt(2, 4)).unwrap();
        for p in &path.points {
            let (t, s) = frame_coordinates(&pt(0, 0), &u, p);
            assert!(t.sign().unwrap() >= 0);
            assert!(x.sub(&t).sign().unwrap() >= 0);
            let within = spec.epsilon.sub(&s.abs().unwrap());
            assert!(within.sign().unwrap() >= 0);
        }
    }

    #[test]
    fn turn_signs_follow_the_quarter_turn_template() {
        let spec = CreneauSpec::new(pt(0, 0), pt(1, 0), lam(2, 1), lam(3, 10));
        let path = insert_creneau(&spec).unwrap();
        let mut signs = Vec::new();
        for k in 1..path.points.len() - 1 {
            let din = crate::lattice::primitive_vector(&path.points[k - 1], &path.points[k]).unwrap();
            let dout = crate::lattice::primitive_vector(&path.points[k], &path.points[k + 1]).unwrap();
            let c = din.cross(&dout);
            signs.push(if c.is_positive() { 1 } else { -1 });
        }
        // m = 4 teeth: two blocks of (+,-,-,+).
        assert_eq!(signs, vec![1, -1, -1, 1, 1, -1, -1, 1]);
        // Flipping the teeth side negates every turn.
        let mut flipped = spec.clone();
        flipped.flip = true;
        let path2 = insert_creneau(&flipped).unwrap();
        let mut signs2 = Vec::new();
        for k in 1..path2.points.len() - 1 {
            let din = crate::lattice::primitive_vector(&path2.points[k - 1], &path2.points[k]).unwrap();
            let dout = crate::lattice::primitive_vector(&path2.points[k], &path2.points[k + 1]).unwrap();
            signs2.push(if din.cross(&dout).is_positive() { 1 } else { -1 });
        }
        assert_eq!(signs2, vec![-1, 1, 1, -1, -1, 1, 1, -1]);
    }

    /// Splice a path into a complex and verify the balancing condition at
    /// every interior vertex.
    fn assert_interior_balanced(path: &CreneauPath) {
        let mut complex = Complex::default();
        for p in &path.points {
            complex.vertices.push(p.clone());
        }
        for k in 0..path.points.len() - 1 {
            complex.segments.push(Segment {
                a: k,
                b: k + 1,
                weight: BigInt::one(),
            });
        }
        for r in &path.rays {
            complex.rays.push(Ray {
                apex: r.at,
                dir: r.dir.clone(),
                weight: r.weight.clone(),
            });
        }
        for k in 1..path.points.len() - 1 {
            let (dx, dy) = balance_defect(&complex, k).unwrap();
            assert!(dx.is_zero() && dy.is_zero(), "vertex {k} unbalanced");
        }
    }

    #[test]
    fn interior_vertices_balance_after_ray_attachment() {
        let axis = CreneauSpec::new(pt(0, 0), pt(1, 0), lam(2, 1), lam(3, 10));
        assert_interior_balanced(&insert_creneau(&axis).unwrap());
        let skew = CreneauSpec::new(pt(0, 0), pt(2, 4), lam(3, 1), lam(1, 5));
        assert_interior_balanced(&insert_creneau_rotated(&skew).unwrap());
        // Direction (1,1): ray sums are (0,±2) and (±2,0), weight 2.
        let diag = CreneauSpec::new(pt(0, 0), pt(3, 3), lam(4, 1), lam(1, 3));
        let path = insert_creneau_rotated(&diag).unwrap();
        assert!(path.rays.iter().all(|r| r.weight == BigInt::from(2)));
        assert_interior_balanced(&path);
    }

    #[test]
    fn lambda_creneau_with_rational_data_matches_the_worked_identity() {
        // x = 1, l = 2, ε = 1/4: n = 2, so 4 legs of 1/4, 3 runs of 1/9,
        // outer thirds 1/3; total 2/3 + 1/3 + 1 = 2.
        let spec = CreneauSpec::new(pt(0, 0), pt(1, 0), lam(2, 1), lam(1, 4));
        let path = insert_creneau_lambda(&spec).unwrap();
        assert_eq!(path.teeth, 4);
        let mut legs = 0;
        let mut runs = 0;
        let mut outers = 0;
        for w in path.points.windows(2) {
            let (dir, len) = direction_and_length(&w[0], &w[1]).unwrap();
            if dir.m.is_zero() {
                legs += 1;
                assert_eq!(len, lam(1, 4));
            } else if len == lam(1, 3) {
                outers += 1;
            } else {
                runs += 1;
                assert_eq!(len, lam(1, 9));
            }
        }
        assert_eq!((legs, runs, outers), (4, 3, 2));
        assert_eq!(path.total_tropical_length().unwrap(), lam(2, 1));
        assert_interior_balanced(&path);
    }

    #[test]
    fn lambda_creneau_keeps_irrational_coordinates_in_the_span() {
        let ctx = LambdaContext::new(vec![
            Generator::from_decimal("g1", "1.414213562373095").unwrap(),
        ])
        .unwrap();
        let g1 = LambdaScalar::generator(&ctx, 0);
        // Host (0,0)-(g1, 0): x = g1; target g1 + 1, ε = 1/4: n = 2.
        let start = pt(0, 0);
        let end = Point::new(g1.clone(), LambdaScalar::zero());
        let target = g1.add(&LambdaScalar::one());
        let spec = CreneauSpec::new(start, end, target.clone(), lam(1, 4));
        let path = insert_creneau_lambda(&spec).unwrap();
        assert_eq!(path.teeth, 4);
        assert_eq!(path.total_tropical_length().unwrap(), target);
        let allowed: std::collections::BTreeSet<u32> = [0].into_iter().collect();
        for p in &path.points {
            assert!(p.x.in_qspan(&allowed) && p.y.in_qspan(&allowed));
        }
        assert_interior_balanced(&path);
    }

    #[test]
    fn rotated_gadget_commutes_with_quarter_turns() {
        // Build on the horizontal host, then turn; build on the turned
        // host directly; same staircase.
        let spec = CreneauSpec::new(pt(0, 0), pt(3, 0), lam(4, 1), lam(1, 4));
        let flat = insert_creneau_rotated(&spec).unwrap();
        let turned_spec = CreneauSpec::new(pt(0, 0), pt(0, 3), lam(4, 1), lam(1, 4));
        let turned = insert_creneau_rotated(&turned_spec).unwrap();
        assert_eq!(flat.points.len(), turned.points.len());
        for (p, q) in flat.points.iter().zip(turned.points.iter()) {
            // Quarter turn: (x, y) -> (-y, x).
            assert_eq!(q.x, p.y.neg());
            assert_eq!(q.y, p.x.clone());
        }
        for (r, s) in flat.rays.iter().zip(turned.rays.iter()) {
            assert_eq!(s.dir.m, -&r.dir.n);
            assert_eq!(s.dir.n, r.dir.m.clone());
            assert_eq!(s.weight, r.weight);
        }
    }
}
