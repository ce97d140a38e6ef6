//! Planar layout: crossing-minimal planarization, exact rational
//! straight-line drawing, and local orthogonalization of crossings.
//!
//! The stages compose left to right:
//!
//! 1. [`crossing_number_exact`] / [`planarize_heuristic`] replace each
//!    crossing by a degree-4 dummy vertex, yielding a planar graph.
//! 2. [`straight_line_draw`] embeds that graph with straight segments and
//!    rational coordinates (Tutte's barycentric method, solved exactly).
//! 3. [`orthogonalize_crossings`] reroutes each crossing locally so the
//!    two strands pass through it with primitive directions (1,0), (0,1).
//!
//! All geometry in this module is exact: coordinates are rationals, and
//! every predicate (orientation, crossing, containment) is decided by
//! sign computations without rounding.

pub mod crossing;
pub mod insertion;
pub mod ortho;
pub mod planarity;
pub mod tutte;

pub use crossing::crossing_number_exact;
pub use insertion::planarize_heuristic;
pub use ortho::orthogonalize_crossings;
pub use planarity::LayoutGraph;
pub use tutte::straight_line_draw;

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;
pub type QPoint = (Q, Q);

/// Sign of the cross product (b − a) × (c − a): counterclockwise turn is
/// positive.
pub fn orient(a: &QPoint, b: &QPoint, c: &QPoint) -> i32 {
    let v = (&b.0 - &a.0) * (&c.1 - &a.1) - (&b.1 - &a.1) * (&c.0 - &a.0);
    match v.cmp(&Q::zero()) {
        std::cmp::Ordering::Less => -1,
        std::cmp::Ordering::Equal => 0,
        std::cmp::Ordering::Greater => 1,
    }
}

fn dot(u: &QPoint, v: &QPoint) -> Q {
    &u.0 * &v.0 + &u.1 * &v.1
}

fn sub(a: &QPoint, b: &QPoint) -> QPoint {
    (&a.0 - &b.0, &a.1 - &b.1)
}

/// `p` lies on the open segment (a, b).
pub fn strictly_inside(a: &QPoint, b: &QPoint, p: &QPoint) -> bool {
    orient(a, b, p) == 0 && dot(&sub(a, p), &sub(b, p)) < Q::zero()
}

/// Transversal interior intersection of segments (a,b) and (c,d), with
/// its location. Shared endpoints and tangential touches return None.
pub fn proper_crossing(a: &QPoint, b: &QPoint, c: &QPoint, d: &QPoint) -> Option<QPoint> {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if o1 * o2 < 0 && o3 * o4 < 0 {
        // Solve a + t (b − a) = c + s (d − c) for t.
        let r = sub(b, a);
        let s = sub(d, c);
        let denom = &r.0 * &s.1 - &r.1 * &s.0;
        let ca = sub(c, a);
        let t = (&ca.0 * &s.1 - &ca.1 * &s.0) / denom;
        Some((&a.0 + &t * &r.0, &a.1 + &t * &r.1))
    } else {
        None
    }
}

/// Squared euclidean distance.
pub fn sq_dist(a: &QPoint, b: &QPoint) -> Q {
    let d = sub(a, b);
    &d.0 * &d.0 + &d.1 * &d.1
}

/// Squared distance from `p` to the closed segment (a, b).
pub fn sq_dist_point_segment(p: &QPoint, a: &QPoint, b: &QPoint) -> Q {
    let ab = sub(b, a);
    let len2 = dot(&ab, &ab);
    if len2.is_zero() {
        return sq_dist(p, a);
    }
    let t = dot(&sub(p, a), &ab) / &len2;
    if t <= Q::zero() {
        sq_dist(p, a)
    } else if t >= Q::one() {
        sq_dist(p, b)
    } else {
        let proj = (&a.0 + &t * &ab.0, &a.1 + &t * &ab.1);
        sq_dist(p, &proj)
    }
}

/// Comparator for cyclic angular order of nonzero vectors, starting just
/// above the positive x-axis and sweeping counterclockwise.
pub fn angular_cmp(u: &QPoint, v: &QPoint) -> std::cmp::Ordering {
    let half = |w: &QPoint| -> u8 {
        if w.1 > Q::zero() || (w.1.is_zero() && w.0 > Q::zero()) {
            0
        } else {
            1
        }
    };
    half(u).cmp(&half(v)).then_with(|| {
        let cross = &u.0 * &v.1 - &u.1 * &v.0;
        // cross > 0: u comes before v within the half-plane.
        Q::zero().cmp(&cross)
    })
}

/// Largest power of two p (integer or fractional) with p² ≤ bound.
/// Requires bound > 0.
pub fn pow2_sq_below(bound: &Q) -> Q {
    assert!(bound > &Q::zero(), "bound must be positive");
    let mut p = Q::one();
    let two = Q::from_integer(BigInt::from(2));
    while &p * &p > *bound {
        p /= &two;
    }
    loop {
        let next = &p * &two;
        if &next * &next <= *bound {
            p = next;
        } else {
            return p;
        }
    }
}

/// Planar proxy of a drawing-with-crossings: every crossing is replaced
/// by a degree-4 dummy vertex shared by the two edges that cross there.
#[derive(Clone, Debug)]
pub struct Planarization {
    /// Number of dummy vertices (= crossings realized).
    pub crossings: u32,
    /// Whether `crossings` is the exact crossing number (vs. an upper bound).
    pub exact: bool,
    /// Vertices of the input graph are 0..n_orig.
    pub n_orig: usize,
    /// Total vertex count; dummies are n_orig..n.
    pub n: usize,
    /// Per input edge: its vertex path, endpoints first and last, dummies
    /// between, in traversal order.
    pub chains: Vec<Vec<usize>>,
    /// For dummy n_orig + i: the two input edges crossing there.
    pub dummy_edges: Vec<(usize, usize)>,
}

impl Planarization {
    /// The planarization of a graph that is already planar.
    pub fn trivial(g: &LayoutGraph) -> Planarization {
        Planarization {
            crossings: 0,
            exact: true,
            n_orig: g.n,
            n: g.n,
            chains: g.edges.iter().map(|&(u, v)| vec![u, v]).collect(),
            dummy_edges: Vec::new(),
        }
    }

    /// The planar graph of edge fragments, with each fragment's owning
    /// input edge.
    pub fn planar_graph(&self) -> (LayoutGraph, Vec<usize>) {
        let mut edges = Vec::new();
        let mut owner = Vec::new();
        for (k, chain) in self.chains.iter().enumerate() {
            for w in chain.windows(2) {
                edges.push((w[0], w[1]));
                owner.push(k);
            }
        }
        (LayoutGraph::new(self.n, edges), owner)
    }

    /// Structural audit: deleting dummies and re-merging fragments must
    /// recover exactly the input graph.
    pub fn validate(&self, g: &LayoutGraph) -> Result<()> {
        let fail = |m: String| Error::Schema { message: m };
        if self.chains.len() != g.edges.len() {
            return Err(fail("chain count differs from edge count".into()));
        }
        if self.n_orig != g.n || self.n != g.n + self.dummy_edges.len() {
            return Err(fail("vertex counts inconsistent".into()));
        }
        if self.crossings as usize != self.dummy_edges.len() {
            return Err(fail("crossing count differs from dummy count".into()));
        }
        let mut seen_at: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (k, chain) in self.chains.iter().enumerate() {
            let (u, v) = g.edges[k];
            if chain.len() < 2 || chain[0] != u || *chain.last().unwrap() != v {
                return Err(fail(format!("chain {k} does not span its edge")));
            }
            for &d in &chain[1..chain.len() - 1] {
                if d < self.n_orig || d >= self.n {
                    return Err(fail(format!("chain {k} passes through non-dummy {d}")));
                }
                seen_at.entry(d).or_default().push(k);
            }
        }
        for (i, &(e1, e2)) in self.dummy_edges.iter().enumerate() {
            let d = self.n_orig + i;
            let owners = seen_at.get(&d).cloned().unwrap_or_default();
            if owners.len() != 2 || owners[0].min(owners[1]) != e1.min(e2)
                || owners[0].max(owners[1]) != e1.max(e2)
            {
                return Err(fail(format!("dummy {d} is not shared by its two edges")));
            }
        }
        Ok(())
    }
}

/// One crossing in a drawing.
#[derive(Clone, Debug)]
pub struct CrossingMark {
    /// Index into `Drawing::points` locating the crossing.
    pub point: usize,
    /// The two chains (input edges) that cross there.
    pub chains: (usize, usize),
    /// False: the crossing is a shared interior chain vertex (four
    /// fragments meet at it). True: the crossing is a transversal
    /// interior intersection of one segment from each chain, and `point`
    /// is not a vertex of either chain.
    pub rerouted: bool,
}

/// A piecewise-linear drawing with rational coordinates: one polyline
/// (chain) per input edge, plus crossing marks.
#[derive(Clone, Debug, Default)]
pub struct Drawing {
    pub points: Vec<QPoint>,
    pub chains: Vec<Vec<usize>>,
    pub marks: Vec<CrossingMark>,
}

impl Drawing {
    /// All (chain, segment) pairs as point-index segments.
    fn segments(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for (k, chain) in self.chains.iter().enumerate() {
            for w in chain.windows(2) {
                out.push((k, w[0], w[1]));
            }
        }
        out
    }

    /// Point indices referenced by at least one chain.
    fn referenced(&self) -> BTreeSet<usize> {
        self.chains.iter().flatten().copied().collect()
    }
}

/// Exhaustive geometric audit of a drawing. Checks that chains are
/// simple polylines, that distinct referenced points have distinct
/// coordinates, that no referenced point sits in the interior of a
/// foreign segment, that contacts between chains happen only at shared
/// endpoints or recorded crossings, and that the transversal crossings
/// found are exactly the drawing's marks (with alternation at shared
/// dummy vertices). Returns the first flaw as text.
pub fn check_drawing(d: &Drawing) -> std::result::Result<(), String> {
    let referenced = d.referenced();
    for &i in &referenced {
        if i >= d.points.len() {
            return Err(format!("chain references missing point {i}"));
        }
    }
    for (k, chain) in d.chains.iter().enumerate() {
        if chain.len() < 2 {
            return Err(format!("chain {k} has fewer than two points"));
        }
        let mut seen = BTreeSet::new();
        for &p in chain {
            if !seen.insert(p) {
                return Err(format!("chain {k} visits point {p} twice"));
            }
        }
    }
    // Distinct coordinates for distinct referenced indices.
    let mut coord_of: BTreeMap<(Q, Q), usize> = BTreeMap::new();
    for &i in &referenced {
        if let Some(&j) = coord_of.get(&d.points[i]) {
            return Err(format!("points {j} and {i} coincide"));
        }
        coord_of.insert(d.points[i].clone(), i);
    }
    // Usage pattern per point: (chain, interior?) pairs.
    let mut usage: BTreeMap<usize, Vec<(usize, bool)>> = BTreeMap::new();
    for (k, chain) in d.chains.iter().enumerate() {
        for (pos, &p) in chain.iter().enumerate() {
            let interior = pos > 0 && pos + 1 < chain.len();
            usage.entry(p).or_default().push((k, interior));
        }
    }
    let mut interior_shared: Vec<(usize, (usize, usize))> = Vec::new();
    for (&p, uses) in &usage {
        let interiors: Vec<usize> = uses.iter().filter(|u| u.1).map(|u| u.0).collect();
        match interiors.len() {
            0 => {}
            1 => {
                if uses.len() > 1 {
                    return Err(format!(
                        "point {p} is interior to one chain but touched by another"
                    ));
                }
            }
            2 => {
                if uses.len() != 2 {
                    return Err(format!("point {p} mixes interior and endpoint uses"));
                }
                interior_shared.push((p, (interiors[0].min(interiors[1]), interiors[0].max(interiors[1]))));
            }
            _ => return Err(format!("point {p} is interior to three or more chains")),
        }
    }
    let segments = d.segments();
    // Referenced points against foreign segments.
    for &i in &referenced {
        for &(_, a, b) in &segments {
            if a == i || b == i {
                continue;
            }
            if strictly_inside(&d.points[a], &d.points[b], &d.points[i]) {
                return Err(format!("point {i} lies inside segment ({a},{b})"));
            }
        }
    }
    // Pairwise segment checks.
    let mut found: Vec<((usize, usize), QPoint)> = Vec::new();
    for i in 0..segments.len() {
        for j in (i + 1)..segments.len() {
            let (ka, a1, a2) = segments[i];
            let (kb, b1, b2) = segments[j];
            let shared: Vec<usize> = [a1, a2]
                .iter()
                .filter(|x| **x == b1 || **x == b2)
                .copied()
                .collect();
            match shared.len() {
                2 => return Err(format!("segments ({a1},{a2}) and ({b1},{b2}) coincide")),
                1 => {
                    // Legal vertex contact; forbid collinear overhang.
                    let s = shared[0];
                    let pa = if a1 == s { a2 } else { a1 };
                    let pb = if b1 == s { b2 } else { b1 };
                    let u = sub(&d.points[pa], &d.points[s]);
                    let v = sub(&d.points[pb], &d.points[s]);
                    let cross = &u.0 * &v.1 - &u.1 * &v.0;
                    if cross.is_zero() && dot(&u, &v) > Q::zero() {
                        return Err(format!(
                            "segments ({a1},{a2}) and ({b1},{b2}) overlap along a line"
                        ));
                    }
                }
                _ => {
                    if let Some(p) = proper_crossing(
                        &d.points[a1],
                        &d.points[a2],
                        &d.points[b1],
                        &d.points[b2],
                    ) {
                        if ka == kb {
                            return Err(format!("chain {ka} crosses itself"));
                        }
                        found.push(((ka.min(kb), ka.max(kb)), p));
                    }
                    // Tangential touches are covered by the
                    // point-inside-segment scan; collinear overlaps with
                    // four distinct endpoints always put one endpoint
                    // strictly inside the other segment, caught there too.
                }
            }
        }
    }
    // Crossings found must match the rerouted marks exactly.
    let mut expected: Vec<((usize, usize), QPoint)> = Vec::new();
    let mut expected_shared: Vec<(usize, (usize, usize))> = Vec::new();
    for m in &d.marks {
        let pair = (m.chains.0.min(m.chains.1), m.chains.0.max(m.chains.1));
        if m.rerouted {
            if m.point >= d.points.len() {
                return Err(format!("mark point {} missing", m.point));
            }
            expected.push((pair, d.points[m.point].clone()));
        } else {
            expected_shared.push((m.point, pair));
        }
    }
    let key = |v: &((usize, usize), QPoint)| (v.0, (v.1).0.clone(), (v.1).1.clone());
    found.sort_by_key(key);
    expected.sort_by_key(key);
    if found.len() != expected.len() {
        return Err(format!(
            "found {} transversal crossings, marks record {}",
            found.len(),
            expected.len()
        ));
    }
    for (f, e) in found.iter().zip(expected.iter()) {
        if f.0 != e.0 || f.1 != e.1 {
            return Err(format!(
                "crossing of chains {:?} at unexpected location",
                f.0
            ));
        }
    }
    expected_shared.sort_unstable();
    interior_shared.sort_unstable();
    if expected_shared != interior_shared {
        return Err("shared interior vertices do not match crossing marks".into());
    }
    // Alternation at shared dummy vertices.
    for &(p, (k1, k2)) in &interior_shared {
        let mut dirs: Vec<(QPoint, usize)> = Vec::new();
        for &k in &[k1, k2] {
            let chain = &d.chains[k];
            let pos = chain.iter().position(|&x| x == p).unwrap();
            for nb in [chain[pos - 1], chain[pos + 1]] {
                dirs.push((sub(&d.points[nb], &d.points[p]), k));
            }
        }
        dirs.sort_by(|x, y| angular_cmp(&x.0, &y.0));
        let owners: Vec<usize> = dirs.iter().map(|d| d.1).collect();
        if owners[0] == owners[1] || owners[1] == owners[2] {
            return Err(format!(
                "fragments do not alternate around crossing vertex {p}"
            ));
        }
    }
    Ok(())
}

/// Round to the nearest multiple of 2^-level (ties away from zero).
pub fn snap_to_grid(q: &Q, level: u32) -> Q {
    let scale = BigInt::one() << level;
    let scaled = q * Q::from_integer(scale.clone());
    Q::new(scaled.round().to_integer(), scale)
}

/// Move every vertex to a nearby rational with small denominator while
/// preserving the crossing set as a combinatorial object. Inputs that are
/// already on the coarsest valid grid come back unchanged; degenerate
/// inputs (tangential incidences that any perturbation would change) are
/// rejected.
pub fn rationalize_vertices(d: &Drawing) -> Result<Drawing> {
    if let Err(flaw) = check_drawing(d) {
        return Err(Error::PerturbationFailed { reason: flaw });
    }
    'levels: for level in 0..=64u32 {
        let mut snapped = d.clone();
        for p in &mut snapped.points {
            *p = (snap_to_grid(&p.0, level), snap_to_grid(&p.1, level));
        }
        // Relocate rerouted crossing points onto the snapped strands.
        for mi in 0..snapped.marks.len() {
            if !snapped.marks[mi].rerouted {
                continue;
            }
            let (k1, k2) = snapped.marks[mi].chains;
            let mut hits = Vec::new();
            for w1 in snapped.chains[k1].windows(2) {
                for w2 in snapped.chains[k2].windows(2) {
                    if let Some(p) = proper_crossing(
                        &snapped.points[w1[0]],
                        &snapped.points[w1[1]],
                        &snapped.points[w2[0]],
                        &snapped.points[w2[1]],
                    ) {
                        hits.push(p);
                    }
                }
            }
            if hits.len() != 1 {
                continue 'levels;
            }
            let point_idx = snapped.marks[mi].point;
            snapped.points[point_idx] = hits.pop().unwrap();
        }
        if check_drawing(&snapped).is_ok() {
            return Ok(snapped);
        }
    }
    // No coarse grid worked; the input itself is valid, keep it.
    Ok(d.clone())
}

/// Add edges between non-adjacent vertices until the graph is
/// biconnected, preserving planarity. Every added edge joins two
/// neighbors of a cut vertex that lie in different components of the
/// graph minus that vertex; such vertices can always be made
/// rotation-consecutive around the cut vertex in some planar embedding,
/// so the augmented graph stays planar. Returns the augmented graph and
/// the original edge count (added edges sit at the end).
pub fn biconnect_augment(g: &LayoutGraph) -> (LayoutGraph, usize) {
    let mut aug = g.clone();
    loop {
        let blocks = planarity::blocks(&aug);
        let mut block_count = vec![0usize; aug.n];
        for b in &blocks {
            let mut verts = BTreeSet::new();
            for &e in b {
                verts.insert(aug.edges[e].0);
                verts.insert(aug.edges[e].1);
            }
            for v in verts {
                block_count[v] += 1;
            }
        }
        let Some(v) = (0..aug.n).find(|&v| block_count[v] >= 2) else {
            break;
        };
        // Components of aug − v.
        let adj = aug.adjacency();
        let mut comp = vec![usize::MAX; aug.n];
        let mut next = 0usize;
        for s in 0..aug.n {
            if s == v || comp[s] != usize::MAX {
                continue;
            }
            comp[s] = next;
            let mut stack = vec![s];
            while let Some(x) = stack.pop() {
                for &(y, _) in &adj[x] {
                    if y != v && comp[y] == usize::MAX {
                        comp[y] = next;
                        stack.push(y);
                    }
                }
            }
            next += 1;
        }
        let mut nbrs: Vec<usize> = adj[v].iter().map(|&(w, _)| w).collect();
        nbrs.sort_unstable();
        nbrs.dedup();
        let a = nbrs[0];
        let b = *nbrs
            .iter()
            .find(|&&w| comp[w] != comp[a])
            .expect("a cut vertex has neighbors in two components");
        aug.edges.push((a.min(b), a.max(b)));
    }
    (aug, g.edges.len())
}
