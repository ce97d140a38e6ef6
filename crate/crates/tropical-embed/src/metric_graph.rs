//! Abstract metric graphs and the tropical-modification moves.
//!
//! A metric graph is a finite connected multigraph whose edges carry a
//! strictly positive length or the distinguished value ∞. Infinity is a tag,
//! never a numeric sentinel; an infinite edge must end in a degree-1
//! "infinite" vertex, the point at infinity.
//!
//! Three moves modify a graph without changing the curve it describes:
//! subdividing an edge, removing a degree-2 vertex (reverse subdivision),
//! and attaching an infinite leaf. [`normalize_simple`] uses subdivisions
//! alone to remove loops and parallel edges, recording a replayable
//! [`ModificationTrace`].
//!
//! All operations are value-semantic: they borrow the old graph and return
//! a new one, so traces can always be replayed against the original.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::lambda::LambdaScalar;
use crate::rat::rat;

/// Edge length: strictly positive scalar or ∞.
#[derive(Clone, PartialEq, Eq)]
pub enum EdgeLength {
    Finite(LambdaScalar),
    Infinite,
}

impl EdgeLength {
    pub fn is_infinite(&self) -> bool {
        matches!(self, EdgeLength::Infinite)
    }

    pub fn finite(&self) -> Option<&LambdaScalar> {
        match self {
            EdgeLength::Finite(l) => Some(l),
            EdgeLength::Infinite => None,
        }
    }

    /// Sum of two lengths; ∞ absorbs.
    pub fn add(&self, other: &EdgeLength) -> EdgeLength {
        match (self, other) {
            (EdgeLength::Finite(a), EdgeLength::Finite(b)) => EdgeLength::Finite(a.add(b)),
            _ => EdgeLength::Infinite,
        }
    }
}

impl fmt::Debug for EdgeLength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeLength::Finite(l) => write!(f, "{l}"),
            EdgeLength::Infinite => write!(f, "inf"),
        }
    }
}

/// Finite vertices are ordinary points; infinite vertices are points at
/// infinity, always of degree 1 on an infinite edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VertexKind {
    Finite,
    Infinite,
}

/// One edge of the multigraph. Endpoint order is meaningful only to
/// subdivision (the first split length sits on the `u` side).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub length: EdgeLength,
}

/// Finite connected multigraph with positive-or-infinite edge lengths.
///
/// Vertex and edge ids are opaque, stable across moves, and assigned from
/// sequential counters, so identical operation sequences produce identical
/// ids and traces replay exactly.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MetricGraph {
    vertices: BTreeMap<usize, VertexKind>,
    edges: BTreeMap<usize, Edge>,
    next_vertex: usize,
    next_edge: usize,
}

/// One tropical-modification move, with enough data to replay it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Move {
    Subdivide {
        edge: usize,
        lengths: (EdgeLength, EdgeLength),
    },
    ReverseSubdivide {
        vertex: usize,
    },
    AddInfiniteLeaf {
        vertex: usize,
    },
}

/// Ordered list of moves; replaying it on the original graph reproduces
/// the modified graph edge-for-edge, ids included.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ModificationTrace {
    pub moves: Vec<Move>,
}

impl ModificationTrace {
    pub fn replay(&self, g: &MetricGraph) -> Result<MetricGraph> {
        let mut cur = g.clone();
        for mv in &self.moves {
            cur = match mv {
                Move::Subdivide { edge, lengths } => cur.subdivide(*edge, lengths.clone())?,
                Move::ReverseSubdivide { vertex } => cur.reverse_subdivide(*vertex)?,
                Move::AddInfiniteLeaf { vertex } => cur.add_infinite_leaf(*vertex)?.0,
            };
        }
        Ok(cur)
    }
}

impl MetricGraph {
    pub fn new() -> MetricGraph {
        MetricGraph::default()
    }

    /// Add a fresh finite vertex and return its id.
    pub fn add_vertex(&mut self) -> usize {
        let id = self.next_vertex;
        self.next_vertex += 1;
        self.vertices.insert(id, VertexKind::Finite);
        id
    }

    /// Add an edge with a strictly positive finite length.
    pub fn add_edge(&mut self, u: usize, v: usize, length: LambdaScalar) -> Result<usize> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if length.sign()? <= 0 {
            return Err(Error::NonPositiveLength {
                got: length.to_string(),
            });
        }
        let id = self.next_edge;
        self.next_edge += 1;
        self.edges.insert(
            id,
            Edge {
                u,
                v,
                length: EdgeLength::Finite(length),
            },
        );
        Ok(id)
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if self.vertices.contains_key(&v) {
            Ok(())
        } else {
            Err(Error::UnknownVertex { vertex: v })
        }
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.vertices.keys().copied()
    }

    pub fn vertex_kind(&self, v: usize) -> Option<VertexKind> {
        self.vertices.get(&v).copied()
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.edges.keys().copied()
    }

    pub fn edge(&self, e: usize) -> Option<&Edge> {
        self.edges.get(&e)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Ids of edges incident to `v`, ascending; loops appear once.
    pub fn incident_edges(&self, v: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter(|(_, e)| e.u == v || e.v == v)
            .map(|(id, _)| *id)
            .collect()
    }

    /// Degree of `v`; loops count twice.
    pub fn degree(&self, v: usize) -> usize {
        self.edges
            .values()
            .map(|e| (e.u == v) as usize + (e.v == v) as usize)
            .sum()
    }

    /// Structural validity: positive lengths, the infinite-edge rules,
    /// and connectivity. Errors use the schema category so invalid files
    /// and invalid constructions report identically.
    pub fn validate(&self) -> Result<()> {
        let fail = |message: String| Err(Error::Schema { message });
        if self.vertices.is_empty() {
            return fail("graph has no vertices".into());
        }
        for (id, e) in &self.edges {
            self.check_vertex(e.u)?;
            self.check_vertex(e.v)?;
            match &e.length {
                EdgeLength::Finite(l) => {
                    if l.sign()? <= 0 {
                        return Err(Error::NonPositiveLength { got: l.to_string() });
                    }
                }
                EdgeLength::Infinite => {
                    let u_inf = self.vertices[&e.u] == VertexKind::Infinite;
                    let v_inf = self.vertices[&e.v] == VertexKind::Infinite;
                    match (u_inf, v_inf) {
                        (true, true) => {
                            return fail(format!("edge {id} has two infinite endpoints"));
                        }
                        (false, false) => {
                            return fail(format!(
                                "edge {id} has infinite length but no infinite endpoint"
                            ));
                        }
                        _ => {}
                    }
                }
            }
        }
        for (&v, &kind) in &self.vertices {
            if kind == VertexKind::Infinite {
                let inc = self.incident_edges(v);
                if self.degree(v) != 1 {
                    return fail(format!("infinite vertex {v} must have degree 1"));
                }
                let e = &self.edges[&inc[0]];
                if !e.length.is_infinite() {
                    return fail(format!("infinite vertex {v} on a finite edge"));
                }
            }
        }
        if !self.is_connected() {
            return fail("graph is not connected".into());
        }
        Ok(())
    }

    fn is_connected(&self) -> bool {
        let Some(&start) = self.vertices.keys().next() else {
            return true;
        };
        let mut seen: BTreeMap<usize, bool> =
            self.vertices.keys().map(|&v| (v, false)).collect();
        let mut stack = vec![start];
        seen.insert(start, true);
        while let Some(v) = stack.pop() {
            for eid in self.incident_edges(v) {
                let e = &self.edges[&eid];
                let w = if e.u == v { e.v } else { e.u };
                if !seen[&w] {
                    seen.insert(w, true);
                    stack.push(w);
                }
            }
        }
        seen.values().all(|&s| s)
    }

    /// Split an edge at a fresh degree-2 vertex. The first length lands on
    /// the `u` side. For an infinite edge, exactly the piece adjacent to
    /// the infinite endpoint must be ∞.
    pub fn subdivide(&self, edge: usize, lengths: (EdgeLength, EdgeLength)) -> Result<MetricGraph> {
        let e = self.edges.get(&edge).ok_or(Error::Schema {
            message: format!("unknown edge {edge}"),
        })?;
        let (lu, lv) = &lengths;
        for l in [lu, lv] {
            if let EdgeLength::Finite(l) = l {
                if l.sign()? <= 0 {
                    return Err(Error::NonPositiveLength { got: l.to_string() });
                }
            }
        }
        let mismatch = || {
            let shown = |l: &EdgeLength| match l {
                EdgeLength::Finite(x) => x.to_string(),
                EdgeLength::Infinite => "inf".into(),
            };
            Err(Error::LengthMismatch {
                edge,
                got: format!("({}, {})", shown(lu), shown(lv)),
                expected: shown(&e.length),
            })
        };
        match &e.length {
            EdgeLength::Finite(total) => match (lu, lv) {
                (EdgeLength::Finite(a), EdgeLength::Finite(b)) => {
                    if a.add(b) != *total {
                        return mismatch();
                    }
                }
                _ => return mismatch(),
            },
            EdgeLength::Infinite => {
                // The ∞ piece must sit on the infinite endpoint's side.
                let u_inf = self.vertices[&e.u] == VertexKind::Infinite;
                let ok = if u_inf {
                    lu.is_infinite() && !lv.is_infinite()
                } else {
                    lv.is_infinite() && !lu.is_infinite()
                };
                if !ok {
                    return mismatch();
                }
            }
        }
        let mut g = self.clone();
        let e = g.edges.remove(&edge).unwrap();
        let mid = g.next_vertex;
        g.next_vertex += 1;
        g.vertices.insert(mid, VertexKind::Finite);
        let id1 = g.next_edge;
        let id2 = g.next_edge + 1;
        g.next_edge += 2;
        g.edges.insert(
            id1,
            Edge {
                u: e.u,
                v: mid,
                length: lengths.0,
            },
        );
        g.edges.insert(
            id2,
            Edge {
                u: mid,
                v: e.v,
                length: lengths.1,
            },
        );
        Ok(g)
    }

    /// Remove a degree-2 vertex, merging its two edges into one of summed
    /// length (∞ absorbs). Refuses loops-in-the-making and double-∞ merges.
    pub fn reverse_subdivide(&self, vertex: usize) -> Result<MetricGraph> {
        self.check_vertex(vertex)?;
        let inc = self.incident_edges(vertex);
        if self.degree(vertex) != 2 || inc.len() != 2 {
            return Err(Error::NotRemovable {
                vertex,
                reason: format!("degree is {}, not 2", self.degree(vertex)),
            });
        }
        let (ea, eb) = (&self.edges[&inc[0]], &self.edges[&inc[1]]);
        let na = if ea.u == vertex { ea.v } else { ea.u };
        let nb = if eb.u == vertex { eb.v } else { eb.u };
        if na == nb {
            return Err(Error::NotRemovable {
                vertex,
                reason: "both edges lead to the same neighbor".into(),
            });
        }
        if ea.length.is_infinite() && eb.length.is_infinite() {
            return Err(Error::NotRemovable {
                vertex,
                reason: "merging two infinite edges".into(),
            });
        }
        let mut g = self.clone();
        let length = ea.length.add(&eb.length);
        g.edges.remove(&inc[0]);
        g.edges.remove(&inc[1]);
        g.vertices.remove(&vertex);
        let id = g.next_edge;
        g.next_edge += 1;
        g.edges.insert(
            id,
            Edge {
                u: na,
                v: nb,
                length,
            },
        );
        Ok(g)
    }

    /// Attach a fresh infinite leaf (∞ edge to a fresh degree-1 infinite
    /// vertex) at a finite vertex. Returns the new graph and the leaf's
    /// vertex id.
    pub fn add_infinite_leaf(&self, vertex: usize) -> Result<(MetricGraph, usize)> {
        self.check_vertex(vertex)?;
        if self.vertices[&vertex] == VertexKind::Infinite {
            return Err(Error::InfiniteVertex { vertex });
        }
        let mut g = self.clone();
        let leaf = g.next_vertex;
        g.next_vertex += 1;
        g.vertices.insert(leaf, VertexKind::Infinite);
        let id = g.next_edge;
        g.next_edge += 1;
        g.edges.insert(
            id,
            Edge {
                u: vertex,
                v: leaf,
                length: EdgeLength::Infinite,
            },
        );
        Ok((g, leaf))
    }

    /// Assemble a graph value with explicit ids, as when loading a file.
    /// Id counters resume after the largest present ids, so later moves
    /// never collide; structural soundness is [`MetricGraph::validate`]'s
    /// job, not this constructor's.
    pub fn from_parts(
        vertices: BTreeMap<usize, VertexKind>,
        edges: BTreeMap<usize, Edge>,
    ) -> MetricGraph {
        let next_vertex = vertices.keys().max().map_or(0, |m| m + 1);
        let next_edge = edges.keys().max().map_or(0, |m| m + 1);
        MetricGraph {
            vertices,
            edges,
            next_vertex,
            next_edge,
        }
    }
}

/// Remove loops and parallel edges using subdivisions only.
///
/// Each loop is subdivided twice, at one third and two thirds of its
/// length, giving a triangle of equal pieces; each parallel edge beyond
/// the first of its group is subdivided at its midpoint. Both fractions
/// keep lengths inside Λ (closure under rational scaling). The returned
/// trace replays on the input to the returned graph exactly.
pub fn normalize_simple(g: &MetricGraph) -> Result<(MetricGraph, ModificationTrace)> {
    let third = rat(1, 3);
    let half = rat(1, 2);
    let mut cur = g.clone();
    let mut trace = ModificationTrace::default();
    let apply = |cur: &mut MetricGraph, trace: &mut ModificationTrace, edge: usize, fractions: (LambdaScalar, LambdaScalar)| -> Result<()> {
        let lengths = (EdgeLength::Finite(fractions.0), EdgeLength::Finite(fractions.1));
        *cur = cur.subdivide(edge, lengths.clone())?;
        trace.moves.push(Move::Subdivide { edge, lengths });
        Ok(())
    };
    // Loops first, ascending edge id. A loop's length is always finite
    // (infinite edges need a degree-1 endpoint).
    let loops: Vec<usize> = cur
        .edges
        .iter()
        .filter(|(_, e)| e.u == e.v)
        .map(|(id, _)| *id)
        .collect();
    for id in loops {
        let total = cur.edges[&id]
            .length
            .finite()
            .expect("loops cannot be infinite")
            .clone();
        let piece = total.scale_rat(&third);
        let second_id = cur.next_edge + 1;
        apply(&mut cur, &mut trace, id, (piece.clone(), piece.scale_rat(&rat(2, 1))))?;
        apply(&mut cur, &mut trace, second_id, (piece.clone(), piece))?;
    }
    // Parallel groups, ascending pair then edge id; keep the first edge of
    // each group, bisect the rest.
    let mut groups: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (id, e) in &cur.edges {
        let key = (e.u.min(e.v), e.u.max(e.v));
        groups.entry(key).or_default().push(*id);
    }
    for (_, ids) in groups {
        for &id in ids.iter().skip(1) {
            let total = cur.edges[&id]
                .length
                .finite()
                .expect("parallel edges cannot be infinite")
                .clone();
            let piece = total.scale_rat(&half);
            apply(&mut cur, &mut trace, id, (piece.clone(), piece))?;
        }
    }
    Ok((cur, trace))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn len(n: i64) -> LambdaScalar {
        LambdaScalar::from_int(n)
    }

    fn triangle() -> (MetricGraph, [usize; 3]) {
        let mut g = MetricGraph::new();
        let a = g.add_vertex();
        let b = g.add_vertex();
        let c = g.add_vertex();
        g.add_edge(a, b, len(1)).unwrap();
        g.add_edge(b, c, len(1)).unwrap();
        g.add_edge(c, a, len(1)).unwrap();
        (g, [a, b, c])
    }

    #[test]
    fn subdivide_splits_lengths() {
        let mut g = MetricGraph::new();
        let u = g.add_vertex();
        let v = g.add_vertex();
        let e = g.add_edge(u, v, len(5)).unwrap();
        let g2 = g
            .subdivide(e, (EdgeLength::Finite(len(2)), EdgeLength::Finite(len(3))))
            .unwrap();
        assert_eq!(g2.edge_count(), 2);
        assert_eq!(g2.vertex_count(), 3);
        g2.validate().unwrap();
        let bad = g.subdivide(e, (EdgeLength::Finite(len(2)), EdgeLength::Finite(len(2))));
        assert!(matches!(bad, Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn subdivide_infinite_edge_keeps_infinity_at_infinity() {
        let mut g = MetricGraph::new();
        let u = g.add_vertex();
        let (g, _w) = g.add_infinite_leaf(u).unwrap();
        let e = g.edge_ids().next().unwrap();
        // u is the finite side: (finite, inf) is the only legal split.
        let ok = g.subdivide(e, (EdgeLength::Finite(len(2)), EdgeLength::Infinite));
        ok.as_ref().unwrap().validate().unwrap();
        let bad = g.subdivide(e, (EdgeLength::Infinite, EdgeLength::Finite(len(2))));
        assert!(matches!(bad, Err(Error::LengthMismatch { .. })));
        let bad2 = g.subdivide(e, (EdgeLength::Finite(len(2)), EdgeLength::Finite(len(2))));
        assert!(matches!(bad2, Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn reverse_subdivide_merges() {
        let mut g = MetricGraph::new();
        let u = g.add_vertex();
        let p = g.add_vertex();
        let v = g.add_vertex();
        g.add_edge(u, p, len(2)).unwrap();
        g.add_edge(p, v, len(3)).unwrap();
        let g2 = g.reverse_subdivide(p).unwrap();
        assert_eq!(g2.edge_count(), 1);
        let e = g2.edge(g2.edge_ids().next().unwrap()).unwrap();
        assert_eq!(e.length, EdgeLength::Finite(len(5)));
        // Degree-3 vertex is not removable.
        let (tri, [a, _, _]) = triangle();
        let mut tri3 = tri.clone();
        let d = tri3.add_vertex();
        tri3.add_edge(a, d, len(1)).unwrap();
        assert!(matches!(
            tri3.reverse_subdivide(a),
            Err(Error::NotRemovable { .. })
        ));
    }

    #[test]
    fn reverse_subdivide_absorbs_infinity() {
        let mut g = MetricGraph::new();
        let u = g.add_vertex();
        let p = g.add_vertex();
        g.add_edge(u, p, len(2)).unwrap();
        let (g, _) = g.add_infinite_leaf(p).unwrap();
        let g2 = g.reverse_subdivide(p).unwrap();
        let e = g2.edge(g2.edge_ids().next().unwrap()).unwrap();
        assert!(e.length.is_infinite());
        g2.validate().unwrap();
    }

    #[test]
    fn subdivide_then_reverse_is_identity() {
        let (g, _) = triangle();
        let e = g.edge_ids().next().unwrap();
        let g2 = g
            .subdivide(
                e,
                (
                    EdgeLength::Finite(LambdaScalar::from_rat(rat(1, 3))),
                    EdgeLength::Finite(LambdaScalar::from_rat(rat(2, 3))),
                ),
            )
            .unwrap();
        let fresh = g2.vertex_ids().max().unwrap();
        let g3 = g2.reverse_subdivide(fresh).unwrap();
        // Same vertices, same edge multiset between the same endpoints.
        assert_eq!(
            g.vertex_ids().collect::<Vec<_>>(),
            g3.vertex_ids().collect::<Vec<_>>()
        );
        let pairs = |g: &MetricGraph| {
            let mut v: Vec<(usize, usize, EdgeLength)> = g
                .edge_ids()
                .map(|id| {
                    let e = g.edge(id).unwrap();
                    (e.u.min(e.v), e.u.max(e.v), e.length.clone())
                })
                .collect();
            v.sort_by_key(|(a, b, _)| (*a, *b));
            v
        };
        assert_eq!(pairs(&g), pairs(&g3));
    }

    #[test]
    fn infinite_leaf_rules() {
        let mut g = MetricGraph::new();
        let v = g.add_vertex();
        let (g, leaf) = g.add_infinite_leaf(v).unwrap();
        g.validate().unwrap();
        assert_eq!(g.vertex_kind(leaf), Some(VertexKind::Infinite));
        assert!(matches!(
            g.add_infinite_leaf(leaf),
            Err(Error::InfiniteVertex { .. })
        ));
    }

    #[test]
    fn loop_normalizes_to_triangle() {
        let mut g = MetricGraph::new();
        let v = g.add_vertex();
        g.add_edge(v, v, len(3)).unwrap();
        let (simple, trace) = normalize_simple(&g).unwrap();
        assert_eq!(simple.vertex_count(), 3);
        assert_eq!(simple.edge_count(), 3);
        for id in simple.edge_ids() {
            let e = simple.edge(id).unwrap();
            assert_ne!(e.u, e.v);
            assert_eq!(e.length, EdgeLength::Finite(len(1)));
        }
        assert_eq!(trace.replay(&g).unwrap(), simple);
    }

    #[test]
    fn parallel_edges_normalize_by_bisection() {
        let mut g = MetricGraph::new();
        let u = g.add_vertex();
        let v = g.add_vertex();
        g.add_edge(u, v, len(2)).unwrap();
        g.add_edge(u, v, len(2)).unwrap();
        let (simple, trace) = normalize_simple(&g).unwrap();
        assert_eq!(simple.vertex_count(), 3);
        assert_eq!(simple.edge_count(), 3);
        // No parallel pairs remain.
        let mut pairs: Vec<(usize, usize)> = simple
            .edge_ids()
            .map(|id| {
                let e = simple.edge(id).unwrap();
                (e.u.min(e.v), e.u.max(e.v))
            })
            .collect();
        pairs.sort();
        pairs.dedup();
        assert_eq!(pairs.len(), simple.edge_count());
        assert_eq!(trace.replay(&g).unwrap(), simple);
    }

    #[test]
    fn simple_graph_is_untouched() {
        let (g, _) = triangle();
        let (simple, trace) = normalize_simple(&g).unwrap();
        assert_eq!(simple, g);
        assert!(trace.moves.is_empty());
    }

    #[test]
    fn validate_rejects_malformed_graphs() {
        // Infinite edge with no infinite endpoint.
        let mut g = MetricGraph::new();
        let u = g.add_vertex();
        let v = g.add_vertex();
        g.edges.insert(
            0,
            Edge {
                u,
                v,
                length: EdgeLength::Infinite,
            },
        );
        g.next_edge = 1;
        assert!(matches!(g.validate(), Err(Error::Schema { .. })));
        // Disconnected.
        let mut g2 = MetricGraph::new();
        g2.add_vertex();
        g2.add_vertex();
        assert!(matches!(g2.validate(), Err(Error::Schema { .. })));
    }
}
