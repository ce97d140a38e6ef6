//! Planarity testing and face embedding via biconnected components and
//! Demoucron's incremental face algorithm.
//!
//! Graphs here are loop-free simple graphs addressed by edge ids (every
//! producer in this crate keeps them simple: planarized graphs never carry
//! parallel fragments, and augmentation only adds edges between
//! non-adjacent vertices). A face of a biconnected embedded graph is a
//! simple vertex cycle; faces of a general connected graph are closed
//! walks, produced by splicing block faces together at cut vertices.
//!
//! Demoucron's algorithm embeds a biconnected graph face by face: start
//! from any cycle, repeatedly take a fragment (chord or attached
//! component), check which faces contain all its attachment vertices,
//! embed a path through the fragment into such a face, and fail precisely
//! when some fragment has no admissible face. Fragments with a unique
//! admissible face are handled first; beyond that any choice is safe, and
//! ours is deterministic, so embeddings are reproducible.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Simple graph for layout work: vertices `0..n`, edges by index.
#[derive(Clone, Debug, Default)]
pub struct LayoutGraph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl LayoutGraph {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> LayoutGraph {
        for &(u, v) in &edges {
            assert!(u < n && v < n && u != v, "loop or out-of-range edge");
        }
        LayoutGraph { n, edges }
    }

    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.n];
        for (id, &(u, v)) in self.edges.iter().enumerate() {
            adj[u].push((v, id));
            adj[v].push((u, id));
        }
        adj
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let adj = self.adjacency();
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(w, _) in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .filter(|(a, b)| *a == v || *b == v)
            .count()
    }
}

/// Biconnected components as edge-id lists (iterative Hopcroft-Tarjan).
/// Isolated vertices belong to no block.
pub fn blocks(g: &LayoutGraph) -> Vec<Vec<usize>> {
    let adj = g.adjacency();
    let mut disc = vec![usize::MAX; g.n];
    let mut low = vec![0usize; g.n];
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut edge_stack: Vec<usize> = Vec::new();
    let mut timer = 0usize;

    for root in 0..g.n {
        if disc[root] != usize::MAX {
            continue;
        }
        // Frame: (vertex, parent edge id, next adjacency index).
        let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        while let Some(&mut (v, pe, ref mut idx)) = stack.last_mut() {
            if *idx < adj[v].len() {
                let (w, eid) = adj[v][*idx];
                *idx += 1;
                if eid == pe {
                    continue;
                }
                if disc[w] == usize::MAX {
                    edge_stack.push(eid);
                    disc[w] = timer;
                    low[w] = timer;
                    timer += 1;
                    stack.push((w, eid, 0));
                } else if disc[w] < disc[v] {
                    // Back edge.
                    edge_stack.push(eid);
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if let Some(&mut (parent, _, _)) = stack.last_mut() {
                    low[parent] = low[parent].min(low[v]);
                    if low[v] >= disc[parent] {
                        // parent is a cut vertex (or the root): pop a block.
                        let mut block = Vec::new();
                        while let Some(&top) = edge_stack.last() {
                            let (a, b) = g.edges[top];
                            // Edges discovered at or below v belong to it.
                            if disc[a].max(disc[b]) >= disc[v] {
                                block.push(edge_stack.pop().unwrap());
                            } else {
                                break;
                            }
                        }
                        block.reverse();
                        if !block.is_empty() {
                            out.push(block);
                        }
                    }
                }
            }
        }
        // Remaining edges from this root form the last block.
        if !edge_stack.is_empty() {
            let mut block = std::mem::take(&mut edge_stack);
            block.reverse();
            out.push(block);
        }
    }
    out
}

/// A face of a biconnected embedding: a simple vertex cycle.
pub type FaceCycle = Vec<usize>;

/// A face of a general connected embedding: a closed walk (vertices may
/// repeat at cut vertices).
pub type FaceWalk = Vec<usize>;

/// One unembedded fragment relative to the current subgraph.
struct Fragment {
    /// Embedded vertices the fragment attaches to (sorted).
    attachments: Vec<usize>,
    /// A path between two distinct attachments through the fragment:
    /// vertex sequence (first and last are attachments).
    path: Vec<usize>,
    /// Edge ids along the path.
    path_edges: Vec<usize>,
}

/// Demoucron embedding of one biconnected graph given by edge ids.
/// Returns the faces as simple vertex cycles. A single-edge block gets
/// the degenerate two-vertex walk.
fn demoucron(g: &LayoutGraph, block_edges: &[usize]) -> Result<Vec<FaceCycle>> {
    if block_edges.len() == 1 {
        let (u, v) = g.edges[block_edges[0]];
        return Ok(vec![vec![u, v]]);
    }
    let in_block = {
        let mut b = vec![false; g.edges.len()];
        for &e in block_edges {
            b[e] = true;
        }
        b
    };
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); g.n];
    for &e in block_edges {
        let (u, v) = g.edges[e];
        adj[u].push((v, e));
        adj[v].push((u, e));
    }

    // Initial cycle by DFS to the first back edge.
    let start = g.edges[block_edges[0]].0;
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; g.n];
    let mut visited = vec![false; g.n];
    let mut order: Vec<(usize, usize, usize)> = vec![(start, usize::MAX, 0)];
    visited[start] = true;
    let mut cycle: Vec<usize> = Vec::new();
    let mut cycle_edges: Vec<usize> = Vec::new();
    'dfs: while let Some(&mut (v, pe, ref mut idx)) = order.last_mut() {
        if *idx < adj[v].len() {
            let (w, eid) = adj[v][*idx];
            *idx += 1;
            if eid == pe {
                continue;
            }
            if !visited[w] {
                visited[w] = true;
                parent[w] = Some((v, eid));
                order.push((w, eid, 0));
            } else {
                // Back edge (v, w): tree path w..v plus this edge.
                let mut path = vec![v];
                let mut pedges = Vec::new();
                let mut cur = v;
                while cur != w {
                    let (p, e) = parent[cur].expect("w is an ancestor of v");
                    path.push(p);
                    pedges.push(e);
                    cur = p;
                }
                path.reverse();
                pedges.reverse();
                cycle = path;
                cycle_edges = pedges;
                cycle_edges.push(eid);
                break 'dfs;
            }
        } else {
            order.pop();
        }
    }
    if cycle.is_empty() {
        // A biconnected block with ≥ 2 edges always contains a cycle;
        // reaching this means the block structure is broken.
        return Err(Error::NotPlanar {
            context: "block has no cycle".into(),
        });
    }

    let mut embedded_edge = vec![false; g.edges.len()];
    let mut in_h = vec![false; g.n];
    for &e in &cycle_edges {
        embedded_edge[e] = true;
    }
    for &v in &cycle {
        in_h[v] = true;
    }
    let mut faces: Vec<FaceCycle> = vec![cycle.clone(), cycle.iter().rev().copied().collect()];

    loop {
        // Collect fragments: chords first, then attached components.
        let mut fragments: Vec<Fragment> = Vec::new();
        for &e in block_edges {
            if embedded_edge[e] {
                continue;
            }
            let (u, v) = g.edges[e];
            if in_h[u] && in_h[v] {
                fragments.push(Fragment {
                    attachments: {
                        let mut a = vec![u, v];
                        a.sort_unstable();
                        a
                    },
                    path: vec![u, v],
                    path_edges: vec![e],
                });
            }
        }
        // Components of non-embedded vertices (within this block).
        let mut comp_id = vec![usize::MAX; g.n];
        let mut comps: Vec<Vec<usize>> = Vec::new();
        for &e in block_edges {
            for v in [g.edges[e].0, g.edges[e].1] {
                if !in_h[v] && comp_id[v] == usize::MAX {
                    let id = comps.len();
                    let mut comp = vec![v];
                    comp_id[v] = id;
                    let mut stack = vec![v];
                    while let Some(x) = stack.pop() {
                        for &(y, eid) in &adj[x] {
                            if in_block[eid] && !in_h[y] && comp_id[y] == usize::MAX {
                                comp_id[y] = id;
                                comp.push(y);
                                stack.push(y);
                            }
                        }
                    }
                    comps.push(comp);
                }
            }
        }
        for comp in &comps {
            let mut attachments: BTreeSet<usize> = BTreeSet::new();
            for &x in comp {
                for &(y, _) in &adj[x] {
                    if in_h[y] {
                        attachments.insert(y);
                    }
                }
            }
            let attachments: Vec<usize> = attachments.into_iter().collect();
            if attachments.len() < 2 {
                return Err(Error::NotPlanar {
                    context: "fragment with fewer than two attachments in a biconnected block"
                        .into(),
                });
            }
            // Path from the smallest attachment through the component to
            // any other attachment (BFS).
            let a0 = attachments[0];
            let mut prev: Vec<Option<(usize, usize)>> = vec![None; g.n];
            let mut seen = vec![false; g.n];
            let mut queue = std::collections::VecDeque::new();
            for &(y, eid) in &adj[a0] {
                if !in_h[y] && comp_id[y] == comp_id[comp[0]] && !seen[y] {
                    seen[y] = true;
                    prev[y] = Some((a0, eid));
                    queue.push_back(y);
                }
            }
            let mut endpoint = None;
            'bfs: while let Some(x) = queue.pop_front() {
                for &(y, eid) in &adj[x] {
                    if in_h[y] {
                        if y != a0 {
                            endpoint = Some((y, x, eid));
                            break 'bfs;
                        }
                        continue;
                    }
                    if !seen[y] {
                        seen[y] = true;
                        prev[y] = Some((x, eid));
                        queue.push_back(y);
                    }
                }
            }
            let (b, last_interior, last_edge) =
                endpoint.expect("second attachment reachable through the fragment");
            let mut path = vec![b];
            let mut path_edges = vec![last_edge];
            let mut cur = last_interior;
            loop {
                path.push(cur);
                let (p, e) = prev[cur].expect("path back to the first attachment");
                path_edges.push(e);
                if p == a0 {
                    path.push(a0);
                    break;
                }
                cur = p;
            }
            path.reverse();
            path_edges.reverse();
            fragments.push(Fragment {
                attachments,
                path,
                path_edges,
            });
        }

        if fragments.is_empty() {
            break;
        }

        // Admissible faces per fragment.
        let face_sets: Vec<BTreeSet<usize>> = faces
            .iter()
            .map(|f| f.iter().copied().collect())
            .collect();
        let mut best: Option<(usize, usize, &Fragment)> = None; // (count, face, frag)
        for frag in &fragments {
            let admissible: Vec<usize> = (0..faces.len())
                .filter(|&fi| frag.attachments.iter().all(|a| face_sets[fi].contains(a)))
                .collect();
            if admissible.is_empty() {
                return Err(Error::NotPlanar {
                    context: "fragment admits no face".into(),
                });
            }
            let cand = (admissible.len(), admissible[0], frag);
            let better = match &best {
                None => true,
                Some((c, f, b)) => {
                    (cand.0, cand.1, &cand.2.attachments) < (*c, *f, &b.attachments)
                }
            };
            if better {
                best = Some(cand);
            }
        }
        let (_, face_idx, frag) = best.expect("nonempty fragment list");

        // Split the face along the fragment path.
        let a = frag.path[0];
        let b = *frag.path.last().unwrap();
        let cycle = faces[face_idx].clone();
        let l = cycle.len();
        let i = cycle.iter().position(|&x| x == a).expect("a on face");
        let j = cycle.iter().position(|&x| x == b).expect("b on face");
        let arc = |from: usize, to: usize| {
            let mut out = vec![cycle[from]];
            let mut k = from;
            while k != to {
                k = (k + 1) % l;
                out.push(cycle[k]);
            }
            out
        };
        let arc1 = arc(i, j); // a .. b along the face
        let arc2 = arc(j, i); // b .. a along the face
        let interior = &frag.path[1..frag.path.len() - 1];
        let mut face1 = arc1;
        face1.extend(interior.iter().rev().copied());
        let mut face2 = arc2;
        face2.extend(interior.iter().copied());
        faces[face_idx] = face1;
        faces.push(face2);

        for &e in &frag.path_edges {
            embedded_edge[e] = true;
        }
        for &v in interior {
            in_h[v] = true;
        }
    }
    Ok(faces)
}

/// Planarity test for a connected simple graph: every block embeds.
pub fn is_planar(g: &LayoutGraph) -> bool {
    // Cheap edge-count cut: a simple planar graph has m ≤ 3n − 6 (n ≥ 3).
    if g.n >= 3 && g.edges.len() > 3 * g.n - 6 {
        return false;
    }
    blocks(g).iter().all(|b| demoucron(g, b).is_ok())
}

/// Faces of a planar embedding of one biconnected graph (simple cycles).
pub fn embed_biconnected(g: &LayoutGraph) -> Result<Vec<FaceCycle>> {
    let bl = blocks(g);
    if bl.len() != 1 {
        return Err(Error::NotPlanar {
            context: format!("expected one biconnected block, found {}", bl.len()),
        });
    }
    demoucron(g, &bl[0])
}

/// Faces of a planar embedding of a connected simple graph, as closed
/// walks: block faces spliced together at cut vertices. Each undirected
/// edge appears exactly twice (once per direction) across all walks.
pub fn embed_connected(g: &LayoutGraph) -> Result<Vec<FaceWalk>> {
    assert!(g.is_connected(), "embedding requires a connected graph");
    if g.edges.is_empty() {
        // Single vertex: one empty face.
        return Ok(vec![vec![0]]);
    }
    let bl = blocks(g);
    let mut block_faces: Vec<Vec<FaceCycle>> = Vec::new();
    for b in &bl {
        block_faces.push(demoucron(g, b)?);
    }
    // Splice blocks together in an order that always attaches to the
    // already-merged part at a shared (cut) vertex.
    let mut merged: Vec<FaceWalk> = block_faces[0].clone();
    let mut placed: BTreeSet<usize> = merged.iter().flatten().copied().collect();
    let mut remaining: Vec<usize> = (1..bl.len()).collect();
    while !remaining.is_empty() {
        let pos = remaining
            .iter()
            .position(|&bi| {
                block_faces[bi]
                    .iter()
                    .flatten()
                    .any(|v| placed.contains(v))
            })
            .expect("graph is connected, some block touches the merged part");
        let bi = remaining.remove(pos);
        let faces_b = &block_faces[bi];
        let v = *faces_b
            .iter()
            .flatten()
            .find(|v| placed.contains(v))
            .unwrap();
        // Lowest-id faces containing v on both sides.
        let gf = merged
            .iter()
            .position(|w| w.contains(&v))
            .expect("cut vertex on a merged face");
        let bf = faces_b
            .iter()
            .position(|w| w.contains(&v))
            .expect("cut vertex on a block face");
        // Rotate the block face to start at v, then splice it into the
        // merged walk right after one occurrence of v.
        let walk_b = &faces_b[bf];
        let s = walk_b.iter().position(|&x| x == v).unwrap();
        let mut rotated: FaceWalk = Vec::with_capacity(walk_b.len() + 1);
        rotated.extend_from_slice(&walk_b[s..]);
        rotated.extend_from_slice(&walk_b[..s]);
        rotated.push(v); // close the excursion back at v
        let at = merged[gf].iter().position(|&x| x == v).unwrap();
        let mut new_walk = Vec::with_capacity(merged[gf].len() + rotated.len());
        new_walk.extend_from_slice(&merged[gf][..at]);
        new_walk.extend_from_slice(&rotated);
        new_walk.extend_from_slice(&merged[gf][at + 1..]);
        merged[gf] = new_walk;
        for (fi, f) in faces_b.iter().enumerate() {
            if fi != bf {
                merged.push(f.clone());
            }
        }
        placed.extend(faces_b.iter().flatten().copied());
    }
    Ok(merged)
}

/// Directed edge sides of a walk: consecutive pairs including the wrap.
pub fn walk_sides(walk: &FaceWalk) -> Vec<(usize, usize)> {
    if walk.len() < 2 {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(walk.len());
    for i in 0..walk.len() {
        let a = walk[i];
        let b = walk[(i + 1) % walk.len()];
        out.push((a, b));
    }
    out
}

/// Cyclic rotation of edges around `v`, recovered from the face walks:
/// within a face, arriving at `v` via one edge and leaving via the next
/// makes the two edges rotation-consecutive.
pub fn rotation_at(walks: &[FaceWalk], g: &LayoutGraph, v: usize) -> Vec<usize> {
    use std::collections::BTreeMap;
    let mut edge_of = BTreeMap::new();
    for (id, &(a, b)) in g.edges.iter().enumerate() {
        edge_of.insert((a.min(b), a.max(b)), id);
    }
    // corner: in-edge -> out-edge at v.
    let mut next: BTreeMap<usize, usize> = BTreeMap::new();
    for w in walks {
        let sides = walk_sides(w);
        let l = sides.len();
        for i in 0..l {
            let (a, b) = sides[i];
            if b == v {
                let (_, c) = sides[(i + 1) % l];
                let e_in = edge_of[&(a.min(v), a.max(v))];
                let e_out = edge_of[&(c.min(v), c.max(v))];
                next.insert(e_in, e_out);
            }
        }
    }
    let mut order = Vec::new();
    let Some((&start, _)) = next.iter().next() else {
        return order;
    };
    let mut cur = start;
    loop {
        order.push(cur);
        cur = next[&cur];
        if cur == start {
            break;
        }
    }
    order
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: usize) -> LayoutGraph {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                edges.push((u, v));
            }
        }
        LayoutGraph::new(n, edges)
    }

    fn complete_bipartite(a: usize, b: usize) -> LayoutGraph {
        let mut edges = Vec::new();
        for u in 0..a {
            for v in 0..b {
                edges.push((u, a + v));
            }
        }
        LayoutGraph::new(a + b, edges)
    }

    fn petersen() -> LayoutGraph {
        let mut edges = Vec::new();
        for i in 0..5 {
            edges.push((i, (i + 1) % 5)); // outer cycle
            edges.push((i, i + 5)); // spokes
            edges.push((i + 5, (i + 2) % 5 + 5)); // pentagram
        }
        LayoutGraph::new(10, edges)
    }

    fn check_euler(g: &LayoutGraph, walks: &[FaceWalk]) {
        // Each edge used exactly twice across all walks.
        let mut count = vec![0usize; g.edges.len()];
        let mut edge_of = std::collections::BTreeMap::new();
        for (id, &(a, b)) in g.edges.iter().enumerate() {
            edge_of.insert((a.min(b), a.max(b)), id);
        }
        for w in walks {
            for (a, b) in walk_sides(w) {
                count[edge_of[&(a.min(b), a.max(b))]] += 1;
            }
        }
        assert!(count.iter().all(|&c| c == 2), "every edge borders two face sides");
        // Euler: V - E + F = 2 for connected plane graphs.
        assert_eq!(
            g.n as isize - g.edges.len() as isize + walks.len() as isize,
            2,
            "Euler characteristic"
        );
    }

    #[test]
    fn small_planar_graphs_embed() {
        for g in [complete(3), complete(4)] {
            assert!(is_planar(&g));
            let faces = embed_biconnected(&g).unwrap();
            check_euler(&g, &faces);
        }
        // Cube graph.
        let cube = LayoutGraph::new(
            8,
            vec![
                (0, 1),
                (1, 2),
                (2, 3),
                (3, 0),
                (4, 5),
                (5, 6),
                (6, 7),
                (7, 4),
                (0, 4),
                (1, 5),
                (2, 6),
                (3, 7),
            ],
        );
        assert!(is_planar(&cube));
        let faces = embed_biconnected(&cube).unwrap();
        check_euler(&cube, &faces);
        assert!(faces.iter().all(|f| f.len() == 4), "cube faces are squares");
    }

    #[test]
    fn nonplanar_graphs_are_rejected() {
        assert!(!is_planar(&complete(5)));
        assert!(!is_planar(&complete(6)));
        assert!(!is_planar(&complete_bipartite(3, 3)));
        assert!(!is_planar(&petersen()));
    }

    #[test]
    fn k5_minus_an_edge_is_planar() {
        let mut g = complete(5);
        g.edges.pop();
        assert!(is_planar(&g));
        let faces = embed_biconnected(&g).unwrap();
        check_euler(&g, &faces);
    }

    #[test]
    fn blocks_split_at_cut_vertices() {
        // Two triangles sharing vertex 2, plus a pendant edge at 4.
        let g = LayoutGraph::new(
            6,
            vec![(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 2), (4, 5)],
        );
        let bl = blocks(&g);
        assert_eq!(bl.len(), 3);
        let mut sizes: Vec<usize> = bl.iter().map(|b| b.len()).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![1, 3, 3]);
    }

    #[test]
    fn trees_and_cut_graphs_embed_as_walks() {
        // A path: every edge is its own block.
        let path = LayoutGraph::new(4, vec![(0, 1), (1, 2), (2, 3)]);
        let walks = embed_connected(&path).unwrap();
        check_euler(&path, &walks);
        // Two triangles at a cut vertex.
        let bowtie = LayoutGraph::new(5, vec![(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 2)]);
        let walks = embed_connected(&bowtie).unwrap();
        check_euler(&bowtie, &walks);
    }

    #[test]
    fn rotation_at_a_degree_four_vertex() {
        // Wheel on 4 spokes: center 0 adjacent to rim 1,2,3,4.
        let wheel = LayoutGraph::new(
            5,
            vec![
                (0, 1),
                (0, 2),
                (0, 3),
                (0, 4),
                (1, 2),
                (2, 3),
                (3, 4),
                (4, 1),
            ],
        );
        let faces = embed_biconnected(&wheel).unwrap();
        check_euler(&wheel, &faces);
        let rot = rotation_at(&faces, &wheel, 0);
        assert_eq!(rot.len(), 4);
        // The four spokes in rim order (some rotation/reflection of 1,2,3,4).
        let rim: Vec<usize> = rot
            .iter()
            .map(|&e| {
                let (a, b) = wheel.edges[e];
                if a == 0 { b } else { a }
            })
            .collect();
        let mut doubled: Vec<usize> = rim.clone();
        doubled.extend_from_slice(&rim);
        let fwd = (0..4).any(|s| (0..4).all(|i| doubled[s + i] == [1, 2, 3, 4][i]));
        let rev: Vec<usize> = rim.iter().rev().copied().collect();
        let mut doubled_rev: Vec<usize> = rev.clone();
        doubled_rev.extend_from_slice(&rev);
        let bwd = (0..4).any(|s| (0..4).all(|i| doubled_rev[s + i] == [1, 2, 3, 4][i]));
        assert!(fwd || bwd, "spokes follow the rim cyclically, got {rim:?}");
    }
}
