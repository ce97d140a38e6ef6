//! Heuristic planarization: greedy maximal planar subgraph extraction
//! followed by one-at-a-time edge insertion along shortest dual paths.
//!
//! Inserting an edge (a, b) into an embedded planar graph means walking
//! from a face containing a to a face containing b, paying one crossing
//! per edge stepped over. Breadth-first search over the face-adjacency
//! (dual) graph finds a cheapest such walk; edges incident to a or b are
//! never stepped over (crossing them is never necessary and would create
//! parallel fragments). A shortest walk also never crosses the same edge
//! twice: both sides of an edge border the same two faces, so a repeat
//! would revisit a face.
//!
//! After all insertions, any crossing whose four fragments fail to
//! alternate in the embedding that the drawing stage will use is a
//! touch, not a crossing: it is smoothed away (the two strands are
//! reconnected past each other), reducing the bound by one, and the
//! check repeats until the embedding and the crossing records agree.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::planarity::{self, is_planar, LayoutGraph};
use super::{biconnect_augment, Planarization};

/// Upper-bound planarization. The seed only influences which maximal
/// planar subgraph the greedy phase keeps; results for a fixed seed are
/// deterministic.
pub fn planarize_heuristic(g: &LayoutGraph, seed: u64) -> (u32, Planarization) {
    assert!(g.is_connected(), "planarization needs a connected graph");
    if is_planar(g) {
        return (0, Planarization::trivial(g));
    }

    // Greedy maximal planar subgraph: keep a spanning tree, then try the
    // remaining edges in seeded order. Planarity is monotone, so an edge
    // rejected against a partial subgraph stays unembeddable later.
    let adj = g.adjacency();
    let mut in_tree = vec![false; g.edges.len()];
    let mut seen = vec![false; g.n];
    seen[0] = true;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        for &(w, e) in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                in_tree[e] = true;
                queue.push_back(w);
            }
        }
    }
    let mut rest: Vec<usize> = (0..g.edges.len()).filter(|&e| !in_tree[e]).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rest.shuffle(&mut rng);

    let mut kept: Vec<usize> = (0..g.edges.len()).filter(|&e| in_tree[e]).collect();
    let mut deferred: Vec<usize> = Vec::new();
    for e in rest {
        let mut trial: Vec<(usize, usize)> = kept.iter().map(|&i| g.edges[i]).collect();
        trial.push(g.edges[e]);
        if is_planar(&LayoutGraph::new(g.n, trial)) {
            kept.push(e);
        } else {
            deferred.push(e);
        }
    }
    deferred.sort_unstable();

    let mut p = Planarization {
        crossings: 0,
        exact: false,
        n_orig: g.n,
        n: g.n,
        chains: vec![Vec::new(); g.edges.len()],
        dummy_edges: Vec::new(),
    };
    for &e in &kept {
        let (u, v) = g.edges[e];
        p.chains[e] = vec![u, v];
    }
    for &e in &deferred {
        insert_edge(&mut p, g, e);
    }
    p.crossings = p.dummy_edges.len() as u32;

    smooth_touches(&mut p);
    p.validate(g).expect("heuristic planarization is structurally sound");
    (p.crossings, p)
}

/// The fragment graph of the chains materialized so far.
fn partial_graph(p: &Planarization) -> (LayoutGraph, Vec<usize>, Vec<(usize, usize)>) {
    let mut edges = Vec::new();
    let mut owner = Vec::new();
    for (k, chain) in p.chains.iter().enumerate() {
        for w in chain.windows(2) {
            edges.push((w[0], w[1]));
            owner.push(k);
        }
    }
    let frag_ends = edges.clone();
    (LayoutGraph::new(p.n, edges), owner, frag_ends)
}

/// Insert edge `e` = (a, b) through a cheapest face walk, splitting every
/// crossed fragment at a fresh dummy vertex.
fn insert_edge(p: &mut Planarization, g: &LayoutGraph, e: usize) {
    let (a, b) = g.edges[e];
    let (mg, owner, frag_ends) = partial_graph(p);
    let walks = planarity::embed_connected(&mg).expect("partial planarization stays planar");

    // Identify fragments by endpoint pair (the fragment graph is simple).
    let mut frag_of = std::collections::BTreeMap::new();
    for (id, &(u, v)) in frag_ends.iter().enumerate() {
        frag_of.insert((u.min(v), u.max(v)), id);
    }
    // The two faces bordering each fragment.
    let mut side_faces: Vec<Vec<usize>> = vec![Vec::new(); frag_ends.len()];
    for (fi, w) in walks.iter().enumerate() {
        for (x, y) in planarity::walk_sides(w) {
            side_faces[frag_of[&(x.min(y), x.max(y))]].push(fi);
        }
    }
    let contains = |fi: usize, v: usize| walks[fi].contains(&v);

    // BFS over faces; stepping into a neighbor face costs crossing one
    // fragment, never one incident to a or b.
    let mut dist = vec![usize::MAX; walks.len()];
    let mut back: Vec<Option<(usize, usize)>> = vec![None; walks.len()];
    let mut queue = std::collections::VecDeque::new();
    for fi in 0..walks.len() {
        if contains(fi, a) {
            dist[fi] = 0;
            queue.push_back(fi);
        }
    }
    let mut goal = None;
    'bfs: while let Some(fi) = queue.pop_front() {
        if contains(fi, b) {
            goal = Some(fi);
            break 'bfs;
        }
        for (x, y) in planarity::walk_sides(&walks[fi]) {
            let frag = frag_of[&(x.min(y), x.max(y))];
            let (u, v) = frag_ends[frag];
            if u == a || u == b || v == a || v == b {
                continue;
            }
            for &nf in &side_faces[frag] {
                if dist[nf] == usize::MAX {
                    dist[nf] = dist[fi] + 1;
                    back[nf] = Some((fi, frag));
                    queue.push_back(nf);
                }
            }
        }
    }
    let goal = goal.expect("b's face is reachable: the plane is connected");
    let mut crossed: Vec<usize> = Vec::new();
    let mut cur = goal;
    while let Some((pf, frag)) = back[cur] {
        crossed.push(frag);
        cur = pf;
    }
    crossed.reverse();

    // Materialize: one dummy per crossed fragment, spliced into the
    // owning chain; identification by endpoints stays unique because each
    // fragment is crossed at most once.
    let mut new_chain = vec![a];
    for &frag in &crossed {
        let d = p.n;
        p.n += 1;
        let k = owner[frag];
        let (u, v) = frag_ends[frag];
        let chain = &mut p.chains[k];
        let pos = chain
            .windows(2)
            .position(|w| (w[0] == u && w[1] == v) || (w[0] == v && w[1] == u))
            .expect("crossed fragment still present in its chain");
        chain.insert(pos + 1, d);
        p.dummy_edges.push((k, e));
        new_chain.push(d);
    }
    new_chain.push(b);
    p.chains[e] = new_chain;
}

/// Remove crossings that the drawing-stage embedding realizes as touches
/// (fragments failing to alternate), until none remain.
fn smooth_touches(p: &mut Planarization) {
    loop {
        let Some(d) = first_touch(p) else { return };
        remove_dummy(p, d);
    }
}

/// Find a dummy whose four fragments do not alternate in the embedding
/// the drawing stage will compute (augment, then embed).
fn first_touch(p: &Planarization) -> Option<usize> {
    if p.dummy_edges.is_empty() {
        return None;
    }
    let (pg, owner) = p.planar_graph();
    let n_frags = pg.edges.len();
    let (aug, _) = biconnect_augment(&pg);
    let faces = planarity::embed_biconnected(&aug)
        .expect("planarization embeds: counterexample would mean a non-planar planarization");
    for i in 0..p.dummy_edges.len() {
        let d = p.n_orig + i;
        let rot = planarity::rotation_at(&faces, &aug, d);
        let owners: Vec<usize> = rot
            .into_iter()
            .filter(|&e| e < n_frags)
            .map(|e| owner[e])
            .collect();
        assert_eq!(owners.len(), 4, "dummy has exactly four fragments");
        if owners[0] == owners[1] || owners[1] == owners[2] {
            return Some(d);
        }
    }
    None
}

/// Delete dummy `d`, reconnecting both strands straight through, and
/// renumber the dummies above it.
fn remove_dummy(p: &mut Planarization, d: usize) {
    let i = d - p.n_orig;
    for chain in &mut p.chains {
        chain.retain(|&v| v != d);
        for v in chain.iter_mut() {
            if *v > d {
                *v -= 1;
            }
        }
    }
    p.dummy_edges.remove(i);
    p.n -= 1;
    p.crossings -= 1;
}
