//! Exact crossing number by iterative deepening over crossing
//! configurations, with planarity testing as the oracle.
//!
//! A drawing with the minimum number of crossings never crosses two
//! adjacent edges and never crosses the same pair twice, so it suffices
//! to search configurations that pick k distinct pairs of independent
//! edges plus, for every edge crossed more than once, the order of its
//! crossings along the edge. A configuration is feasible exactly when
//! the graph obtained by replacing each chosen crossing with a degree-4
//! dummy vertex is planar. The smallest k admitting a feasible
//! configuration is the crossing number: feasibility at k gives a
//! drawing with at most k crossings, and an optimal drawing induces a
//! feasible configuration at its own k.
//!
//! The search is deterministic: pairs are scanned in lexicographic
//! order, subsets in lexicographic order, and orderings as a
//! lexicographic odometer, so the first feasible configuration is the
//! canonical one regardless of how the work is scheduled.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

use super::planarity::{is_planar, LayoutGraph};
use super::Planarization;

/// Default node budget: comfortable for graphs a handful of edges beyond
/// a spanning planar subgraph, the intended scale for exact answers.
pub const DEFAULT_BUDGET: u64 = 2_000_000;

/// Exact crossing number and a planarization realizing it.
///
/// The budget counts planarity tests; exceeding it aborts the search
/// with the best known upper bound (from the insertion heuristic) so the
/// caller can fall back and label the result accordingly.
pub fn crossing_number_exact(g: &LayoutGraph, budget: u64) -> Result<(u32, Planarization)> {
    assert!(g.is_connected(), "crossing number needs a connected graph");
    assert_simple(g);
    let mut used: u64 = 0;
    let charge = |used: &mut u64| -> bool {
        *used += 1;
        *used <= budget
    };

    if !charge(&mut used) {
        return Err(budget_error(g, budget));
    }
    if is_planar(g) {
        return Ok((0, Planarization::trivial(g)));
    }

    let pairs = independent_pairs(g);
    let lb = lower_bound(g);
    for k in lb..=(pairs.len() as u32) {
        if let Some(p) = search_level(g, &pairs, k as usize, budget, &mut used)? {
            return Ok((k, p));
        }
    }
    unreachable!("an optimal drawing induces a feasible configuration at its own level");
}

fn assert_simple(g: &LayoutGraph) {
    let mut seen = std::collections::BTreeSet::new();
    for &(u, v) in &g.edges {
        assert!(
            seen.insert((u.min(v), u.max(v))),
            "crossing number needs a simple graph"
        );
    }
}

fn budget_error(g: &LayoutGraph, budget: u64) -> Error {
    let (ub, _) = super::insertion::planarize_heuristic(g, 0);
    Error::BudgetExceeded {
        budget,
        upper_bound: ub,
    }
}

/// Pairs of edges with four distinct endpoints, lexicographically sorted.
fn independent_pairs(g: &LayoutGraph) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..g.edges.len() {
        for j in (i + 1)..g.edges.len() {
            let (a, b) = g.edges[i];
            let (c, d) = g.edges[j];
            if a != c && a != d && b != c && b != d {
                out.push((i, j));
            }
        }
    }
    out
}

/// Euler-formula lower bounds: m − 3n + 6, refined to m − 2n + 4 for
/// bipartite (triangle-free) graphs. Only sound for n ≥ 3; the caller
/// already knows the graph is nonplanar, so at least 1.
fn lower_bound(g: &LayoutGraph) -> u32 {
    let n = g.n as i64;
    let m = g.edges.len() as i64;
    let mut lb: i64 = 1;
    if n >= 3 {
        lb = lb.max(m - 3 * n + 6);
        if is_bipartite(g) {
            lb = lb.max(m - 2 * n + 4);
        }
    }
    lb as u32
}

fn is_bipartite(g: &LayoutGraph) -> bool {
    let adj = g.adjacency();
    let mut color = vec![2u8; g.n];
    for s in 0..g.n {
        if color[s] != 2 {
            continue;
        }
        color[s] = 0;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &(w, _) in &adj[v] {
                if color[w] == 2 {
                    color[w] = 1 - color[v];
                    queue.push_back(w);
                } else if color[w] == color[v] {
                    return false;
                }
            }
        }
    }
    true
}

/// Scan all configurations with exactly k crossings, in canonical order.
fn search_level(
    g: &LayoutGraph,
    pairs: &[(usize, usize)],
    k: usize,
    budget: u64,
    used: &mut u64,
) -> Result<Option<Planarization>> {
    if k == 0 || k > pairs.len() {
        return Ok(None);
    }
    // Lexicographic k-subsets via the standard index odometer.
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if let Some(p) = try_subset(g, pairs, &idx, budget, used)? {
            return Ok(Some(p));
        }
        // Advance the combination.
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(None);
            }
            i -= 1;
            if idx[i] != i + pairs.len() - k {
                idx[i] += 1;
                for j in (i + 1)..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// All orderings of the chosen subset's dummies along their edges.
fn try_subset(
    g: &LayoutGraph,
    pairs: &[(usize, usize)],
    idx: &[usize],
    budget: u64,
    used: &mut u64,
) -> Result<Option<Planarization>> {
    let chosen: Vec<(usize, usize)> = idx.iter().map(|&i| pairs[i]).collect();
    // Dummy for subset position i is vertex g.n + i.
    let mut per_edge: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &(e, f)) in chosen.iter().enumerate() {
        per_edge.entry(e).or_default().push(i);
        per_edge.entry(f).or_default().push(i);
    }
    let multi: Vec<(usize, Vec<Vec<usize>>)> = per_edge
        .iter()
        .filter(|(_, ds)| ds.len() > 1)
        .map(|(&e, ds)| (e, permutations(ds)))
        .collect();
    let mut odo = vec![0usize; multi.len()];
    loop {
        *used += 1;
        if *used > budget {
            return Err(budget_error(g, budget));
        }
        // Materialize chains for this ordering.
        let mut chains: Vec<Vec<usize>> = Vec::with_capacity(g.edges.len());
        for (e, &(u, v)) in g.edges.iter().enumerate() {
            let mut chain = vec![u];
            if let Some(ds) = per_edge.get(&e) {
                let order: &Vec<usize> = if ds.len() == 1 {
                    ds
                } else {
                    let mi = multi.iter().position(|(me, _)| *me == e).unwrap();
                    &multi[mi].1[odo[mi]]
                };
                chain.extend(order.iter().map(|&i| g.n + i));
            }
            chain.push(v);
            chains.push(chain);
        }
        let candidate = Planarization {
            crossings: chosen.len() as u32,
            exact: true,
            n_orig: g.n,
            n: g.n + chosen.len(),
            chains,
            dummy_edges: chosen.clone(),
        };
        let (pg, _) = candidate.planar_graph();
        if is_planar(&pg) {
            return Ok(Some(candidate));
        }
        // Advance the odometer.
        let mut pos = multi.len();
        loop {
            if pos == 0 {
                return Ok(None);
            }
            pos -= 1;
            odo[pos] += 1;
            if odo[pos] < multi[pos].1.len() {
                break;
            }
            odo[pos] = 0;
        }
    }
}

/// All permutations of a slice, in lexicographic order.
fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    let mut sorted: Vec<usize> = items.to_vec();
    sorted.sort_unstable();
    let mut out = vec![sorted.clone()];
    // Standard next-permutation loop.
    loop {
        let v = out.last().unwrap();
        let mut next = v.clone();
        let Some(i) = (0..next.len() - 1).rev().find(|&i| next[i] < next[i + 1]) else {
            break;
        };
        let j = (i + 1..next.len()).rev().find(|&j| next[j] > next[i]).unwrap();
        next.swap(i, j);
        next[i + 1..].reverse();
        out.push(next);
    }
    out
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
            edges.push((i, (i + 1) % 5));
            edges.push((i, i + 5));
            edges.push((i + 5, (i + 2) % 5 + 5));
        }
        LayoutGraph::new(10, edges)
    }

    #[test]
    fn planar_graphs_have_crossing_number_zero() {
        for g in [
            complete(4),
            LayoutGraph::new(4, vec![(0, 1), (1, 2), (2, 3)]),
            LayoutGraph::new(1, vec![]),
        ] {
            let (k, p) = crossing_number_exact(&g, DEFAULT_BUDGET).unwrap();
            assert_eq!(k, 0);
            assert!(p.exact);
            p.validate(&g).unwrap();
        }
    }

    #[test]
    fn k5_needs_exactly_one_crossing() {
        let g = complete(5);
        let (k, p) = crossing_number_exact(&g, DEFAULT_BUDGET).unwrap();
        assert_eq!(k, 1);
        p.validate(&g).unwrap();
        assert_eq!(p.dummy_edges.len(), 1);
        let (e, f) = p.dummy_edges[0];
        let (a, b) = g.edges[e];
        let (c, d) = g.edges[f];
        assert!(a != c && a != d && b != c && b != d, "crossing pair independent");
    }

    #[test]
    fn k33_needs_exactly_one_crossing() {
        let g = complete_bipartite(3, 3);
        let (k, p) = crossing_number_exact(&g, DEFAULT_BUDGET).unwrap();
        assert_eq!(k, 1);
        p.validate(&g).unwrap();
    }

    #[test]
    fn petersen_needs_exactly_two_crossings() {
        let g = petersen();
        let (k, p) = crossing_number_exact(&g, DEFAULT_BUDGET).unwrap();
        assert_eq!(k, 2);
        p.validate(&g).unwrap();
    }

    #[test]
    fn tiny_budget_reports_an_upper_bound() {
        let g = complete(5);
        match crossing_number_exact(&g, 1) {
            Err(Error::BudgetExceeded {
                budget,
                upper_bound,
            }) => {
                assert_eq!(budget, 1);
                assert!(upper_bound >= 1);
            }
            other => panic!("expected BudgetExceeded, got {other:?}"),
        }
    }

    #[test]
    fn determinism_of_the_canonical_planarization() {
        let g = complete(5);
        let (_, p1) = crossing_number_exact(&g, DEFAULT_BUDGET).unwrap();
        let (_, p2) = crossing_number_exact(&g, DEFAULT_BUDGET).unwrap();
        assert_eq!(p1.chains, p2.chains);
        assert_eq!(p1.dummy_edges, p2.dummy_edges);
    }
}
