//! Exact straight-line drawing of a planarization.
//!
//! Route: biconnect the fragment graph (planarity-preserving helper
//! edges), embed it, pin one face in full on a strictly convex rational
//! polygon, stellate every other face (a center vertex joined to the
//! face's boundary), and solve the barycentric system exactly over the
//! rationals. Stellating all non-outer faces triangulates the disk
//! bounded by the outer cycle, and the barycentric drawing of a
//! triangulated disk with convex boundary is planar and respects the
//! embedding's rotation system. Helper edges and centers are dropped
//! afterwards; a sub-drawing of a planar drawing stays planar.
//!
//! The outer face is chosen to carry as many real vertices as possible:
//! pinned vertices sit on the convex boundary instead of crowding
//! around interior averages, which keeps the drawn edge lengths within
//! a small factor of one another. Downstream stages pay for length
//! imbalance directly (a short drawn edge with a long target length
//! needs many corrugation teeth), so boundary balance here is load
//! bearing, not cosmetic.
//!
//! The raw barycentric coordinates carry enormous denominators, so the
//! final step snaps all vertices to the coarsest power-of-two grid that
//! preserves the drawing's validity (distinctness, no incidences, no
//! stray crossings, alternation at dummies), falling back to the exact
//! coordinates if no grid works.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

use super::planarity::{self, LayoutGraph};
use super::{
    biconnect_augment, check_drawing, snap_to_grid, CrossingMark, Drawing, Planarization, Q,
    QPoint,
};

/// Straight-line plane drawing of a planarization with all coordinates
/// rational and zero crossings among the fragments.
pub fn straight_line_draw(p: &Planarization) -> Result<Drawing> {
    let (pg, owner) = p.planar_graph();
    if pg.edges.is_empty() {
        // A single vertex (no finite edges): pin it at the origin.
        return Ok(Drawing {
            points: vec![(Q::zero(), Q::zero()); pg.n],
            chains: Vec::new(),
            marks: Vec::new(),
        });
    }

    let (aug, n_frags) = biconnect_augment(&pg);
    let faces = planarity::embed_biconnected(&aug)?;

    // Fragments must alternate around every dummy; for an exact
    // planarization this holds in every embedding (a touch would beat
    // the minimum), and the heuristic smooths touches out beforehand.
    for i in 0..p.dummy_edges.len() {
        let d = p.n_orig + i;
        let rot = planarity::rotation_at(&faces, &aug, d);
        let owners: Vec<usize> = rot
            .into_iter()
            .filter(|&e| e < n_frags)
            .map(|e| owner[e])
            .collect();
        if owners.len() != 4 || owners[0] == owners[1] || owners[1] == owners[2] {
            return Err(Error::NotPlanar {
                context: format!("fragments fail to alternate around crossing vertex {d}"),
            });
        }
    }

    // Pick the outer face: it must be a simple cycle of length >= 3,
    // and among those the one with the most real (pre-planarization)
    // vertices, then the longest, spreads the drawing best.
    let simple = |f: &[usize]| {
        f.len() >= 3 && f.iter().collect::<std::collections::BTreeSet<_>>().len() == f.len()
    };
    let outer_idx = (0..faces.len())
        .max_by_key(|&i| {
            let f = &faces[i];
            (
                simple(f),
                f.iter().filter(|&&v| v < p.n_orig).count(),
                f.len(),
            )
        })
        .expect("a drawn graph has at least one face");

    let mut st = aug.clone();
    let mut fixed: Vec<(usize, QPoint)> = Vec::new();
    if simple(&faces[outer_idx]) {
        // Stellate every face but the outer one; pin the outer cycle.
        for (i, face) in faces.iter().enumerate() {
            if i == outer_idx {
                continue;
            }
            let c = st.n;
            st.n += 1;
            for &v in face {
                st.edges.push((c, v));
            }
        }
        let ring = convex_polygon(faces[outer_idx].len());
        fixed.extend(faces[outer_idx].iter().copied().zip(ring));
    } else {
        // Every face walk revisits a vertex (a doubled edge, say):
        // stellate everything and pin one stellation triangle instead.
        let mut centers = Vec::with_capacity(faces.len());
        for face in &faces {
            let c = st.n;
            st.n += 1;
            centers.push(c);
            for &v in face {
                st.edges.push((c, v));
            }
        }
        fixed.push((centers[0], (Q::zero(), Q::zero())));
        fixed.push((faces[0][0], (Q::one(), Q::zero())));
        fixed.push((faces[0][1], (Q::zero(), Q::one())));
    }
    let pos = tutte_positions(&st, &fixed)?;

    let drawing = Drawing {
        points: pos[..p.n].to_vec(),
        chains: p.chains.clone(),
        marks: (0..p.dummy_edges.len())
            .map(|i| CrossingMark {
                point: p.n_orig + i,
                chains: p.dummy_edges[i],
                rerouted: false,
            })
            .collect(),
    };

    // Coarsest valid power-of-two grid.
    for level in 0..=64u32 {
        let mut snapped = drawing.clone();
        for pt in &mut snapped.points {
            *pt = (snap_to_grid(&pt.0, level), snap_to_grid(&pt.1, level));
        }
        if check_drawing(&snapped).is_ok() {
            return Ok(snapped);
        }
    }
    match check_drawing(&drawing) {
        Ok(()) => Ok(drawing),
        Err(flaw) => Err(Error::NotPlanar {
            context: format!("barycentric drawing failed its audit: {flaw}"),
        }),
    }
}

/// `k` distinct rational points in strictly convex position, listed in
/// circular order: points of the unit circle under the parametrization
/// t -> ((1-t^2)/(1+t^2), 2t/(1+t^2)) with t = tan(phi/2) rounded to a
/// fixed binary grid. Rounding keeps every point exactly on the circle
/// (only the angle moves), and the grid is far finer than the angular
/// gap between consecutive samples, so the circular order survives.
fn convex_polygon(k: usize) -> Vec<QPoint> {
    assert!(k >= 3, "a polygon needs three corners");
    // Consecutive exact tan values differ by at least pi/k; a grid this
    // fine cannot merge or swap them.
    let grid = (512 * k as u64).next_power_of_two() as i64;
    (0..k)
        .map(|i| {
            let phi = std::f64::consts::PI * ((2 * i + 1) as f64 / k as f64 - 1.0);
            let steps = ((phi / 2.0).tan() * grid as f64).round() as i64;
            let t = Q::new(BigInt::from(steps), BigInt::from(grid));
            let t2 = &t * &t;
            let d = &t2 + Q::one();
            ((Q::one() - &t2) / &d, (&t + &t) / &d)
        })
        .collect()
}

/// Solve the barycentric system exactly: every unpinned vertex at the
/// average of its neighbors, the pinned ones at the given coordinates.
/// Pinned coordinates are cleared to a common integer scale so that
/// fraction-free (Bareiss) elimination keeps intermediate entries as
/// integer minors; one rational back-substitution ends the solve.
fn tutte_positions(g: &LayoutGraph, pinned: &[(usize, QPoint)]) -> Result<Vec<QPoint>> {
    let fixed: std::collections::BTreeMap<usize, &QPoint> =
        pinned.iter().map(|(v, pt)| (*v, pt)).collect();
    assert!(
        fixed.len() == pinned.len() && fixed.len() >= 3,
        "pinned vertices are distinct and span a polygon"
    );
    let mut scale = BigInt::one();
    for (_, pt) in pinned {
        scale = scale.lcm(pt.0.denom());
        scale = scale.lcm(pt.1.denom());
    }
    let unknowns: Vec<usize> = (0..g.n).filter(|v| !fixed.contains_key(v)).collect();
    let col_of: std::collections::BTreeMap<usize, usize> = unknowns
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i))
        .collect();
    let k = unknowns.len();
    let adj = g.adjacency();

    let mut m: Vec<Vec<BigInt>> = vec![vec![BigInt::zero(); k + 2]; k];
    for (row, &v) in unknowns.iter().enumerate() {
        m[row][row] = BigInt::from(adj[v].len());
        for &(w, _) in &adj[v] {
            if let Some(&c) = col_of.get(&w) {
                m[row][c] -= BigInt::one();
            } else {
                let (fx, fy) = fixed[&w];
                m[row][k] += fx.numer() * (&scale / fx.denom());
                m[row][k + 1] += fy.numer() * (&scale / fy.denom());
            }
        }
    }

    // Bareiss elimination.
    let mut prev = BigInt::one();
    for col in 0..k {
        let pivot = (col..k).find(|&r| !m[r][col].is_zero()).ok_or_else(|| {
            Error::NotPlanar {
                context: "barycentric system is singular".into(),
            }
        })?;
        m.swap(col, pivot);
        for i in (col + 1)..k {
            for j in (col + 1)..(k + 2) {
                let num = &m[col][col] * &m[i][j] - &m[i][col] * &m[col][j];
                debug_assert!((&num % &prev).is_zero(), "Bareiss division is exact");
                m[i][j] = num / &prev;
            }
            m[i][col] = BigInt::zero();
        }
        prev = m[col][col].clone();
    }

    // Back substitution over the rationals. The whole right-hand side
    // carries the factor `scale`, so solutions do too; it divides out
    // only once every row has been resolved.
    let mut xs = vec![Q::zero(); k];
    let mut ys = vec![Q::zero(); k];
    for i in (0..k).rev() {
        let mut rx = Q::from_integer(m[i][k].clone());
        let mut ry = Q::from_integer(m[i][k + 1].clone());
        for j in (i + 1)..k {
            let c = Q::from_integer(m[i][j].clone());
            rx -= &c * &xs[j];
            ry -= &c * &ys[j];
        }
        let d = Q::from_integer(m[i][i].clone());
        xs[i] = rx / &d;
        ys[i] = ry / &d;
    }

    let mut out = vec![(Q::zero(), Q::zero()); g.n];
    for (&v, pt) in &fixed {
        out[v] = (*pt).clone();
    }
    let down = Q::from_integer(scale);
    for (i, &v) in unknowns.iter().enumerate() {
        out[v] = (&xs[i] / &down, &ys[i] / &down);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::crossing::{crossing_number_exact, DEFAULT_BUDGET};

    fn complete(n: usize) -> LayoutGraph {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                edges.push((u, v));
            }
        }
        LayoutGraph::new(n, edges)
    }

    fn draw_planar(g: &LayoutGraph) -> Drawing {
        let p = Planarization::trivial(g);
        let d = straight_line_draw(&p).unwrap();
        check_drawing(&d).unwrap();
        d
    }

    #[test]
    fn triangle_and_k4_draw_without_crossings() {
        draw_planar(&complete(3));
        draw_planar(&complete(4));
    }

    #[test]
    fn single_edge_path_and_star_draw() {
        draw_planar(&LayoutGraph::new(2, vec![(0, 1)]));
        draw_planar(&LayoutGraph::new(4, vec![(0, 1), (1, 2), (2, 3)]));
        draw_planar(&LayoutGraph::new(5, vec![(0, 1), (0, 2), (0, 3), (0, 4)]));
    }

    #[test]
    fn cube_draws_with_distinct_rational_positions() {
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
        let d = draw_planar(&cube);
        assert_eq!(d.points.len(), 8);
    }

    #[test]
    fn planarized_k5_draws_with_alternating_crossing() {
        let g = complete(5);
        let (k, p) = crossing_number_exact(&g, DEFAULT_BUDGET).unwrap();
        assert_eq!(k, 1);
        let d = straight_line_draw(&p).unwrap();
        // check_drawing validates alternation around the dummy.
        check_drawing(&d).unwrap();
        assert_eq!(d.marks.len(), 1);
        assert!(!d.marks[0].rerouted);
    }

    #[test]
    fn planarized_petersen_draws() {
        let mut edges = Vec::new();
        for i in 0..5 {
            edges.push((i, (i + 1) % 5));
            edges.push((i, i + 5));
            edges.push((i + 5, (i + 2) % 5 + 5));
        }
        let g = LayoutGraph::new(10, edges);
        let (k, p) = crossing_number_exact(&g, DEFAULT_BUDGET).unwrap();
        assert_eq!(k, 2);
        let d = straight_line_draw(&p).unwrap();
        check_drawing(&d).unwrap();
        assert_eq!(d.marks.len(), 2);
    }

    #[test]
    fn snapped_coordinates_have_small_denominators() {
        let d = draw_planar(&complete(4));
        for (x, y) in &d.points {
            assert!(x.denom() <= &BigInt::from(1 << 16));
            assert!(y.denom() <= &BigInt::from(1 << 16));
        }
    }
}
