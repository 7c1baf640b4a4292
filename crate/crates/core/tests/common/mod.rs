//! Helpers shared by the integration tests.

#![allow(dead_code)]

use nocollide::measures::{GridDensity, GridFrame, PointCloud};
use nocollide::slicing::{features, partition, FeatureSet, SlicingSchedule};

/// Squared-distance cost between two clouds.
fn cost(a: &PointCloud, b: &PointCloud) -> Vec<Vec<f64>> {
    a.points()
        .iter()
        .map(|x| {
            b.points()
                .iter()
                .map(|y| (x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2))
                .collect()
        })
        .collect()
}

/// Number of spanning trees of the complete bipartite graph `K(m, n)`.
pub fn tree_count(m: usize, n: usize) -> f64 {
    (m as f64).powi(n as i32 - 1) * (n as f64).powi(m as i32 - 1)
}

/// Optimal squared W2 cost by enumerating every basis of the transport
/// polytope: each spanning tree of `K(m, n)` determines one basic solution,
/// and the cheapest feasible one is a vertex optimum.
pub fn brute_force_w2_sq(a: &PointCloud, b: &PointCloud) -> f64 {
    let (m, n) = (a.len(), b.len());
    let c = cost(a, b);
    let arcs: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let mut best = f64::INFINITY;
    let mut chosen = Vec::with_capacity(m + n - 1);
    enumerate(&arcs, 0, m, n, &mut chosen, &mut |tree| {
        if let Some(flows) = tree_flows(tree, a.weights(), b.weights()) {
            let v: f64 = tree.iter().zip(&flows).map(|(&(i, j), f)| f * c[i][j]).sum();
            best = best.min(v);
        }
    });
    best
}

fn find(uf: &mut [usize], mut x: usize) -> usize {
    while uf[x] != x {
        x = uf[x];
    }
    x
}

/// Enumerates acyclic arc subsets of size `nodes - 1` (spanning trees).
fn enumerate(
    arcs: &[(usize, usize)],
    start: usize,
    m: usize,
    n: usize,
    chosen: &mut Vec<(usize, usize)>,
    visit: &mut dyn FnMut(&[(usize, usize)]),
) {
    let nodes = m + n;
    if chosen.len() == nodes - 1 {
        visit(chosen);
        return;
    }
    let need = nodes - 1 - chosen.len();
    for k in start..arcs.len() {
        if arcs.len() - k < need {
            break;
        }
        let mut uf: Vec<usize> = (0..nodes).collect();
        let mut ok = true;
        for &(i, j) in chosen.iter().chain(std::iter::once(&arcs[k])) {
            let (ri, rj) = (find(&mut uf, i), find(&mut uf, m + j));
            if ri == rj {
                ok = false;
                break;
            }
            uf[ri] = rj;
        }
        if ok {
            chosen.push(arcs[k]);
            enumerate(arcs, k + 1, m, n, chosen, visit);
            chosen.pop();
        }
    }
}

/// Flows of the basic solution on a spanning tree, by peeling leaves.
/// `None` when some flow is negative.
fn tree_flows(tree: &[(usize, usize)], wa: &[f64], wb: &[f64]) -> Option<Vec<f64>> {
    let m = wa.len();
    let mut rest: Vec<f64> = wa.iter().copied().chain(wb.iter().map(|w| -w)).collect();
    let mut degree = vec![0usize; rest.len()];
    for &(i, j) in tree {
        degree[i] += 1;
        degree[m + j] += 1;
    }
    let mut flows = vec![f64::NAN; tree.len()];
    let mut done = vec![false; tree.len()];
    for _ in 0..tree.len() {
        let (k, leaf) = tree
            .iter()
            .enumerate()
            .filter(|(k, _)| !done[*k])
            .find_map(|(k, &(i, j))| {
                if degree[i] == 1 {
                    Some((k, i))
                } else if degree[m + j] == 1 {
                    Some((k, m + j))
                } else {
                    None
                }
            })?;
        let (i, j) = tree[k];
        let other = if leaf == i { m + j } else { i };
        // Source leaves push their surplus, sink leaves pull their demand.
        let f = if leaf < m { rest[leaf] } else { -rest[leaf] };
        if f < -1e-12 {
            return None;
        }
        flows[k] = f;
        done[k] = true;
        rest[leaf] = 0.0;
        rest[other] += if leaf < m { f } else { -f };
        degree[i] -= 1;
        degree[m + j] -= 1;
    }
    Some(flows)
}

/// Optimal squared W2 cost for uniform weights on equally many points,
/// by enumerating permutations.
pub fn assignment_w2_sq(a: &PointCloud, b: &PointCloud) -> f64 {
    let n = a.len();
    assert_eq!(n, b.len());
    let c = cost(a, b);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = f64::INFINITY;
    permute(&mut perm, 0, &mut |p| {
        let v: f64 = p.iter().enumerate().map(|(i, &j)| c[i][j]).sum::<f64>() / n as f64;
        best = best.min(v);
    });
    best
}

fn permute(p: &mut Vec<usize>, k: usize, visit: &mut dyn FnMut(&[usize])) {
    if k == p.len() {
        visit(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, visit);
        p.swap(k, i);
    }
}

/// Features of a density under a breadth-first schedule, or `None` when
/// some cell would fall inside a single pixel.
pub fn feats(d: &GridDensity, depth: usize) -> Option<FeatureSet> {
    let part = partition(d, &SlicingSchedule::new(depth)).ok()?;
    Some(features(d, &part).unwrap())
}

/// A density with the given pixel weights on a `w x h` grid of unit-ish
/// spacing.
pub fn density(w: usize, h: usize, weights: Vec<f64>) -> GridDensity {
    let frame = GridFrame::new(w, h, [-1.0, -1.0], 0.25).unwrap();
    GridDensity::from_weights(frame, weights).unwrap()
}
