use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use super::{classical_mds, Embedding, EmbeddingMethod};
use crate::error::{Error, Result};
use crate::DistanceMatrix;

/// Isomap on a distance matrix: symmetrized `k_neighbors`-NN graph, graph
/// geodesics, then classical MDS into `k` dimensions.
pub fn isomap(d: &DistanceMatrix, k_neighbors: usize, k: usize) -> Result<Embedding> {
    let g = knn_geodesics(d, k_neighbors)?;
    let mut e = classical_mds(&g, k)?;
    e.meta.method = EmbeddingMethod::Isomap;
    Ok(e)
}

/// [`isomap`] on Euclidean distances between feature rows.
pub fn isomap_features(rows: &[Vec<f64>], k_neighbors: usize, k: usize) -> Result<Embedding> {
    isomap(&DistanceMatrix::euclidean(rows)?, k_neighbors, k)
}

/// Shortest-path distances on the graph joining every point to its
/// `k_neighbors` nearest neighbours (ties broken by index), made undirected.
pub fn knn_geodesics(d: &DistanceMatrix, k_neighbors: usize) -> Result<DistanceMatrix> {
    let m = d.size();
    if k_neighbors == 0 || k_neighbors >= m.max(1) {
        return Err(Error::invalid(format!(
            "k_neighbors must be in 1..{m}, got {k_neighbors}"
        )));
    }
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); m];
    for i in 0..m {
        let mut others: Vec<usize> = (0..m).filter(|&j| j != i).collect();
        others.sort_by(|&a, &b| d.get(i, a).total_cmp(&d.get(i, b)).then(a.cmp(&b)));
        for &j in others.iter().take(k_neighbors) {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    for a in &mut adj {
        a.sort_unstable();
        a.dedup();
    }

    let components = count_components(&adj);
    if components > 1 {
        return Err(Error::DisconnectedGraph { components });
    }

    let rows: Vec<Vec<f64>> = (0..m).into_par_iter().map(|s| dijkstra(d, &adj, s)).collect();
    // Path lengths are symmetric up to summation order; average the two.
    let mut data = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            data[i * m + j] = if i == j { 0.0 } else { 0.5 * (rows[i][j] + rows[j][i]) };
        }
    }
    DistanceMatrix::new(m, data)
}

fn count_components(adj: &[Vec<usize>]) -> usize {
    let mut seen = vec![false; adj.len()];
    let mut count = 0;
    let mut stack = Vec::new();
    for s in 0..adj.len() {
        if seen[s] {
            continue;
        }
        count += 1;
        seen[s] = true;
        stack.push(s);
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
    }
    count
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn dijkstra(d: &DistanceMatrix, adj: &[Vec<usize>], source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    dist[source] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(Entry(0.0, source));
    while let Some(Entry(du, u)) = heap.pop() {
        if du > dist[u] {
            continue;
        }
        for &v in &adj[u] {
            let nd = du + d.get(u, v);
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Entry(nd, v));
            }
        }
    }
    dist
}
