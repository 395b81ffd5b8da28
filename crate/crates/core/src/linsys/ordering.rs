//! Minimum-degree fill-reducing ordering.

use std::collections::BTreeSet;

/// Computes a minimum-degree elimination order for the symmetric sparsity
/// pattern given as an adjacency list (diagonal entries ignored).
///
/// Returns `perm` with `perm[k]` = original index eliminated at step `k`.
/// Ties break toward the smallest index so the result is deterministic.
pub fn minimum_degree(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut graph: Vec<BTreeSet<usize>> = adj
        .iter()
        .enumerate()
        .map(|(i, nbrs)| nbrs.iter().copied().filter(|&j| j != i).collect())
        .collect();
    // Symmetrize in case the caller passed a one-sided pattern.
    for i in 0..n {
        let nbrs: Vec<usize> = graph[i].iter().copied().collect();
        for j in nbrs {
            graph[j].insert(i);
        }
    }

    let mut eliminated = vec![false; n];
    let mut perm = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n)
            .filter(|&i| !eliminated[i])
            .min_by_key(|&i| (graph[i].len(), i))
            .expect("a node remains");
        eliminated[v] = true;
        perm.push(v);
        let nbrs: Vec<usize> = std::mem::take(&mut graph[v]).into_iter().collect();
        for &a in &nbrs {
            graph[a].remove(&v);
            for &b in &nbrs {
                if a != b {
                    graph[a].insert(b);
                }
            }
        }
    }
    perm
}

/// Inverse of a permutation.
pub fn invert(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (k, &p) in perm.iter().enumerate() {
        inv[p] = k;
    }
    inv
}
