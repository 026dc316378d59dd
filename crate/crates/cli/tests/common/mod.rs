//! Independent oracles for the acceptance suite: exhaustive enumeration
//! only, no shared code with the solvers under test.

use graph_bandits::FeedbackGraph;

/// Maximum independent set size by enumerating all subsets.
pub fn brute_alpha(g: &FeedbackGraph) -> usize {
    let k = g.k();
    assert!(k <= 20, "subset enumeration oracle limited to k <= 20");
    let mut best = 0;
    for mask in 0u32..(1u32 << k) {
        if (mask.count_ones() as usize) <= best {
            continue;
        }
        let members: Vec<usize> = (0..k).filter(|&i| mask >> i & 1 == 1).collect();
        let independent = members
            .iter()
            .all(|&i| members.iter().all(|&j| i == j || !g.linked(i, j)));
        if independent {
            best = members.len();
        }
    }
    best
}

/// Minimum clique-partition size by iterative-deepening backtracking on the
/// complement of the mutual-observation relation.
pub fn brute_chi_bar(g: &FeedbackGraph) -> usize {
    fn try_color(conflict: &[Vec<bool>], colors: &mut [usize], v: usize, limit: usize) -> bool {
        if v == colors.len() {
            return true;
        }
        // symmetry break: vertex v may only open color v
        for c in 0..limit.min(v + 1) {
            if (0..v).all(|u| colors[u] != c || !conflict[u][v]) {
                colors[v] = c;
                if try_color(conflict, colors, v + 1, limit) {
                    return true;
                }
            }
        }
        false
    }
    let k = g.k();
    assert!(k <= 12, "partition oracle limited to k <= 12");
    let mutual = g.mutual_adjacency();
    let conflict: Vec<Vec<bool>> = (0..k)
        .map(|i| (0..k).map(|j| i != j && !mutual[i].contains(j)).collect())
        .collect();
    for limit in 1..=k {
        let mut colors = vec![usize::MAX; k];
        if try_color(&conflict, &mut colors, 0, limit) {
            return limit;
        }
    }
    k
}

/// Exhaustive max-min neighborhood mass over the simplex grid with
/// `resolution` mass units, exact in integer arithmetic. A branch is cut
/// only when even granting it all remaining mass cannot beat the incumbent,
/// so the result equals full enumeration.
pub fn grid_max_min(g: &FeedbackGraph, resolution: u32) -> f64 {
    let k = g.k();
    if k == 1 {
        return 1.0;
    }
    let neighborhoods: Vec<Vec<usize>> = (0..k)
        .map(|j| g.in_neighborhood(j).iter().collect())
        .collect();
    let revealed: Vec<Vec<usize>> = (0..k).map(|i| g.revealed_by(i).iter().collect()).collect();
    // future[i][j]: does N_j contain any node >= i?
    let mut future = vec![vec![false; k]; k];
    for i in (0..k).rev() {
        let (head, tail) = future.split_at_mut(i + 1);
        let next = tail.first();
        for (j, slot) in head[i].iter_mut().enumerate() {
            *slot = g.in_neighborhood(j).contains(i) || next.is_some_and(|n| n[j]);
        }
    }
    // incumbent: the near-uniform grid point
    let mut units = vec![resolution / k as u32; k];
    for u in units.iter_mut().take(resolution as usize % k) {
        *u += 1;
    }
    let mut best = neighborhoods
        .iter()
        .map(|nbrs| nbrs.iter().map(|&l| units[l]).sum::<u32>())
        .min()
        .unwrap();

    fn descend(
        node: usize,
        remaining: u32,
        partial: &mut [u32],
        best: &mut u32,
        neighborhoods: &[Vec<usize>],
        revealed: &[Vec<usize>],
        future: &[Vec<bool>],
    ) {
        let k = partial.len();
        if node == k - 1 {
            let value = (0..k)
                .map(|j| {
                    partial[j]
                        + if neighborhoods[j].contains(&node) {
                            remaining
                        } else {
                            0
                        }
                })
                .min()
                .unwrap();
            *best = (*best).max(value);
            return;
        }
        let bound = (0..k)
            .map(|j| partial[j] + if future[node][j] { remaining } else { 0 })
            .min()
            .unwrap();
        if bound <= *best {
            return;
        }
        for units in (0..=remaining).rev() {
            for &j in &revealed[node] {
                partial[j] += units;
            }
            descend(
                node + 1,
                remaining - units,
                partial,
                best,
                neighborhoods,
                revealed,
                future,
            );
            for &j in &revealed[node] {
                partial[j] -= units;
            }
        }
    }

    let mut partial = vec![0u32; k];
    descend(
        0,
        resolution,
        &mut partial,
        &mut best,
        &neighborhoods,
        &revealed,
        &future,
    );
    f64::from(best) / f64::from(resolution)
}

/// The shared random-graph corpus: 500 undirected graphs with `k <= 14` and
/// edge probabilities spanning 0.1 through 0.9.
pub fn graph_corpus() -> Vec<FeedbackGraph> {
    (0..500u64)
        .map(|i| {
            let k = 2 + (i as usize % 13);
            let p = 0.1 + 0.1 * ((i as usize / 13) % 9) as f64;
            FeedbackGraph::erdos_renyi(k, p, 510_000 + i, false).unwrap()
        })
        .collect()
}
