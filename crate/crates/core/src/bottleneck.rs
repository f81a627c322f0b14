//! Bottleneck distance between persistence diagrams.
//!
//! Finite points are matched by binary search over candidate costs with a
//! Hopcroft-Karp feasibility test; points at infinity are matched among
//! themselves by sorted birth.

use std::collections::VecDeque;

fn linf(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

fn to_diagonal(a: (f64, f64)) -> f64 {
    (a.1 - a.0) / 2.0
}

/// Bottleneck distance under the L∞ ground metric. `+∞` when the numbers of
/// essential points differ.
pub fn bottleneck_distance(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let split = |d: &[(f64, f64)]| {
        let mut fin = Vec::new();
        let mut ess = Vec::new();
        for &p in d {
            if p.1.is_infinite() {
                ess.push(p.0);
            } else if p.1 > p.0 {
                fin.push(p);
            }
        }
        ess.sort_by(f64::total_cmp);
        (fin, ess)
    };
    let (fa, ea) = split(a);
    let (fb, eb) = split(b);
    if ea.len() != eb.len() {
        return f64::INFINITY;
    }
    let essential = ea
        .iter()
        .zip(&eb)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    essential.max(finite_bottleneck(&fa, &fb))
}

/// Applies `ln` to both coordinates; births must be positive.
pub fn log_scale(d: &[(f64, f64)]) -> Vec<(f64, f64)> {
    d.iter().map(|&(b, x)| (b.ln(), x.ln())).collect()
}

fn finite_bottleneck(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let mut candidates: Vec<f64> = Vec::with_capacity(a.len() * b.len() + a.len() + b.len());
    candidates.extend(a.iter().map(|&p| to_diagonal(p)));
    candidates.extend(b.iter().map(|&p| to_diagonal(p)));
    for &p in a {
        for &q in b {
            candidates.push(linf(p, q));
        }
    }
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    // matching everything to the diagonal is always feasible at the largest diagonal cost
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(a, b, candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    candidates[lo]
}

/// Perfect matching on left = A ∪ diag(B), right = B ∪ diag(A) with all
/// edges of cost at most `t`.
fn feasible(a: &[(f64, f64)], b: &[(f64, f64)], t: f64) -> bool {
    let (na, nb) = (a.len(), b.len());
    let n = na + nb;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, &p) in a.iter().enumerate() {
        for (j, &q) in b.iter().enumerate() {
            if linf(p, q) <= t {
                adj[i].push(j);
            }
        }
        if to_diagonal(p) <= t {
            adj[i].push(nb + i);
        }
    }
    for (j, &q) in b.iter().enumerate() {
        let left = na + j;
        if to_diagonal(q) <= t {
            adj[left].push(j);
        }
        // diagonal copies match each other at zero cost
        adj[left].extend(nb..nb + na);
    }
    hopcroft_karp(&adj, n) == n
}

fn hopcroft_karp(adj: &[Vec<usize>], n_right: usize) -> usize {
    const NIL: usize = usize::MAX;
    let n_left = adj.len();
    let mut match_l = vec![NIL; n_left];
    let mut match_r = vec![NIL; n_right];
    let mut dist = vec![0u32; n_left];
    let mut matched = 0;
    loop {
        let mut queue = VecDeque::new();
        let mut found = false;
        for u in 0..n_left {
            if match_l[u] == NIL {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = u32::MAX;
            }
        }
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                let w = match_r[v];
                if w == NIL {
                    found = true;
                } else if dist[w] == u32::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        if !found {
            return matched;
        }
        fn augment(
            u: usize,
            adj: &[Vec<usize>],
            match_l: &mut [usize],
            match_r: &mut [usize],
            dist: &mut [u32],
        ) -> bool {
            for &v in &adj[u] {
                let w = match_r[v];
                if w == usize::MAX || (dist[w] == dist[u] + 1 && augment(w, adj, match_l, match_r, dist)) {
                    match_l[u] = v;
                    match_r[v] = u;
                    return true;
                }
            }
            dist[u] = u32::MAX;
            false
        }
        for u in 0..n_left {
            if match_l[u] == NIL && augment(u, adj, &mut match_l, &mut match_r, &mut dist) {
                matched += 1;
            }
        }
    }
}
