//! Filtration constructors: fixed-radius Rips, lower-star, DTM-weighted Rips
//! and its sparsified variant.
//!
//! Distance conventions differ between builders. [`rips_2skeleton`] admits an
//! edge when `d(p,q) <= r` and gives it value `d(p,q)`. The weighted builders
//! use ball radii, so with all weights zero an edge enters at `d(p,q) / 2`.

use std::collections::{BTreeSet, HashMap};

use crate::cloud::WeightedPointCloud;
use crate::complex::{build_filtration_with, Filtration, Simplex};
use crate::error::{Error, Result};
use crate::exec::{self, Exec};

/// Default guard on the number of simplices a builder may produce.
pub const DEFAULT_SIMPLEX_BUDGET: usize = 1 << 28;

#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    pub simplex_budget: usize,
    pub exec: Exec,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            simplex_budget: DEFAULT_SIMPLEX_BUDGET,
            exec: Exec::default(),
        }
    }
}

/// Smallest `α >= max(w_p, w_q)` with `√(α²−w_p²) + √(α²−w_q²) >= d`.
pub fn weighted_edge_value(w_p: f64, w_q: f64, d: f64) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::param(format!("distance must be positive, got {d}")));
    }
    if !(w_p >= 0.0 && w_q >= 0.0 && w_p.is_finite() && w_q.is_finite()) {
        return Err(Error::param(format!(
            "weights must be finite and non-negative, got {w_p}, {w_q}"
        )));
    }
    Ok(edge_value(w_p, w_q, d))
}

#[inline]
pub(crate) fn edge_value(w_p: f64, w_q: f64, d: f64) -> f64 {
    let (lo, hi) = if w_p <= w_q { (w_p, w_q) } else { (w_q, w_p) };
    let gap2 = hi * hi - lo * lo;
    if d * d <= gap2 {
        return hi;
    }
    // radius of the lighter ball at the meeting scale
    let r_lo = 0.5 * (d + gap2 / d);
    (lo * lo + r_lo * r_lo).sqrt().max(hi)
}

/// Insertion order and radii of a farthest-first traversal, plus the
/// per-point deletion scales used by [`sparse_dtm_rips`].
#[derive(Debug, Clone)]
pub struct SparseParams {
    pub epsilon: f64,
    /// Point indices in greedy order.
    pub order: Vec<usize>,
    /// `λ_p`, indexed by point; `+∞` for the first point.
    pub insertion_radii: Vec<f64>,
    /// `T_p = λ_p (1+ε)/ε`, indexed by point.
    pub deletion_scale: Vec<f64>,
    /// Nearest earlier point at insertion, indexed by point.
    pub parent: Vec<Option<usize>>,
    /// Simplices added by collapse cones on top of the truncated filtration.
    pub cone_simplices: usize,
}

/// Farthest-first traversal starting at point 0; ties go to the lower index.
/// Returns the order and the insertion radius of each point.
pub fn greedy_permutation(cloud: &WeightedPointCloud) -> (Vec<usize>, Vec<f64>) {
    let (order, radii, _) = greedy_traversal(cloud);
    (order, radii)
}

/// Greedy order, insertion radii, and for each point the earlier point
/// nearest to it when it was inserted (`None` for the first point).
fn greedy_traversal(cloud: &WeightedPointCloud) -> (Vec<usize>, Vec<f64>, Vec<Option<usize>>) {
    let n = cloud.len();
    let mut order = Vec::with_capacity(n);
    let mut radii = vec![f64::INFINITY; n];
    let mut parent = vec![None; n];
    if n == 0 {
        return (order, radii, parent);
    }
    let mut dist_to_set = vec![f64::INFINITY; n];
    let mut nearest = vec![0usize; n];
    let mut taken = vec![false; n];
    let mut next = 0usize;
    for step in 0..n {
        order.push(next);
        taken[next] = true;
        if step > 0 {
            radii[next] = dist_to_set[next];
            parent[next] = Some(nearest[next]);
        }
        let mut best: Option<(usize, f64)> = None;
        for q in 0..n {
            if taken[q] {
                continue;
            }
            let d = cloud.distance(next, q);
            if d < dist_to_set[q] {
                dist_to_set[q] = d;
                nearest[q] = next;
            }
            if best.is_none_or(|(_, b)| dist_to_set[q] > b) {
                best = Some((q, dist_to_set[q]));
            }
        }
        match best {
            Some((q, _)) => next = q,
            None => break,
        }
    }
    (order, radii, parent)
}

/// Flag (clique) 2-skeleton over a filtered edge list.
///
/// `edges` holds `(p, q, value)` with `p < q`; triangle values are the max of
/// their three edge values, which already dominate vertex values.
fn clique_filtration(
    vertex_values: &[f64],
    mut edges: Vec<(u32, u32, f64)>,
    opts: &BuildOptions,
) -> Result<Filtration> {
    let n = vertex_values.len();
    let budget = opts.simplex_budget;
    if n + edges.len() > budget {
        return Err(Error::BudgetExceeded {
            count: n + edges.len(),
            budget,
        });
    }
    edges.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let mut upper: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    for &(p, q, v) in &edges {
        upper[p as usize].push((q, v));
    }
    let upper = &upper;
    // (a, b, c) with a < b < c: c in upper[a] ∩ upper[b]
    let for_triangles = |a: usize, sink: &mut dyn FnMut(u32, u32, u32, f64)| {
        let row_a = &upper[a];
        for (i, &(b, v_ab)) in row_a.iter().enumerate() {
            let row_b = &upper[b as usize];
            let (mut x, mut y) = (i + 1, 0);
            while x < row_a.len() && y < row_b.len() {
                let (ca, v_ac) = row_a[x];
                let (cb, v_bc) = row_b[y];
                if ca < cb {
                    x += 1;
                } else if cb < ca {
                    y += 1;
                } else {
                    sink(a as u32, b, ca, v_ab.max(v_ac).max(v_bc));
                    x += 1;
                    y += 1;
                }
            }
        }
    };
    let n_triangles = exec::sum_range(opts.exec, n, |a| {
        let mut c = 0usize;
        for_triangles(a, &mut |_, _, _, _| c += 1);
        c
    });
    let total = n + edges.len() + n_triangles;
    if total > budget {
        return Err(Error::BudgetExceeded {
            count: total,
            budget,
        });
    }
    let mut valued: Vec<(Simplex, f64)> = Vec::with_capacity(total);
    valued.extend(
        vertex_values
            .iter()
            .enumerate()
            .map(|(v, &r)| (Simplex::vertex(v as u32), r)),
    );
    valued.extend(edges.iter().map(|&(p, q, v)| (Simplex::edge(p, q), v)));
    let tris = exec::flat_map_range(opts.exec, n, |a| {
        let mut out = Vec::new();
        for_triangles(a, &mut |a, b, c, v| out.push((Simplex::triangle(a, b, c), v)));
        out
    });
    valued.extend(tris);
    build_filtration_with(valued, opts.exec)
}

/// Collects `(p, q, value)` for all pairs `p < q` where `value_of` returns `Some`.
fn collect_edges<F>(n: usize, exec: Exec, value_of: F) -> Vec<(u32, u32, f64)>
where
    F: Fn(usize, usize) -> Option<f64> + Sync + Send,
{
    exec::flat_map_range(exec, n, |p| {
        (p + 1..n)
            .filter_map(|q| value_of(p, q).map(|v| (p as u32, q as u32, v)))
            .collect()
    })
}

/// 2-skeleton of the Rips complex at radius `r`: vertices at 0, edges at
/// their length when `d <= r`, triangles at their longest edge.
pub fn rips_2skeleton(cloud: &WeightedPointCloud, r: f64, opts: &BuildOptions) -> Result<Filtration> {
    if !(r > 0.0) {
        return Err(Error::param(format!("radius must be positive, got {r}")));
    }
    let edges = collect_edges(cloud.len(), opts.exec, |p, q| {
        let d = cloud.distance(p, q);
        (d <= r).then_some(d)
    });
    clique_filtration(&vec![0.0; cloud.len()], edges, opts)
}

fn require_weights(cloud: &WeightedPointCloud) -> Result<&[f64]> {
    if !cloud.has_weights() {
        return Err(Error::State(
            "DTM weights have not been computed for this point cloud".into(),
        ));
    }
    Ok(cloud.weights())
}

/// Full DTM-weighted Rips filtration truncated at `r_max` (may be `+∞`).
pub fn dtm_rips_filtration(
    cloud: &WeightedPointCloud,
    r_max: f64,
    opts: &BuildOptions,
) -> Result<Filtration> {
    let w = require_weights(cloud)?;
    if r_max.is_nan() {
        return Err(Error::param("r_max is NaN"));
    }
    let n = cloud.len();
    if r_max == f64::INFINITY {
        let pairs = n * n.saturating_sub(1) / 2;
        if n + pairs > opts.simplex_budget {
            return Err(Error::BudgetExceeded {
                count: n + pairs,
                budget: opts.simplex_budget,
            });
        }
    }
    let edges = collect_edges(n, opts.exec, |p, q| {
        let v = edge_value(w[p], w[q], cloud.distance(p, q));
        (v <= r_max).then_some(v)
    });
    clique_filtration(w, edges, opts)
}

/// The truncated sparse DTM-weighted Rips filtration.
///
/// A greedy permutation gives insertion radii `λ_p`; each point gets a
/// deletion scale `T_p = λ_p (1+ε)/ε`. An edge is kept iff its weighted value
/// is at most `min(T_p, T_q)`; triangles are kept iff all three edges are.
///
/// The star of a point is frozen once it is past its deletion scale, so loops
/// through it may never be filled. [`sparse_dtm_rips`] repairs this.
pub fn sparse_dtm_rips_truncated(
    cloud: &WeightedPointCloud,
    epsilon: f64,
    opts: &BuildOptions,
) -> Result<(Filtration, SparseParams)> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::param(format!("epsilon must lie in (0,1), got {epsilon}")));
    }
    let w = require_weights(cloud)?;
    let (order, radii, parent) = greedy_traversal(cloud);
    let factor = (1.0 + epsilon) / epsilon;
    let deletion: Vec<f64> = radii.iter().map(|&l| l * factor).collect();
    let t = &deletion;
    let edges = collect_edges(cloud.len(), opts.exec, |p, q| {
        let bound = t[p].min(t[q]);
        let d = cloud.distance(p, q);
        // edge values are at least d/2
        if d > 2.0 * bound {
            return None;
        }
        let v = edge_value(w[p], w[q], d);
        (v <= bound).then_some(v)
    });
    let filt = clique_filtration(w, edges, opts)?;
    Ok((
        filt,
        SparseParams {
            epsilon,
            order,
            insertion_radii: radii,
            deletion_scale: deletion,
            parent,
            cone_simplices: 0,
        },
    ))
}

/// Sparse DTM-weighted Rips filtration.
///
/// Starts from [`sparse_dtm_rips_truncated`]. At `max(T_p, w_p)` every point
/// other than the first is collapsed onto the current representative `q` of
/// its greedy parent: the cone `q * St(p)` over the live star of `p` is added
/// (edges `qa`, triangles `pqa` and `qab`), and from then on `q` stands in for
/// `p`. Adding the cone makes the inclusion carry the same homology as the
/// collapse, so the filtration follows the tower of net complexes instead of
/// keeping dead stars frozen.
pub fn sparse_dtm_rips(
    cloud: &WeightedPointCloud,
    epsilon: f64,
    opts: &BuildOptions,
) -> Result<(Filtration, SparseParams)> {
    let (truncated, mut params) = sparse_dtm_rips_truncated(cloud, epsilon, opts)?;
    let w = cloud.weights();
    let n = cloud.len();
    let mut deaths: Vec<(f64, usize)> = params
        .order
        .iter()
        .enumerate()
        .skip(1)
        .map(|(rank, &p)| (params.deletion_scale[p].max(w[p]), rank))
        .collect();
    // simultaneous deaths: later points collapse first, so parents outlive children
    deaths.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));

    let mut tower = Tower::new(n);
    let mut pending = deaths.iter().peekable();
    for (s, &v) in truncated.simplices().iter().zip(truncated.values()) {
        while let Some(&&(t, rank)) = pending.peek() {
            if t >= v {
                break;
            }
            tower.collapse(params.order[rank], t, &params.parent, w);
            pending.next();
        }
        tower.insert(*s, v);
        tower.check_budget(opts.simplex_budget)?;
    }
    for &(t, rank) in pending {
        tower.collapse(params.order[rank], t, &params.parent, w);
        tower.check_budget(opts.simplex_budget)?;
    }
    params.cone_simplices = tower.added;
    let valued = tower.values.into_iter().collect();
    Ok((build_filtration_with(valued, opts.exec)?, params))
}

fn ordered(a: u32, b: u32) -> (u32, u32) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Union of all simplices seen so far, plus the live complex on the points
/// not yet collapsed.
struct Tower {
    values: HashMap<Simplex, f64>,
    /// live neighbors of each live vertex
    adj: Vec<BTreeSet<u32>>,
    /// live link edges of each live vertex
    link: Vec<BTreeSet<(u32, u32)>>,
    /// collapse target of dead vertices
    target: Vec<Option<u32>>,
    /// simplices created by cones
    added: usize,
}

impl Tower {
    fn new(n: usize) -> Self {
        Tower {
            values: HashMap::new(),
            adj: vec![BTreeSet::new(); n],
            link: vec![BTreeSet::new(); n],
            target: vec![None; n],
            added: 0,
        }
    }

    fn check_budget(&self, budget: usize) -> Result<()> {
        if self.values.len() > budget {
            return Err(Error::BudgetExceeded {
                count: self.values.len(),
                budget,
            });
        }
        Ok(())
    }

    fn add_live(&mut self, s: Simplex) {
        match *s.vertices() {
            [a, b] => {
                self.adj[a as usize].insert(b);
                self.adj[b as usize].insert(a);
            }
            [a, b, c] => {
                self.link[a as usize].insert((b, c));
                self.link[b as usize].insert((a, c));
                self.link[c as usize].insert((a, b));
            }
            _ => {}
        }
    }

    /// Adds a simplex of the truncated filtration. Triangles can outlive the
    /// deletion scale of a vertex through their third edge; those are dropped.
    fn insert(&mut self, s: Simplex, v: f64) {
        if self.values.contains_key(&s) || s.vertices().iter().any(|&x| self.target[x as usize].is_some()) {
            return;
        }
        self.values.insert(s, v);
        self.add_live(s);
    }

    /// Inserts `s` unless present, with the smallest value that is at least
    /// `floor` and at least every face value; returns its value.
    fn ensure(&mut self, s: Simplex, floor: f64, w: &[f64]) -> f64 {
        if let Some(&v) = self.values.get(&s) {
            return v;
        }
        let mut v = floor;
        for &x in s.vertices() {
            v = v.max(w[x as usize]);
        }
        if s.dim() == 2 {
            for f in s.facets() {
                v = v.max(self.values[&f]);
            }
        }
        self.values.insert(s, v);
        self.added += 1;
        v
    }

    fn representative(&self, mut x: u32) -> u32 {
        while let Some(t) = self.target[x as usize] {
            x = t;
        }
        x
    }

    fn collapse(&mut self, p: usize, t: f64, parent: &[Option<usize>], w: &[f64]) {
        let Some(par) = parent[p] else { return };
        let p = p as u32;
        let q = self.representative(par as u32);
        debug_assert_ne!(p, q);
        let neighbors: Vec<u32> = std::mem::take(&mut self.adj[p as usize]).into_iter().collect();
        let link: Vec<(u32, u32)> = std::mem::take(&mut self.link[p as usize]).into_iter().collect();

        self.ensure(Simplex::edge(p, q), t, w);
        for &a in neighbors.iter().filter(|&&a| a != q) {
            self.ensure(Simplex::edge(q, a), t, w);
            self.ensure(Simplex::triangle(p, q, a), t, w);
        }
        for &(a, b) in link.iter().filter(|&&(a, b)| a != q && b != q) {
            self.ensure(Simplex::triangle(q, a, b), t, w);
        }

        // replace the live star of p by its image under p -> q
        for &a in &neighbors {
            self.adj[a as usize].remove(&p);
        }
        for &(a, b) in &link {
            self.link[a as usize].remove(&ordered(p, b));
            self.link[b as usize].remove(&ordered(p, a));
        }
        for &a in neighbors.iter().filter(|&&a| a != q) {
            self.add_live(Simplex::edge(q, a));
        }
        for &(a, b) in link.iter().filter(|&&(a, b)| a != q && b != q) {
            self.add_live(Simplex::triangle(q, a, b));
        }
        self.target[p as usize] = Some(q);
    }
}

/// Lower-star filtration of a vertex function on a face-closed complex.
///
/// Vertices are swept by `(f(v), v)`; each is followed by its lower star in
/// (dimension, vertex tuple) order. Every simplex takes the max of `f` over
/// its vertices.
pub fn lower_star_filtration(complex: &[Simplex], f: &[f64]) -> Result<Filtration> {
    let bound = complex
        .iter()
        .flat_map(|s| s.vertices().iter())
        .map(|&v| v as usize + 1)
        .max()
        .unwrap_or(0);
    if f.len() < bound {
        return Err(Error::param(format!(
            "vertex function covers {} vertices, complex uses {bound}",
            f.len()
        )));
    }
    if f[..bound].iter().any(|x| x.is_nan()) {
        return Err(Error::param("vertex function contains NaN"));
    }
    let mut sweep: Vec<u32> = (0..bound as u32).collect();
    sweep.sort_by(|&a, &b| f[a as usize].total_cmp(&f[b as usize]).then(a.cmp(&b)));
    let mut rank = vec![0u32; bound];
    for (i, &v) in sweep.iter().enumerate() {
        rank[v as usize] = i as u32;
    }
    let owner = |s: &Simplex| -> u32 {
        *s.vertices()
            .iter()
            .max_by_key(|&&v| rank[v as usize])
            .expect("non-empty simplex")
    };
    let mut keyed: Vec<(u32, Simplex)> = complex.iter().map(|s| (rank[owner(s) as usize], *s)).collect();
    keyed.sort_unstable_by(|a, b| a.0.cmp(&b.0).then(a.1.dim().cmp(&b.1.dim())).then(a.1.cmp(&b.1)));
    let rho = keyed.iter().map(|(r, _)| f[sweep[*r as usize] as usize]).collect();
    let simplices = keyed.into_iter().map(|(_, s)| s).collect();
    Filtration::from_ordered(simplices, rho)
}
