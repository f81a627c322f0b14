//! Discrete-Morse graph reconstruction over an arbitrary simplex-wise
//! filtration, plus the point-cloud pipelines built on it.
//!
//! Given persistence pairs, the negative edges with persistence at most δ form
//! a forest. Each tree is rooted at its earliest vertex in filtration order.
//! The output graph is every edge with persistence above δ together with the
//! tree paths from both of its endpoints to their roots.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::builders::{lower_star_filtration, rips_2skeleton, sparse_dtm_rips, BuildOptions};
use crate::cloud::{dtm_weights_with, knn_all, WeightedPointCloud};
use crate::complex::{fmt_value, Filtration, Simplex};
use crate::error::{Error, Result};
use crate::persistence::{reduce, Diagram, Role};
use crate::union_find::UnionFind;

/// Negative edges of persistence `<= δ`, as rooted trees over all vertices.
#[derive(Debug, Clone)]
pub struct NegativeForest {
    parent: Vec<Option<u32>>,
    tree_id: Vec<Option<u32>>,
    roots: Vec<u32>,
    member_edges: Vec<Simplex>,
}

impl NegativeForest {
    pub fn contains(&self, v: u32) -> bool {
        self.tree_id.get(v as usize).is_some_and(Option::is_some)
    }

    pub fn parent(&self, v: u32) -> Option<u32> {
        self.parent.get(v as usize).copied().flatten()
    }

    pub fn tree_of(&self, v: u32) -> Option<u32> {
        self.tree_id.get(v as usize).copied().flatten()
    }

    /// Root of each tree, indexed by tree id.
    pub fn roots(&self) -> &[u32] {
        &self.roots
    }

    pub fn root_of(&self, v: u32) -> Option<u32> {
        self.tree_of(v).map(|t| self.roots[t as usize])
    }

    /// Forest edges, in filtration order.
    pub fn member_edges(&self) -> &[Simplex] {
        &self.member_edges
    }

    pub fn tree_count(&self) -> usize {
        self.roots.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.tree_id.iter().filter(|t| t.is_some()).count()
    }

    /// Edges on the path from `v` up to the root of its tree; empty at a root.
    pub fn tree_path(&self, v: u32) -> Vec<Simplex> {
        let mut path = Vec::new();
        let mut x = v;
        while let Some(p) = self.parent(x) {
            path.push(Simplex::edge(x, p));
            x = p;
        }
        path
    }
}

/// Builds the forest of negative edges with persistence `<= delta`.
pub fn build_forest(filtration: &Filtration, diagram: &Diagram, delta: f64) -> Result<NegativeForest> {
    if !(delta >= 0.0) {
        return Err(Error::param(format!("delta must be non-negative, got {delta}")));
    }
    let bound = filtration.vertex_bound();
    let member_edges: Vec<Simplex> = diagram
        .records()
        .iter()
        .filter(|r| r.dim() == 1 && r.role == Role::Negative && r.persistence <= delta)
        .map(|r| r.simplex)
        .collect();
    let mut uf = UnionFind::new(bound);
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); bound];
    for e in &member_edges {
        let (a, b) = (e.vertices()[0], e.vertices()[1]);
        if !uf.union(a as usize, b as usize) {
            return Err(Error::Internal(format!(
                "low-persistence negative edges contain a cycle through {e}"
            )));
        }
        adj[a as usize].push(b);
        adj[b as usize].push(a);
    }
    let mut parent = vec![None; bound];
    let mut tree_id = vec![None; bound];
    let mut roots = Vec::new();
    let mut queue = VecDeque::new();
    // vertices in filtration order: the first unvisited vertex of a tree is its root
    for s in filtration.simplices().iter().filter(|s| s.dim() == 0) {
        let r = s.vertices()[0];
        if tree_id[r as usize].is_some() {
            continue;
        }
        let t = roots.len() as u32;
        roots.push(r);
        tree_id[r as usize] = Some(t);
        queue.push_back(r);
        while let Some(x) = queue.pop_front() {
            for &y in &adj[x as usize] {
                if tree_id[y as usize].is_none() {
                    tree_id[y as usize] = Some(t);
                    parent[y as usize] = Some(x);
                    queue.push_back(y);
                }
            }
        }
    }
    Ok(NegativeForest {
        parent,
        tree_id,
        roots,
        member_edges,
    })
}

/// Tree path from `v` to its root.
pub fn tree_path(forest: &NegativeForest, v: u32) -> Vec<Simplex> {
    forest.tree_path(v)
}

/// Roles an output edge plays; an edge may carry several.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct EdgeTags(u8);

impl EdgeTags {
    pub const CRITICAL_POSITIVE: EdgeTags = EdgeTags(1);
    pub const CRITICAL_NEGATIVE: EdgeTags = EdgeTags(2);
    pub const TREE_PATH: EdgeTags = EdgeTags(4);

    const NAMES: [(EdgeTags, &'static str); 3] = [
        (Self::CRITICAL_POSITIVE, "critical_positive"),
        (Self::CRITICAL_NEGATIVE, "critical_negative"),
        (Self::TREE_PATH, "tree_path"),
    ];

    pub fn contains(self, other: EdgeTags) -> bool {
        self.0 & other.0 == other.0 && other.0 != 0
    }

    pub fn union(self, other: EdgeTags) -> EdgeTags {
        EdgeTags(self.0 | other.0)
    }

    pub fn is_critical(self) -> bool {
        self.0 & (Self::CRITICAL_POSITIVE.0 | Self::CRITICAL_NEGATIVE.0) != 0
    }

    pub fn parse(s: &str) -> Result<Self> {
        let mut tags = EdgeTags::default();
        for part in s.split('+') {
            let t = Self::NAMES
                .iter()
                .find(|(_, n)| *n == part)
                .map(|(t, _)| *t)
                .ok_or_else(|| Error::param(format!("unknown edge tag {part:?}")))?;
            tags = tags.union(t);
        }
        Ok(tags)
    }
}

impl fmt::Display for EdgeTags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = Self::NAMES
            .iter()
            .filter(|(t, _)| self.contains(*t))
            .map(|(_, n)| *n)
            .collect();
        f.write_str(&names.join("+"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphEdge {
    pub tags: EdgeTags,
    /// Persistence of the critical edge that pulled this edge in (the largest
    /// one when several did).
    pub pers: f64,
}

/// Output graph: vertex ids with optional coordinates and tagged edges.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SkeletonGraph {
    nodes: BTreeMap<u32, Option<Vec<f64>>>,
    edges: BTreeMap<(u32, u32), GraphEdge>,
}

impl SkeletonGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an edge (and its endpoints), merging tags and keeping the larger persistence.
    pub fn insert_edge(&mut self, e: Simplex, tags: EdgeTags, pers: f64) {
        let (a, b) = (e.vertices()[0], e.vertices()[1]);
        self.nodes.entry(a).or_insert(None);
        self.nodes.entry(b).or_insert(None);
        self.edges
            .entry((a, b))
            .and_modify(|g| {
                g.tags = g.tags.union(tags);
                if pers > g.pers {
                    g.pers = pers;
                }
            })
            .or_insert(GraphEdge { tags, pers });
    }

    pub fn insert_node(&mut self, v: u32, coords: Option<Vec<f64>>) {
        self.nodes.insert(v, coords);
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (u32, Option<&[f64]>)> {
        self.nodes.iter().map(|(v, c)| (*v, c.as_deref()))
    }

    pub fn edges(&self) -> impl Iterator<Item = (Simplex, &GraphEdge)> {
        self.edges.iter().map(|(&(a, b), g)| (Simplex::edge(a, b), g))
    }

    pub fn edge(&self, e: &Simplex) -> Option<&GraphEdge> {
        let v = e.vertices();
        self.edges.get(&(v[0], v[1]))
    }

    pub fn contains_edge(&self, e: &Simplex) -> bool {
        self.edge(e).is_some()
    }

    /// Edges carrying a critical tag.
    pub fn critical_edges(&self) -> Vec<Simplex> {
        self.edges()
            .filter(|(_, g)| g.tags.is_critical())
            .map(|(e, _)| e)
            .collect()
    }

    /// Fills in coordinates for every node from the cloud (no-op for matrix input).
    pub fn attach_coordinates(&mut self, cloud: &WeightedPointCloud) {
        for (v, c) in self.nodes.iter_mut() {
            *c = cloud.point(*v as usize).map(<[f64]>::to_vec);
        }
    }

    /// `(β₀, β₁)` of the graph as a 1-complex.
    pub fn betti(&self) -> (usize, usize) {
        let ids: Vec<u32> = self.nodes.keys().copied().collect();
        let index = |v: u32| ids.binary_search(&v).expect("edge endpoint is a node");
        let mut uf = UnionFind::new(ids.len());
        let mut components = ids.len();
        for &(a, b) in self.edges.keys() {
            if uf.union(index(a), index(b)) {
                components -= 1;
            }
        }
        (components, self.edges.len() + components - ids.len())
    }

    /// Plain text edge list: `u v tag pers` per line.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for (&(a, b), g) in &self.edges {
            let _ = writeln!(out, "{a} {b} {} {}", g.tags, fmt_value(g.pers));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&GraphJson::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GraphJson = serde_json::from_str(text)?;
        SkeletonGraph::try_from(doc)
    }
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    nodes: Vec<NodeJson>,
    edges: Vec<EdgeJson>,
}

#[derive(Serialize, Deserialize)]
struct NodeJson {
    id: u32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    coords: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct EdgeJson {
    u: u32,
    v: u32,
    tag: String,
    pers: JsonValue,
}

/// Finite numbers as JSON numbers, `+∞` as the string `"inf"`.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum JsonValue {
    Num(f64),
    Text(String),
}

impl From<f64> for JsonValue {
    fn from(x: f64) -> Self {
        if x.is_finite() {
            JsonValue::Num(x)
        } else {
            JsonValue::Text(fmt_value(x))
        }
    }
}

impl From<&SkeletonGraph> for GraphJson {
    fn from(g: &SkeletonGraph) -> Self {
        GraphJson {
            nodes: g
                .nodes
                .iter()
                .map(|(&id, c)| NodeJson {
                    id,
                    coords: c.clone(),
                })
                .collect(),
            edges: g
                .edges
                .iter()
                .map(|(&(u, v), e)| EdgeJson {
                    u,
                    v,
                    tag: e.tags.to_string(),
                    pers: e.pers.into(),
                })
                .collect(),
        }
    }
}

impl TryFrom<GraphJson> for SkeletonGraph {
    type Error = Error;

    fn try_from(doc: GraphJson) -> Result<Self> {
        let mut g = SkeletonGraph::new();
        for n in doc.nodes {
            g.insert_node(n.id, n.coords);
        }
        for e in doc.edges {
            if e.u == e.v {
                return Err(Error::param(format!("self-loop at node {}", e.u)));
            }
            let pers = match e.pers {
                JsonValue::Num(x) => x,
                JsonValue::Text(t) if t == "inf" => f64::INFINITY,
                JsonValue::Text(t) => return Err(Error::param(format!("bad persistence {t:?}"))),
            };
            for x in [e.u, e.v] {
                if !g.nodes.contains_key(&x) {
                    return Err(Error::param(format!("edge endpoint {x} is not a node")));
                }
            }
            g.insert_edge(Simplex::edge(e.u, e.v), EdgeTags::parse(&e.tag)?, pers);
        }
        Ok(g)
    }
}

/// Output graph together with the forest it was traced through.
#[derive(Debug, Clone)]
pub struct ReconstructionParts {
    pub graph: SkeletonGraph,
    pub forest: NegativeForest,
}

/// Reconstructs `G_δ`: every edge with persistence above `delta` plus the tree
/// paths from its endpoints to their roots.
pub fn reconstruct(filtration: &Filtration, diagram: &Diagram, delta: f64) -> Result<SkeletonGraph> {
    reconstruct_parts(filtration, diagram, delta).map(|p| p.graph)
}

pub fn reconstruct_parts(
    filtration: &Filtration,
    diagram: &Diagram,
    delta: f64,
) -> Result<ReconstructionParts> {
    let forest = build_forest(filtration, diagram, delta)?;
    let mut critical: Vec<(usize, f64, Role)> = diagram
        .records()
        .iter()
        .filter(|r| r.dim() == 1 && r.persistence > delta)
        .map(|r| (r.position, r.persistence, r.role))
        .collect();
    // largest persistence first, so a path walk can stop at the first edge
    // already traced: everything above it carries a persistence at least as large
    critical.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut graph = SkeletonGraph::new();
    for &(pos, pers, role) in &critical {
        let e = filtration.simplex(pos);
        let tag = match role {
            Role::Positive => EdgeTags::CRITICAL_POSITIVE,
            Role::Negative => EdgeTags::CRITICAL_NEGATIVE,
        };
        graph.insert_edge(e, tag, pers);
        for &end in e.vertices() {
            let mut x = end;
            while let Some(p) = forest.parent(x) {
                let step = Simplex::edge(x, p);
                if graph
                    .edge(&step)
                    .is_some_and(|g| g.tags.contains(EdgeTags::TREE_PATH))
                {
                    break;
                }
                graph.insert_edge(step, EdgeTags::TREE_PATH, pers);
                x = p;
            }
        }
    }
    Ok(ReconstructionParts { graph, forest })
}

/// `Ĝ_δ = T_δ ∪ G_δ`, restricted to the connected components of the complex
/// that contain at least one critical edge.
pub fn augmented_graph(filtration: &Filtration, parts: &ReconstructionParts) -> SkeletonGraph {
    let bound = filtration.vertex_bound();
    let mut uf = UnionFind::new(bound);
    for s in filtration.simplices().iter().filter(|s| s.dim() == 1) {
        uf.union(s.vertices()[0] as usize, s.vertices()[1] as usize);
    }
    let mut active = vec![false; bound];
    for e in parts.graph.critical_edges() {
        let c = uf.find(e.vertices()[0] as usize);
        active[c] = true;
    }
    let mut g = parts.graph.clone();
    for e in parts.forest.member_edges() {
        if active[uf.find(e.vertices()[0] as usize)] {
            g.insert_edge(*e, EdgeTags::TREE_PATH, 0.0);
        }
    }
    g
}

/// Everything a pipeline produced.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub graph: SkeletonGraph,
    pub diagram: Diagram,
    pub filtration: Filtration,
}

#[derive(Debug, Clone, Copy)]
pub struct DmpcdParams {
    pub k: usize,
    pub epsilon: f64,
    pub delta: f64,
}

impl Default for DmpcdParams {
    fn default() -> Self {
        DmpcdParams {
            k: 15,
            epsilon: 0.99,
            delta: 0.25,
        }
    }
}

/// The filtration and diagram that [`dmpcd`] reconstructs from; useful when
/// sweeping δ.
pub fn dmpcd_diagram(
    cloud: &WeightedPointCloud,
    k: usize,
    epsilon: f64,
    opts: &BuildOptions,
) -> Result<(Filtration, Diagram)> {
    let weighted = dtm_weights_with(cloud, k, opts.exec)?;
    let (filtration, _) = sparse_dtm_rips(&weighted, epsilon, opts)?;
    let diagram = reduce(&filtration);
    Ok((filtration, diagram))
}

/// DTM weights, sparse weighted Rips, persistence, reconstruction.
pub fn dmpcd(cloud: &WeightedPointCloud, params: DmpcdParams, opts: &BuildOptions) -> Result<PipelineOutput> {
    if !(params.delta >= 0.0) {
        return Err(Error::param(format!("delta must be non-negative, got {}", params.delta)));
    }
    let (filtration, diagram) = dmpcd_diagram(cloud, params.k, params.epsilon, opts)?;
    let mut graph = reconstruct(&filtration, &diagram, params.delta)?;
    graph.attach_coordinates(cloud);
    Ok(PipelineOutput {
        graph,
        diagram,
        filtration,
    })
}

/// Gaussian-kernel density summed over each point's `k` nearest neighbors.
pub fn knn_density(cloud: &WeightedPointCloud, k: usize, bandwidth: Option<f64>, opts: &BuildOptions) -> Result<Vec<f64>> {
    let lists = knn_all(cloud, k, opts.exec)?;
    let h = match bandwidth {
        Some(h) if h > 0.0 && h.is_finite() => h,
        Some(h) => return Err(Error::param(format!("bandwidth must be positive, got {h}"))),
        None => default_bandwidth(&lists),
    };
    Ok(lists
        .iter()
        .map(|nn| {
            nn.iter()
                .map(|(_, d)| (-d * d / (2.0 * h * h)).exp())
                .sum()
        })
        .collect())
}

/// Mean distance from a point to one of its k nearest neighbors, over all points.
pub fn default_bandwidth(knn_lists: &[Vec<(usize, f64)>]) -> f64 {
    let (sum, count) = knn_lists
        .iter()
        .flatten()
        .fold((0.0, 0usize), |(s, c), (_, d)| (s + d, c + 1));
    if count == 0 {
        1.0
    } else {
        sum / count as f64
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BaselineParams {
    pub radius: f64,
    pub k: usize,
    /// `None` picks the mean kNN distance.
    pub bandwidth: Option<f64>,
    pub delta: f64,
}

/// Lower-star filtration of the negated kNN density on a fixed-radius Rips
/// complex; the reconstruction step is shared with [`dmpcd`].
pub fn baseline_diagram(
    cloud: &WeightedPointCloud,
    radius: f64,
    k: usize,
    bandwidth: Option<f64>,
    opts: &BuildOptions,
) -> Result<(Filtration, Diagram)> {
    let density = knn_density(cloud, k, bandwidth, opts)?;
    let rips = rips_2skeleton(cloud, radius, opts)?;
    let f: Vec<f64> = density.iter().map(|x| -x).collect();
    let filtration = lower_star_filtration(rips.simplices(), &f)?;
    let diagram = reduce(&filtration);
    Ok((filtration, diagram))
}

pub fn baseline(cloud: &WeightedPointCloud, params: BaselineParams, opts: &BuildOptions) -> Result<PipelineOutput> {
    if !(params.delta >= 0.0) {
        return Err(Error::param(format!("delta must be non-negative, got {}", params.delta)));
    }
    let (filtration, diagram) = baseline_diagram(cloud, params.radius, params.k, params.bandwidth, opts)?;
    let mut graph = reconstruct(&filtration, &diagram, params.delta)?;
    graph.attach_coordinates(cloud);
    Ok(PipelineOutput {
        graph,
        diagram,
        filtration,
    })
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Symmetrized mean nearest-node distance between two embedded graphs,
/// divided by `diameter`.
pub fn graph_distance(g1: &SkeletonGraph, g2: &SkeletonGraph, diameter: f64) -> Result<f64> {
    if !(diameter > 0.0) {
        return Err(Error::param(format!("diameter must be positive, got {diameter}")));
    }
    let coords = |g: &SkeletonGraph, name: &str| -> Result<Vec<Vec<f64>>> {
        if g.is_empty() {
            return Err(Error::UndefinedDistance(format!("{name} graph is empty")));
        }
        g.nodes()
            .map(|(v, c)| {
                c.map(<[f64]>::to_vec)
                    .ok_or_else(|| Error::UndefinedDistance(format!("node {v} of {name} graph has no coordinates")))
            })
            .collect()
    };
    let a = coords(g1, "first")?;
    let b = coords(g2, "second")?;
    let one_way = |from: &[Vec<f64>], to: &[Vec<f64>]| -> f64 {
        from.iter()
            .map(|p| to.iter().map(|q| euclidean(p, q)).fold(f64::INFINITY, f64::min))
            .sum::<f64>()
            / from.len() as f64
    };
    Ok((one_way(&a, &b) + one_way(&b, &a)) / 2.0 / diameter)
}
