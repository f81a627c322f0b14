//! Brute-force ground truth on small complexes: homology ranks by dense Z2
//! elimination, enumeration of persistent 1-cycles, lexicographic order on
//! cycles, and a checker that the reconstructed graph contains a lex-optimal
//! persistent cycle basis.
//!
//! Nothing here uses the boundary-matrix reduction of [`crate::persistence`]
//! except [`check_theorem`], which needs the persistence points it verifies.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::complex::{build_filtration, fmt_value, Filtration, Simplex};
use crate::error::{Error, Result};
use crate::persistence::{reduce, PersistenceRecord, Role};
use crate::recon::SkeletonGraph;
use crate::union_find::UnionFind;

/// Largest complex the oracle accepts.
pub const ORACLE_MAX_SIMPLICES: usize = 256;
/// Largest number of candidate cycles enumerated per persistence point.
pub const MAX_CYCLE_SUBSETS: usize = 1 << 16;

/// Fixed-width Z2 vector.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
struct Bits(Vec<u64>);

impl Bits {
    fn zeros(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64).max(1)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] ^= 1 << (i % 64);
    }

    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn xor(&mut self, other: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a ^= b;
        }
    }

    fn highest(&self) -> Option<usize> {
        self.0
            .iter()
            .enumerate()
            .rev()
            .find(|(_, w)| **w != 0)
            .map(|(i, w)| i * 64 + 63 - w.leading_zeros() as usize)
    }

    fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(i, &w)| {
            (0..64).filter(move |b| w >> b & 1 == 1).map(move |b| i * 64 + b)
        })
    }
}

/// Row-echelon basis keyed by highest set bit.
#[derive(Default, Clone)]
struct EchelonBasis {
    rows: BTreeMap<usize, Bits>,
}

impl EchelonBasis {
    fn reduce(&self, mut v: Bits) -> Bits {
        while let Some(h) = v.highest() {
            match self.rows.get(&h) {
                Some(r) => v.xor(r),
                None => break,
            }
        }
        v
    }

    fn insert(&mut self, v: Bits) -> bool {
        let v = self.reduce(v);
        match v.highest() {
            Some(h) => {
                self.rows.insert(h, v);
                true
            }
            None => false,
        }
    }

    fn contains(&self, v: &Bits) -> bool {
        self.reduce(v.clone()).highest().is_none()
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }
}

/// `(β₀, β₁)` by rank-nullity on dense boundary matrices.
pub fn homology_ranks_bruteforce(complex: &[Simplex]) -> Result<(usize, usize)> {
    if complex.len() > ORACLE_MAX_SIMPLICES {
        return Err(Error::OracleScale(format!(
            "{} simplices > {ORACLE_MAX_SIMPLICES}",
            complex.len()
        )));
    }
    let mut index: BTreeMap<Simplex, usize> = BTreeMap::new();
    let mut by_dim: [Vec<Simplex>; 3] = Default::default();
    for s in complex {
        by_dim[s.dim()].push(*s);
    }
    for list in &by_dim {
        for (i, s) in list.iter().enumerate() {
            if index.insert(*s, i).is_some() {
                return Err(Error::DuplicateSimplex(*s));
            }
        }
    }
    let rank_of = |dim: usize| -> Result<usize> {
        let rows = by_dim[dim - 1].len();
        let mut basis = EchelonBasis::default();
        for s in &by_dim[dim] {
            let mut col = Bits::zeros(rows);
            for f in s.facets() {
                let i = *index.get(&f).ok_or(Error::IncompleteComplex { simplex: *s, face: f })?;
                col.set(i);
            }
            basis.insert(col);
        }
        Ok(basis.rank())
    };
    let r1 = rank_of(1)?;
    let r2 = rank_of(2)?;
    let (nv, ne) = (by_dim[0].len(), by_dim[1].len());
    Ok((nv - r1, ne - r1 - r2))
}

/// A Z2 1-cycle: a set of edges in which every vertex has even degree.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct CycleSet {
    edges: BTreeSet<Simplex>,
}

impl CycleSet {
    pub fn new(edges: impl IntoIterator<Item = Simplex>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for e in edges {
            if e.dim() != 1 {
                return Err(Error::param(format!("{e} is not an edge")));
            }
            if !set.insert(e) {
                return Err(Error::param(format!("edge {e} repeated")));
            }
        }
        let mut degree: BTreeMap<u32, usize> = BTreeMap::new();
        for e in &set {
            for &v in e.vertices() {
                *degree.entry(v).or_default() += 1;
            }
        }
        if let Some((v, d)) = degree.iter().find(|(_, d)| **d % 2 == 1) {
            return Err(Error::param(format!("vertex {v} has odd degree {d}")));
        }
        Ok(CycleSet { edges: set })
    }

    pub fn edges(&self) -> &BTreeSet<Simplex> {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, e: &Simplex) -> bool {
        self.edges.contains(e)
    }
}

impl fmt::Debug for CycleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.edges.iter()).finish()
    }
}

/// Compares cycles by the latest edge of their symmetric difference; the
/// cycle lacking that edge is the smaller one.
pub fn lex_compare(c1: &CycleSet, c2: &CycleSet, filtration: &Filtration) -> Result<Ordering> {
    let mut latest: Option<(usize, bool)> = None;
    for (e, in_first) in c1
        .edges
        .symmetric_difference(&c2.edges)
        .map(|e| (e, c1.contains(e)))
    {
        let o = filtration
            .position(e)
            .ok_or_else(|| Error::param(format!("edge {e} is not in the filtration")))?;
        if latest.is_none_or(|(best, _)| o > best) {
            latest = Some((o, in_first));
        }
    }
    Ok(match latest {
        None => Ordering::Equal,
        Some((_, true)) => Ordering::Greater,
        Some((_, false)) => Ordering::Less,
    })
}

fn check_scale(filtration: &Filtration) -> Result<()> {
    if filtration.len() > ORACLE_MAX_SIMPLICES {
        return Err(Error::OracleScale(format!(
            "filtration has {} simplices > {ORACLE_MAX_SIMPLICES}",
            filtration.len()
        )));
    }
    Ok(())
}

/// Boundary space of the triangles at positions `< end`, over edge slots.
fn boundary_basis(filtration: &Filtration, edge_slot: &BTreeMap<Simplex, usize>, end: usize) -> EchelonBasis {
    let mut basis = EchelonBasis::default();
    for s in filtration.simplices()[..end].iter().filter(|s| s.dim() == 2) {
        let mut col = Bits::zeros(edge_slot.len());
        for f in s.facets() {
            col.set(edge_slot[&f]);
        }
        basis.insert(col);
    }
    basis
}

/// All persistent 1-cycles of a 1-dimensional persistence point: cycles of
/// `K_b` containing the creator edge that are not boundaries in `K_{d-1}` but
/// are in `K_d` (the last two conditions dropped for essential points).
///
/// The candidates are every element of the cycle space of `K_b`, enumerated
/// from a fundamental-cycle basis.
pub fn persistent_cycles(filtration: &Filtration, point: &PersistenceRecord) -> Result<Vec<CycleSet>> {
    check_scale(filtration)?;
    if point.dim() != 1 || point.role != Role::Positive {
        return Err(Error::param(format!(
            "{} is not the creator of a 1-dimensional point",
            point.simplex
        )));
    }
    let b = point.position;
    if filtration.simplex(b) != point.simplex {
        return Err(Error::param("record does not belong to this filtration"));
    }
    let slot_edge: Vec<Simplex> = filtration
        .simplices()
        .iter()
        .filter(|s| s.dim() == 1)
        .copied()
        .collect();
    let edge_slot: BTreeMap<Simplex, usize> = slot_edge.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let prefix = &filtration.simplices()[..=b];

    // fundamental cycles of the graph of K_b
    let bound = filtration.vertex_bound();
    let mut uf = UnionFind::new(bound);
    let mut adj: Vec<Vec<(u32, usize)>> = vec![Vec::new(); bound];
    let mut chords = Vec::new();
    for e in prefix.iter().filter(|s| s.dim() == 1) {
        let (u, v) = (e.vertices()[0], e.vertices()[1]);
        if uf.union(u as usize, v as usize) {
            adj[u as usize].push((v, edge_slot[e]));
            adj[v as usize].push((u, edge_slot[e]));
        } else {
            chords.push(*e);
        }
    }
    if chords.len() >= 16 || (1usize << chords.len()) > MAX_CYCLE_SUBSETS {
        return Err(Error::OracleScale(format!(
            "cycle space of dimension {} too large to enumerate",
            chords.len()
        )));
    }
    let basis: Vec<Bits> = chords
        .iter()
        .map(|e| {
            let (u, v) = (e.vertices()[0], e.vertices()[1]);
            let mut bits = forest_path(&adj, u, v, edge_slot.len());
            bits.set(edge_slot[e]);
            bits
        })
        .collect();

    let death = point.partner_position;
    let (before, at) = match death {
        Some(d) => {
            let before = boundary_basis(filtration, &edge_slot, d);
            let at = boundary_basis(filtration, &edge_slot, d + 1);
            (Some(before), Some(at))
        }
        None => (None, None),
    };
    let creator_slot = edge_slot[&point.simplex];
    let mut out = Vec::new();
    let mut current = Bits::zeros(edge_slot.len());
    // Gray-code walk over all 2^k combinations of basis cycles
    for step in 0..(1usize << basis.len()) {
        if step > 0 {
            current.xor(&basis[step.trailing_zeros() as usize]);
        }
        if !current.get(creator_slot) {
            continue;
        }
        if let (Some(before), Some(at)) = (&before, &at) {
            if before.contains(&current) || !at.contains(&current) {
                continue;
            }
        }
        out.push(CycleSet {
            edges: current.ones().map(|i| slot_edge[i]).collect(),
        });
    }
    Ok(out)
}

/// Edge slots on the unique forest path between `u` and `v`.
fn forest_path(adj: &[Vec<(u32, usize)>], u: u32, v: u32, slots: usize) -> Bits {
    let mut prev: BTreeMap<u32, (u32, usize)> = BTreeMap::new();
    let mut stack = vec![u];
    let mut seen = BTreeSet::from([u]);
    while let Some(x) = stack.pop() {
        if x == v {
            break;
        }
        for &(y, slot) in &adj[x as usize] {
            if seen.insert(y) {
                prev.insert(y, (x, slot));
                stack.push(y);
            }
        }
    }
    let mut bits = Bits::zeros(slots);
    let mut x = v;
    while x != u {
        let (p, slot) = prev[&x];
        bits.set(slot);
        x = p;
    }
    bits
}

/// The lexicographically smallest persistent cycle of a point.
pub fn lex_optimal_cycle(filtration: &Filtration, point: &PersistenceRecord) -> Result<CycleSet> {
    let mut best: Option<CycleSet> = None;
    for c in persistent_cycles(filtration, point)? {
        best = Some(match best {
            None => c,
            Some(b) => {
                if lex_compare(&c, &b, filtration)? == Ordering::Less {
                    c
                } else {
                    b
                }
            }
        });
    }
    best.ok_or_else(|| {
        Error::Internal(format!(
            "no persistent cycle found for the point created by {}",
            point.simplex
        ))
    })
}

/// Outcome for one persistence point above the threshold.
#[derive(Debug, Clone)]
pub struct RecordCheck {
    pub creator: Simplex,
    pub birth: f64,
    pub death: f64,
    pub lex_optimal: CycleSet,
    /// Edges of the lex-optimal cycle missing from the graph.
    pub missing: Vec<Simplex>,
}

impl RecordCheck {
    pub fn passed(&self) -> bool {
        self.missing.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct TheoremReport {
    pub delta: f64,
    pub records: Vec<RecordCheck>,
    pub graph_betti1: usize,
    pub expected_betti1: usize,
}

impl TheoremReport {
    pub fn passed(&self) -> bool {
        self.graph_betti1 == self.expected_betti1 && self.records.iter().all(RecordCheck::passed)
    }

    pub fn first_failure(&self) -> Option<&RecordCheck> {
        self.records.iter().find(|r| !r.passed())
    }
}

impl fmt::Display for TheoremReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.records {
            write!(
                f,
                "point [{}, {}) creator {}: {} cycle {:?}",
                fmt_value(r.birth),
                fmt_value(r.death),
                r.creator,
                if r.passed() { "PASS" } else { "FAIL" },
                r.lex_optimal
            )?;
            if !r.passed() {
                write!(f, " missing {:?}", r.missing)?;
            }
            writeln!(f)?;
        }
        writeln!(
            f,
            "betti1(graph) = {}, points above delta {} = {}: {}",
            self.graph_betti1,
            fmt_value(self.delta),
            self.expected_betti1,
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

/// Checks that `graph` contains a lex-optimal persistent cycle for every
/// 1-dimensional point with persistence above `delta`, and that its first
/// Betti number equals the number of such points.
pub fn check_theorem(filtration: &Filtration, delta: f64, graph: &SkeletonGraph) -> Result<TheoremReport> {
    check_scale(filtration)?;
    let diagram = reduce(filtration);
    let mut records = Vec::new();
    for r in diagram.creators(1).filter(|r| r.persistence > delta) {
        let lex_optimal = lex_optimal_cycle(filtration, r)?;
        let missing = lex_optimal
            .edges()
            .iter()
            .filter(|e| !graph.contains_edge(e))
            .copied()
            .collect();
        records.push(RecordCheck {
            creator: r.simplex,
            birth: r.birth_rho,
            death: r.death_rho,
            lex_optimal,
            missing,
        });
    }
    Ok(TheoremReport {
        delta,
        expected_betti1: records.len(),
        records,
        graph_betti1: graph.betti().1,
    })
}

/// A random filtration of a 2-complex on at most `max_vertices` vertices and
/// a threshold, for randomized verification.
///
/// About half of the instances use small integer values so that many
/// simplices tie; the threshold is drawn from the diagram's own persistence
/// values about half of the time.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, max_vertices: usize) -> (Filtration, f64) {
    let n = rng.random_range(3..=max_vertices.max(3)) as u32;
    let mut pairs: Vec<(u32, u32)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    pairs.shuffle(rng);
    // keep the cycle rank small enough to enumerate
    let max_edges = (n as usize + 9).min(pairs.len());
    let m = rng.random_range((n as usize - 1).min(max_edges)..=max_edges);
    pairs.truncate(m);
    pairs.sort_unstable();
    let edge_set: BTreeSet<(u32, u32)> = pairs.iter().copied().collect();
    let fill = rng.random_range(0.0..0.8);
    let mut triangles = Vec::new();
    for &(a, b) in &pairs {
        for c in b + 1..n {
            if edge_set.contains(&(a, c)) && edge_set.contains(&(b, c)) && rng.random_bool(fill) {
                triangles.push(Simplex::triangle(a, b, c));
            }
        }
    }
    let integer = rng.random_bool(0.5);
    let draw = |rng: &mut R| -> f64 {
        if integer {
            rng.random_range(0..3) as f64
        } else {
            rng.random_range(0.0..1.0)
        }
    };
    let mut values: BTreeMap<Simplex, f64> = BTreeMap::new();
    for v in 0..n {
        values.insert(Simplex::vertex(v), draw(rng));
    }
    for &(a, b) in &pairs {
        let base = values[&Simplex::vertex(a)].max(values[&Simplex::vertex(b)]);
        values.insert(Simplex::edge(a, b), base + draw(rng));
    }
    for t in &triangles {
        let base = t.facets().map(|f| values[&f]).fold(f64::MIN, f64::max);
        values.insert(*t, base + draw(rng));
    }
    let filtration = build_filtration(values.into_iter().collect()).expect("generated complex is valid");
    let diagram = reduce(&filtration);
    let finite: Vec<f64> = diagram
        .records()
        .iter()
        .filter(|r| r.dim() == 1 && r.persistence.is_finite())
        .map(|r| r.persistence)
        .collect();
    let delta = if !finite.is_empty() && rng.random_bool(0.5) {
        finite[rng.random_range(0..finite.len())]
    } else {
        let top = finite.iter().copied().fold(1.0, f64::max);
        rng.random_range(0.0..top)
    };
    (filtration, delta)
}
