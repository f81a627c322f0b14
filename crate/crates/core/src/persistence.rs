//! Z2 persistence of simplex-wise filtrations by boundary-matrix reduction.

use std::collections::{BTreeMap, BinaryHeap};
use std::fmt::Write as _;

use crate::complex::{fmt_value, Filtration, Simplex};

/// Boundary columns indexed by filtration position.
#[derive(Debug, Clone)]
pub struct BoundaryMatrix {
    columns: Vec<Vec<u32>>,
    dims: Vec<u8>,
}

impl BoundaryMatrix {
    pub fn new(filtration: &Filtration) -> Self {
        let columns = (0..filtration.len())
            .map(|j| {
                filtration
                    .facet_positions(j)
                    .into_iter()
                    .map(|p| p as u32)
                    .collect()
            })
            .collect();
        let dims = filtration.simplices().iter().map(|s| s.dim() as u8).collect();
        BoundaryMatrix { columns, dims }
    }

    pub fn column(&self, j: usize) -> &[u32] {
        &self.columns[j]
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }
}

/// Working column with lazy Z2 addition: entries are pushed unreduced and
/// equal pairs cancel when they surface at the top.
#[derive(Default)]
struct HeapColumn {
    heap: BinaryHeap<u32>,
}

impl HeapColumn {
    fn load(&mut self, col: &[u32]) {
        self.heap.clear();
        self.heap.extend(col.iter().copied());
    }

    fn add(&mut self, col: &[u32]) {
        self.heap.extend(col.iter().copied());
    }

    fn pivot(&mut self) -> Option<u32> {
        while let Some(top) = self.heap.pop() {
            if self.heap.peek() == Some(&top) {
                self.heap.pop();
            } else {
                self.heap.push(top);
                return Some(top);
            }
        }
        None
    }

    fn drain_sorted(&mut self) -> Vec<u32> {
        let mut out = Vec::new();
        while let Some(p) = self.pivot() {
            self.heap.pop();
            out.push(p);
        }
        out.reverse();
        out
    }
}

/// Lowest-index pivot of each column after reduction, `None` for zero columns.
type Pivots = Vec<Option<u32>>;

/// Twist reduction: triangles first, then edges whose columns were not
/// cleared by a triangle pivot. Vertex columns are zero.
fn reduce_twist(matrix: &BoundaryMatrix) -> Pivots {
    let n = matrix.len();
    let mut pivots: Pivots = vec![None; n];
    let mut owner = vec![u32::MAX; n];
    let mut reduced: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut cleared = vec![false; n];
    let mut work = HeapColumn::default();
    for dim in [2u8, 1] {
        for j in 0..n {
            if matrix.dims[j] != dim || cleared[j] {
                continue;
            }
            work.load(&matrix.columns[j]);
            let mut pivot = work.pivot();
            while let Some(p) = pivot {
                let k = owner[p as usize];
                if k == u32::MAX {
                    break;
                }
                work.add(&reduced[k as usize]);
                pivot = work.pivot();
            }
            if let Some(p) = pivot {
                owner[p as usize] = j as u32;
                pivots[j] = Some(p);
                cleared[p as usize] = true;
                reduced[j] = work.drain_sorted();
            }
        }
    }
    pivots
}

fn xor_sorted(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Textbook left-to-right reduction without clearing.
fn reduce_standard(matrix: &BoundaryMatrix) -> Pivots {
    let n = matrix.len();
    let mut pivots: Pivots = vec![None; n];
    let mut owner = vec![u32::MAX; n];
    let mut reduced: Vec<Vec<u32>> = vec![Vec::new(); n];
    for j in 0..n {
        let mut col = matrix.columns[j].clone();
        while let Some(&low) = col.last() {
            let k = owner[low as usize];
            if k == u32::MAX {
                break;
            }
            col = xor_sorted(&col, &reduced[k as usize]);
        }
        if let Some(&low) = col.last() {
            owner[low as usize] = j as u32;
            pivots[j] = Some(low);
        }
        reduced[j] = col;
    }
    pivots
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    /// Creates a class (including unpaired simplices).
    Positive,
    /// Destroys the class created by its partner.
    Negative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceRecord {
    pub simplex: Simplex,
    /// 0-based filtration position.
    pub position: usize,
    pub role: Role,
    pub partner: Option<Simplex>,
    pub partner_position: Option<usize>,
    pub birth_rho: f64,
    /// `+∞` when unpaired.
    pub death_rho: f64,
    pub persistence: f64,
}

impl PersistenceRecord {
    pub fn dim(&self) -> usize {
        self.simplex.dim()
    }

    pub fn is_unpaired(&self) -> bool {
        self.partner.is_none()
    }

    /// Position of the creator of the pair (self when positive).
    pub fn birth_position(&self) -> usize {
        match self.role {
            Role::Positive => self.position,
            Role::Negative => self.partner_position.expect("negative records are paired"),
        }
    }

    /// Position of the destroyer, if any.
    pub fn death_position(&self) -> Option<usize> {
        match self.role {
            Role::Positive => self.partner_position,
            Role::Negative => Some(self.position),
        }
    }
}

/// One record per simplex of the filtration, indexed by position.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagram {
    records: Vec<PersistenceRecord>,
}

impl Diagram {
    fn from_pivots(filtration: &Filtration, pivots: &Pivots) -> Self {
        let n = filtration.len();
        let mut partner: Vec<Option<usize>> = vec![None; n];
        for (j, p) in pivots.iter().enumerate() {
            if let Some(p) = *p {
                partner[j] = Some(p as usize);
                partner[p as usize] = Some(j);
            }
        }
        let records = (0..n)
            .map(|i| {
                let simplex = filtration.simplex(i);
                let role = if pivots[i].is_some() {
                    Role::Negative
                } else {
                    Role::Positive
                };
                let (birth, death) = match (role, partner[i]) {
                    (Role::Negative, Some(b)) => (filtration.rho(b), filtration.rho(i)),
                    (Role::Positive, Some(d)) => (filtration.rho(i), filtration.rho(d)),
                    (_, None) => (filtration.rho(i), f64::INFINITY),
                };
                PersistenceRecord {
                    simplex,
                    position: i,
                    role,
                    partner: partner[i].map(|p| filtration.simplex(p)),
                    partner_position: partner[i],
                    birth_rho: birth,
                    death_rho: death,
                    persistence: death - birth,
                }
            })
            .collect();
        Diagram { records }
    }

    pub fn records(&self) -> &[PersistenceRecord] {
        &self.records
    }

    pub fn record(&self, position: usize) -> &PersistenceRecord {
        &self.records[position]
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Creator records of dimension `dim`, one per persistence point, in birth order.
    pub fn creators(&self, dim: usize) -> impl Iterator<Item = &PersistenceRecord> {
        self.records
            .iter()
            .filter(move |r| r.role == Role::Positive && r.dim() == dim)
    }

    /// `(birth, death)` points of dimension `dim`, in birth order.
    pub fn points(&self, dim: usize) -> Vec<(f64, f64)> {
        self.creators(dim).map(|r| (r.birth_rho, r.death_rho)).collect()
    }

    /// Persistence pairs as (birth position, death position), ascending by birth.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.records
            .iter()
            .filter(|r| r.role == Role::Positive)
            .filter_map(|r| r.partner_position.map(|d| (r.position, d)))
            .collect()
    }

    /// Positions of unpaired simplices.
    pub fn unpaired(&self) -> Vec<usize> {
        self.records
            .iter()
            .filter(|r| r.is_unpaired())
            .map(|r| r.position)
            .collect()
    }

    /// `(β₀, β₁)` of the prefix holding the first `len` simplices, read off
    /// the pairing: positive simplices whose partner lies outside the prefix.
    pub fn prefix_betti(&self, len: usize) -> (usize, usize) {
        let mut b = (0, 0);
        for r in self.records[..len].iter().filter(|r| r.role == Role::Positive) {
            if r.partner_position.is_none_or(|d| d >= len) {
                match r.dim() {
                    0 => b.0 += 1,
                    1 => b.1 += 1,
                    _ => {}
                }
            }
        }
        b
    }

    /// CSV with header `dim,birth,death`, rows ordered by (dim, birth position).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dim,birth,death\n");
        for dim in 0..=1 {
            for r in self.creators(dim) {
                let _ = writeln!(
                    out,
                    "{},{},{}",
                    dim,
                    fmt_value(r.birth_rho),
                    fmt_value(r.death_rho)
                );
            }
        }
        out
    }
}

/// Persistence with the twist (clearing) optimization.
pub fn reduce(filtration: &Filtration) -> Diagram {
    let matrix = BoundaryMatrix::new(filtration);
    Diagram::from_pivots(filtration, &reduce_twist(&matrix))
}

/// Persistence by plain left-to-right column reduction; reference path for
/// checking [`reduce`].
pub fn reduce_plain(filtration: &Filtration) -> Diagram {
    let matrix = BoundaryMatrix::new(filtration);
    Diagram::from_pivots(filtration, &reduce_standard(&matrix))
}

/// Sign and persistence of every edge.
pub fn edge_classification(diagram: &Diagram) -> BTreeMap<Simplex, (Role, f64)> {
    diagram
        .records()
        .iter()
        .filter(|r| r.dim() == 1)
        .map(|r| (r.simplex, (r.role, r.persistence)))
        .collect()
}

/// `(β₀, β₁)` of the full complex: unpaired vertices and edges.
pub fn betti(diagram: &Diagram) -> (usize, usize) {
    let mut b = (0, 0);
    for r in diagram.records().iter().filter(|r| r.is_unpaired()) {
        match r.dim() {
            0 => b.0 += 1,
            1 => b.1 += 1,
            _ => {}
        }
    }
    b
}
