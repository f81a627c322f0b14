//! Simplices of dimension at most two and simplex-wise filtrations.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::exec::{self, Exec};

/// A vertex, edge or triangle stored as a strictly increasing vertex tuple.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Simplex {
    verts: [u32; 3],
    len: u8,
}

impl Simplex {
    pub fn vertex(v: u32) -> Self {
        Simplex {
            verts: [v, 0, 0],
            len: 1,
        }
    }

    /// Edge between two distinct vertices, in either order.
    pub fn edge(a: u32, b: u32) -> Self {
        debug_assert_ne!(a, b);
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        Simplex {
            verts: [a, b, 0],
            len: 2,
        }
    }

    /// Triangle on three distinct vertices, in any order.
    pub fn triangle(a: u32, b: u32, c: u32) -> Self {
        let mut v = [a, b, c];
        v.sort_unstable();
        debug_assert!(v[0] < v[1] && v[1] < v[2]);
        Simplex { verts: v, len: 3 }
    }

    /// Sorts and validates a raw vertex list.
    pub fn canonicalize(vertices: &[u32]) -> Result<Self> {
        if vertices.is_empty() || vertices.len() > 3 {
            return Err(Error::InvalidSimplex(vertices.to_vec()));
        }
        let mut v = [0u32; 3];
        v[..vertices.len()].copy_from_slice(vertices);
        v[..vertices.len()].sort_unstable();
        if v[..vertices.len()].windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSimplex(vertices.to_vec()));
        }
        Ok(Simplex {
            verts: v,
            len: vertices.len() as u8,
        })
    }

    pub fn vertices(&self) -> &[u32] {
        &self.verts[..self.len as usize]
    }

    pub fn dim(&self) -> usize {
        self.len as usize - 1
    }

    /// Codimension-one faces, in lexicographic order.
    pub fn facets(&self) -> impl Iterator<Item = Simplex> + '_ {
        let v = self.verts;
        let n = self.len as usize;
        // dropping vertex n-1, n-2, ... gives lexicographically increasing tuples
        (0..if n > 1 { n } else { 0 }).rev().map(move |skip| {
            let mut out = [0u32; 3];
            let mut k = 0;
            for (i, &x) in v[..n].iter().enumerate() {
                if i != skip {
                    out[k] = x;
                    k += 1;
                }
            }
            Simplex {
                verts: out,
                len: (n - 1) as u8,
            }
        })
    }

    pub fn contains_vertex(&self, v: u32) -> bool {
        self.vertices().contains(&v)
    }
}

impl Ord for Simplex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.vertices().cmp(other.vertices())
    }
}

impl PartialOrd for Simplex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.vertices().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// The filtration order key: value, then dimension, then vertex tuple.
pub fn filtration_key_cmp(a: &(Simplex, f64), b: &(Simplex, f64)) -> Ordering {
    a.1.total_cmp(&b.1)
        .then(a.0.len.cmp(&b.0.len))
        .then_with(|| a.0.cmp(&b.0))
}

/// A simplex-wise filtration with a monotone value per simplex.
///
/// Positions are 0-based internally; [`Filtration::order`] exposes the
/// 1-based insertion time.
#[derive(Debug)]
pub struct Filtration {
    simplices: Vec<Simplex>,
    rho: Vec<f64>,
    low_pos: HashMap<Simplex, u32>,
    triangle_pos: OnceLock<HashMap<Simplex, u32>>,
}

impl Clone for Filtration {
    fn clone(&self) -> Self {
        Filtration {
            simplices: self.simplices.clone(),
            rho: self.rho.clone(),
            low_pos: self.low_pos.clone(),
            triangle_pos: OnceLock::new(),
        }
    }
}

impl PartialEq for Filtration {
    fn eq(&self, other: &Self) -> bool {
        self.simplices == other.simplices
            && self.rho.len() == other.rho.len()
            && self
                .rho
                .iter()
                .zip(&other.rho)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

/// Orders valued simplices by (value, dimension, vertex tuple) and validates
/// the result as a simplex-wise filtration.
pub fn build_filtration(valued: Vec<(Simplex, f64)>) -> Result<Filtration> {
    build_filtration_with(valued, Exec::Serial)
}

pub fn build_filtration_with(mut valued: Vec<(Simplex, f64)>, exec: Exec) -> Result<Filtration> {
    if let Some((s, _)) = valued.iter().find(|(_, r)| r.is_nan()) {
        return Err(Error::param(format!("value of {s} is NaN")));
    }
    exec::sort_unstable_by(exec, &mut valued, filtration_key_cmp);
    if let Some(w) = valued.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::DuplicateSimplex(w[0].0));
    }
    let (simplices, rho): (Vec<_>, Vec<_>) = valued.into_iter().unzip();
    Filtration::assemble(simplices, rho, true)
}

impl Filtration {
    /// Wraps an explicitly ordered sequence, checking face order and value monotonicity.
    pub fn from_ordered(simplices: Vec<Simplex>, rho: Vec<f64>) -> Result<Self> {
        if simplices.len() != rho.len() {
            return Err(Error::param("simplex and value lists differ in length"));
        }
        if let Some(i) = rho.iter().position(|r| r.is_nan()) {
            return Err(Error::param(format!("value of {} is NaN", simplices[i])));
        }
        for i in 1..rho.len() {
            if rho[i] < rho[i - 1] {
                return Err(Error::NonMonotone {
                    face: simplices[i - 1],
                    face_value: rho[i - 1],
                    coface: simplices[i],
                    coface_value: rho[i],
                });
            }
        }
        Filtration::assemble(simplices, rho, false)
    }

    fn assemble(simplices: Vec<Simplex>, rho: Vec<f64>, value_errors_first: bool) -> Result<Self> {
        if simplices.len() >= u32::MAX as usize {
            return Err(Error::param("filtration too large"));
        }
        let mut low_pos = HashMap::new();
        for (i, s) in simplices.iter().enumerate() {
            if s.dim() < 2 && low_pos.insert(*s, i as u32).is_some() {
                return Err(Error::DuplicateSimplex(*s));
            }
        }
        let mut filt = Filtration {
            simplices,
            rho,
            low_pos,
            triangle_pos: OnceLock::new(),
        };
        // sorting by key can separate duplicates that carry different values
        let mut seen = HashSet::new();
        for s in filt.simplices.iter().filter(|s| s.dim() == 2) {
            if !seen.insert(*s) {
                return Err(Error::DuplicateSimplex(*s));
            }
        }
        filt.validate_faces(value_errors_first)?;
        Ok(filt)
    }

    fn validate_faces(&mut self, value_errors_first: bool) -> Result<()> {
        for (i, s) in self.simplices.iter().enumerate() {
            for face in s.facets() {
                let pos = self.low_pos.get(&face).copied();
                match pos {
                    None => {
                        return Err(Error::IncompleteComplex {
                            simplex: *s,
                            face,
                        })
                    }
                    Some(p) => {
                        let p = p as usize;
                        if value_errors_first && self.rho[p] > self.rho[i] {
                            return Err(Error::NonMonotone {
                                face,
                                face_value: self.rho[p],
                                coface: *s,
                                coface_value: self.rho[i],
                            });
                        }
                        if p >= i {
                            return Err(Error::IncompleteComplex {
                                simplex: *s,
                                face,
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn values(&self) -> &[f64] {
        &self.rho
    }

    pub fn simplex(&self, pos: usize) -> Simplex {
        self.simplices[pos]
    }

    pub fn rho(&self, pos: usize) -> f64 {
        self.rho[pos]
    }

    /// 0-based position of a simplex, if present.
    pub fn position(&self, s: &Simplex) -> Option<usize> {
        if s.dim() < 2 {
            self.low_pos.get(s).map(|&p| p as usize)
        } else {
            self.triangle_positions().get(s).map(|&p| p as usize)
        }
    }

    /// Insertion time `o(σ)` in `1..=N`.
    pub fn order(&self, s: &Simplex) -> Option<usize> {
        self.position(s).map(|p| p + 1)
    }

    fn triangle_positions(&self) -> &HashMap<Simplex, u32> {
        self.triangle_pos.get_or_init(|| {
            self.simplices
                .iter()
                .enumerate()
                .filter(|(_, s)| s.dim() == 2)
                .map(|(i, s)| (*s, i as u32))
                .collect()
        })
    }

    /// Positions of the facets of the simplex at `pos`, ascending.
    pub fn facet_positions(&self, pos: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.simplices[pos]
            .facets()
            .map(|f| self.low_pos[&f] as usize)
            .collect();
        out.sort_unstable();
        out
    }

    pub fn count_by_dim(&self) -> [usize; 3] {
        let mut c = [0; 3];
        for s in &self.simplices {
            c[s.dim()] += 1;
        }
        c
    }

    /// Largest vertex id plus one (0 for an empty filtration).
    pub fn vertex_bound(&self) -> usize {
        self.simplices
            .iter()
            .filter(|s| s.dim() == 0)
            .map(|s| s.vertices()[0] as usize + 1)
            .max()
            .unwrap_or(0)
    }

    /// Text dump, one line per simplex: `index dim v0[,v1[,v2]] rho`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, (s, r)) in self.simplices.iter().zip(&self.rho).enumerate() {
            let verts: Vec<String> = s.vertices().iter().map(|v| v.to_string()).collect();
            out.push_str(&format!(
                "{} {} {} {}\n",
                i + 1,
                s.dim(),
                verts.join(","),
                fmt_value(*r)
            ));
        }
        out
    }
}

pub(crate) fn fmt_value(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".to_string()
    } else {
        format!("{x}")
    }
}
