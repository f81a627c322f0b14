//! Graph skeletons of point clouds.
//!
//! A point cloud is weighted by its distance to measure, a sparse weighted
//! Rips filtration is built on it, Z2 persistence pairs are computed, and a
//! discrete-Morse style reconstruction keeps every edge whose persistence
//! exceeds a threshold together with the negative-tree paths joining it to
//! the tree roots. [`oracle`] checks the output by brute force on small
//! inputs.
//!
//! ```
//! use dmgraph::{datagen, recon, BuildOptions, GeneratorConfig, Metric, WeightedPointCloud};
//!
//! let cfg = GeneratorConfig { n_points: 150, seed: 1, ..Default::default() };
//! let rows = datagen::gen_circle(&cfg).unwrap();
//! let cloud = WeightedPointCloud::from_points(&rows, Metric::L2).unwrap();
//! let out = recon::dmpcd(&cloud, recon::DmpcdParams { delta: 0.2, ..Default::default() }, &BuildOptions::default()).unwrap();
//! assert_eq!(out.graph.betti().1, 1);
//! ```

pub mod bottleneck;
pub mod builders;
pub mod cloud;
pub mod complex;
pub mod datagen;
pub mod error;
pub mod exec;
pub mod io;
pub mod oracle;
pub mod persistence;
pub mod recon;
pub mod union_find;

pub use builders::{BuildOptions, SparseParams};
pub use cloud::{Metric, WeightedPointCloud};
pub use complex::{build_filtration, Filtration, Simplex};
pub use datagen::GeneratorConfig;
pub use error::{Error, Result};
pub use exec::Exec;
pub use persistence::{reduce, Diagram, PersistenceRecord, Role};
pub use recon::{reconstruct, SkeletonGraph};
