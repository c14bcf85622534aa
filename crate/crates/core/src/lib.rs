// SPDX-License-Identifier: Apache-2.0

//! Circuit-graph extraction from DEF physical-design snapshots.
//!
//! Pipeline: parse DEF into a [`def::RawDesign`], resolve it against an
//! optional technology table into a [`db::DesignDatabase`], materialize one of
//! five typed views ([`views::build_view`]), attach stage-appropriate labels
//! ([`labels::attach_labels`]), then optionally flatten to a homogeneous
//! graph, merge/split into datasets, compute statistics, or persist as a
//! graph bundle.

pub mod bundle;
pub mod db;
pub mod def;
pub mod error;
pub mod graph;
pub mod homo;
pub mod labels;
pub mod stats;
pub mod syngen;
pub mod views;

pub use db::{resolve, DesignDatabase, TechTable, Vocabularies};
pub use def::{detect_stage, parse_def, parse_str, Stage};
pub use error::{Error, Result};
pub use graph::{CircuitGraph, ViewKind};
pub use homo::{merge_graphs, split_dataset, to_homograph, HomoGraph, SplitPolicy};
pub use bundle::{read_bundle, write_homo_bundle, write_typed_bundle, BundleGraph};
pub use labels::{attach_labels, compute_net_labels};
pub use stats::{avg_shortest_path, degree_stats, PathMode, SimpleGraph};
pub use syngen::{generate_design, SynSpec};
pub use views::{build_view, check_parity, ViewOptions, ViewVariant};
