// SPDX-License-Identifier: Apache-2.0

//! Columnar graph containers shared by view construction, homograph
//! conversion, statistics and bundle IO.

use indexmap::IndexMap;

use crate::def::Stage;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dtype {
    I64,
    F64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    I64(Vec<i64>),
    F64(Vec<f64>),
}

impl Column {
    pub fn new(dtype: Dtype) -> Column {
        match dtype {
            Dtype::I64 => Column::I64(Vec::new()),
            Dtype::F64 => Column::F64(Vec::new()),
        }
    }

    pub fn dtype(&self) -> Dtype {
        match self {
            Column::I64(_) => Dtype::I64,
            Column::F64(_) => Dtype::F64,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Column::I64(v) => v.len(),
            Column::F64(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn push_i64(&mut self, v: i64) {
        match self {
            Column::I64(c) => c.push(v),
            Column::F64(c) => c.push(v as f64),
        }
    }

    pub fn push_f64(&mut self, v: f64) {
        match self {
            Column::F64(c) => c.push(v),
            Column::I64(_) => panic!("f64 value pushed into i64 column"),
        }
    }

    /// Value as f64 for unified feature layouts.
    pub fn get_f64(&self, i: usize) -> f64 {
        match self {
            Column::I64(c) => c[i] as f64,
            Column::F64(c) => c[i],
        }
    }

    pub fn get_i64(&self, i: usize) -> i64 {
        match self {
            Column::I64(c) => c[i],
            Column::F64(c) => c[i] as i64,
        }
    }
}

pub const KIND_GATE: &str = "gate";
pub const KIND_PIN: &str = "pin";
pub const KIND_NET: &str = "net";
pub const KIND_IO: &str = "io";

#[derive(Debug, Clone, PartialEq)]
pub struct NodeTable {
    pub kind: String,
    pub row_count: usize,
    /// Feature and label columns, keyed `entity.field` / `label.field`.
    pub columns: IndexMap<String, Column>,
}

impl NodeTable {
    pub fn new(kind: &str) -> NodeTable {
        NodeTable {
            kind: kind.to_string(),
            row_count: 0,
            columns: IndexMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeTable {
    pub kind: String,
    pub src_kind: String,
    pub dst_kind: String,
    pub src: Vec<i64>,
    pub dst: Vec<i64>,
    /// +1: src drives dst; -1: dst drives src; 0: undirected.
    pub dir: Vec<i64>,
    /// Source net id per edge, -1 when the edge is not net-derived.
    pub net_id: Vec<i64>,
    pub columns: IndexMap<String, Column>,
}

impl EdgeTable {
    pub fn new(kind: &str, src_kind: &str, dst_kind: &str) -> EdgeTable {
        EdgeTable {
            kind: kind.to_string(),
            src_kind: src_kind.to_string(),
            dst_kind: dst_kind.to_string(),
            src: Vec::new(),
            dst: Vec::new(),
            dir: Vec::new(),
            net_id: Vec::new(),
            columns: IndexMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.src.len()
    }

    pub fn is_empty(&self) -> bool {
        self.src.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViewKind {
    B,
    C,
    D,
    E,
    F,
}

impl ViewKind {
    pub const ALL: [ViewKind; 5] = [ViewKind::B, ViewKind::C, ViewKind::D, ViewKind::E, ViewKind::F];

    pub fn name(&self) -> &'static str {
        match self {
            ViewKind::B => "b",
            ViewKind::C => "c",
            ViewKind::D => "d",
            ViewKind::E => "e",
            ViewKind::F => "f",
        }
    }

    pub fn from_name(s: &str) -> Option<ViewKind> {
        match s.to_ascii_lowercase().as_str() {
            "b" => Some(ViewKind::B),
            "c" => Some(ViewKind::C),
            "d" => Some(ViewKind::D),
            "e" => Some(ViewKind::E),
            "f" => Some(ViewKind::F),
            _ => None,
        }
    }
}

impl std::fmt::Display for ViewKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One materialized view of one design at one stage.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitGraph {
    pub design: String,
    pub view: ViewKind,
    pub stage: Stage,
    /// Structural decisions recorded for the bundle manifest.
    pub decisions: IndexMap<String, String>,
    pub nodes: IndexMap<String, NodeTable>,
    pub edges: IndexMap<String, EdgeTable>,
}

impl CircuitGraph {
    pub fn num_nodes(&self) -> usize {
        self.nodes.values().map(|t| t.row_count).sum()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.values().map(|t| t.len()).sum()
    }
}

/// Feature schema: per-entity field names and dtypes by stage. Placement
/// graphs omit gate x/y/orientation/place_flag; routing graphs add them plus
/// net HPWL as a derived feature.
pub mod schema {
    use super::{Dtype, Stage};

    pub type Field = (&'static str, Dtype);

    pub fn gate_fields(stage: Stage) -> Vec<Field> {
        let mut f = vec![
            ("gate.cell_type", Dtype::I64),
            ("gate.area", Dtype::F64),
            ("gate.power_leak", Dtype::F64),
        ];
        if stage == Stage::Routing {
            f.extend([
                ("gate.x", Dtype::I64),
                ("gate.y", Dtype::I64),
                ("gate.orientation", Dtype::I64),
                ("gate.place_flag", Dtype::I64),
            ]);
        }
        f
    }

    pub fn net_fields(stage: Stage) -> Vec<Field> {
        let mut f = vec![
            ("net.net_type", Dtype::I64),
            ("net.pin_count", Dtype::I64),
        ];
        if stage == Stage::Routing {
            f.push(("net.hpwl", Dtype::I64));
        }
        f
    }

    pub fn io_fields(_stage: Stage) -> Vec<Field> {
        vec![
            ("io.x", Dtype::I64),
            ("io.y", Dtype::I64),
            ("io.orientation", Dtype::I64),
            ("io.layer_id", Dtype::I64),
        ]
    }

    pub fn pin_fields(_stage: Stage) -> Vec<Field> {
        vec![
            ("pin.pin_type", Dtype::I64),
            ("pin.cell_type", Dtype::I64),
        ]
    }

    pub fn label_fields(stage: Stage) -> Vec<Field> {
        match stage {
            Stage::Floorplan => vec![],
            Stage::Placement => vec![("label.hpwl", Dtype::I64)],
            Stage::Routing => vec![
                ("label.wire_length", Dtype::I64),
                ("label.via_count", Dtype::I64),
            ],
        }
    }
}
