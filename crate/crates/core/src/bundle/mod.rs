// SPDX-License-Identifier: Apache-2.0

//! GraphBundle: the on-disk container for typed and homogeneous graphs.
//!
//! Layout (documented byte-exactly in `docs/bundle-format.md`):
//!
//! ```text
//! <bundle>/
//!   manifest            key = value text, one entry per line, written last
//!   tables/
//!     <table>.<column>  raw little-endian i64 or f64 column data
//! ```
//!
//! The manifest doubles as the commit marker: a bundle without a manifest is
//! an aborted write. Reserved structural columns are prefixed `__` (`__src`,
//! `__dst`, `__dir`, `__net`, `__kind`, `__design`, `__mask`).

mod manifest;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;

use crate::def::Stage;
use crate::error::{Error, Result};
use crate::graph::{CircuitGraph, Column, Dtype, EdgeTable, NodeTable, ViewKind};
use crate::homo::{HomoGraph, LabelAxis, SlotMap};

pub use manifest::{parse_manifest, render_manifest};

pub const FORMAT_VERSION: u32 = 1;

/// Either graph flavor, as reconstructed from disk.
#[derive(Debug, Clone, PartialEq)]
pub enum BundleGraph {
    Typed(CircuitGraph),
    Homo(HomoGraph),
}

impl BundleGraph {
    pub fn view(&self) -> ViewKind {
        match self {
            BundleGraph::Typed(g) => g.view,
            BundleGraph::Homo(h) => h.view,
        }
    }

    pub fn stage(&self) -> Stage {
        match self {
            BundleGraph::Typed(g) => g.stage,
            BundleGraph::Homo(h) => h.stage,
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::io(path.display().to_string(), e)
}

fn encode_i64(v: &[i64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(v.len() * 8);
    for x in v {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

fn encode_f64(v: &[f64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(v.len() * 8);
    for x in v {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

fn decode_i64(bytes: &[u8]) -> Vec<i64> {
    bytes
        .chunks_exact(8)
        .map(|c| i64::from_le_bytes(c.try_into().unwrap()))
        .collect()
}

fn decode_f64(bytes: &[u8]) -> Vec<f64> {
    bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect()
}

struct Writer {
    tables_dir: PathBuf,
}

impl Writer {
    fn column(&self, table: &str, column: &str, bytes: &[u8]) -> Result<()> {
        let path = self.tables_dir.join(format!("{table}.{column}"));
        fs::write(&path, bytes).map_err(|e| io_err(&path, e))
    }
}

fn prepare_dirs(path: &Path) -> Result<Writer> {
    if path.exists() {
        fs::remove_dir_all(path).map_err(|e| io_err(path, e))?;
    }
    let tables_dir = path.join("tables");
    fs::create_dir_all(&tables_dir).map_err(|e| io_err(&tables_dir, e))?;
    Ok(Writer { tables_dir })
}

fn commit_manifest(path: &Path, entries: &[(String, String)]) -> Result<()> {
    let mpath = path.join("manifest");
    let mut f = fs::File::create(&mpath).map_err(|e| io_err(&mpath, e))?;
    f.write_all(render_manifest(entries).as_bytes())
        .map_err(|e| io_err(&mpath, e))?;
    f.sync_all().map_err(|e| io_err(&mpath, e))
}

fn cols_spec(columns: &IndexMap<String, Column>) -> String {
    columns
        .iter()
        .map(|(name, col)| {
            let d = match col.dtype() {
                Dtype::I64 => "i64",
                Dtype::F64 => "f64",
            };
            format!("{name}:{d}")
        })
        .collect::<Vec<_>>()
        .join(",")
}

fn write_feature_columns(
    w: &Writer,
    table: &str,
    columns: &IndexMap<String, Column>,
) -> Result<()> {
    for (name, col) in columns {
        let bytes = match col {
            Column::I64(v) => encode_i64(v),
            Column::F64(v) => encode_f64(v),
        };
        w.column(table, name, &bytes)?;
    }
    Ok(())
}

/// Write a typed graph. `extra` entries land in the manifest under `meta.`
/// (vocab hash, stats rows, split policy and the like).
pub fn write_typed_bundle(
    g: &CircuitGraph,
    path: &Path,
    extra: &[(String, String)],
) -> Result<()> {
    let w = prepare_dirs(path)?;
    let mut m: Vec<(String, String)> = vec![
        ("format_version".into(), FORMAT_VERSION.to_string()),
        ("graph".into(), "typed".into()),
        ("design".into(), g.design.clone()),
        ("view".into(), g.view.name().into()),
        ("stage".into(), g.stage.name().into()),
    ];
    for (k, v) in &g.decisions {
        m.push((format!("decision.{k}"), v.clone()));
    }
    for (k, v) in extra {
        m.push((format!("meta.{k}"), v.clone()));
    }
    for t in g.nodes.values() {
        m.push((format!("node.{}.rows", t.kind), t.row_count.to_string()));
        m.push((format!("node.{}.cols", t.kind), cols_spec(&t.columns)));
        write_feature_columns(&w, &t.kind, &t.columns)?;
    }
    for t in g.edges.values() {
        m.push((format!("edge.{}.rows", t.kind), t.len().to_string()));
        m.push((format!("edge.{}.src_kind", t.kind), t.src_kind.clone()));
        m.push((format!("edge.{}.dst_kind", t.kind), t.dst_kind.clone()));
        m.push((format!("edge.{}.cols", t.kind), cols_spec(&t.columns)));
        w.column(&t.kind, "__src", &encode_i64(&t.src))?;
        w.column(&t.kind, "__dst", &encode_i64(&t.dst))?;
        w.column(&t.kind, "__dir", &encode_i64(&t.dir))?;
        w.column(&t.kind, "__net", &encode_i64(&t.net_id))?;
        write_feature_columns(&w, &t.kind, &t.columns)?;
    }
    commit_manifest(path, &m)
}

pub fn write_homo_bundle(h: &HomoGraph, path: &Path, extra: &[(String, String)]) -> Result<()> {
    let w = prepare_dirs(path)?;
    let sm = &h.slot_map;
    let mut m: Vec<(String, String)> = vec![
        ("format_version".into(), FORMAT_VERSION.to_string()),
        ("graph".into(), "homo".into()),
        ("designs".into(), h.designs.join("\t")),
        ("view".into(), h.view.name().into()),
        ("stage".into(), h.stage.name().into()),
    ];
    for (k, v) in &h.decisions {
        m.push((format!("decision.{k}"), v.clone()));
    }
    for (k, v) in extra {
        m.push((format!("meta.{k}"), v.clone()));
    }
    m.push(("slot.node_kinds".into(), sm.node_kinds.join(",")));
    m.push(("slot.node_slots".into(), sm.node_slots.join(",")));
    m.push(("slot.edge_kinds".into(), sm.edge_kinds.join(",")));
    m.push(("slot.edge_slots".into(), sm.edge_slots.join(",")));
    for (kind, fields) in &sm.node_kind_fields {
        m.push((format!("slot.node_fields.{kind}"), fields.join(",")));
    }
    for (kind, fields) in &sm.edge_kind_fields {
        m.push((format!("slot.edge_fields.{kind}"), fields.join(",")));
    }
    m.push(("slot.labels".into(), sm.label_names.join(",")));
    m.push((
        "slot.label_axis".into(),
        match sm.label_axis {
            LabelAxis::Nodes => "nodes".into(),
            LabelAxis::Edges => "edges".into(),
        },
    ));
    m.push(("num_nodes".into(), h.num_nodes.to_string()));
    m.push(("num_edges".into(), h.num_edges().to_string()));

    w.column("node", "__kind", &encode_i64(&h.node_kind_tag))?;
    w.column("node", "__design", &encode_i64(&h.design_id))?;
    w.column("node", "features", &encode_f64(&h.node_features))?;
    w.column("edge", "__src", &encode_i64(&h.src))?;
    w.column("edge", "__dst", &encode_i64(&h.dst))?;
    w.column("edge", "__dir", &encode_i64(&h.dir))?;
    w.column("edge", "__kind", &encode_i64(&h.edge_kind_tag))?;
    w.column("edge", "features", &encode_f64(&h.edge_features))?;
    w.column("label", "values", &encode_f64(&h.labels))?;
    w.column("label", "__mask", &encode_i64(&h.label_mask))?;
    commit_manifest(path, &m)
}

struct Reader<'a> {
    tables_dir: PathBuf,
    manifest: &'a [(String, String)],
}

impl Reader<'_> {
    fn get(&self, key: &str) -> Result<&str> {
        self.manifest
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| Error::CorruptBundle {
                file: "manifest".into(),
                reason: format!("missing key `{key}`"),
            })
    }

    fn raw(&self, table: &str, column: &str, expect_len: usize) -> Result<Vec<u8>> {
        let path = self.tables_dir.join(format!("{table}.{column}"));
        let bytes = fs::read(&path).map_err(|e| io_err(&path, e))?;
        if bytes.len() != expect_len * 8 {
            return Err(Error::CorruptBundle {
                file: format!("tables/{table}.{column}"),
                reason: format!("{} bytes, expected {}", bytes.len(), expect_len * 8),
            });
        }
        Ok(bytes)
    }

    fn i64s(&self, table: &str, column: &str, rows: usize) -> Result<Vec<i64>> {
        Ok(decode_i64(&self.raw(table, column, rows)?))
    }

    fn f64s(&self, table: &str, column: &str, rows: usize) -> Result<Vec<f64>> {
        Ok(decode_f64(&self.raw(table, column, rows)?))
    }

    fn columns(
        &self,
        table: &str,
        spec: &str,
        rows: usize,
    ) -> Result<IndexMap<String, Column>> {
        let mut out = IndexMap::new();
        if spec.is_empty() {
            return Ok(out);
        }
        for item in spec.split(',') {
            let (name, dtype) = item.rsplit_once(':').ok_or_else(|| Error::CorruptBundle {
                file: "manifest".into(),
                reason: format!("bad column spec `{item}`"),
            })?;
            let col = match dtype {
                "i64" => Column::I64(self.i64s(table, name, rows)?),
                "f64" => Column::F64(self.f64s(table, name, rows)?),
                _ => {
                    return Err(Error::CorruptBundle {
                        file: "manifest".into(),
                        reason: format!("unknown dtype `{dtype}`"),
                    })
                }
            };
            out.insert(name.to_string(), col);
        }
        Ok(out)
    }
}

fn parse_usize(v: &str, key: &str) -> Result<usize> {
    v.parse().map_err(|_| Error::CorruptBundle {
        file: "manifest".into(),
        reason: format!("non-numeric `{key}` = `{v}`"),
    })
}

fn split_list(v: &str) -> Vec<String> {
    if v.is_empty() {
        Vec::new()
    } else {
        v.split(',').map(String::from).collect()
    }
}

pub fn read_bundle(path: &Path) -> Result<BundleGraph> {
    let mpath = path.join("manifest");
    let text = fs::read_to_string(&mpath).map_err(|e| io_err(&mpath, e))?;
    let manifest = parse_manifest(&text)?;
    let r = Reader {
        tables_dir: path.join("tables"),
        manifest: &manifest,
    };

    let version: u32 = r
        .get("format_version")?
        .parse()
        .map_err(|_| Error::CorruptBundle {
            file: "manifest".into(),
            reason: "non-numeric format_version".into(),
        })?;
    if version != FORMAT_VERSION {
        return Err(Error::VersionMismatch(version));
    }
    let view = ViewKind::from_name(r.get("view")?).ok_or_else(|| Error::CorruptBundle {
        file: "manifest".into(),
        reason: "unknown view".into(),
    })?;
    let stage = Stage::from_name(r.get("stage")?).ok_or_else(|| Error::CorruptBundle {
        file: "manifest".into(),
        reason: "unknown stage".into(),
    })?;
    let decisions: IndexMap<String, String> = manifest
        .iter()
        .filter_map(|(k, v)| k.strip_prefix("decision.").map(|k| (k.into(), v.clone())))
        .collect();

    match r.get("graph")? {
        "typed" => {
            let mut g = CircuitGraph {
                design: r.get("design")?.to_string(),
                view,
                stage,
                decisions,
                nodes: IndexMap::new(),
                edges: IndexMap::new(),
            };
            for (k, v) in &manifest {
                if let Some(rest) = k.strip_prefix("node.") {
                    if let Some(kind) = rest.strip_suffix(".rows") {
                        let rows = parse_usize(v, k)?;
                        let spec = r.get(&format!("node.{kind}.cols"))?;
                        let mut t = NodeTable::new(kind);
                        t.row_count = rows;
                        t.columns = r.columns(kind, spec, rows)?;
                        g.nodes.insert(kind.to_string(), t);
                    }
                } else if let Some(rest) = k.strip_prefix("edge.") {
                    if let Some(kind) = rest.strip_suffix(".rows") {
                        let rows = parse_usize(v, k)?;
                        let src_kind = r.get(&format!("edge.{kind}.src_kind"))?;
                        let dst_kind = r.get(&format!("edge.{kind}.dst_kind"))?;
                        let spec = r.get(&format!("edge.{kind}.cols"))?;
                        let mut t = EdgeTable::new(kind, src_kind, dst_kind);
                        t.src = r.i64s(kind, "__src", rows)?;
                        t.dst = r.i64s(kind, "__dst", rows)?;
                        t.dir = r.i64s(kind, "__dir", rows)?;
                        t.net_id = r.i64s(kind, "__net", rows)?;
                        t.columns = r.columns(kind, spec, rows)?;
                        g.edges.insert(kind.to_string(), t);
                    }
                }
            }
            Ok(BundleGraph::Typed(g))
        }
        "homo" => {
            let designs: Vec<String> = {
                let v = r.get("designs")?;
                if v.is_empty() {
                    Vec::new()
                } else {
                    v.split('\t').map(String::from).collect()
                }
            };
            let node_kinds = split_list(r.get("slot.node_kinds")?);
            let node_slots = split_list(r.get("slot.node_slots")?);
            let edge_kinds = split_list(r.get("slot.edge_kinds")?);
            let edge_slots = split_list(r.get("slot.edge_slots")?);
            let mut node_kind_fields = IndexMap::new();
            let mut edge_kind_fields = IndexMap::new();
            for (k, v) in &manifest {
                if let Some(kind) = k.strip_prefix("slot.node_fields.") {
                    node_kind_fields.insert(kind.to_string(), split_list(v));
                } else if let Some(kind) = k.strip_prefix("slot.edge_fields.") {
                    edge_kind_fields.insert(kind.to_string(), split_list(v));
                }
            }
            let label_names = split_list(r.get("slot.labels")?);
            let label_axis = match r.get("slot.label_axis")? {
                "nodes" => LabelAxis::Nodes,
                "edges" => LabelAxis::Edges,
                other => {
                    return Err(Error::CorruptBundle {
                        file: "manifest".into(),
                        reason: format!("unknown label axis `{other}`"),
                    })
                }
            };
            let slot_map = SlotMap {
                node_kinds,
                node_slots,
                edge_kinds,
                edge_slots,
                node_kind_fields,
                edge_kind_fields,
                label_names,
                label_axis,
            };
            let num_nodes = parse_usize(r.get("num_nodes")?, "num_nodes")?;
            let num_edges = parse_usize(r.get("num_edges")?, "num_edges")?;
            let label_rows = match label_axis {
                LabelAxis::Nodes => num_nodes,
                LabelAxis::Edges => num_edges,
            };
            let h = HomoGraph {
                designs,
                view,
                stage,
                decisions,
                num_nodes,
                node_kind_tag: r.i64s("node", "__kind", num_nodes)?,
                design_id: r.i64s("node", "__design", num_nodes)?,
                node_features: r.f64s("node", "features", num_nodes * slot_map.node_width())?,
                src: r.i64s("edge", "__src", num_edges)?,
                dst: r.i64s("edge", "__dst", num_edges)?,
                dir: r.i64s("edge", "__dir", num_edges)?,
                edge_kind_tag: r.i64s("edge", "__kind", num_edges)?,
                edge_features: r.f64s("edge", "features", num_edges * slot_map.edge_width())?,
                labels: r.f64s("label", "values", label_rows * slot_map.label_names.len())?,
                label_mask: r.i64s("label", "__mask", label_rows)?,
                slot_map,
            };
            Ok(BundleGraph::Homo(h))
        }
        other => Err(Error::CorruptBundle {
            file: "manifest".into(),
            reason: format!("unknown graph flavor `{other}`"),
        }),
    }
}
