// SPDX-License-Identifier: Apache-2.0

//! Homogeneous-graph conversion, dataset merging and unified splits.
//!
//! A `HomoGraph` flattens a typed view into one node set and one edge set.
//! Feature rows follow a `[kind one-hot | zero-padded union of attribute
//! slots]` layout; the slot map records which slot carries which field for
//! which kind, so the typed graph is reconstructible.

use indexmap::IndexMap;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::def::Stage;
use crate::error::{Error, Result};
use crate::graph::{CircuitGraph, ViewKind};

/// Where the label rows live: on the node axis (net-as-node views b/c) or the
/// edge axis (net-as-edge views d/e/f).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelAxis {
    Nodes,
    Edges,
}

/// Unified feature layout shared by all designs built with one vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotMap {
    pub node_kinds: Vec<String>,
    /// Union of node feature field names, in first-seen table order.
    pub node_slots: Vec<String>,
    pub edge_kinds: Vec<String>,
    pub edge_slots: Vec<String>,
    /// Field names carried by each node kind (reconstruction map).
    pub node_kind_fields: IndexMap<String, Vec<String>>,
    pub edge_kind_fields: IndexMap<String, Vec<String>>,
    pub label_names: Vec<String>,
    pub label_axis: LabelAxis,
}

impl SlotMap {
    pub fn node_width(&self) -> usize {
        self.node_kinds.len() + self.node_slots.len()
    }

    pub fn edge_width(&self) -> usize {
        self.edge_kinds.len() + self.edge_slots.len()
    }

    /// Human-readable differences against another slot map, for
    /// `SchemaMismatch` diagnostics.
    fn diff(&self, other: &SlotMap) -> Vec<String> {
        let mut out = Vec::new();
        let pairs: [(&str, &Vec<String>, &Vec<String>); 5] = [
            ("node_kinds", &self.node_kinds, &other.node_kinds),
            ("node_slots", &self.node_slots, &other.node_slots),
            ("edge_kinds", &self.edge_kinds, &other.edge_kinds),
            ("edge_slots", &self.edge_slots, &other.edge_slots),
            ("labels", &self.label_names, &other.label_names),
        ];
        for (what, a, b) in pairs {
            if a != b {
                out.push(format!("{what}: {a:?} vs {b:?}"));
            }
        }
        if self.label_axis != other.label_axis {
            out.push("label axis differs".to_string());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomoGraph {
    pub designs: Vec<String>,
    pub view: ViewKind,
    pub stage: Stage,
    pub decisions: IndexMap<String, String>,
    pub slot_map: SlotMap,
    pub num_nodes: usize,
    pub src: Vec<i64>,
    pub dst: Vec<i64>,
    /// +1 src drives dst, -1 reverse, 0 undirected.
    pub dir: Vec<i64>,
    /// Row-major `num_nodes x slot_map.node_width()`.
    pub node_features: Vec<f64>,
    /// Row-major `src.len() x slot_map.edge_width()`.
    pub edge_features: Vec<f64>,
    /// Index into `slot_map.node_kinds` per node.
    pub node_kind_tag: Vec<i64>,
    pub edge_kind_tag: Vec<i64>,
    /// Row-major `axis_len x label_names.len()` on the label axis.
    pub labels: Vec<f64>,
    /// One entry per label-axis row; 1 marks a supervised entity.
    pub label_mask: Vec<i64>,
    /// Index into `designs` per node.
    pub design_id: Vec<i64>,
}

impl HomoGraph {
    pub fn num_edges(&self) -> usize {
        self.src.len()
    }

    fn label_axis_len(&self) -> usize {
        match self.slot_map.label_axis {
            LabelAxis::Nodes => self.num_nodes,
            LabelAxis::Edges => self.src.len(),
        }
    }
}

fn is_label_col(name: &str) -> bool {
    name.starts_with("label.")
}

/// Flatten a typed (and typically labeled) view into a homogeneous graph.
/// Node ids are renumbered densely in (kind, original id) order, kinds taken
/// in the view's table order.
pub fn to_homograph(g: &CircuitGraph) -> HomoGraph {
    let node_kinds: Vec<String> = g.nodes.keys().cloned().collect();
    let edge_kinds: Vec<String> = g.edges.keys().cloned().collect();

    let mut node_slots: Vec<String> = Vec::new();
    let mut node_kind_fields: IndexMap<String, Vec<String>> = IndexMap::new();
    for t in g.nodes.values() {
        let fields: Vec<String> = t
            .columns
            .keys()
            .filter(|c| !is_label_col(c))
            .cloned()
            .collect();
        for f in &fields {
            if !node_slots.contains(f) {
                node_slots.push(f.clone());
            }
        }
        node_kind_fields.insert(t.kind.clone(), fields);
    }
    let mut edge_slots: Vec<String> = Vec::new();
    let mut edge_kind_fields: IndexMap<String, Vec<String>> = IndexMap::new();
    for t in g.edges.values() {
        let fields: Vec<String> = t
            .columns
            .keys()
            .filter(|c| !is_label_col(c))
            .cloned()
            .collect();
        for f in &fields {
            if !edge_slots.contains(f) {
                edge_slots.push(f.clone());
            }
        }
        edge_kind_fields.insert(t.kind.clone(), fields);
    }

    // labels live wherever attach_labels put them
    let mut label_names: Vec<String> = Vec::new();
    let mut label_axis = LabelAxis::Nodes;
    for t in g.nodes.values() {
        for c in t.columns.keys() {
            if is_label_col(c) && c != "label.mask" && !label_names.contains(c) {
                label_names.push(c.clone());
            }
        }
    }
    if label_names.is_empty() {
        for t in g.edges.values() {
            for c in t.columns.keys() {
                if is_label_col(c) && c != "label.mask" && !label_names.contains(c) {
                    label_axis = LabelAxis::Edges;
                    label_names.push(c.clone());
                }
            }
        }
    }

    let slot_map = SlotMap {
        node_kinds: node_kinds.clone(),
        node_slots: node_slots.clone(),
        edge_kinds: edge_kinds.clone(),
        edge_slots: edge_slots.clone(),
        node_kind_fields,
        edge_kind_fields,
        label_names: label_names.clone(),
        label_axis,
    };

    // node offsets per kind, in table order
    let mut offsets: IndexMap<&str, usize> = IndexMap::new();
    let mut total = 0usize;
    for t in g.nodes.values() {
        offsets.insert(t.kind.as_str(), total);
        total += t.row_count;
    }

    let nw = slot_map.node_width();
    let mut node_features = vec![0.0; total * nw];
    let mut node_kind_tag = vec![0i64; total];
    for (k_idx, t) in g.nodes.values().enumerate() {
        let base = offsets[t.kind.as_str()];
        for row in 0..t.row_count {
            let off = (base + row) * nw;
            node_features[off + k_idx] = 1.0;
            node_kind_tag[base + row] = k_idx as i64;
        }
        for (name, col) in &t.columns {
            if is_label_col(name) {
                continue;
            }
            let slot = node_kinds.len() + node_slots.iter().position(|s| s == name).unwrap();
            for row in 0..t.row_count {
                node_features[(base + row) * nw + slot] = col.get_f64(row);
            }
        }
    }

    let ew = slot_map.edge_width();
    let mut src = Vec::new();
    let mut dst = Vec::new();
    let mut dir = Vec::new();
    let mut edge_features = Vec::new();
    let mut edge_kind_tag = Vec::new();
    let mut edge_labels: Vec<f64> = Vec::new();
    let mut edge_mask: Vec<i64> = Vec::new();
    for (k_idx, t) in g.edges.values().enumerate() {
        let src_base = offsets[t.src_kind.as_str()] as i64;
        let dst_base = offsets[t.dst_kind.as_str()] as i64;
        for row in 0..t.len() {
            src.push(src_base + t.src[row]);
            dst.push(dst_base + t.dst[row]);
            dir.push(t.dir[row]);
            edge_kind_tag.push(k_idx as i64);
            let mut feat = vec![0.0; ew];
            feat[k_idx] = 1.0;
            for (name, col) in &t.columns {
                if is_label_col(name) {
                    continue;
                }
                let slot =
                    edge_kinds.len() + edge_slots.iter().position(|s| s == name).unwrap();
                feat[slot] = col.get_f64(row);
            }
            edge_features.extend(feat);
            if label_axis == LabelAxis::Edges {
                for name in &label_names {
                    edge_labels.push(
                        t.columns.get(name).map(|c| c.get_f64(row)).unwrap_or(0.0),
                    );
                }
                edge_mask.push(
                    t.columns
                        .get("label.mask")
                        .map(|c| c.get_i64(row))
                        .unwrap_or(0),
                );
            }
        }
    }

    let (labels, label_mask) = match label_axis {
        LabelAxis::Edges => (edge_labels, edge_mask),
        LabelAxis::Nodes => {
            let mut labels = vec![0.0; total * label_names.len()];
            let mut mask = vec![0i64; total];
            for t in g.nodes.values() {
                let base = offsets[t.kind.as_str()];
                for (li, name) in label_names.iter().enumerate() {
                    if let Some(col) = t.columns.get(name) {
                        for row in 0..t.row_count {
                            labels[(base + row) * label_names.len() + li] = col.get_f64(row);
                        }
                    }
                }
                if let Some(col) = t.columns.get("label.mask") {
                    for row in 0..t.row_count {
                        mask[base + row] = col.get_i64(row);
                    }
                }
            }
            (labels, mask)
        }
    };

    HomoGraph {
        designs: vec![g.design.clone()],
        view: g.view,
        stage: g.stage,
        decisions: g.decisions.clone(),
        slot_map,
        num_nodes: total,
        src,
        dst,
        dir,
        node_features,
        edge_features,
        node_kind_tag,
        edge_kind_tag,
        labels,
        label_mask,
        design_id: vec![0; total],
    }
}

/// Disjoint union of homogeneous graphs sharing one slot map. Node ids and
/// design ids of later inputs are offset; no cross-design edges are created.
pub fn merge_graphs(graphs: &[HomoGraph]) -> Result<HomoGraph> {
    let (first, rest) = graphs.split_first().ok_or(Error::EmptyMerge)?;
    for g in rest {
        let diff = first.slot_map.diff(&g.slot_map);
        if !diff.is_empty() {
            return Err(Error::SchemaMismatch(diff.join("; ")));
        }
        if (g.view, g.stage) != (first.view, first.stage) {
            return Err(Error::SchemaMismatch(format!(
                "view/stage {}/{} vs {}/{}",
                g.view, g.stage, first.view, first.stage
            )));
        }
    }
    let mut out = first.clone();
    for g in rest {
        let node_off = out.num_nodes as i64;
        let design_off = out.designs.len() as i64;
        out.designs.extend(g.designs.iter().cloned());
        out.num_nodes += g.num_nodes;
        out.src.extend(g.src.iter().map(|s| s + node_off));
        out.dst.extend(g.dst.iter().map(|d| d + node_off));
        out.dir.extend_from_slice(&g.dir);
        out.node_features.extend_from_slice(&g.node_features);
        out.edge_features.extend_from_slice(&g.edge_features);
        out.node_kind_tag.extend_from_slice(&g.node_kind_tag);
        out.edge_kind_tag.extend_from_slice(&g.edge_kind_tag);
        out.labels.extend_from_slice(&g.labels);
        out.label_mask.extend_from_slice(&g.label_mask);
        out.design_id
            .extend(g.design_id.iter().map(|d| d + design_off));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitPolicy {
    /// Fractions for train/validation/test; normalized internally.
    pub ratios: (f64, f64, f64),
}

impl Default for SplitPolicy {
    fn default() -> SplitPolicy {
        SplitPolicy {
            ratios: (0.70, 0.15, 0.15),
        }
    }
}

/// Boolean masks over the label axis. A row belongs to at most one split;
/// rows with `label_mask == 0` belong to none.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMasks {
    pub train: Vec<bool>,
    pub validation: Vec<bool>,
    pub test: Vec<bool>,
    /// Split index (0/1/2) per design id.
    pub design_split: Vec<u8>,
    pub seed: u64,
}

/// Design-level split: shuffle design ids under the seed, then cut by the
/// policy ratios. Counts use floor for train and validation with the
/// remainder going to test; empty validation/test splits borrow one design
/// from train. A labeled edge row follows its source node's design.
pub fn split_dataset(g: &HomoGraph, policy: SplitPolicy, seed: u64) -> Result<SplitMasks> {
    let d = g.designs.len();
    if d < 3 {
        return Err(Error::TooFewDesigns(format!(
            "{d} design(s); need at least 3 for a 3-way design-level split"
        )));
    }
    let (a, b, c) = policy.ratios;
    let total = a + b + c;
    if !(total > 0.0) || a < 0.0 || b < 0.0 || c < 0.0 {
        return Err(Error::TooFewDesigns(format!(
            "invalid split ratios {a}/{b}/{c}"
        )));
    }

    let mut order: Vec<usize> = (0..d).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let mut n_train = ((a / total) * d as f64).floor() as usize;
    let mut n_val = ((b / total) * d as f64).floor() as usize;
    if n_val == 0 {
        n_val = 1;
        n_train = n_train.saturating_sub(1);
    }
    if n_train + n_val >= d {
        // guarantee a non-empty test split
        n_train = d - n_val - 1;
    }
    if n_train == 0 || n_val == 0 || n_train + n_val >= d {
        return Err(Error::TooFewDesigns(format!(
            "ratios {a}/{b}/{c} leave an empty split over {d} designs"
        )));
    }

    let mut design_split = vec![0u8; d];
    for (i, &id) in order.iter().enumerate() {
        design_split[id] = if i < n_train {
            0
        } else if i < n_train + n_val {
            1
        } else {
            2
        };
    }

    let axis = g.label_axis_len();
    let mut train = vec![false; axis];
    let mut validation = vec![false; axis];
    let mut test = vec![false; axis];
    for row in 0..axis {
        if g.label_mask[row] == 0 {
            continue;
        }
        let design = match g.slot_map.label_axis {
            LabelAxis::Nodes => g.design_id[row],
            LabelAxis::Edges => g.design_id[g.src[row] as usize],
        } as usize;
        match design_split[design] {
            0 => train[row] = true,
            1 => validation[row] = true,
            _ => test[row] = true,
        }
    }

    Ok(SplitMasks {
        train,
        validation,
        test,
        design_split,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::attach_labels;
    use crate::views::{build_view, tests::toy_db};

    fn toy_homo(view: ViewKind) -> HomoGraph {
        let db = toy_db();
        let mut g = build_view(&db, view, Stage::Placement, Default::default()).unwrap();
        attach_labels(&mut g, &db, Stage::Placement, false).unwrap();
        to_homograph(&g)
    }

    #[test]
    fn toy_b_counts_and_layout() {
        let h = toy_homo(ViewKind::B);
        // G=2 P=4 N=3 I=0
        assert_eq!(h.num_nodes, 9);
        assert_eq!(h.slot_map.node_kinds.len(), 4);
        let nw = h.slot_map.node_width();
        // every row has exactly one kind one-hot bit
        for row in 0..h.num_nodes {
            let ones: f64 = h.node_features[row * nw..row * nw + 4].iter().sum();
            assert_eq!(ones, 1.0);
        }
        assert_eq!(h.slot_map.label_axis, LabelAxis::Nodes);
        assert_eq!(h.slot_map.label_names, vec!["label.hpwl".to_string()]);
        // labeled rows are exactly the signal nets (all 3 here)
        assert_eq!(h.label_mask.iter().sum::<i64>(), 3);
    }

    #[test]
    fn attribute_accounting_parity() {
        // nonzero one-hot bits aside, the flattened matrix must carry exactly
        // the typed graph's attribute values slot-for-slot
        let db = toy_db();
        let g = build_view(&db, ViewKind::B, Stage::Placement, Default::default()).unwrap();
        let h = to_homograph(&g);
        let nw = h.slot_map.node_width();
        let mut base = 0usize;
        for t in g.nodes.values() {
            for (name, col) in &t.columns {
                let slot = h.slot_map.node_kinds.len()
                    + h.slot_map.node_slots.iter().position(|s| s == name).unwrap();
                for row in 0..t.row_count {
                    assert_eq!(h.node_features[(base + row) * nw + slot], col.get_f64(row));
                }
            }
            base += t.row_count;
        }
    }

    #[test]
    fn edge_labels_on_f_view() {
        let h = toy_homo(ViewKind::F);
        assert_eq!(h.slot_map.label_axis, LabelAxis::Edges);
        assert_eq!(h.num_edges(), 1);
        assert_eq!(h.label_mask, vec![1]);
        // HPWL of the one 2-member net: |100-0| + |50-0|
        assert_eq!(h.labels, vec![150.0]);
    }

    #[test]
    fn merge_is_disjoint_union() {
        let h = toy_homo(ViewKind::B);
        let m = merge_graphs(&[h.clone(), h.clone()]).unwrap();
        assert_eq!(m.num_nodes, 2 * h.num_nodes);
        assert_eq!(m.num_edges(), 2 * h.num_edges());
        assert_eq!(m.designs.len(), 2);
        // second copy's design ids are all 1
        assert!(m.design_id[h.num_nodes..].iter().all(|d| *d == 1));
        // no cross-design edges
        for e in 0..m.num_edges() {
            assert_eq!(
                m.design_id[m.src[e] as usize],
                m.design_id[m.dst[e] as usize]
            );
        }
    }

    #[test]
    fn merge_empty_and_mismatch() {
        assert!(matches!(merge_graphs(&[]), Err(Error::EmptyMerge)));
        let b = toy_homo(ViewKind::B);
        let f = toy_homo(ViewKind::F);
        assert!(matches!(
            merge_graphs(&[b, f]),
            Err(Error::SchemaMismatch(_))
        ));
    }

    #[test]
    fn merge_associative_up_to_design_ids() {
        let h = toy_homo(ViewKind::B);
        let left = merge_graphs(&[merge_graphs(&[h.clone(), h.clone()]).unwrap(), h.clone()])
            .unwrap();
        let right = merge_graphs(&[h.clone(), merge_graphs(&[h.clone(), h.clone()]).unwrap()])
            .unwrap();
        assert_eq!(left, right);
    }

    fn merged_of(n: usize) -> HomoGraph {
        let h = toy_homo(ViewKind::B);
        let copies: Vec<HomoGraph> = (0..n).map(|_| h.clone()).collect();
        merge_graphs(&copies).unwrap()
    }

    #[test]
    fn split_30_designs_21_4_5() {
        let m = merged_of(30);
        let s = split_dataset(&m, SplitPolicy::default(), 42).unwrap();
        let count = |k: u8| s.design_split.iter().filter(|x| **x == k).count();
        assert_eq!((count(0), count(1), count(2)), (21, 4, 5));
    }

    #[test]
    fn split_3_designs_1_1_1() {
        let m = merged_of(3);
        let s = split_dataset(&m, SplitPolicy::default(), 7).unwrap();
        let count = |k: u8| s.design_split.iter().filter(|x| **x == k).count();
        assert_eq!((count(0), count(1), count(2)), (1, 1, 1));
    }

    #[test]
    fn split_2_designs_rejected() {
        let m = merged_of(2);
        assert!(matches!(
            split_dataset(&m, SplitPolicy::default(), 7),
            Err(Error::TooFewDesigns(_))
        ));
    }

    #[test]
    fn split_masks_partition_labeled_rows() {
        let m = merged_of(5);
        let s = split_dataset(&m, SplitPolicy::default(), 3).unwrap();
        for row in 0..m.label_mask.len() {
            let n = s.train[row] as u8 + s.validation[row] as u8 + s.test[row] as u8;
            assert_eq!(n, if m.label_mask[row] == 1 { 1 } else { 0 });
        }
    }

    #[test]
    fn split_deterministic_and_seed_sensitive() {
        let m = merged_of(12);
        let a = split_dataset(&m, SplitPolicy::default(), 5).unwrap();
        let b = split_dataset(&m, SplitPolicy::default(), 5).unwrap();
        assert_eq!(a, b);
        let c = split_dataset(&m, SplitPolicy::default(), 6).unwrap();
        assert_ne!(a.design_split, c.design_split);
    }
}
