// SPDX-License-Identifier: Apache-2.0

//! Stage-aware supervision: HPWL, exact routed wirelength and via count,
//! attached to whichever entity instantiates the net in a given view.

use crate::db::{DesignDatabase, Net, NET_CLOCK, NET_GROUND, NET_POWER};
use crate::def::Stage;
use crate::error::{Error, Result};
use crate::graph::{schema, CircuitGraph, Column, KIND_NET};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetLabels {
    pub net: usize,
    pub hpwl: i64,
    pub wire_length: i64,
    pub via_count: i64,
    /// False for nets excluded from supervision (power/ground/clock and
    /// SPECIALNETS by default).
    pub labeled: bool,
}

/// Half-perimeter wirelength: bounding-box half-perimeter over the net's
/// member pin/IO locations. Zero for nets with fewer than two members.
pub fn compute_hpwl(db: &DesignDatabase, net: &Net) -> Result<i64> {
    if net.members.len() <= 1 {
        return Ok(0);
    }
    let mut x_min = i64::MAX;
    let mut x_max = i64::MIN;
    let mut y_min = i64::MAX;
    let mut y_max = i64::MIN;
    for m in &net.members {
        let (x, y) = db.member_location(*m)?;
        x_min = x_min.min(x);
        x_max = x_max.max(x);
        y_min = y_min.min(y);
        y_max = y_max.max(y);
    }
    Ok((x_max - x_min) + (y_max - y_min))
}

/// Exact routed wirelength: Manhattan length summed over consecutive point
/// pairs of every routed path on every layer. Vias contribute zero length.
pub fn compute_wire_length(net: &Net) -> i64 {
    net.routed_paths
        .iter()
        .map(|p| {
            p.points
                .windows(2)
                .map(|w| (w[1].0 - w[0].0).abs() + (w[1].1 - w[0].1).abs())
                .sum::<i64>()
        })
        .sum()
}

/// True if any routed segment moves in both axes at once. Such segments are
/// still scored |dx|+|dy| but merit a warning.
pub fn has_diagonal_segment(net: &Net) -> bool {
    net.routed_paths.iter().any(|p| {
        p.points
            .windows(2)
            .any(|w| w[1].0 != w[0].0 && w[1].1 != w[0].1)
    })
}

pub fn compute_via_count(net: &Net) -> i64 {
    net.routed_paths.iter().map(|p| p.via_names.len() as i64).sum()
}

fn is_excluded(net: &Net, include_special: bool) -> bool {
    if include_special {
        return false;
    }
    net.special || matches!(net.net_type, NET_POWER | NET_GROUND | NET_CLOCK)
}

/// Compute per-net labels in net-id order. Excluded nets get zeros with
/// `labeled = false`.
pub fn compute_net_labels(
    db: &DesignDatabase,
    stage: Stage,
    include_special: bool,
) -> Result<Vec<NetLabels>> {
    let mut out = Vec::with_capacity(db.nets.len());
    for (i, net) in db.nets.iter().enumerate() {
        let labeled = !is_excluded(net, include_special);
        let (hpwl, wire_length, via_count) = if labeled && stage >= Stage::Placement {
            let hpwl = compute_hpwl(db, net)?;
            if stage == Stage::Routing {
                (hpwl, compute_wire_length(net), compute_via_count(net))
            } else {
                (hpwl, 0, 0)
            }
        } else {
            (0, 0, 0)
        };
        out.push(NetLabels {
            net: i,
            hpwl,
            wire_length,
            via_count,
            labeled,
        });
    }
    Ok(out)
}

/// Attach stage-appropriate labels to the entity that instantiates each net:
/// the net node table in views b/c, every net-derived edge in views d/e/f.
/// Floorplan graphs are returned unchanged with a warning.
pub fn attach_labels(
    g: &mut CircuitGraph,
    db: &DesignDatabase,
    stage: Stage,
    include_special: bool,
) -> Result<Vec<String>> {
    let mut warnings = Vec::new();
    if stage > g.stage {
        return Err(Error::StageMismatch(format!(
            "{} labels requested on a {} graph",
            stage, g.stage
        )));
    }
    if stage == Stage::Floorplan {
        warnings.push("WARN no supervision defined at floorplan stage".to_string());
        return Ok(warnings);
    }
    let labels = compute_net_labels(db, stage, include_special)?;
    for net in &db.nets {
        if has_diagonal_segment(net) {
            warnings.push(format!(
                "WARN net `{}`: diagonal routed segment scored |dx|+|dy|",
                net.name
            ));
        }
    }
    let fields = schema::label_fields(stage);
    let values = |l: &NetLabels, name: &str| -> i64 {
        match name {
            "label.hpwl" => l.hpwl,
            "label.wire_length" => l.wire_length,
            "label.via_count" => l.via_count,
            _ => unreachable!(),
        }
    };

    if let Some(table) = g.nodes.get_mut(KIND_NET) {
        // net-as-node views: one label row per net
        for (name, _) in &fields {
            let col: Vec<i64> = labels.iter().map(|l| values(l, name)).collect();
            table.columns.insert(name.to_string(), Column::I64(col));
        }
        let mask: Vec<i64> = labels.iter().map(|l| l.labeled as i64).collect();
        table.columns.insert("label.mask".to_string(), Column::I64(mask));
    } else {
        // net-as-edge views: copy the source net's labels onto every edge
        for table in g.edges.values_mut() {
            if !table.kind.starts_with("net") {
                continue;
            }
            for (name, _) in &fields {
                let col: Vec<i64> = table
                    .net_id
                    .iter()
                    .map(|n| values(&labels[*n as usize], name))
                    .collect();
                table.columns.insert(name.to_string(), Column::I64(col));
            }
            let mask: Vec<i64> = table
                .net_id
                .iter()
                .map(|n| labels[*n as usize].labeled as i64)
                .collect();
            table.columns.insert("label.mask".to_string(), Column::I64(mask));
        }
    }
    Ok(warnings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::def::RoutedPath;

    fn net_with_paths(paths: Vec<RoutedPath>) -> Net {
        Net {
            name: "n".into(),
            net_type: 0,
            pin_count: 0,
            members: vec![],
            driver: None,
            routed_paths: paths,
            special: false,
        }
    }

    fn path(layer: &str, points: Vec<(i64, i64)>, vias: Vec<&str>) -> RoutedPath {
        RoutedPath {
            layer: layer.into(),
            width: None,
            shape: None,
            points,
            via_names: vias.into_iter().map(String::from).collect(),
        }
    }

    #[test]
    fn listing_net_wire_length_and_vias() {
        // segment sums over the listed coordinates: 8540 + 380 + 0
        let net = net_with_paths(vec![
            path("metal2", vec![(91770, 88060), (91770, 96600)], vec![]),
            path("metal2", vec![(91770, 96600), (92150, 96600)], vec![]),
            path("metal1", vec![(91770, 88060)], vec!["via1_4"]),
        ]);
        assert_eq!(compute_wire_length(&net), 8920);
        assert_eq!(compute_via_count(&net), 1);
        assert!(!has_diagonal_segment(&net));
    }

    #[test]
    fn unrouted_net_zero() {
        let net = net_with_paths(vec![]);
        assert_eq!(compute_wire_length(&net), 0);
        assert_eq!(compute_via_count(&net), 0);
    }

    #[test]
    fn collinear_split_is_additive() {
        let whole = net_with_paths(vec![path("metal1", vec![(0, 0), (100, 0)], vec![])]);
        let split = net_with_paths(vec![path(
            "metal1",
            vec![(0, 0), (37, 0), (100, 0)],
            vec![],
        )]);
        assert_eq!(compute_wire_length(&whole), compute_wire_length(&split));
    }

    #[test]
    fn stacked_vias_counted() {
        let net = net_with_paths(vec![path(
            "metal1",
            vec![(5, 5)],
            vec!["via1_2", "via2_3", "via3_4"],
        )]);
        assert_eq!(compute_via_count(&net), 3);
    }

    #[test]
    fn hpwl_bbox_over_member_locations() {
        let src = "DESIGN t ;\nUNITS DISTANCE MICRONS 1000 ;\nCOMPONENTS 3 ;\n- g0 INV_X1 + PLACED ( 0 0 ) N ;\n- g1 INV_X1 + PLACED ( 10 5 ) N ;\n- g2 INV_X1 + PLACED ( 3 20 ) N ;\nEND COMPONENTS\nNETS 1 ;\n- n0 ( g0 A ) ( g1 A ) ( g2 A ) ;\nEND NETS\nEND DESIGN\n";
        let raw = crate::def::parse_str(src).unwrap().design;
        let db = crate::db::resolve(&raw, Default::default(), None).unwrap();
        assert_eq!(compute_hpwl(&db, &db.nets[0]).unwrap(), 30);
    }

    #[test]
    fn hpwl_single_member_zero() {
        let src = "DESIGN t ;\nUNITS DISTANCE MICRONS 1000 ;\nCOMPONENTS 1 ;\n- g0 INV_X1 + PLACED ( 7 9 ) N ;\nEND COMPONENTS\nNETS 1 ;\n- n0 ( g0 A ) ;\nEND NETS\nEND DESIGN\n";
        let raw = crate::def::parse_str(src).unwrap().design;
        let db = crate::db::resolve(&raw, Default::default(), None).unwrap();
        assert_eq!(compute_hpwl(&db, &db.nets[0]).unwrap(), 0);
    }

    #[test]
    fn hpwl_listing_endpoint_coordinates() {
        let src = "DESIGN t ;\nUNITS DISTANCE MICRONS 2000 ;\nCOMPONENTS 2 ;\n- g0 INV_X1 + PLACED ( 91770 88060 ) N ;\n- g1 INV_X1 + PLACED ( 92150 96600 ) N ;\nEND COMPONENTS\nNETS 1 ;\n- n0 ( g0 A ) ( g1 ZN ) ;\nEND NETS\nEND DESIGN\n";
        let raw = crate::def::parse_str(src).unwrap().design;
        let db = crate::db::resolve(&raw, Default::default(), None).unwrap();
        assert_eq!(compute_hpwl(&db, &db.nets[0]).unwrap(), 8920);
    }

    #[test]
    fn diagonal_flagged_and_scored_manhattan() {
        let net = net_with_paths(vec![path("metal1", vec![(0, 0), (3, 4)], vec![])]);
        assert!(has_diagonal_segment(&net));
        assert_eq!(compute_wire_length(&net), 7);
    }
}
