// SPDX-License-Identifier: Apache-2.0

//! Canonical DEF writer. One statement per line, fixed spacing, sections in a
//! fixed order, so identical designs serialize byte-identically.

use std::fmt::Write;

use super::*;

fn declared(d: &RawDesign, section: &str, actual: usize) -> i64 {
    d.declared_counts
        .get(section)
        .copied()
        .unwrap_or(actual as i64)
}

/// Serialize a design to canonical DEF text. `parse_def(emit_def(d))`
/// reproduces `d` structurally; emitting again is byte-identical.
pub fn emit_def(d: &RawDesign) -> String {
    let mut out = String::new();
    let name = if d.design_name.is_empty() {
        "x"
    } else {
        &d.design_name
    };
    writeln!(out, "DESIGN {name} ;").unwrap();
    if let Some(dbu) = d.dbu_per_micron {
        writeln!(out, "UNITS DISTANCE MICRONS {dbu} ;").unwrap();
    }
    if let Some(r) = &d.die_area {
        writeln!(
            out,
            "DIEAREA ( {} {} ) ( {} {} ) ;",
            r.x_lo, r.y_lo, r.x_hi, r.y_hi
        )
        .unwrap();
    }
    for rec in &d.rows {
        writeln!(out, "{} ;", rec.join(" ")).unwrap();
    }
    for rec in &d.tracks {
        writeln!(out, "{} ;", rec.join(" ")).unwrap();
    }
    for rec in &d.gcellgrid {
        writeln!(out, "{} ;", rec.join(" ")).unwrap();
    }
    if !d.vias.is_empty() || d.declared_counts.contains_key("VIAS") {
        writeln!(out, "VIAS {} ;", declared(d, "VIAS", d.vias.len())).unwrap();
        for rec in &d.vias {
            writeln!(out, "{} ;", rec.join(" ")).unwrap();
        }
        writeln!(out, "END VIAS").unwrap();
    }
    if !d.components.is_empty() || d.declared_counts.contains_key("COMPONENTS") {
        writeln!(
            out,
            "COMPONENTS {} ;",
            declared(d, "COMPONENTS", d.components.len())
        )
        .unwrap();
        for c in &d.components {
            write!(out, "- {} {}", c.name, c.cell_master).unwrap();
            match (c.place_status, c.loc, &c.orientation) {
                (PlaceStatus::Unplaced, _, _) => write!(out, " + UNPLACED").unwrap(),
                (status, Some((x, y)), Some(orient)) => write!(
                    out,
                    " + {} ( {x} {y} ) {orient}",
                    status.keyword()
                )
                .unwrap(),
                _ => {}
            }
            writeln!(out, " ;").unwrap();
        }
        writeln!(out, "END COMPONENTS").unwrap();
    }
    if !d.pins.is_empty() || d.declared_counts.contains_key("PINS") {
        writeln!(out, "PINS {} ;", declared(d, "PINS", d.pins.len())).unwrap();
        for p in &d.pins {
            write!(out, "- {}", p.name).unwrap();
            if let Some(n) = &p.net {
                write!(out, " + NET {n}").unwrap();
            }
            if let Some(dir) = &p.direction {
                write!(out, " + DIRECTION {dir}").unwrap();
            }
            if let Some(u) = &p.use_class {
                write!(out, " + USE {u}").unwrap();
            }
            for port in &p.ports {
                write!(out, " + PORT").unwrap();
                if let (Some(layer), Some((a, b, x, y))) = (&port.layer, port.layer_rect) {
                    write!(out, " + LAYER {layer} ( {a} {b} ) ( {x} {y} )").unwrap();
                }
                if let Some((x, y, orient)) = &port.placed {
                    write!(out, " + PLACED ( {x} {y} ) {orient}").unwrap();
                }
            }
            writeln!(out, " ;").unwrap();
        }
        writeln!(out, "END PINS").unwrap();
    }
    emit_net_section(&mut out, d, "SPECIALNETS", &d.special_nets);
    emit_net_section(&mut out, d, "NETS", &d.nets);
    writeln!(out, "END DESIGN").unwrap();
    out
}

fn emit_net_section(out: &mut String, d: &RawDesign, section: &str, nets: &[RawNet]) {
    if nets.is_empty() && !d.declared_counts.contains_key(section) {
        return;
    }
    writeln!(out, "{section} {} ;", declared(d, section, nets.len())).unwrap();
    for n in nets {
        write!(out, "- {}", n.name).unwrap();
        for conn in &n.connections {
            match conn {
                NetConn::Io { pin } => write!(out, " ( PIN {pin} )").unwrap(),
                NetConn::Gate { comp, pin } => write!(out, " ( {comp} {pin} )").unwrap(),
                NetConn::AllComponents { pin } => write!(out, " ( * {pin} )").unwrap(),
            }
        }
        if let Some(u) = &n.use_class {
            write!(out, " + USE {u}").unwrap();
        }
        for (i, path) in n.routed_paths.iter().enumerate() {
            if i == 0 {
                write!(out, " + ROUTED").unwrap();
            } else {
                write!(out, " NEW").unwrap();
            }
            write!(out, " {}", path.layer).unwrap();
            if let Some(w) = path.width {
                write!(out, " {w}").unwrap();
            }
            if let Some(s) = &path.shape {
                write!(out, " + SHAPE {s}").unwrap();
            }
            for (x, y) in &path.points {
                write!(out, " ( {x} {y} )").unwrap();
            }
            for via in &path.via_names {
                write!(out, " {via}").unwrap();
            }
        }
        writeln!(out, " ;").unwrap();
    }
    writeln!(out, "END {section}").unwrap();
}
