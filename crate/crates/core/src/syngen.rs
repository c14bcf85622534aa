// SPDX-License-Identifier: Apache-2.0

//! Seeded synthetic DEF generator with exact ground truth.
//!
//! Designs are gates on a grid with star-topology nets. Routing-stage nets
//! get explicit rectilinear L-routes (metal1 horizontal, metal2 vertical,
//! one via at each bend), so per-net wirelength and via counts are known by
//! construction rather than recomputed through the code under test.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::def::{
    emit_def, NetConn, PlaceStatus, RawComponent, RawDesign, RawNet, RawPin, RawPort, Rect,
    RoutedPath, Stage,
};
use crate::error::{Error, Result};

/// Placement pitch in DBU; one gate per grid cell.
pub const PITCH: i64 = 2000;
const NUM_MASTERS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynSpec {
    pub gates: usize,
    pub avg_fanout: f64,
    pub io_count: usize,
    /// Grid cells (x, y); defaults to the smallest square that fits.
    pub grid: Option<(usize, usize)>,
    pub seed: u64,
    pub stage: Stage,
}

impl Default for SynSpec {
    fn default() -> SynSpec {
        SynSpec {
            gates: 16,
            avg_fanout: 2.0,
            io_count: 4,
            grid: None,
            seed: 0,
            stage: Stage::Routing,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetTruth {
    pub name: String,
    pub hpwl: i64,
    pub wire_length: i64,
    pub via_count: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    pub design: String,
    pub gates: usize,
    /// Connected gate pins (the database materializes only these).
    pub pins: usize,
    pub nets: usize,
    pub ios: usize,
    pub per_net: Vec<NetTruth>,
}

impl GroundTruth {
    /// Structured-text sidecar in the manifest dialect.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut push = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        push("design", self.design.clone());
        push("gates", self.gates.to_string());
        push("pins", self.pins.to_string());
        push("nets", self.nets.to_string());
        push("ios", self.ios.to_string());
        for n in &self.per_net {
            push(&format!("net.{}.hpwl", n.name), n.hpwl.to_string());
            push(
                &format!("net.{}.wire_length", n.name),
                n.wire_length.to_string(),
            );
            push(&format!("net.{}.via_count", n.name), n.via_count.to_string());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub raw: RawDesign,
    pub def_text: String,
    pub tech_text: String,
    pub truth: GroundTruth,
}

fn master_inputs(k: usize) -> usize {
    1 + (k % 3)
}

/// Technology sidecar matching the generated cell library.
pub fn tech_table_text() -> String {
    let mut out = String::from("# synthetic cell library\n");
    for k in 0..NUM_MASTERS {
        let area = 0.5 + 0.25 * k as f64;
        let leak = 0.001 * (k + 1) as f64;
        for a in 0..master_inputs(k) {
            out.push_str(&format!("CELL{k} A{a} input {area} {leak}\n"));
        }
        out.push_str(&format!("CELL{k} Z output\n"));
    }
    out
}

struct NetPlan {
    name: String,
    /// (connection, location); first entry is the driver.
    members: Vec<(NetConn, (i64, i64))>,
}

pub fn generate_design(spec: &SynSpec) -> Result<Generated> {
    if spec.gates == 0 {
        return Err(Error::InfeasibleSpec("at least one gate required".into()));
    }
    let side = (spec.gates as f64).sqrt().ceil() as usize;
    let (gx, gy) = spec.grid.unwrap_or((side, side));
    if gx * gy < spec.gates {
        return Err(Error::InfeasibleSpec(format!(
            "grid {gx}x{gy} cannot host {} gates",
            spec.gates
        )));
    }
    let fanout = spec.avg_fanout.max(0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let name = format!("syn_{:016x}", spec.seed);
    let die_w = (gx as i64) * PITCH;
    let die_h = (gy as i64 + 1) * PITCH;

    // gates on the grid, row-major, bottom row reserved for IO pins
    let placed = spec.stage >= Stage::Placement;
    let mut gate_loc = Vec::with_capacity(spec.gates);
    let mut components = Vec::with_capacity(spec.gates);
    for i in 0..spec.gates {
        let master = rng.gen_range(0..NUM_MASTERS);
        let loc = (
            (i % gx) as i64 * PITCH,
            PITCH + (i / gx) as i64 * PITCH,
        );
        gate_loc.push(loc);
        components.push(RawComponent {
            name: format!("g{i}"),
            cell_master: format!("CELL{master}"),
            place_status: if placed {
                PlaceStatus::Placed
            } else {
                PlaceStatus::Unplaced
            },
            loc: placed.then_some(loc),
            orientation: placed.then(|| ["N", "FN", "S", "FS"][i % 4].to_string()),
        });
        let _ = master;
    }
    let masters: Vec<usize> = components
        .iter()
        .map(|c| c.cell_master[4..].parse().unwrap())
        .collect();

    // free input-pin pool, shuffled once
    let mut pool: Vec<(usize, usize)> = (0..spec.gates)
        .flat_map(|g| (0..master_inputs(masters[g])).map(move |a| (g, a)))
        .collect();
    pool.shuffle(&mut rng);
    let mut pool_next = 0usize;
    let take_sinks = |rng: &mut ChaCha8Rng, pool_next: &mut usize| -> Vec<(usize, usize)> {
        let base = fanout.floor() as usize;
        let extra = rng.gen_bool(fanout.fract()) as usize;
        let want = base + extra;
        let have = (pool.len() - *pool_next).min(want);
        let sinks = pool[*pool_next..*pool_next + have].to_vec();
        *pool_next += have;
        sinks
    };

    // IO pins along the bottom edge
    let mut io_loc = Vec::with_capacity(spec.io_count);
    let mut io_dirs = Vec::with_capacity(spec.io_count);
    for j in 0..spec.io_count {
        let x = (j as i64 + 1) * die_w / (spec.io_count as i64 + 1);
        io_loc.push((x, 0));
        io_dirs.push(if j % 2 == 0 { "INPUT" } else { "OUTPUT" });
    }

    // gate-driven nets
    let mut plans: Vec<NetPlan> = Vec::new();
    let mut gate_net: Vec<Option<usize>> = vec![None; spec.gates];
    for g in 0..spec.gates {
        let sinks = take_sinks(&mut rng, &mut pool_next);
        if sinks.is_empty() {
            continue;
        }
        let mut members = vec![(
            NetConn::Gate {
                comp: format!("g{g}"),
                pin: "Z".to_string(),
            },
            gate_loc[g],
        )];
        for (sg, sa) in sinks {
            members.push((
                NetConn::Gate {
                    comp: format!("g{sg}"),
                    pin: format!("A{sa}"),
                },
                gate_loc[sg],
            ));
        }
        gate_net[g] = Some(plans.len());
        plans.push(NetPlan {
            name: format!("n{g}"),
            members,
        });
    }

    // IO nets: inputs drive fresh nets, outputs sink on an existing gate net
    // (forcing one into existence when necessary)
    let mut io_net_name: Vec<String> = Vec::with_capacity(spec.io_count);
    for j in 0..spec.io_count {
        if io_dirs[j] == "INPUT" {
            let net_name = format!("io_in{j}");
            let mut members = vec![(
                NetConn::Io {
                    pin: format!("p{j}"),
                },
                io_loc[j],
            )];
            for (sg, sa) in take_sinks(&mut rng, &mut pool_next) {
                members.push((
                    NetConn::Gate {
                        comp: format!("g{sg}"),
                        pin: format!("A{sa}"),
                    },
                    gate_loc[sg],
                ));
            }
            io_net_name.push(net_name.clone());
            plans.push(NetPlan {
                name: net_name,
                members,
            });
        } else {
            let g = j % spec.gates;
            let plan = match gate_net[g] {
                Some(p) => p,
                None => {
                    gate_net[g] = Some(plans.len());
                    plans.push(NetPlan {
                        name: format!("n{g}"),
                        members: vec![(
                            NetConn::Gate {
                                comp: format!("g{g}"),
                                pin: "Z".to_string(),
                            },
                            gate_loc[g],
                        )],
                    });
                    plans.len() - 1
                }
            };
            plans[plan].members.push((
                NetConn::Io {
                    pin: format!("p{j}"),
                },
                io_loc[j],
            ));
            io_net_name.push(plans[plan].name.clone());
        }
    }

    // materialize nets, routing each driver->sink connection as an L
    let mut nets = Vec::with_capacity(plans.len());
    let mut per_net = Vec::with_capacity(plans.len());
    let mut total_pins = 0usize;
    for plan in &plans {
        let mut routed_paths = Vec::new();
        let mut wire_length = 0i64;
        let mut via_count = 0i64;
        let (_, (dx, dy)) = plan.members[0];
        if spec.stage == Stage::Routing {
            for (_, (sx, sy)) in &plan.members[1..] {
                let (sx, sy) = (*sx, *sy);
                if sx == dx && sy == dy {
                    continue;
                }
                if sy == dy {
                    routed_paths.push(RoutedPath {
                        layer: "metal1".into(),
                        width: None,
                        shape: None,
                        points: vec![(dx, dy), (sx, dy)],
                        via_names: vec![],
                    });
                } else if sx == dx {
                    routed_paths.push(RoutedPath {
                        layer: "metal2".into(),
                        width: None,
                        shape: None,
                        points: vec![(dx, dy), (dx, sy)],
                        via_names: vec![],
                    });
                } else {
                    // horizontal on metal1, via at the bend, vertical on metal2
                    routed_paths.push(RoutedPath {
                        layer: "metal1".into(),
                        width: None,
                        shape: None,
                        points: vec![(dx, dy), (sx, dy)],
                        via_names: vec!["via12".into()],
                    });
                    routed_paths.push(RoutedPath {
                        layer: "metal2".into(),
                        width: None,
                        shape: None,
                        points: vec![(sx, dy), (sx, sy)],
                        via_names: vec![],
                    });
                    via_count += 1;
                }
                wire_length += (sx - dx).abs() + (sy - dy).abs();
            }
        }

        let hpwl = if plan.members.len() >= 2 && spec.stage >= Stage::Placement {
            let xs: Vec<i64> = plan.members.iter().map(|(_, l)| l.0).collect();
            let ys: Vec<i64> = plan.members.iter().map(|(_, l)| l.1).collect();
            (xs.iter().max().unwrap() - xs.iter().min().unwrap())
                + (ys.iter().max().unwrap() - ys.iter().min().unwrap())
        } else {
            0
        };
        total_pins += plan
            .members
            .iter()
            .filter(|(c, _)| matches!(c, NetConn::Gate { .. }))
            .count();
        per_net.push(NetTruth {
            name: plan.name.clone(),
            hpwl,
            wire_length: if spec.stage == Stage::Routing {
                wire_length
            } else {
                0
            },
            via_count: if spec.stage == Stage::Routing {
                via_count
            } else {
                0
            },
        });
        nets.push(RawNet {
            name: plan.name.clone(),
            use_class: Some("SIGNAL".into()),
            connections: plan.members.iter().map(|(c, _)| c.clone()).collect(),
            routed_paths,
        });
    }

    let pins: Vec<RawPin> = (0..spec.io_count)
        .map(|j| RawPin {
            name: format!("p{j}"),
            net: Some(io_net_name[j].clone()),
            direction: Some(io_dirs[j].to_string()),
            use_class: Some("SIGNAL".into()),
            ports: vec![RawPort {
                layer: Some("metal3".into()),
                layer_rect: Some((-70, -70, 70, 70)),
                placed: Some((io_loc[j].0, io_loc[j].1, "N".into())),
            }],
        })
        .collect();

    let declared_counts = [
        ("COMPONENTS", components.len() as i64),
        ("PINS", pins.len() as i64),
        ("NETS", nets.len() as i64),
    ]
    .into_iter()
    .filter(|(_, n)| *n > 0)
    .map(|(k, n)| (k.to_string(), n))
    .collect();
    let raw = RawDesign {
        design_name: name.clone(),
        dbu_per_micron: Some(1000),
        die_area: Some(Rect {
            x_lo: 0,
            y_lo: 0,
            x_hi: die_w,
            y_hi: die_h,
        }),
        components,
        pins,
        nets,
        declared_counts,
        ..Default::default()
    };

    let truth = GroundTruth {
        design: name,
        gates: spec.gates,
        pins: total_pins,
        nets: per_net.len(),
        ios: spec.io_count,
        per_net,
    };

    Ok(Generated {
        def_text: emit_def(&raw),
        tech_text: tech_table_text(),
        raw,
        truth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::db::{resolve, TechTable, Vocabularies};
    use crate::def::parse_str;
    use crate::labels::compute_net_labels;

    fn check_labels(spec: &SynSpec) {
        let gen = generate_design(spec).unwrap();
        let raw = parse_str(&gen.def_text).unwrap().design;
        let tech = TechTable::parse(&gen.tech_text).unwrap();
        let db = resolve(&raw, Vocabularies::default(), Some(&tech)).unwrap();
        assert_eq!(db.stage, spec.stage);
        assert_eq!(db.gates.len(), gen.truth.gates);
        assert_eq!(db.pins.len(), gen.truth.pins);
        assert_eq!(db.nets.len(), gen.truth.nets);
        assert_eq!(db.ios.len(), gen.truth.ios);
        let labels = compute_net_labels(&db, spec.stage, false).unwrap();
        for (l, t) in labels.iter().zip(&gen.truth.per_net) {
            assert_eq!(db.nets[l.net].name, t.name);
            if spec.stage >= Stage::Placement {
                assert_eq!(l.hpwl, t.hpwl, "net {}", t.name);
            }
            assert_eq!(l.wire_length, t.wire_length, "net {}", t.name);
            assert_eq!(l.via_count, t.via_count, "net {}", t.name);
        }
    }

    #[test]
    fn two_gate_placement_matches_truth() {
        check_labels(&SynSpec {
            gates: 2,
            avg_fanout: 1.0,
            io_count: 0,
            grid: None,
            seed: 7,
            stage: Stage::Placement,
        });
    }

    #[test]
    fn routing_labels_match_truth() {
        for seed in 0..5 {
            check_labels(&SynSpec {
                gates: 40,
                avg_fanout: 2.5,
                io_count: 6,
                grid: None,
                seed,
                stage: Stage::Routing,
            });
        }
    }

    #[test]
    fn single_gate_no_fanout_has_no_nets() {
        let gen = generate_design(&SynSpec {
            gates: 1,
            avg_fanout: 0.0,
            io_count: 0,
            grid: None,
            seed: 1,
            stage: Stage::Placement,
        })
        .unwrap();
        assert!(gen.raw.nets.is_empty());
        assert_eq!(gen.truth.nets, 0);
    }

    #[test]
    fn infeasible_grid_rejected() {
        let err = generate_design(&SynSpec {
            gates: 10,
            grid: Some((3, 3)),
            ..Default::default()
        })
        .unwrap_err();
        assert!(matches!(err, Error::InfeasibleSpec(_)));
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = SynSpec {
            seed: 123,
            ..Default::default()
        };
        let a = generate_design(&spec).unwrap();
        let b = generate_design(&spec).unwrap();
        assert_eq!(a, b);
        let c = generate_design(&SynSpec {
            seed: 124,
            ..spec
        })
        .unwrap();
        assert_ne!(a.def_text, c.def_text);
    }

    #[test]
    fn emitted_def_roundtrips() {
        let gen = generate_design(&SynSpec::default()).unwrap();
        let parsed = parse_str(&gen.def_text).unwrap().design;
        assert_eq!(parsed, gen.raw);
        assert_eq!(emit_def(&parsed), gen.def_text);
    }

    #[test]
    fn floorplan_stage_unplaced() {
        let gen = generate_design(&SynSpec {
            stage: Stage::Floorplan,
            ..Default::default()
        })
        .unwrap();
        let raw = parse_str(&gen.def_text).unwrap().design;
        assert_eq!(crate::def::detect_stage(&raw), Stage::Floorplan);
        assert!(gen.truth.per_net.iter().all(|n| n.hpwl == 0));
    }
}
