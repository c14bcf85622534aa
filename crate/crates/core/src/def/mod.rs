// SPDX-License-Identifier: Apache-2.0

//! DEF subset reader/writer. Covers the sections produced by place-and-route
//! flows: DESIGN/UNITS/DIEAREA, ROW/TRACKS/GCELLGRID/VIAS (kept opaque),
//! COMPONENTS, PINS, NETS and SPECIALNETS with routed geometry.

mod emit;
pub(crate) mod parse;
mod token;

pub use emit::emit_def;
pub use parse::{parse_def, parse_str, Parsed};
pub use token::{tokenize_def, tokenize_str, DefToken, TokenKind};

use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x_lo: i64,
    pub y_lo: i64,
    pub x_hi: i64,
    pub y_hi: i64,
}

impl Rect {
    pub fn width(&self) -> i64 {
        self.x_hi - self.x_lo
    }
    pub fn height(&self) -> i64 {
        self.y_hi - self.y_lo
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlaceStatus {
    Unplaced,
    Placed,
    Fixed,
    Cover,
}

impl PlaceStatus {
    pub fn keyword(&self) -> &'static str {
        match self {
            PlaceStatus::Unplaced => "UNPLACED",
            PlaceStatus::Placed => "PLACED",
            PlaceStatus::Fixed => "FIXED",
            PlaceStatus::Cover => "COVER",
        }
    }

    pub fn is_placed(&self) -> bool {
        !matches!(self, PlaceStatus::Unplaced)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawComponent {
    pub name: String,
    pub cell_master: String,
    pub place_status: PlaceStatus,
    /// Present iff place_status is PLACED/FIXED/COVER.
    pub loc: Option<(i64, i64)>,
    /// DEF orientation code (N, S, E, W, FN, FS, FE, FW).
    pub orientation: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawPort {
    pub layer: Option<String>,
    pub layer_rect: Option<(i64, i64, i64, i64)>,
    pub placed: Option<(i64, i64, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawPin {
    pub name: String,
    pub net: Option<String>,
    pub direction: Option<String>,
    pub use_class: Option<String>,
    pub ports: Vec<RawPort>,
}

/// One net connection as written in DEF: either a top-level pin reference
/// (`( PIN name )`), a component pin, or the SPECIALNETS wildcard
/// (`( * VDD )`, meaning all components' pins of that name).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NetConn {
    Io { pin: String },
    Gate { comp: String, pin: String },
    AllComponents { pin: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoutedPath {
    pub layer: String,
    /// SPECIALNETS carry an explicit wire width after the layer name.
    pub width: Option<i64>,
    pub shape: Option<String>,
    pub points: Vec<(i64, i64)>,
    pub via_names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawNet {
    pub name: String,
    pub use_class: Option<String>,
    pub connections: Vec<NetConn>,
    pub routed_paths: Vec<RoutedPath>,
}

/// Opaque statement kept for re-emission only (ROW, TRACKS, GCELLGRID, VIAS).
pub type OpaqueRecord = Vec<String>;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawDesign {
    pub design_name: String,
    pub dbu_per_micron: Option<i64>,
    pub die_area: Option<Rect>,
    pub rows: Vec<OpaqueRecord>,
    pub tracks: Vec<OpaqueRecord>,
    pub gcellgrid: Vec<OpaqueRecord>,
    pub vias: Vec<OpaqueRecord>,
    pub components: Vec<RawComponent>,
    pub pins: Vec<RawPin>,
    pub nets: Vec<RawNet>,
    pub special_nets: Vec<RawNet>,
    pub declared_counts: BTreeMap<String, i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Floorplan,
    Placement,
    Routing,
}

impl Stage {
    pub fn name(&self) -> &'static str {
        match self {
            Stage::Floorplan => "floorplan",
            Stage::Placement => "placement",
            Stage::Routing => "routing",
        }
    }

    pub fn from_name(s: &str) -> Option<Stage> {
        match s {
            "floorplan" => Some(Stage::Floorplan),
            "placement" | "place" => Some(Stage::Placement),
            "routing" | "route" => Some(Stage::Routing),
            _ => None,
        }
    }
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Classify the physical-design stage a DEF snapshot came from.
///
/// Routing requires routed geometry on a signal net; SPECIALNETS stripes alone
/// do not count because power grids already exist at floorplan.
pub fn detect_stage(d: &RawDesign) -> Stage {
    if d.nets.iter().any(|n| !n.routed_paths.is_empty()) {
        return Stage::Routing;
    }
    if d.components
        .iter()
        .any(|c| matches!(c.place_status, PlaceStatus::Placed | PlaceStatus::Fixed))
    {
        return Stage::Placement;
    }
    Stage::Floorplan
}
