// SPDX-License-Identifier: Apache-2.0

//! Resolution of a RawDesign into a typed, validated DesignDatabase with
//! stable integer vocabularies and derived pin geometry.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use indexmap::IndexMap;
use sha2::{Digest, Sha256};

use crate::def::{detect_stage, NetConn, RawDesign, Rect, RoutedPath, Stage};
use crate::error::{Error, Result};

pub const ORIENTATIONS: [&str; 8] = ["N", "S", "E", "W", "FN", "FS", "FE", "FW"];

pub const NET_SIGNAL: i64 = 0;
pub const NET_POWER: i64 = 1;
pub const NET_GROUND: i64 = 2;
pub const NET_CLOCK: i64 = 3;
pub const NET_RESET: i64 = 4;
pub const NET_SCAN: i64 = 5;

pub const PLACE_UNPLACED: i64 = 0;
pub const PLACE_PLACED: i64 = 1;
pub const PLACE_FIXED: i64 = 2;
pub const PLACE_COVER: i64 = 3;

pub const PIN_INPUT: i64 = 0;
pub const PIN_OUTPUT: i64 = 1;
pub const PIN_INOUT: i64 = 2;

pub fn orientation_code(s: &str) -> Option<i64> {
    ORIENTATIONS.iter().position(|o| *o == s).map(|i| i as i64)
}

/// Stable integer encodings for discrete fields. `cell_type` grows dense in
/// first-seen order; `layer` ids follow the numeric suffix of the layer name
/// (metal1 -> 1) when available. Fixed maps (orientation, net_type,
/// place_flag, pin_type) are compile-time constants.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Vocabularies {
    pub cell_type: IndexMap<String, i64>,
    pub layer: BTreeMap<String, i64>,
}

impl Vocabularies {
    pub fn cell_id(&mut self, name: &str) -> i64 {
        if let Some(id) = self.cell_type.get(name) {
            return *id;
        }
        let id = self.cell_type.len() as i64;
        self.cell_type.insert(name.to_string(), id);
        id
    }

    pub fn layer_id(&mut self, name: &str) -> i64 {
        if let Some(id) = self.layer.get(name) {
            return *id;
        }
        let suffix: String = name
            .chars()
            .skip_while(|c| !c.is_ascii_digit())
            .collect();
        let candidate = suffix.parse::<i64>().ok().filter(|id| {
            *id > 0 && !self.layer.values().any(|v| v == id)
        });
        let id = candidate
            .unwrap_or_else(|| self.layer.values().copied().max().unwrap_or(0) + 1);
        self.layer.insert(name.to_string(), id);
        id
    }

    /// Line-oriented sidecar: `kind<TAB>name<TAB>id`, sorted by (kind, id).
    pub fn to_sidecar(&self) -> String {
        let mut out = String::new();
        let mut cells: Vec<_> = self.cell_type.iter().collect();
        cells.sort_by_key(|(_, id)| **id);
        for (name, id) in cells {
            writeln!(out, "cell_type\t{name}\t{id}").unwrap();
        }
        let mut layers: Vec<_> = self.layer.iter().collect();
        layers.sort_by_key(|(_, id)| **id);
        for (name, id) in layers {
            writeln!(out, "layer\t{name}\t{id}").unwrap();
        }
        out
    }

    pub fn from_sidecar(text: &str) -> Result<Vocabularies> {
        let mut v = Vocabularies::default();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split('\t');
            let (kind, name, id) = match (parts.next(), parts.next(), parts.next()) {
                (Some(k), Some(n), Some(i)) => (k, n, i),
                _ => {
                    return Err(Error::SchemaMismatch(format!(
                        "vocabulary sidecar line {}: expected kind<TAB>name<TAB>id",
                        i + 1
                    )))
                }
            };
            let id: i64 = id.parse().map_err(|_| {
                Error::SchemaMismatch(format!("vocabulary sidecar line {}: bad id", i + 1))
            })?;
            match kind {
                "cell_type" => {
                    v.cell_type.insert(name.to_string(), id);
                }
                "layer" => {
                    v.layer.insert(name.to_string(), id);
                }
                other => {
                    return Err(Error::SchemaMismatch(format!(
                        "vocabulary sidecar: unknown kind `{other}`"
                    )))
                }
            }
        }
        Ok(v)
    }

    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_sidecar().as_bytes());
        let mut s = String::with_capacity(64);
        for b in digest {
            write!(s, "{b:02x}").unwrap();
        }
        s
    }
}

/// Optional cell-attribute table: `cell_name pin_name direction area leakage`
/// per whitespace-separated line, `#` comments.
#[derive(Debug, Clone, Default)]
pub struct TechTable {
    pub cells: HashMap<String, TechCell>,
}

#[derive(Debug, Clone, Default)]
pub struct TechCell {
    pub area: f64,
    pub power_leak: f64,
    pub pin_dirs: HashMap<String, i64>,
}

impl TechTable {
    pub fn parse(text: &str) -> Result<TechTable> {
        let mut t = TechTable::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_ascii_whitespace().collect();
            if fields.len() < 3 {
                return Err(Error::SchemaMismatch(format!(
                    "tech table line {}: expected `cell pin direction [area] [leakage]`",
                    i + 1
                )));
            }
            let dir = match fields[2].to_ascii_lowercase().as_str() {
                "input" => PIN_INPUT,
                "output" => PIN_OUTPUT,
                "inout" => PIN_INOUT,
                other => {
                    return Err(Error::SchemaMismatch(format!(
                        "tech table line {}: unknown direction `{other}`",
                        i + 1
                    )))
                }
            };
            let cell = t.cells.entry(fields[0].to_string()).or_default();
            cell.pin_dirs.insert(fields[1].to_string(), dir);
            if let Some(a) = fields.get(3) {
                cell.area = a.parse().unwrap_or(0.0);
            }
            if let Some(l) = fields.get(4) {
                cell.power_leak = l.parse().unwrap_or(0.0);
            }
        }
        Ok(t)
    }

    pub fn pin_dir(&self, cell: &str, pin: &str) -> Option<i64> {
        self.cells.get(cell)?.pin_dirs.get(pin).copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub name: String,
    pub cell_type: i64,
    pub orientation: Option<i64>,
    pub loc: Option<(i64, i64)>,
    pub place_flag: i64,
    pub area: f64,
    pub power_leak: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pin {
    pub owner_gate: usize,
    pub pin_name: String,
    pub pin_type: i64,
    /// Copied from the owning gate for view constructions.
    pub cell_type: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MemberId {
    Pin(usize),
    Io(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Net {
    pub name: String,
    pub net_type: i64,
    pub pin_count: usize,
    pub members: Vec<MemberId>,
    pub driver: Option<MemberId>,
    pub routed_paths: Vec<RoutedPath>,
    /// True for SPECIALNETS entries.
    pub special: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IoPin {
    pub name: String,
    pub direction: i64,
    pub loc: Option<(i64, i64)>,
    pub orientation: Option<i64>,
    pub layer_id: Option<i64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignDatabase {
    pub name: String,
    pub stage: Stage,
    pub dbu_per_micron: Option<i64>,
    pub die_area: Option<Rect>,
    pub gates: Vec<Gate>,
    pub pins: Vec<Pin>,
    pub nets: Vec<Net>,
    pub ios: Vec<IoPin>,
    pub vocab: Vocabularies,
    pub missing_tech: bool,
    pub warnings: Vec<String>,
}

/// Net-type classification: DEF USE class takes precedence, then name
/// heuristics (rst/reset substring, scan/se/si whole-token, clk/clock
/// substring), else signal. Total and deterministic.
pub fn classify_net(name: &str, use_class: Option<&str>) -> i64 {
    if let Some(u) = use_class {
        match u.to_ascii_uppercase().as_str() {
            "POWER" => return NET_POWER,
            "GROUND" => return NET_GROUND,
            "CLOCK" => return NET_CLOCK,
            "RESET" => return NET_RESET,
            "SCAN" => return NET_SCAN,
            "SIGNAL" => return NET_SIGNAL,
            _ => {}
        }
    }
    let lower = name.to_ascii_lowercase();
    if lower.contains("rst") || lower.contains("reset") {
        return NET_RESET;
    }
    let tokens = lower.split(|c: char| !c.is_ascii_alphanumeric());
    for tok in tokens {
        if matches!(tok, "scan" | "se" | "si") {
            return NET_SCAN;
        }
    }
    if lower.contains("clk") || lower.contains("clock") {
        return NET_CLOCK;
    }
    NET_SIGNAL
}

/// Resolve a parsed design into a typed database. The vocabulary grows
/// deterministically in first-seen order; pass a persisted vocabulary to keep
/// ids stable across designs.
pub fn resolve(
    raw: &RawDesign,
    mut vocab: Vocabularies,
    tech: Option<&TechTable>,
) -> Result<DesignDatabase> {
    let stage = detect_stage(raw);
    let mut warnings = Vec::new();
    let mut missing_tech = tech.is_none();

    // Register metal layers declared by TRACKS statements so floorplan-only
    // designs still carry a layer vocabulary.
    for rec in &raw.tracks {
        let mut it = rec.iter();
        while let Some(tok) = it.next() {
            if tok == "LAYER" {
                if let Some(layer) = it.next() {
                    vocab.layer_id(layer);
                }
            }
        }
    }

    let mut gates = Vec::with_capacity(raw.components.len());
    let mut gate_index: HashMap<&str, usize> = HashMap::with_capacity(raw.components.len());
    for (i, comp) in raw.components.iter().enumerate() {
        gate_index.insert(comp.name.as_str(), i);
        let cell_type = vocab.cell_id(&comp.cell_master);
        let orientation = match comp.orientation.as_deref() {
            Some(s) => Some(orientation_code(s).ok_or_else(|| Error::UnexpectedToken {
                expected: "orientation code".into(),
                got: s.to_string(),
                line: 0,
            })?),
            None => None,
        };
        let place_flag = match comp.place_status {
            crate::def::PlaceStatus::Unplaced => PLACE_UNPLACED,
            crate::def::PlaceStatus::Placed => PLACE_PLACED,
            crate::def::PlaceStatus::Fixed => PLACE_FIXED,
            crate::def::PlaceStatus::Cover => PLACE_COVER,
        };
        let (area, power_leak) = match tech.and_then(|t| t.cells.get(&comp.cell_master)) {
            Some(c) => (c.area, c.power_leak),
            None => {
                if tech.is_some() {
                    missing_tech = true;
                }
                (0.0, 0.0)
            }
        };
        gates.push(Gate {
            name: comp.name.clone(),
            cell_type,
            orientation,
            loc: comp.loc,
            place_flag,
            area,
            power_leak,
        });
    }

    let mut ios = Vec::with_capacity(raw.pins.len());
    let mut io_index: HashMap<&str, usize> = HashMap::with_capacity(raw.pins.len());
    for (i, p) in raw.pins.iter().enumerate() {
        io_index.insert(p.name.as_str(), i);
        if p.ports.len() > 1 {
            warnings.push(format!(
                "WARN io `{}`: {} PORT records, using the first",
                p.name,
                p.ports.len()
            ));
        }
        let port = p.ports.first();
        let direction = match p.direction.as_deref().map(str::to_ascii_uppercase).as_deref() {
            Some("INPUT") => PIN_INPUT,
            Some("OUTPUT") => PIN_OUTPUT,
            Some("INOUT") => PIN_INOUT,
            Some(other) => {
                warnings.push(format!("WARN io `{}`: unknown direction `{other}`", p.name));
                PIN_INOUT
            }
            None => {
                warnings.push(format!("WARN io `{}`: no direction, assuming inout", p.name));
                PIN_INOUT
            }
        };
        let (loc, orientation) = match port.and_then(|q| q.placed.as_ref()) {
            Some((x, y, orient)) => ((Some((*x, *y))), orientation_code(orient)),
            None => (None, None),
        };
        let layer_id = port
            .and_then(|q| q.layer.as_deref())
            .map(|l| vocab.layer_id(l));
        ios.push(IoPin {
            name: p.name.clone(),
            direction,
            loc,
            orientation,
            layer_id,
        });
    }

    let mut pins: Vec<Pin> = Vec::new();
    let mut pin_index: HashMap<(usize, &str), usize> = HashMap::new();
    let mut nets = Vec::with_capacity(raw.nets.len() + raw.special_nets.len());
    for (raw_net, special) in raw
        .nets
        .iter()
        .map(|n| (n, false))
        .chain(raw.special_nets.iter().map(|n| (n, true)))
    {
        let mut members = Vec::with_capacity(raw_net.connections.len());
        for conn in &raw_net.connections {
            match conn {
                NetConn::Gate { comp, pin } => {
                    let gate = *gate_index.get(comp.as_str()).ok_or_else(|| {
                        Error::DanglingReference {
                            net: raw_net.name.clone(),
                            owner: comp.clone(),
                        }
                    })?;
                    if pin_index.contains_key(&(gate, pin.as_str())) {
                        // same pin listed by two nets
                        return Err(Error::DuplicateName {
                            kind: "pin",
                            name: format!("{comp}/{pin}"),
                        });
                    }
                    let pin_type = match tech.and_then(|t| {
                        t.pin_dir(&raw.components[gate].cell_master, pin)
                    }) {
                        Some(d) => d,
                        None => {
                            warnings.push(format!(
                                "WARN pin `{comp}/{pin}`: no direction from DEF or tech table, assuming inout"
                            ));
                            PIN_INOUT
                        }
                    };
                    let id = pins.len();
                    pins.push(Pin {
                        owner_gate: gate,
                        pin_name: pin.clone(),
                        pin_type,
                        cell_type: gates[gate].cell_type,
                    });
                    pin_index.insert((gate, pin.as_str()), id);
                    members.push(MemberId::Pin(id));
                }
                NetConn::Io { pin } => {
                    let io = *io_index.get(pin.as_str()).ok_or_else(|| {
                        Error::DanglingReference {
                            net: raw_net.name.clone(),
                            owner: format!("PIN {pin}"),
                        }
                    })?;
                    members.push(MemberId::Io(io));
                }
                NetConn::AllComponents { pin } => {
                    warnings.push(format!(
                        "WARN net `{}`: wildcard connection ( * {pin} ) not materialized",
                        raw_net.name
                    ));
                }
            }
        }
        for path in &raw_net.routed_paths {
            vocab.layer_id(&path.layer);
        }
        let driver = find_driver(&members, &pins, &ios);
        if members.len() < 2 && !special {
            warnings.push(format!(
                "WARN net `{}`: fewer than 2 members",
                raw_net.name
            ));
        }
        nets.push(Net {
            name: raw_net.name.clone(),
            net_type: classify_net(&raw_net.name, raw_net.use_class.as_deref()),
            pin_count: members.len(),
            members,
            driver,
            routed_paths: raw_net.routed_paths.clone(),
            special,
        });
    }

    if missing_tech {
        warnings.push("WARN missing-tech: area/power_leak defaulted to 0".to_string());
    }

    Ok(DesignDatabase {
        name: raw.design_name.clone(),
        stage,
        dbu_per_micron: raw.dbu_per_micron,
        die_area: raw.die_area,
        gates,
        pins,
        nets,
        ios,
        vocab,
        missing_tech,
        warnings,
    })
}

/// The unique output-direction member (or input-direction IO: a chip input
/// drives its internal net), if exactly one exists.
fn find_driver(members: &[MemberId], pins: &[Pin], ios: &[IoPin]) -> Option<MemberId> {
    let mut driver = None;
    for m in members {
        let drives = match m {
            MemberId::Pin(p) => pins[*p].pin_type == PIN_OUTPUT,
            MemberId::Io(i) => ios[*i].direction == PIN_INPUT,
        };
        if drives {
            if driver.is_some() {
                return None;
            }
            driver = Some(*m);
        }
    }
    driver
}

impl DesignDatabase {
    /// A pin's location is its owning gate's placement origin; IO members use
    /// their own placed coordinates.
    pub fn member_location(&self, m: MemberId) -> Result<(i64, i64)> {
        match m {
            MemberId::Pin(p) => {
                let pin = &self.pins[p];
                let gate = &self.gates[pin.owner_gate];
                gate.loc
                    .ok_or_else(|| Error::Unplaced(format!("{}/{}", gate.name, pin.pin_name)))
            }
            MemberId::Io(i) => {
                let io = &self.ios[i];
                io.loc.ok_or_else(|| Error::Unplaced(io.name.clone()))
            }
        }
    }

    pub fn pin_location(&self, pin_id: usize) -> Result<(i64, i64)> {
        self.member_location(MemberId::Pin(pin_id))
    }
}

/// Check every database invariant; returns one diagnostic string per
/// violation. An empty list means the database is consistent.
pub fn validate(db: &DesignDatabase) -> Vec<String> {
    let mut diags = Vec::new();
    let declared_layers: Vec<i64> = db.vocab.layer.values().copied().collect();

    // vocabulary: injective, cell ids contiguous from 0
    let mut ids: Vec<i64> = db.vocab.cell_type.values().copied().collect();
    ids.sort_unstable();
    for (i, id) in ids.iter().enumerate() {
        if *id != i as i64 {
            diags.push(format!("vocab: cell_type ids not dense at {id}"));
            break;
        }
    }
    {
        let mut lids = declared_layers.clone();
        lids.sort_unstable();
        lids.dedup();
        if lids.len() != declared_layers.len() {
            diags.push("vocab: layer map not injective".to_string());
        }
    }

    for (i, g) in db.gates.iter().enumerate() {
        if let Some(o) = g.orientation {
            if !(0..=7).contains(&o) {
                diags.push(format!("gate {i} `{}`: orientation {o} out of range", g.name));
            }
        }
        if db.stage >= Stage::Placement
            && matches!(g.place_flag, PLACE_PLACED | PLACE_FIXED)
            && g.loc.is_none()
        {
            diags.push(format!("gate {i} `{}`: placed but has no coordinates", g.name));
        }
        if g.area < 0.0 || g.power_leak < 0.0 {
            diags.push(format!("gate {i} `{}`: negative area/leakage", g.name));
        }
        if db.vocab.cell_type.len() as i64 <= g.cell_type || g.cell_type < 0 {
            diags.push(format!("gate {i} `{}`: cell_type {} unmapped", g.name, g.cell_type));
        }
    }

    let mut pin_net: Vec<u32> = vec![0; db.pins.len()];
    for (i, p) in db.pins.iter().enumerate() {
        if p.owner_gate >= db.gates.len() {
            diags.push(format!("pin {i}: dangling owner gate {}", p.owner_gate));
        }
        if !(0..=2).contains(&p.pin_type) {
            diags.push(format!("pin {i}: pin_type {} out of range", p.pin_type));
        }
    }

    for (i, n) in db.nets.iter().enumerate() {
        if n.pin_count != n.members.len() {
            diags.push(format!(
                "net {i} `{}`: pin_count {} != member count {}",
                n.name,
                n.pin_count,
                n.members.len()
            ));
        }
        for m in &n.members {
            match m {
                MemberId::Pin(p) => {
                    if *p >= db.pins.len() {
                        diags.push(format!("net {i} `{}`: dangling pin {p}", n.name));
                    } else {
                        pin_net[*p] += 1;
                    }
                }
                MemberId::Io(io) => {
                    if *io >= db.ios.len() {
                        diags.push(format!("net {i} `{}`: dangling io {io}", n.name));
                    }
                }
            }
        }
        if let Some(driver) = n.driver {
            let ok = n.members.contains(&driver)
                && match driver {
                    MemberId::Pin(p) => {
                        p < db.pins.len() && db.pins[p].pin_type == PIN_OUTPUT
                    }
                    MemberId::Io(io) => {
                        io < db.ios.len() && db.ios[io].direction == PIN_INPUT
                    }
                };
            if !ok {
                diags.push(format!("net {i} `{}`: invalid driver", n.name));
            }
        }
        if !(0..=5).contains(&n.net_type) {
            diags.push(format!("net {i} `{}`: net_type {} out of range", n.name, n.net_type));
        }
    }
    for (p, count) in pin_net.iter().enumerate() {
        if *count > 1 {
            diags.push(format!("pin {p}: member of {count} nets"));
        }
    }

    for (i, io) in db.ios.iter().enumerate() {
        if !(0..=2).contains(&io.direction) {
            diags.push(format!("io {i} `{}`: direction out of range", io.name));
        }
        if let Some(o) = io.orientation {
            if !(0..=7).contains(&o) {
                diags.push(format!("io {i} `{}`: orientation out of range", io.name));
            }
        }
        if let Some(l) = io.layer_id {
            if !declared_layers.contains(&l) {
                diags.push(format!("io {i} `{}`: layer_id {l} not declared", io.name));
            }
        }
    }

    diags
}
