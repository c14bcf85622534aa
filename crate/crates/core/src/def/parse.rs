// SPDX-License-Identifier: Apache-2.0

//! Recursive-descent DEF parser over the token stream.

use std::collections::{BTreeMap, HashSet};

use super::token::{tokenize_str, DefToken};
use super::*;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Parsed {
    pub design: RawDesign,
    pub warnings: Vec<String>,
}

struct Cursor<'a> {
    toks: &'a [DefToken],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&'a DefToken> {
        self.toks.get(self.pos)
    }

    fn peek_at(&self, off: usize) -> Option<&'a DefToken> {
        self.toks.get(self.pos + off)
    }

    fn next(&mut self) -> Option<&'a DefToken> {
        let t = self.toks.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn line(&self) -> u32 {
        self.peek()
            .or_else(|| self.toks.last())
            .map(|t| t.line)
            .unwrap_or(0)
    }

    fn unexpected(&self, expected: &str) -> Error {
        Error::UnexpectedToken {
            expected: expected.to_string(),
            got: self
                .peek()
                .map(|t| t.text.clone())
                .unwrap_or_else(|| "<eof>".to_string()),
            line: self.line(),
        }
    }

    fn expect(&mut self, text: &str) -> Result<&'a DefToken> {
        match self.peek() {
            Some(t) if t.is(text) => Ok(self.next().unwrap()),
            _ => Err(self.unexpected(&format!("`{text}`"))),
        }
    }

    fn expect_i64(&mut self) -> Result<i64> {
        match self.peek().and_then(|t| t.as_i64()) {
            Some(v) => {
                self.next();
                Ok(v)
            }
            None => Err(self.unexpected("integer")),
        }
    }

    fn expect_name(&mut self) -> Result<String> {
        match self.peek() {
            Some(t) if !matches!(t.kind, super::TokenKind::Punct) => {
                let s = t.text.clone();
                self.next();
                Ok(s)
            }
            _ => Err(self.unexpected("name")),
        }
    }

    /// `( x y )` with no wildcard allowed.
    fn expect_point(&mut self) -> Result<(i64, i64)> {
        self.expect("(")?;
        let x = self.expect_i64()?;
        let y = self.expect_i64()?;
        self.expect(")")?;
        Ok((x, y))
    }

    /// Consume tokens up to and including the terminating `;`, returning the
    /// statement's token texts (terminator excluded). Used for opaque records.
    fn take_statement(&mut self, lead: &str) -> Result<OpaqueRecord> {
        let mut rec = vec![lead.to_string()];
        loop {
            match self.next() {
                Some(t) if t.is(";") => return Ok(rec),
                Some(t) => rec.push(t.text.clone()),
                None => return Err(self.unexpected("`;`")),
            }
        }
    }

    /// Skip an unrecognized `+ KEY ...` property: everything up to the next
    /// `+`, `-` or `;` at this nesting level.
    fn skip_property(&mut self) {
        let mut depth = 0usize;
        while let Some(t) = self.peek() {
            match t.text.as_str() {
                "(" => depth += 1,
                ")" => depth = depth.saturating_sub(1),
                "+" | "-" | ";" if depth == 0 => return,
                _ => {}
            }
            self.next();
        }
    }
}

pub fn parse_str(input: &str) -> Result<Parsed> {
    parse_def(&tokenize_str(input)?)
}

pub fn parse_def(tokens: &[DefToken]) -> Result<Parsed> {
    let mut c = Cursor { toks: tokens, pos: 0 };
    let mut d = RawDesign::default();
    let mut warnings = Vec::new();

    while let Some(t) = c.peek() {
        match t.text.as_str() {
            "VERSION" | "BUSBITCHARS" | "DIVIDERCHAR" | "TECHNOLOGY" => {
                let lead = t.text.clone();
                c.next();
                c.take_statement(&lead)?;
            }
            "DESIGN" => {
                c.next();
                d.design_name = c.expect_name()?;
                c.expect(";")?;
            }
            "UNITS" => {
                c.next();
                c.expect("DISTANCE")?;
                c.expect("MICRONS")?;
                d.dbu_per_micron = Some(c.expect_i64()?);
                c.expect(";")?;
            }
            "DIEAREA" => {
                c.next();
                let (x_lo, y_lo) = c.expect_point()?;
                let (x_hi, y_hi) = c.expect_point()?;
                c.expect(";")?;
                d.die_area = Some(Rect { x_lo, y_lo, x_hi, y_hi });
            }
            "ROW" => {
                c.next();
                d.rows.push(c.take_statement("ROW")?);
            }
            "TRACKS" => {
                c.next();
                d.tracks.push(c.take_statement("TRACKS")?);
            }
            "GCELLGRID" => {
                c.next();
                d.gcellgrid.push(c.take_statement("GCELLGRID")?);
            }
            "VIAS" => parse_vias(&mut c, &mut d)?,
            "COMPONENTS" => parse_components(&mut c, &mut d)?,
            "PINS" => parse_pins(&mut c, &mut d)?,
            "NETS" => parse_nets(&mut c, &mut d, false)?,
            "SPECIALNETS" => parse_nets(&mut c, &mut d, true)?,
            "END" => {
                c.next();
                match c.peek() {
                    Some(t) if t.is("DESIGN") => {
                        c.next();
                        break;
                    }
                    _ => return Err(c.unexpected("`DESIGN` after `END`")),
                }
            }
            _ => {
                // Unknown top-level section or statement: tokenize, don't reject.
                let lead = t.text.clone();
                c.next();
                c.take_statement(&lead)?;
            }
        }
    }

    check_counts(&d, &mut warnings);
    check_units(&d)?;
    check_duplicates(&d)?;
    Ok(Parsed { design: d, warnings })
}

fn check_counts(d: &RawDesign, warnings: &mut Vec<String>) {
    let actual: &[(&str, usize)] = &[
        ("COMPONENTS", d.components.len()),
        ("PINS", d.pins.len()),
        ("NETS", d.nets.len()),
        ("SPECIALNETS", d.special_nets.len()),
        ("VIAS", d.vias.len()),
    ];
    for (section, n) in actual {
        if let Some(declared) = d.declared_counts.get(*section) {
            if *declared != *n as i64 {
                warnings.push(format!(
                    "WARN {section}: declared {declared} entries, found {n}"
                ));
            }
        }
    }
}

fn check_units(d: &RawDesign) -> Result<()> {
    if d.dbu_per_micron.is_some() {
        return Ok(());
    }
    let has_coords = d.die_area.is_some()
        || d.components.iter().any(|c| c.loc.is_some())
        || d.pins.iter().any(|p| p.ports.iter().any(|q| q.placed.is_some()))
        || d.nets.iter().any(|n| !n.routed_paths.is_empty())
        || d.special_nets.iter().any(|n| !n.routed_paths.is_empty());
    if has_coords {
        Err(Error::MissingUnits)
    } else {
        Ok(())
    }
}

fn check_duplicates(d: &RawDesign) -> Result<()> {
    let mut seen = HashSet::new();
    for comp in &d.components {
        if !seen.insert(comp.name.as_str()) {
            return Err(Error::DuplicateName {
                kind: "component",
                name: comp.name.clone(),
            });
        }
    }
    seen.clear();
    for net in d.nets.iter().chain(&d.special_nets) {
        if !seen.insert(net.name.as_str()) {
            return Err(Error::DuplicateName {
                kind: "net",
                name: net.name.clone(),
            });
        }
    }
    Ok(())
}

fn section_header(
    c: &mut Cursor,
    d: &mut BTreeMap<String, i64>,
    section: &'static str,
) -> Result<()> {
    c.expect(section)?;
    let count = c.expect_i64()?;
    c.expect(";")?;
    d.insert(section.to_string(), count);
    Ok(())
}

fn parse_vias(c: &mut Cursor, d: &mut RawDesign) -> Result<()> {
    section_header(c, &mut d.declared_counts, "VIAS")?;
    while let Some(t) = c.peek() {
        if t.is("END") {
            c.next();
            c.expect("VIAS")?;
            return Ok(());
        }
        c.expect("-")?;
        d.vias.push(c.take_statement("-")?);
    }
    Err(c.unexpected("`END VIAS`"))
}

fn parse_components(c: &mut Cursor, d: &mut RawDesign) -> Result<()> {
    section_header(c, &mut d.declared_counts, "COMPONENTS")?;
    while let Some(t) = c.peek() {
        if t.is("END") {
            c.next();
            c.expect("COMPONENTS")?;
            return Ok(());
        }
        c.expect("-")?;
        let name = c.expect_name()?;
        let cell_master = c.expect_name()?;
        let mut comp = RawComponent {
            name,
            cell_master,
            place_status: PlaceStatus::Unplaced,
            loc: None,
            orientation: None,
        };
        loop {
            match c.peek() {
                Some(t) if t.is(";") => {
                    c.next();
                    break;
                }
                Some(t) if t.is("+") => {
                    c.next();
                    match c.peek().map(|t| t.text.as_str()) {
                        Some(kw @ ("PLACED" | "FIXED" | "COVER")) => {
                            comp.place_status = match kw {
                                "PLACED" => PlaceStatus::Placed,
                                "FIXED" => PlaceStatus::Fixed,
                                _ => PlaceStatus::Cover,
                            };
                            c.next();
                            comp.loc = Some(c.expect_point()?);
                            comp.orientation = Some(c.expect_name()?);
                        }
                        Some("UNPLACED") => {
                            c.next();
                            comp.place_status = PlaceStatus::Unplaced;
                        }
                        _ => c.skip_property(),
                    }
                }
                _ => return Err(c.unexpected("`+` or `;` in component")),
            }
        }
        d.components.push(comp);
    }
    Err(c.unexpected("`END COMPONENTS`"))
}

fn parse_pins(c: &mut Cursor, d: &mut RawDesign) -> Result<()> {
    section_header(c, &mut d.declared_counts, "PINS")?;
    while let Some(t) = c.peek() {
        if t.is("END") {
            c.next();
            c.expect("PINS")?;
            return Ok(());
        }
        c.expect("-")?;
        let name = c.expect_name()?;
        let mut pin = RawPin {
            name,
            net: None,
            direction: None,
            use_class: None,
            ports: Vec::new(),
        };
        loop {
            match c.peek() {
                Some(t) if t.is(";") => {
                    c.next();
                    break;
                }
                Some(t) if t.is("+") => {
                    c.next();
                    match c.peek().map(|t| t.text.as_str()) {
                        Some("NET") => {
                            c.next();
                            pin.net = Some(c.expect_name()?);
                        }
                        Some("DIRECTION") => {
                            c.next();
                            pin.direction = Some(c.expect_name()?);
                        }
                        Some("USE") => {
                            c.next();
                            pin.use_class = Some(c.expect_name()?);
                        }
                        Some("PORT") => {
                            c.next();
                            pin.ports.push(RawPort {
                                layer: None,
                                layer_rect: None,
                                placed: None,
                            });
                        }
                        Some("LAYER") => {
                            c.next();
                            let layer = c.expect_name()?;
                            let (a, b) = c.expect_point()?;
                            let (x, y) = c.expect_point()?;
                            let port = current_port(&mut pin);
                            port.layer = Some(layer);
                            port.layer_rect = Some((a, b, x, y));
                        }
                        Some("PLACED" | "FIXED") => {
                            c.next();
                            let (x, y) = c.expect_point()?;
                            let orient = c.expect_name()?;
                            current_port(&mut pin).placed = Some((x, y, orient));
                        }
                        _ => c.skip_property(),
                    }
                }
                _ => return Err(c.unexpected("`+` or `;` in pin")),
            }
        }
        d.pins.push(pin);
    }
    Err(c.unexpected("`END PINS`"))
}

fn current_port(pin: &mut RawPin) -> &mut RawPort {
    if pin.ports.is_empty() {
        pin.ports.push(RawPort {
            layer: None,
            layer_rect: None,
            placed: None,
        });
    }
    pin.ports.last_mut().unwrap()
}

fn parse_nets(c: &mut Cursor, d: &mut RawDesign, special: bool) -> Result<()> {
    let section = if special { "SPECIALNETS" } else { "NETS" };
    c.expect(section)?;
    let count = c.expect_i64()?;
    c.expect(";")?;
    d.declared_counts.insert(section.to_string(), count);
    loop {
        match c.peek() {
            Some(t) if t.is("END") => {
                c.next();
                c.expect(section)?;
                return Ok(());
            }
            Some(t) if t.is("-") => {
                c.next();
                let net = parse_net_entry(c)?;
                if special {
                    d.special_nets.push(net);
                } else {
                    d.nets.push(net);
                }
            }
            _ => return Err(c.unexpected(&format!("`-` or `END {section}`"))),
        }
    }
}

fn parse_net_entry(c: &mut Cursor) -> Result<RawNet> {
    let name = c.expect_name()?;
    let mut net = RawNet {
        name,
        use_class: None,
        connections: Vec::new(),
        routed_paths: Vec::new(),
    };
    loop {
        match c.peek() {
            Some(t) if t.is("(") => {
                c.next();
                let owner = c.expect_name_or_star()?;
                let pin = c.expect_name()?;
                c.expect(")")?;
                net.connections.push(match owner.as_deref() {
                    None => NetConn::AllComponents { pin },
                    Some("PIN") => NetConn::Io { pin },
                    Some(comp) => NetConn::Gate {
                        comp: comp.to_string(),
                        pin,
                    },
                });
            }
            Some(t) if t.is("+") => {
                c.next();
                match c.peek().map(|t| t.text.as_str()) {
                    Some("USE") => {
                        c.next();
                        net.use_class = Some(c.expect_name()?);
                    }
                    Some("ROUTED") => {
                        c.next();
                        parse_routed(c, &mut net)?;
                    }
                    _ => c.skip_property(),
                }
            }
            Some(t) if t.is(";") => {
                c.next();
                return Ok(net);
            }
            _ => return Err(c.unexpected("`(`, `+` or `;` in net")),
        }
    }
}

impl<'a> Cursor<'a> {
    /// Name or the `*` wildcard (returns None for the wildcard).
    fn expect_name_or_star(&mut self) -> Result<Option<String>> {
        match self.peek() {
            Some(t) if t.is("*") => {
                self.next();
                Ok(None)
            }
            _ => Ok(Some(self.expect_name()?)),
        }
    }

    /// Routed point with `*` wildcard expansion against `prev`.
    fn expect_routed_point(&mut self, prev: Option<(i64, i64)>) -> Result<(i64, i64)> {
        self.expect("(")?;
        let x = self.wild_coord(prev.map(|p| p.0))?;
        let y = self.wild_coord(prev.map(|p| p.1))?;
        // optional extension value
        if self.peek().map(|t| t.as_i64().is_some()).unwrap_or(false) {
            self.next();
        }
        self.expect(")")?;
        Ok((x, y))
    }

    fn wild_coord(&mut self, prev: Option<i64>) -> Result<i64> {
        match self.peek() {
            Some(t) if t.is("*") => match prev {
                Some(v) => {
                    self.next();
                    Ok(v)
                }
                None => Err(self.unexpected("absolute coordinate (no previous point for `*`)")),
            },
            _ => self.expect_i64(),
        }
    }
}

fn parse_routed(c: &mut Cursor, net: &mut RawNet) -> Result<()> {
    loop {
        let layer = c.expect_name()?;
        let mut path = RoutedPath {
            layer,
            width: None,
            shape: None,
            points: Vec::new(),
            via_names: Vec::new(),
        };
        // SPECIALNETS: explicit width, optionally followed by `+ SHAPE kind`
        if let Some(w) = c.peek().and_then(|t| t.as_i64()) {
            c.next();
            path.width = Some(w);
        }
        if c.peek().map(|t| t.is("+")).unwrap_or(false)
            && c.peek_at(1).map(|t| t.is("SHAPE")).unwrap_or(false)
        {
            c.next();
            c.next();
            path.shape = Some(c.expect_name()?);
        }
        loop {
            match c.peek() {
                Some(t) if t.is("(") => {
                    let p = c.expect_routed_point(path.points.last().copied())?;
                    path.points.push(p);
                }
                Some(t) if t.is("NEW") => {
                    c.next();
                    break;
                }
                Some(t) if t.is(";") || t.is("+") => {
                    net.routed_paths.push(path);
                    return Ok(());
                }
                Some(t) if !matches!(t.kind, super::TokenKind::Punct) => {
                    // any non-layer identifier inside a path is a via name
                    path.via_names.push(t.text.clone());
                    c.next();
                }
                _ => return Err(c.unexpected("point, via, `NEW` or `;` in routed path")),
            }
        }
        net.routed_paths.push(path);
    }
}
