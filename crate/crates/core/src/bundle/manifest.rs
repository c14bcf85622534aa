// SPDX-License-Identifier: Apache-2.0

//! The manifest dialect: ordered `key = value` lines, `#` comments, no
//! sections. The same dialect serves as the CLI config-file format.

use crate::error::{Error, Result};

pub fn render_manifest(entries: &[(String, String)]) -> String {
    let mut out = String::new();
    for (k, v) in entries {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(v);
        out.push('\n');
    }
    out
}

pub fn parse_manifest(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        // an empty value renders as `key = ` and trims to `key =`
        let (k, v) = line
            .split_once(" = ")
            .or_else(|| line.strip_suffix(" =").map(|k| (k, "")))
            .ok_or_else(|| Error::CorruptBundle {
                file: "manifest".into(),
                reason: format!("line {}: not `key = value`", i + 1),
            })?;
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_preserves_order() {
        let entries = vec![
            ("b".to_string(), "2".to_string()),
            ("a".to_string(), "1 = 1".to_string()),
        ];
        let text = render_manifest(&entries);
        assert_eq!(parse_manifest(&text).unwrap(), entries);
    }

    #[test]
    fn comments_and_blanks_skipped() {
        let parsed = parse_manifest("# header\n\nk = v\n").unwrap();
        assert_eq!(parsed, vec![("k".to_string(), "v".to_string())]);
    }

    #[test]
    fn malformed_line_rejected() {
        assert!(parse_manifest("garbage").is_err());
    }
}
