// SPDX-License-Identifier: Apache-2.0

//! Randomized invariants over the core algorithms.

use proptest::prelude::*;

use defgraph::bundle::{parse_manifest, render_manifest};
use defgraph::db::{resolve, Net, Vocabularies};
use defgraph::def::{parse_str, RoutedPath, Stage};
use defgraph::graph::ViewKind;
use defgraph::homo::{merge_graphs, split_dataset, to_homograph, SplitPolicy};
use defgraph::labels::{compute_hpwl, compute_wire_length};
use defgraph::views::{build_view, check_parity, ViewOptions};

fn net_with(points: Vec<(i64, i64)>) -> Net {
    Net {
        name: "n".into(),
        net_type: 0,
        pin_count: 0,
        members: vec![],
        driver: None,
        routed_paths: vec![RoutedPath {
            layer: "metal1".into(),
            width: None,
            shape: None,
            points,
            via_names: vec![],
        }],
        special: false,
    }
}

fn grid_design(locs: &[(i64, i64)]) -> String {
    let mut def = String::from("DESIGN p ;\nUNITS DISTANCE MICRONS 1000 ;\nCOMPONENTS ");
    def.push_str(&locs.len().to_string());
    def.push_str(" ;\n");
    for (i, (x, y)) in locs.iter().enumerate() {
        def.push_str(&format!("- g{i} INV_X1 + PLACED ( {x} {y} ) N ;\n"));
    }
    def.push_str("END COMPONENTS\nNETS 1 ;\n- n0");
    for i in 0..locs.len() {
        def.push_str(&format!(" ( g{i} A )"));
    }
    def.push_str(" ;\nEND NETS\nEND DESIGN\n");
    def
}

proptest! {
    /// Splitting one straight segment at an interior collinear point keeps
    /// the total wirelength.
    #[test]
    fn wirelength_collinear_split_additive(
        x0 in -10_000i64..10_000,
        y in -10_000i64..10_000,
        len in 1i64..10_000,
        frac in 0.0f64..1.0,
    ) {
        let x1 = x0 + len;
        let cut = x0 + ((len as f64) * frac) as i64;
        let whole = net_with(vec![(x0, y), (x1, y)]);
        let split = net_with(vec![(x0, y), (cut, y), (x1, y)]);
        prop_assert_eq!(compute_wire_length(&whole), compute_wire_length(&split));
    }

    /// HPWL is invariant under translation of all member locations.
    #[test]
    fn hpwl_translation_invariant(
        locs in proptest::collection::vec((-50_000i64..50_000, -50_000i64..50_000), 2..8),
        dx in -100_000i64..100_000,
        dy in -100_000i64..100_000,
    ) {
        let base = parse_str(&grid_design(&locs)).unwrap().design;
        let moved: Vec<(i64, i64)> = locs.iter().map(|(x, y)| (x + dx, y + dy)).collect();
        let shifted = parse_str(&grid_design(&moved)).unwrap().design;
        let a = resolve(&base, Vocabularies::default(), None).unwrap();
        let b = resolve(&shifted, Vocabularies::default(), None).unwrap();
        prop_assert_eq!(
            compute_hpwl(&a, &a.nets[0]).unwrap(),
            compute_hpwl(&b, &b.nets[0]).unwrap()
        );
    }

    /// HPWL is never larger than the routed Manhattan wirelength bound for a
    /// single 2-point segment net (sanity relation only).
    #[test]
    fn hpwl_nonnegative(
        locs in proptest::collection::vec((-50_000i64..50_000, -50_000i64..50_000), 1..8),
    ) {
        let raw = parse_str(&grid_design(&locs)).unwrap().design;
        let db = resolve(&raw, Vocabularies::default(), None).unwrap();
        prop_assert!(compute_hpwl(&db, &db.nets[0]).unwrap() >= 0);
    }

    /// Manifest rendering roundtrips arbitrary key/value pairs drawn from
    /// the identifier-ish alphabet actually used in manifests.
    #[test]
    fn manifest_roundtrip(
        entries in proptest::collection::vec(
            ("[a-z][a-z0-9_.]{0,20}", "[ -~]{0,30}"),
            0..20,
        ),
    ) {
        let entries: Vec<(String, String)> = entries
            .into_iter()
            .map(|(k, v)| (k, v.trim().to_string()))
            .collect();
        let text = render_manifest(&entries);
        prop_assert_eq!(parse_manifest(&text).unwrap(), entries);
    }

    /// Design-level split masks partition the labeled rows for any feasible
    /// design count and seed.
    #[test]
    fn split_partitions_labels(designs in 3usize..40, seed in 0u64..1_000) {
        let raw = parse_str(&grid_design(&[(0, 0), (10, 10), (20, 5)])).unwrap().design;
        let db = resolve(&raw, Vocabularies::default(), None).unwrap();
        let mut g = build_view(&db, ViewKind::B, Stage::Placement, ViewOptions::default()).unwrap();
        defgraph::labels::attach_labels(&mut g, &db, Stage::Placement, false).unwrap();
        let h = to_homograph(&g);
        let copies: Vec<_> = (0..designs).map(|_| h.clone()).collect();
        let merged = merge_graphs(&copies).unwrap();
        let masks = split_dataset(&merged, SplitPolicy::default(), seed).unwrap();
        for row in 0..merged.label_mask.len() {
            let n = masks.train[row] as u8 + masks.validation[row] as u8 + masks.test[row] as u8;
            prop_assert_eq!(n, (merged.label_mask[row] == 1) as u8);
        }
        // every split holds at least one design
        for k in 0..3u8 {
            prop_assert!(masks.design_split.iter().any(|x| *x == k));
        }
    }

    /// Parity holds for every view of any random placement design.
    #[test]
    fn parity_on_random_designs(
        locs in proptest::collection::vec((-50_000i64..50_000, -50_000i64..50_000), 2..10),
    ) {
        let raw = parse_str(&grid_design(&locs)).unwrap().design;
        let db = resolve(&raw, Vocabularies::default(), None).unwrap();
        let graphs: Vec<_> = ViewKind::ALL
            .iter()
            .map(|v| build_view(&db, *v, Stage::Placement, ViewOptions::default()).unwrap())
            .collect();
        prop_assert!(check_parity(&graphs).pass);
    }
}
