//! Golden-file checks for the rendered reference tables.  The byte
//! comparisons pin formatting; the content assertions pin the math, so a
//! formatting change cannot silently absorb a partition change.

use std::collections::{BTreeMap, BTreeSet};

use asc_core::ambiguity::{build_class, render_class_table, render_sign_table, ErrorSet};
use asc_core::channel::{make_toy_noise_ea, ProcessMatrix, EA_GOLDEN};
use asc_core::codes;
use asc_core::stabilizer::{normalizer_classes, render_normalizer_table};

#[test]
fn q3_normalizer_table_matches_golden() {
    let entry = codes::get("q3").unwrap();
    let rendered = render_normalizer_table(entry.code()).unwrap();
    assert_eq!(rendered, include_str!("golden/table2.txt"));
}

#[test]
fn q3_normalizer_classes_hold_the_frozen_elements() {
    let entry = codes::get("q3").unwrap();
    let classes = normalizer_classes(entry.code()).unwrap();
    let actual: BTreeMap<String, BTreeSet<String>> = classes
        .into_iter()
        .map(|(label, elements)| {
            (label, elements.iter().map(|e| e.to_string()).collect())
        })
        .collect();
    let expected: BTreeMap<String, BTreeSet<String>> = [
        ("I_L", vec!["III", "XIX", "YYZ", "ZYY"]),
        ("-X_L", vec!["XZI", "IZX", "YXY", "ZXZ"]),
        ("Y_L", vec!["IYI", "XYX", "YIZ", "ZIY"]),
        ("Z_L", vec!["XXI", "IXX", "YZY", "ZZZ"]),
    ]
    .into_iter()
    .map(|(label, elements)| {
        (
            label.to_string(),
            elements.into_iter().map(str::to_string).collect(),
        )
    })
    .collect();
    assert_eq!(actual, expected);
}

#[test]
fn q3_class_table_matches_golden() {
    let entry = codes::get("q3").unwrap();
    let errors =
        ErrorSet::pauli_group_on(entry.code().n(), entry.noisy_coords()).unwrap();
    let class = build_class(entry.code(), &errors).unwrap();
    assert_eq!(render_class_table(&class), include_str!("golden/table3.txt"));
    assert_eq!(class.order_sigma(), 4);
    assert_eq!(class.degree_gamma(), 4);
}

#[test]
fn c_family_sign_tables_match_golden() {
    let mut rendered = String::new();
    for id in ["C1", "C2", "C3"] {
        let entry = codes::get(id).unwrap();
        let errors =
            ErrorSet::pauli_group_on(entry.code().n(), entry.noisy_coords()).unwrap();
        let class = build_class(entry.code(), &errors).unwrap();
        rendered.push_str(id);
        rendered.push('\n');
        rendered.push_str(&render_sign_table(&class));
        rendered.push('\n');
    }
    assert_eq!(rendered, include_str!("golden/table4.txt"));
}

#[test]
fn ea_noise_serialization_matches_golden() {
    let chi = make_toy_noise_ea(EA_GOLDEN);
    let golden = include_str!("golden/ea_noise.json");
    assert_eq!(chi.to_json(), golden);
    let reloaded = ProcessMatrix::from_json(golden).unwrap();
    assert_eq!(reloaded.m(), 2);
    assert!((reloaded.chi() - chi.chi()).camax() < 1e-15);
}
