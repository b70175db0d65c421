use std::io::BufReader;

use hexwalk_core::coin::{c0_tilde, random_unitary, swap12};
use hexwalk_core::topo::{classify_path, compute_index, reference_path, Classification, IndexOptions, PhiReport, ScatteringPath, StepClass};
use hexwalk_core::{CoinField, Error};

#[test]
fn path_file_to_report() {
    let g = reference_path(4, 7);
    let text = format!("# reference path\n{g}");
    let back = ScatteringPath::read(BufReader::new(text.as_bytes())).unwrap();
    assert_eq!(back, g);
    let rep = compute_index(&back, &CoinField::constant(swap12()).unwrap(), &IndexOptions::default()).unwrap();
    let json = rep.to_json();
    let parsed: PhiReport = serde_json::from_str(&json).unwrap();
    assert_eq!(parsed, rep);
    assert!(json.contains("\"classification\": \"trace-class\""));
}

#[test]
fn generic_coin_is_bounded_only() {
    let g = reference_path(4, 7);
    let rep = compute_index(&g, &CoinField::constant(random_unitary(3)).unwrap(), &IndexOptions::default()).unwrap();
    assert!(rep.well_defined);
    assert_eq!(rep.classification, Classification::BoundedOnly);
    assert!(rep.trace_estimate > 0.0);
}

#[test]
fn c0_tilde_and_bad_inputs() {
    let g = reference_path(4, 7);
    // c0_tilde keeps c21 but zeroes c33, so the pp leg closes
    let rep = compute_index(&g, &CoinField::constant(c0_tilde()).unwrap(), &IndexOptions::default()).unwrap();
    let hh = rep.sites.iter().filter(|s| s.class == StepClass::Hh);
    assert!(hh.into_iter().all(|s| s.abs_c == 1.0));
    assert!(rep.sites.iter().any(|s| s.class == StepClass::Pp && s.abs_c == 0.0 && s.distance > rep.r));
    assert!(!rep.well_defined);
    assert!(matches!(compute_index(&g, &CoinField::sparse(), &IndexOptions::default()), Err(Error::Input(_))));
    let mut rev = g.waypoints.clone();
    rev.reverse();
    let rev = ScatteringPath::new(rev);
    assert!(classify_path(&rev).is_ok());
    assert!(matches!(compute_index(&rev, &CoinField::constant(swap12()).unwrap(), &IndexOptions::default()), Err(Error::Path(_))));
    let opts = IndexOptions { r: 50, ..IndexOptions::default() };
    assert!(matches!(compute_index(&g, &CoinField::constant(swap12()).unwrap(), &opts), Err(Error::Domain(_))));
}
