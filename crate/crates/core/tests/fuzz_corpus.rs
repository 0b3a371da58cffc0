//! Replays the checked-in fuzz seeds through the same round-trip checks as
//! the fuzz targets, so the corpus stays meaningful on a stable toolchain.

use std::path::PathBuf;

use qcat_core::cohomology::{Bicharacter, Cocycle2};
use qcat_core::invariant::BlockCocycle;
use qcat_core::lattice::{DynkinType, Weight};
use qcat_core::monoid::MonoidCocycle;
use qcat_core::scalar::parse_rational;
use qcat_core::uqg::QParam;
use qcat_core::{CircleValue, Scalar};

fn seeds(target: &str) -> Vec<String> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<String> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|f| std::fs::read_to_string(f.unwrap().path()).unwrap())
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

macro_rules! round_trip {
    ($parse:expr, $print:expr, $s:expr) => {{
        let parsed = $parse($s);
        if let Ok(x) = &parsed {
            assert_eq!(&$parse(&$print(x)).unwrap(), x, "{:?}", $s);
        }
        parsed.is_ok()
    }};
}

#[test]
fn text_seeds() {
    let mut accepted = 0;
    for s in seeds("dynkin_type") {
        accepted += round_trip!(
            |s: &str| s.parse::<DynkinType>(),
            |x: &DynkinType| x.to_string(),
            &s
        ) as usize;
    }
    for s in seeds("weight") {
        accepted += round_trip!(
            |s: &str| s.parse::<Weight>(),
            |x: &Weight| x.to_string(),
            &s
        ) as usize;
    }
    for s in seeds("scalar") {
        accepted += round_trip!(
            |s: &str| s.parse::<Scalar>(),
            |x: &Scalar| x.to_string(),
            &s
        ) as usize;
        let _ = round_trip!(
            |s: &str| s.parse::<CircleValue>(),
            |x: &CircleValue| x.to_string(),
            &s
        );
        let _ = parse_rational(&s);
        let _ = s.parse::<QParam>();
    }
    assert!(accepted > 20);
}

#[test]
fn json_seeds() {
    for s in seeds("cocycle_json") {
        assert!(round_trip!(
            Cocycle2::from_json_str,
            |x: &Cocycle2| x.to_json().to_string(),
            &s
        ));
    }
    for s in seeds("bicharacter_json") {
        assert!(round_trip!(
            Bicharacter::from_json_str,
            |x: &Bicharacter| x.to_json().to_string(),
            &s
        ));
    }
    for s in seeds("monoid_cocycle_json") {
        assert!(round_trip!(
            MonoidCocycle::from_json_str,
            |x: &MonoidCocycle| x.to_json().to_string(),
            &s
        ));
    }
    for s in seeds("block_cocycle_json") {
        assert!(round_trip!(
            BlockCocycle::from_json_str,
            |x: &BlockCocycle| x.to_json().to_string(),
            &s
        ));
    }
}
