#![no_main]

use libfuzzer_sys::fuzz_target;
use qcat_core::monoid::MonoidCocycle;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(x) = MonoidCocycle::from_json_str(s) {
            assert_eq!(
                MonoidCocycle::from_json_str(&x.to_json().to_string()).unwrap(),
                x
            );
        }
    }
});
