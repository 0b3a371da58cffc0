#![no_main]

use libfuzzer_sys::fuzz_target;
use qcat_core::cohomology::Cocycle2;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(x) = Cocycle2::from_json_str(s) {
            assert_eq!(
                Cocycle2::from_json_str(&x.to_json().to_string()).unwrap(),
                x
            );
        }
    }
});
