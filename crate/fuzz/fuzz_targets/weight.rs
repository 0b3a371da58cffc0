#![no_main]

use libfuzzer_sys::fuzz_target;
use qcat_core::lattice::Weight;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(w) = s.parse::<Weight>() {
            assert_eq!(w.to_string().parse::<Weight>().unwrap(), w);
        }
    }
});
