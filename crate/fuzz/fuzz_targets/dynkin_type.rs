#![no_main]

use libfuzzer_sys::fuzz_target;
use qcat_core::lattice::DynkinType;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(t) = s.parse::<DynkinType>() {
            // anything accepted must print back to something that parses the same
            assert_eq!(t.to_string().parse::<DynkinType>().unwrap(), t);
        }
    }
});
