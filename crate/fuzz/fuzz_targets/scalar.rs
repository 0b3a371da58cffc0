#![no_main]

use libfuzzer_sys::fuzz_target;
use qcat_core::scalar::parse_rational;
use qcat_core::uqg::QParam;
use qcat_core::{CircleValue, Scalar};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(x) = s.parse::<Scalar>() {
        assert_eq!(x.to_string().parse::<Scalar>().unwrap(), x);
    }
    if let Ok(c) = s.parse::<CircleValue>() {
        assert_eq!(c.to_string().parse::<CircleValue>().unwrap(), c);
    }
    let _ = parse_rational(s);
    let _ = s.parse::<QParam>();
});
