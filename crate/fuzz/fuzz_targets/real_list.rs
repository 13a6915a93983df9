#![no_main]

use libfuzzer_sys::fuzz_target;
use sphgreen::fieldio::parse_real_list;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(values) = parse_real_list(text) {
        assert!(values.iter().all(|v| v.is_finite()));
    }
});
