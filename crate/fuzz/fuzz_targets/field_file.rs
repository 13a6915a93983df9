#![no_main]

use libfuzzer_sys::fuzz_target;
use sphgreen::fieldio::{field_to_string, parse_field};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(field) = parse_field(text) {
        assert_eq!(field.samples().len(), field.grid().len());
        assert!(field.samples().iter().all(|v| v.is_finite()));
        // whatever parses must survive a write/read cycle unchanged
        let again = parse_field(&field_to_string(&field)).expect("re-parse");
        assert_eq!(again.samples(), field.samples());
    }
});
