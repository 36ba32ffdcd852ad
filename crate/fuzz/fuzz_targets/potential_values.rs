//! The per-triangle value parser must never panic, and every accepted
//! value is finite and non-negative.

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(values) = eigenbox::potential::parse_values_text(text) {
        assert!(!values.is_empty());
        assert!(values.iter().all(|v| v.is_finite() && *v >= 0.0));
    }
});
