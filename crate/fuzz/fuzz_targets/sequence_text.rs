//! The sequence-file parser must never panic, every number it returns is
//! finite, and extrapolating the parsed sequence must also never panic.

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(seq) = eigenbox::driver::parse_sequence_text(text) {
        assert!(seq.iter().all(|v| v.is_finite()));
        if let Ok(limit) = eigenbox::driver::aitken(&seq) {
            assert!(limit.is_finite());
        }
    }
});
