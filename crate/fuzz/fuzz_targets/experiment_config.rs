//! The configuration parser must never panic, and whatever it accepts
//! must survive its own validation pass without one either.

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(config) = eigenbox::driver::ExperimentConfig::parse_text(text) {
        let _ = config.validate();
    }
});
