#![no_main]

use amrpc::config::parse_config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = parse_config(text) {
        // validation already ran; these must not fail afterwards
        cfg.space().expect("validated space");
        cfg.grid().expect("validated grid");
    }
});
