#![no_main]

use amrpc::io::{parse_design, write_design};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(design) = parse_design(text) else {
        return;
    };
    // whatever parses and can be written must read back bit-for-bit
    if let Ok(out) = write_design(&design) {
        let back = parse_design(&out).expect("written design parses");
        assert_eq!(back.names, design.names);
        assert_eq!(back.provenance, design.provenance);
        let bits = |m: &amrpc::Matrix| m.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&back.values), bits(&design.values));
    }
});
