#![no_main]

use amrpc::io::{decode_reference, encode_reference};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(stats) = decode_reference(data) else {
        return;
    };
    assert_eq!(stats.mean.len(), stats.sd.len());
    let bytes = encode_reference(&stats).expect("decoded reference encodes");
    assert_eq!(decode_reference(&bytes).expect("re-encoded reference decodes"), stats);
});
