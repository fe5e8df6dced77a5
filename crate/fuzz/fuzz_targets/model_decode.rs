#![no_main]

use amrpc::gsa::{mean_from_coeffs, variance_from_coeffs};
use amrpc::io::{decode_model, encode_model};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(model) = decode_model(data) else {
        return;
    };
    // an accepted model is internally consistent and usable
    let bytes = encode_model(&model).expect("decoded model encodes");
    assert_eq!(decode_model(&bytes).expect("re-encoded model decodes"), model);
    let x: Vec<f64> = (0..model.dim())
        .map(|j| {
            let bp = model.basis.decomposition().breakpoints(j);
            0.5 * (bp[0] + bp[bp.len() - 1])
        })
        .collect();
    assert_eq!(model.predict(&x).len(), model.cells());
    assert_eq!(mean_from_coeffs(&model).len(), model.cells());
    assert_eq!(variance_from_coeffs(&model).len(), model.cells());
});
