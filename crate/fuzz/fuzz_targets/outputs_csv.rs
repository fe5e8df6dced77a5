#![no_main]

use amrpc::io::{parse_outputs, write_outputs};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(table) = parse_outputs(text) else {
        return;
    };
    if let Some(g) = &table.grid {
        assert_eq!(g.cells(), table.values.ncols());
    }
    if let Ok(out) = write_outputs(&table.values, &table.names, table.grid.as_ref()) {
        let back = parse_outputs(&out).expect("written outputs parse");
        assert_eq!(back.names, table.names);
        assert_eq!(back.grid, table.grid);
        assert_eq!(back.values.shape(), table.values.shape());
    }
});
