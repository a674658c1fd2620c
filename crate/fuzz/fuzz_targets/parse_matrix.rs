#![no_main]

use hcflow_core::io::{parse_matrix, write_matrix};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(a) = parse_matrix(text) else { return };
    let back = parse_matrix(&write_matrix(&a)).expect("written matrices parse");
    assert_eq!(back, a);
});
