#![no_main]

use hcflow_core::io::{parse_bracket, write_bracket};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(mu) = parse_bracket(text) else { return };
    let back = parse_bracket(&write_bracket(&mu)).expect("written brackets parse");
    assert_eq!(back.matrix(), mu.matrix());
});
