#![no_main]

use hcflow_core::almost_abelian::{nilpotent_soliton_canonical, JordanType};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(jt) = text.parse::<JordanType>() else { return };
    assert_eq!(jt.to_string().parse::<JordanType>().as_ref(), Ok(&jt));
    // Keep construction cheap enough for the fuzzer's time budget.
    if jt.n() <= 16 {
        let b = nilpotent_soliton_canonical(&jt);
        assert_eq!(b.nrows(), jt.n());
    }
});
