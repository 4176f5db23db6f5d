#![no_main]

use biasci::io::GridSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(grid) = s.parse::<GridSpec>() else {
        return;
    };
    assert_eq!(grid.values().len(), grid.count);
    let text = grid.to_string();
    let again: GridSpec = text.parse().expect("display output re-parses");
    assert_eq!(again.count, grid.count);
    assert_eq!(again.to_string(), text);
});
