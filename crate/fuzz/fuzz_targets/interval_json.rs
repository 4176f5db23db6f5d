#![no_main]

use biasci::io::parse_intervals_json;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(intervals) = parse_intervals_json(s) else {
        return;
    };
    for iv in &intervals {
        assert!(iv.lower() <= iv.upper());
    }
    let text = biasci::io::intervals_json(&intervals).unwrap();
    assert_eq!(parse_intervals_json(&text).unwrap(), intervals);
});
