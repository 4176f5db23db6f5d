#![no_main]

use biasci::io::parse_kind_list;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(kinds) = parse_kind_list(s) {
        assert!(!kinds.is_empty());
        let joined: Vec<String> = kinds.iter().map(|k| k.to_string()).collect();
        assert_eq!(parse_kind_list(&joined.join(",")).unwrap(), kinds);
    }
});
