#![no_main]

use biasci::io::{read_study_csv, write_study_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(rows) = read_study_csv(data) else {
        return;
    };
    let mut first = Vec::new();
    write_study_csv(&mut first, &rows).unwrap();
    let back = read_study_csv(first.as_slice()).expect("written table re-reads");
    assert_eq!(back.len(), rows.len());
    let mut second = Vec::new();
    write_study_csv(&mut second, &back).unwrap();
    assert_eq!(first, second);
});
