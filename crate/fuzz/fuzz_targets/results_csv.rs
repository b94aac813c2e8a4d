#![no_main]
use condens::experiments::{read_results_from, write_results_to};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = read_results_from(data) {
        let mut buf = Vec::new();
        write_results_to(&rows, &mut buf).unwrap();
        assert_eq!(read_results_from(&buf[..]).unwrap().len(), rows.len());
    }
});
