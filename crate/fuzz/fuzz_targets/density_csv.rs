#![no_main]
use condens::experiments::{read_density_from, write_density_to};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = read_density_from(data) {
        let mut buf = Vec::new();
        write_density_to(&rows, &mut buf).unwrap();
        assert_eq!(read_density_from(&buf[..]).unwrap().len(), rows.len());
    }
});
