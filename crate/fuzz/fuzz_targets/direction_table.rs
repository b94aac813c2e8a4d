#![no_main]
use condens::points::DirectionTable;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(t) = DirectionTable::parse(text) {
        for j in 0..t.max_dim().min(64) {
            let _ = t.directions(j);
        }
    }
});
