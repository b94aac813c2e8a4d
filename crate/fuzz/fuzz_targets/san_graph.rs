#![no_main]
use condens::models::{San, SanGraph};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(g) = SanGraph::from_json(text) {
        let _ = San::new(g);
    }
});
