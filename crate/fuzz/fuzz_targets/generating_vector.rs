#![no_main]
use condens::points::GeneratingVector;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(g) = GeneratingVector::from_json(text) {
        for s in 1..8 {
            if let Ok(z) = g.vector(s) {
                assert_eq!(z.len(), s);
                assert!(z.iter().all(|&v| v < g.n));
            }
        }
    }
});
