#![no_main]
use condens::experiments::ComboFit;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = serde_json::from_slice::<Vec<ComboFit>>(data);
});
