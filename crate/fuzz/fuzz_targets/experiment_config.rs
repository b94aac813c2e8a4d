#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(configs) = condens::experiments::parse_configs(text) {
            for c in configs {
                assert!(c.validate().is_ok());
                let back = serde_json::to_string(&c).unwrap();
                assert!(condens::experiments::parse_configs(&back).is_ok());
            }
        }
    }
});
