#![no_main]
use condens::models::ModelConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(cfg) = serde_json::from_slice::<ModelConfig>(data) {
        // Building may reject the parameters, but must not panic.
        if let Ok(model) = cfg.build() {
            let (a, b) = model.interval();
            let _ = model.exact_density(0.5 * (a + b));
            for v in model.cde_variants() {
                let _ = model.cde(&v);
            }
        }
    }
});
