#![no_main]

use libfuzzer_sys::fuzz_target;
use noisemod::SimConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(cfg) = SimConfig::from_json_bytes(data) {
        // Anything accepted must yield a usable level table.
        let c = cfg.scheme.constants().expect("validated config derives");
        assert!(c.means.windows(2).all(|w| w[0] < w[1]));
        assert!(c.variances.windows(2).all(|w| w[0] < w[1]));
        assert!(cfg.samples_per_symbol >= 2);
    }
});
