#![no_main]

use compatup::experiment::{ExperimentConfig, RunFile, SynthConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(rf) = RunFile::parse(text) {
        // Anything accepted must survive a round trip through its own output.
        let echoed = rf.experiment.to_toml_string().unwrap();
        assert_eq!(ExperimentConfig::from_toml_str(&echoed).unwrap(), rf.experiment);
    }
    let _ = SynthConfig::from_toml_str(text);
});
