#![no_main]

use compatup::report::{mean_tradeoff_curves, read_curves_csv, write_curves_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = read_curves_csv(data) {
        let mut out = Vec::new();
        write_curves_csv(&rows, &mut out).unwrap();
        assert_eq!(read_curves_csv(out.as_slice()).unwrap(), rows);
        let _ = mean_tradeoff_curves(&rows, &[]);
    }
});
