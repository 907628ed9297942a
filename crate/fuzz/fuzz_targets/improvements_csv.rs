#![no_main]

use compatup::report::{read_improvements_csv, render_improvements_markdown, write_improvements_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(table) = read_improvements_csv(data) {
        let mut out = Vec::new();
        write_improvements_csv(&table, &mut out).unwrap();
        let again = read_improvements_csv(out.as_slice()).unwrap();
        assert_eq!(again.rows, table.rows);
        assert!(table
            .correlations
            .iter()
            .flat_map(|r| r.values.iter().flatten())
            .all(|v| (-1.0..=1.0).contains(v)));
        let _ = render_improvements_markdown(&table);
    }
});
