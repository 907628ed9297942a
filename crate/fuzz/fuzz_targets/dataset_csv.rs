#![no_main]

use compatup::dataset::{group_histories, Dataset, Schema};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let mut schema = Schema::new("user", "label");
    for categorical in [vec![], vec!["c".to_owned()]] {
        schema.categorical = categorical;
        if let Ok(ds) = Dataset::from_reader(data, &schema) {
            assert!(ds.instances.iter().all(|i| i.features.len() == ds.arity()));
            assert!(ds.instances.iter().all(|i| i.label <= 1));
            let h = group_histories(&ds, 1).unwrap();
            assert_eq!(h.all.iter().map(|u| u.len()).sum::<usize>(), ds.len());
        }
    }
});
