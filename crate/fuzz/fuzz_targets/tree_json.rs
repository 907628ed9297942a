#![no_main]

use compatup::tree::TreeModel;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(tree) = TreeModel::from_json(text) {
        for fill in [f64::NEG_INFINITY, 0.0, 0.5, f64::INFINITY] {
            let score = tree.predict_score(&vec![fill; tree.feature_arity]).unwrap();
            assert!((0.0..=1.0).contains(&score));
        }
        let again = TreeModel::from_json(&tree.to_json().unwrap()).unwrap();
        assert_eq!(again.nodes(), tree.nodes());
    }
});
