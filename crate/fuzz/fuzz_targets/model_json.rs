#![no_main]

use libfuzzer_sys::fuzz_target;
use mrlsr::solver::Model;

// Model documents are untrusted input to `predict`. Any document the
// loader accepts must survive a serialize/reload round trip bit-exactly,
// and prediction on its own training inputs must stay finite.
fuzz_target!(|data: &[u8]| {
    if let Ok(model) = Model::from_json_bytes(data) {
        let text = model.to_json_string();
        let again = Model::from_json_str(&text).expect("accepted model round-trips");
        assert_eq!(model.alpha(), again.alpha());
        assert_eq!(model.kernel().bandwidth(), again.kernel().bandwidth());
        assert_eq!(model.report().c0, again.report().c0);

        let predictions = model
            .predict(model.train_inputs())
            .expect("training inputs match the model dimension");
        assert!(predictions.iter().all(|v| v.is_finite()));
    }
});
