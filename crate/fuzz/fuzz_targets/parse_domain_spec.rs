#![no_main]

use exitbounds::domains::{parse_spec_with, DomainSpec};
use exitbounds::Error;
use libfuzzer_sys::fuzz_target;

// `polytope file=...` reads the remainder of the input as the file body.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let (head, body) = text.split_once('\n').unwrap_or((text, ""));
    let load = |_: &str| -> Result<String, Error> { Ok(body.to_string()) };
    let Ok(spec) = parse_spec_with(head, load) else { return };
    let again: DomainSpec = spec.to_string().parse().expect("display output re-parses");
    assert_eq!(again.dim(), spec.dim());
    if spec.is_bounded() {
        assert!(spec.signed_distance(&spec.center()) <= 0.0, "center outside `{spec}`");
    }
});
