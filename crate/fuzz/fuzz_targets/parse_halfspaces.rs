#![no_main]

use exitbounds::domains::{parse_halfspaces, DomainSpec};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(rows) = parse_halfspaces(text) else { return };
    assert!(rows.iter().all(|(n, c)| n.iter().all(|v| v.is_finite()) && c.is_finite()));
    if let Ok(spec) = DomainSpec::polytope(rows) {
        assert!(spec.inradius() > 0.0);
        assert!(spec.signed_distance(&spec.center()) < 0.0);
    }
});
