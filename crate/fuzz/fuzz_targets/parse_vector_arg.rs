#![no_main]
use libfuzzer_sys::fuzz_target;
use rotom_cli::args::parse_vector;

fuzz_target!(|data: &str| {
    if let Ok(v) = parse_vector(data) {
        assert!(!v.is_empty());
        assert!(v.iter().all(|x| x.is_finite()));
    }
});
