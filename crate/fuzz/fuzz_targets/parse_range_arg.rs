#![no_main]
use libfuzzer_sys::fuzz_target;
use rotom_cli::args::parse_range;

fuzz_target!(|data: &str| {
    if let Ok(range) = parse_range(data) {
        let points = range.points();
        assert_eq!(points.len(), range.count);
        assert!(points.iter().all(|x| x.is_finite()));
    }
});
