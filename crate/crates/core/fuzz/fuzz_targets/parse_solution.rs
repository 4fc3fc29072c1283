#![no_main]

use libfuzzer_sys::fuzz_target;
use petal::backend::{parse_solution, SolutionFormat};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for format in [SolutionFormat::Auto, SolutionFormat::Native, SolutionFormat::Cbc, SolutionFormat::Highs] {
        if let Ok(s) = parse_solution(text, format) {
            assert!(s.values.iter().all(|(_, v)| !v.is_nan()));
        }
    }
});
