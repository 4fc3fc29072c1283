//! Every checked-in fuzz seed is a valid input for its target.

use std::fs;
use std::path::{Path, PathBuf};

use petal::backend::{parse_solution, SolutionFormat};
use petal::io::{parse_design_str, parse_instance_str};

fn seeds(target: &str) -> Vec<(PathBuf, String)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fuzz/corpus").join(target);
    let mut out: Vec<(PathBuf, String)> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| {
            let text = fs::read_to_string(&p).unwrap();
            (p, text)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out
}

#[test]
fn instance_seeds_parse_and_round_trip() {
    for (path, text) in seeds("parse_instance") {
        let inst = parse_instance_str(&text, &path.display().to_string()).unwrap();
        assert_eq!(parse_instance_str(&inst.to_toml(), "again").unwrap(), inst);
    }
}

#[test]
fn design_seeds_parse() {
    for (path, text) in seeds("parse_design") {
        parse_design_str(&text, &path.display().to_string()).unwrap();
    }
}

#[test]
fn solution_seeds_parse() {
    for (path, text) in seeds("parse_solution") {
        parse_solution(&text, SolutionFormat::Auto).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}

#[test]
fn truncated_seeds_do_not_panic() {
    for target in ["parse_instance", "parse_design", "parse_solution"] {
        for (_, text) in seeds(target) {
            for cut in (0..text.len()).step_by(7).filter(|&c| text.is_char_boundary(c)) {
                let t = &text[..cut];
                let _ = parse_instance_str(t, "cut");
                let _ = parse_design_str(t, "cut");
                let _ = parse_solution(t, SolutionFormat::Auto);
            }
        }
    }
}
