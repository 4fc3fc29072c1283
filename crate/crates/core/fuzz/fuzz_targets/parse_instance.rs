#![no_main]

use libfuzzer_sys::fuzz_target;
use petal::io::parse_instance_str;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(inst) = parse_instance_str(text, "fuzz") {
        // anything accepted must survive a round trip
        let again = parse_instance_str(&inst.to_toml(), "again").expect("re-parse");
        assert_eq!(inst, again);
    }
});
