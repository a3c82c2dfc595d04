#![no_main]

use fluxshift::io::Sidecar;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(sidecar) = Sidecar::from_json_str(text) else {
        return;
    };
    Sidecar::from_json_str(&sidecar.to_json_string()).expect("serialized sidecar parses");
    if let Some(a) = &sidecar.axis1 {
        let _ = a.axis();
    }
});
