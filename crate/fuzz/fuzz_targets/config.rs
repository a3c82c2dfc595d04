#![no_main]

use fluxshift::config::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cfg) = RunConfig::from_json_str(text) else {
        return;
    };
    let Ok(resolved) = cfg.resolve() else {
        return;
    };
    let again = resolved
        .config
        .clone()
        .resolve()
        .expect("resolved config resolves");
    assert_eq!(again.config, resolved.config);
    assert!(again.defaulted.is_empty());
    RunConfig::from_json_str(&resolved.config.to_json_string()).expect("serialized config parses");
    let _ = resolved.config.operating_point();
});
