#![no_main]

//! Input is `<sidecar json> NUL <csv>`; without a NUL byte the whole input is CSV.

use fluxshift::io::{read_map, Sidecar, Table};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let (head, csv) = match data.iter().position(|&b| b == 0) {
        Some(i) => (Some(&data[..i]), &data[i + 1..]),
        None => (None, data),
    };
    let Ok(table) = Table::read_from(csv) else {
        return;
    };
    let text = table.to_csv_string().expect("table writes");
    assert_eq!(
        Table::read_from(text.as_bytes()).expect("written table reads"),
        table
    );
    let sidecar = head
        .and_then(|h| std::str::from_utf8(h).ok())
        .and_then(|s| Sidecar::from_json_str(s).ok());
    if let Some(sidecar) = sidecar {
        if let Ok(map) = read_map(&table, &sidecar) {
            map.check_shape().expect("read map is well formed");
        }
    }
});
