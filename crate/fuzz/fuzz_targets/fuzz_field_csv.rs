#![no_main]

use libfuzzer_sys::fuzz_target;
use pide::torus::{make_grid, read_field_csv};

// Arbitrary bytes through the field CSV decoder against a couple of grid
// shapes. The decoder must reject malformed rows, wrong node counts, and
// non-finite values with a structured error and never panic.
fuzz_target!(|data: &[u8]| {
    for (d1, d2, n) in [(1, 1, 8), (1, 0, 16)] {
        let grid = make_grid(d1, d2, n).unwrap();
        let _ = read_field_csv(grid, data);
    }
});
