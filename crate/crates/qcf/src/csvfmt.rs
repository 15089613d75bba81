//! CSV cell formatting shared by the library dumps and the CLI emitters.
//!
//! Floats are written in exponent form with 17 significant digits, enough to
//! round-trip any f64 exactly.

/// `{:.16e}` carries 1 + 16 = 17 significant digits.
pub fn float_cell(x: f64) -> String {
    if x == 0.0 {
        // Avoid "-0" noise in diffable output.
        return "0.0000000000000000e0".to_string();
    }
    format!("{x:.16e}")
}

/// Joins cells into one CSV record.
pub fn record(cells: &[String]) -> String {
    cells.join(",")
}
