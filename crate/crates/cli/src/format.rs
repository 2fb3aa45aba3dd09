//! Number formatting for CSV artifacts: six significant digits, plain
//! decimal notation, byte-stable across runs.

/// Format with six significant digits and no exponent. Zero prints as
/// "0.00000" so columns stay visually aligned with small values.
pub fn sig6(v: f64) -> String {
    if v == 0.0 {
        return String::from("0.00000");
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{v:.decimals$}")
}
