//! Fixed-decimal number formatting for exports and rendered tables.
//!
//! Every number that leaves the simulator goes through [`fixed`] so that
//! repeated runs produce byte-identical files. `format!("{:.4}")` rounds
//! half-to-even, which is not what the reference tables use; we round
//! half-up (half away from zero) instead.

/// Format `value` with exactly `decimals` fractional digits, rounding
/// half-up. `fixed(122.06555, 4)` is `"122.0656"`, `fixed(100.0, 4)` is
/// `"100.0000"`.
pub fn fixed(value: f64, decimals: u32) -> String {
    from_units(units(value, decimals), decimals)
}

/// The scaled-integer form of [`fixed`]: `value` expressed in
/// `10^-decimals` units, rounded half-up, sign preserved. Tables that
/// total a column of printed figures sum these units so the total always
/// agrees digit-for-digit with the figures above it.
pub fn units(value: f64, decimals: u32) -> i128 {
    assert!(value.is_finite(), "cannot format non-finite value {value}");
    let scale = 10i128.pow(decimals);
    let scaled = value.abs() * scale as f64;
    // +0.5 then floor implements half-up on the scaled magnitude.
    let magnitude = (scaled + 0.5).floor() as i128;
    if value < 0.0 {
        -magnitude
    } else {
        magnitude
    }
}

/// Render a value already expressed in `10^-decimals` units.
pub fn from_units(units: i128, decimals: u32) -> String {
    let scale = 10i128.pow(decimals);
    let sign = if units < 0 { "-" } else { "" };
    let magnitude = units.unsigned_abs();
    if decimals == 0 {
        return format!("{sign}{magnitude}");
    }
    let whole = magnitude / scale.unsigned_abs();
    let frac = magnitude % scale.unsigned_abs();
    format!("{sign}{whole}.{frac:0width$}", width = decimals as usize)
}

/// Meters: four decimals, matching the reference distance tables.
pub fn meters(value: f64) -> String {
    fixed(value, 4)
}

/// Volts: four decimals (`3.2920`, `1.3383`).
pub fn volts(value: f64) -> String {
    fixed(value, 4)
}

/// Percentages: three decimals (`60.000`, `40.555`).
pub fn percent(value: f64) -> String {
    fixed(value, 3)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounds_half_up() {
        assert_eq!(fixed(1.00005, 4), "1.0001");
        assert_eq!(fixed(0.12344999, 4), "0.1234");
        assert_eq!(fixed(2.5, 0), "3");
        // Half-to-even would give 0.1234 here.
        assert_eq!(fixed(0.12345000001, 4), "0.1235");
    }

    #[test]
    fn pads_fractional_zeros() {
        assert_eq!(fixed(100.0, 4), "100.0000");
        assert_eq!(fixed(3.292, 4), "3.2920");
        assert_eq!(fixed(60.0, 3), "60.000");
        assert_eq!(fixed(0.04, 4), "0.0400");
    }

    #[test]
    fn reference_distances_format_as_printed() {
        assert_eq!(meters(14900f64.sqrt()), "122.0656");
        assert_eq!(meters(16400f64.sqrt()), "128.0625");
        assert_eq!(meters(12500f64.sqrt()), "111.8034");
        assert_eq!(meters(32500f64.sqrt()), "180.2776");
        assert_eq!(meters(130.0), "130.0000");
    }

    #[test]
    fn negative_values_keep_sign() {
        assert_eq!(fixed(-1.00005, 4), "-1.0001");
        // A negative value that rounds to zero must not print "-0".
        assert_eq!(fixed(-0.00001, 4), "0.0000");
    }

    #[test]
    fn summed_units_total_printed_figures() {
        // 128.0625 + 180.2776 = 308.3401 in the reference tables; the raw
        // f64 sum of the unrounded legs lands a unit lower (308.34005).
        let legs = [16400f64.sqrt(), 32500f64.sqrt()];
        let total: i128 = legs.iter().map(|&d| units(d, 4)).sum();
        assert_eq!(from_units(total, 4), "308.3401");
        assert_eq!(fixed(legs.iter().sum::<f64>(), 4), "308.3400");
    }
}
