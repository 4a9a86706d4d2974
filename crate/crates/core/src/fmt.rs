/// Formats `v` with 17 significant digits, enough for a bit-exact decimal round trip.
pub fn sig17(v: f64) -> String {
    if v == 0.0 {
        // keeps the sign of -0.0 out of reports
        return "0".to_string();
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn special_values() {
        assert_eq!(sig17(0.0), "0");
        assert_eq!(sig17(-0.0), "0");
        assert_eq!(sig17(f64::INFINITY), "inf");
        assert_eq!(sig17(1.0), "1.0000000000000000e0");
    }

    proptest! {
        #[test]
        fn decimal_round_trip_is_bit_exact(bits in any::<u64>()) {
            let v = f64::from_bits(bits);
            prop_assume!(v.is_finite() && v != 0.0);
            let back: f64 = sig17(v).parse().unwrap();
            prop_assert_eq!(back.to_bits(), v.to_bits());
        }
    }
}
