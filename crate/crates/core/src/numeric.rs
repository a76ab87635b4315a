//! Small numeric helpers shared by the clustering kernels and the reports.

/// Neumaier's variant of compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl std::iter::FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Compensated sum of an iterator of values.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().collect::<KahanSum>().value()
}

/// `|a - b| <= tol * max(|a|, |b|)`; two exact zeros compare equal.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    let scale = a.abs().max(b.abs());
    (a - b).abs() <= tol * scale
}

/// Relative difference `|a - b| / max(|a|, |b|)`, 0 when both are zero.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Formats a value with 7 significant digits, locale independent.
///
/// Mirrors C's `%.7g`: fixed notation for decimal exponents in `-4..7`,
/// scientific otherwise, trailing zeros stripped. Non-finite values print
/// as `NaN`, `Inf` or `-Inf`.
pub fn fmt_sig7(value: f64) -> String {
    const DIGITS: i32 = 7;
    if value.is_nan() {
        return "NaN".to_string();
    }
    if value.is_infinite() {
        return if value > 0.0 { "Inf" } else { "-Inf" }.to_string();
    }
    if value == 0.0 {
        return "0".to_string();
    }
    // Scientific formatting does the rounding, which settles the exponent.
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, value);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-4..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        strip_zeros(format!("{:.*}", decimals, value))
    } else {
        format!("{}e{}", strip_zeros(mantissa.to_string()), exp)
    }
}

fn strip_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_recovers_small_terms() {
        let mut values = vec![1.0e16];
        values.extend(std::iter::repeat_n(1.0, 1000));
        values.push(-1.0e16);
        assert_eq!(compensated_sum(values.iter().copied()), 1000.0);
        let naive: f64 = values.iter().sum();
        assert_ne!(naive, 1000.0);
    }

    #[test]
    fn sig7_matches_printed_values() {
        assert_eq!(fmt_sig7(1232.76912345), "1232.769");
        assert_eq!(fmt_sig7(1907989.2), "1907989");
        assert_eq!(fmt_sig7(0.81349141), "0.8134914");
        assert_eq!(fmt_sig7(1.0), "1");
        assert_eq!(fmt_sig7(0.0), "0");
        assert_eq!(fmt_sig7(-2.5), "-2.5");
        assert_eq!(fmt_sig7(99999995.0), "1e8");
        assert_eq!(fmt_sig7(0.0000123456789), "1.234568e-5");
        assert_eq!(fmt_sig7(9.99999999), "10");
    }

    #[test]
    fn relative_comparisons() {
        assert!(rel_close(0.0, 0.0, 1e-12));
        assert!(rel_close(1.0, 1.0 + 1e-13, 1e-12));
        assert!(!rel_close(1.0, 1.0 + 1e-11, 1e-12));
        assert_eq!(rel_diff(2.0, 1.0), 0.5);
    }
}
