//! Numbers with SPICE engineering suffixes.

/// Parses `1k`, `0.5n`, `2.2meg`, `1g`, `1e-12`, and squared-unit forms such as
/// `1600n2` (1600 nm² = 1.6e-15). Suffixes are case-insensitive; `m` is milli.
pub fn parse_value(token: &str) -> Option<f64> {
    let lower = token.to_ascii_lowercase();
    let split = numeric_prefix_len(&lower);
    if split == 0 {
        return None;
    }
    let (mantissa, rest) = lower.split_at(split);
    let base: f64 = mantissa.parse().ok()?;
    let (scale, rest) = if let Some(r) = rest.strip_prefix("meg") {
        (1e6, r)
    } else {
        match rest.chars().next() {
            Some('f') => (1e-15, &rest[1..]),
            Some('p') => (1e-12, &rest[1..]),
            Some('n') => (1e-9, &rest[1..]),
            Some('u') => (1e-6, &rest[1..]),
            Some('m') => (1e-3, &rest[1..]),
            Some('k') => (1e3, &rest[1..]),
            Some('g') => (1e9, &rest[1..]),
            Some('t') => (1e12, &rest[1..]),
            _ => (1.0, rest),
        }
    };
    let value = match rest {
        "" => base * scale,
        // squared unit, only meaningful after a suffix
        "2" if scale != 1.0 => base * scale * scale,
        _ => return None,
    };
    value.is_finite().then_some(value)
}

/// Length of the leading float literal (sign, digits, point, exponent).
fn numeric_prefix_len(s: &str) -> usize {
    let b = s.as_bytes();
    let mut i = 0;
    if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
        i += 1;
    }
    let digits_start = i;
    while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
        i += 1;
    }
    if i == digits_start {
        return 0;
    }
    // exponent only if followed by digits, so that a bare `e` is never eaten
    if i < b.len() && b[i] == b'e' {
        let mut j = i + 1;
        if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
            j += 1;
        }
        let exp_digits = j;
        while j < b.len() && b[j].is_ascii_digit() {
            j += 1;
        }
        if j > exp_digits {
            i = j;
        }
    }
    i
}

/// Formats a value so that [`parse_value`] recovers it bit-exactly.
pub fn format_value(v: f64) -> String {
    format!("{v:e}")
}
