//! Grid specifications: `lo:hi:n` log ranges and comma lists.

use crate::error::CliError;

/// Expands `lo:hi:n` into `n` log-spaced values from `lo` to `hi`
/// (either direction), endpoints exact.
pub fn parse_log_range(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Input(format!("invalid log range {spec:?}, expected lo:hi:n"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        return Err(bad());
    };
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    if n == 0 || !(lo > 0.0 && hi > 0.0 && lo.is_finite() && hi.is_finite()) {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    let mut out: Vec<f64> = (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect();
    out[0] = lo;
    out[n - 1] = hi;
    Ok(out)
}

/// Parses a comma-separated list of finite reals.
pub fn parse_list(spec: &str) -> Result<Vec<f64>, CliError> {
    let out = spec
        .split(',')
        .map(|s| s.trim().parse::<f64>().ok().filter(|x| x.is_finite()))
        .collect::<Option<Vec<f64>>>()
        .ok_or_else(|| CliError::Input(format!("invalid list {spec:?}")))?;
    if out.is_empty() {
        return Err(CliError::Input("empty grid".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_range_endpoints_and_spacing() {
        let v = parse_log_range("1e-6:0.5:20").unwrap();
        assert_eq!(v.len(), 20);
        assert_eq!(v[0], 1e-6);
        assert_eq!(v[19], 0.5);
        let r = v[1] / v[0];
        for w in v.windows(2) {
            assert!((w[1] / w[0] - r).abs() < 1e-12);
        }
        let down = parse_log_range("1e-2:1e-4:3").unwrap();
        assert_eq!(down.len(), 3);
        assert!((down[1] - 1e-3).abs() < 1e-17);
        assert_eq!(parse_log_range("0.3:1:1").unwrap(), vec![0.3]);
    }

    #[test]
    fn rejects_bad_ranges() {
        for s in ["1:2", "0:1:3", "-1:1:3", "1:2:0", "a:b:c", "1:2:3:4"] {
            assert!(parse_log_range(s).is_err(), "{s}");
        }
    }

    #[test]
    fn lists() {
        assert_eq!(parse_list("0.05, 0.1346,0.3").unwrap(), vec![0.05, 0.1346, 0.3]);
        assert!(parse_list("1,,2").is_err());
        assert!(parse_list("nan").is_err());
    }
}
