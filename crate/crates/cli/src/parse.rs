use anyhow::{anyhow, bail, Context, Result};

/// A decimal or a fraction `a/b`.
pub fn parse_number(s: &str) -> Result<f64> {
    let s = s.trim();
    match s.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num
                .trim()
                .parse()
                .with_context(|| format!("bad numerator in `{s}`"))?;
            let den: f64 = den
                .trim()
                .parse()
                .with_context(|| format!("bad denominator in `{s}`"))?;
            if den == 0.0 {
                bail!("zero denominator in `{s}`");
            }
            Ok(num / den)
        }
        None => s.parse().map_err(|_| anyhow!("`{s}` is not a number")),
    }
}

/// Comma-separated list of [`parse_number`] entries.
pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    if s.trim().is_empty() {
        bail!("empty list");
    }
    s.split(',').map(parse_number).collect()
}
