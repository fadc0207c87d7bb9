//! Number lists on the command line. Tokens may use `pi`, as in `pi/2`,
//! `3*pi/4` or `2/3`.

use std::f64::consts::PI;

pub fn parse_scalar(tok: &str) -> Result<f64, String> {
    let tok = tok.trim();
    if let Ok(v) = tok.parse::<f64>() {
        return Ok(v);
    }
    let (num, den) = match tok.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (tok, None),
    };
    let mut value = 1.0;
    let mut sign = 1.0;
    let mut factors = num;
    if let Some(rest) = factors.strip_prefix('-') {
        sign = -1.0;
        factors = rest;
    }
    for f in factors.split('*') {
        value *= match f.trim() {
            "pi" | "π" => PI,
            v => v.parse::<f64>().map_err(|_| format!("cannot read {tok:?} as a number"))?,
        };
    }
    if let Some(d) = den {
        let d: f64 = d.parse().map_err(|_| format!("cannot read {tok:?} as a number"))?;
        value /= d;
    }
    Ok(sign * value)
}

pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = s.split(',').map(parse_scalar).collect::<Result<_, _>>()?;
    if v.is_empty() {
        return Err("empty list".into());
    }
    Ok(v)
}

pub fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    match parse_list(s)?.as_slice() {
        [lo, hi] if lo < hi => Ok((*lo, *hi)),
        _ => Err(format!("expected `lo,hi` with lo < hi, got {s:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens() {
        assert_eq!(parse_scalar("0.25").unwrap(), 0.25);
        assert_eq!(parse_scalar("pi/2").unwrap(), PI / 2.0);
        assert_eq!(parse_scalar("-3*pi/4").unwrap(), -3.0 * PI / 4.0);
        assert_eq!(parse_scalar("2/3").unwrap(), 2.0 / 3.0);
        assert!(parse_scalar("pie").is_err());
        assert_eq!(parse_list("1, 0,pi/2").unwrap(), vec![1.0, 0.0, PI / 2.0]);
        assert_eq!(parse_pair("-1,4").unwrap(), (-1.0, 4.0));
        assert!(parse_pair("4,1").is_err());
    }
}
