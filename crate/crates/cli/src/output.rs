//! CSV rendering with a provenance header and fixed number formatting.

use std::fmt::Write as _;

/// Shortest rendering of `x` at 12 significant digits, independent of
/// locale: fixed notation for exponents in `[-5, 12)`, scientific
/// otherwise; trailing zeros are dropped.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        trim_fraction(format!("{:.*}", (11 - exp) as usize, x))
    } else {
        format!("{}e{exp}", trim_fraction(mantissa.to_string()))
    }
}

fn trim_fraction(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

pub fn flag(b: bool) -> String {
    if b { "1" } else { "0" }.into()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub command: &'static str,
    pub config_hash: String,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, prov: &Provenance) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "# gaussbench {} command={} config_sha256={} seed={}",
            env!("CARGO_PKG_VERSION"),
            prov.command,
            prov.config_hash,
            prov.seed
        )
        .expect("write to string");
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(num(1.0), "1");
        assert_eq!(num(0.1), "0.1");
        assert_eq!(num(2.0f64.sqrt()), "1.41421356237");
        assert_eq!(num(-123456.789), "-123456.789");
        assert_eq!(num(8097.5812345678901), "8097.58123457");
        assert_eq!(num(1e-7), "1e-7");
        assert_eq!(num(1.5e-6), "1.5e-6");
        assert_eq!(num(3.25e-5), "0.0000325");
        assert_eq!(num(6.02214076e23), "6.02214076e23");
        assert_eq!(num(999999999999.9), "1e12");
        assert_eq!(num(99999.99999999999), "100000");
        assert_eq!(num(-0.0), "0");
        assert_eq!(num(f64::INFINITY), "inf");
        assert_eq!(num(f64::NAN), "nan");
    }

    #[test]
    fn round_trips_to_twelve_digits() {
        for x in [0.123456789012345, 7.0 / 3.0, 1e-300, 4.2e17, 52.0 + 1.0 / 7.0] {
            let back: f64 = num(x).parse().unwrap();
            assert!(((back - x) / x).abs() < 5e-12, "{x}");
        }
    }

    #[test]
    fn header_and_rows() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![num(1.0), flag(true)]);
        let prov = Provenance {
            command: "capacity",
            config_hash: "abc".into(),
            seed: 7,
        };
        let s = t.render(&prov);
        let lines: Vec<&str> = s.lines().collect();
        assert!(lines[0].starts_with("# gaussbench "));
        assert!(lines[0].ends_with("command=capacity config_sha256=abc seed=7"));
        assert_eq!(&lines[1..], ["a,b", "1,1"]);
    }
}
