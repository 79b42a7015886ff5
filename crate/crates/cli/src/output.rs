//! Plain CSV/JSON writers. Numbers are printed with 12 significant digits and a
//! '.' decimal separator regardless of locale.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

/// `x` with 12 significant digits, positional when the exponent is moderate.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    // Round first so the exponent reflects the printed mantissa.
    let sci = format!("{x:.11e}");
    let exp: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).unwrap_or(0);
    if (-5..12).contains(&exp) {
        format!("{:.*}", (11 - exp) as usize, x)
    } else {
        sci
    }
}

pub fn open(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub struct Csv<W: Write> {
    out: W,
    columns: usize,
}

impl<W: Write> Csv<W> {
    pub fn new(mut out: W, header: &[&str]) -> io::Result<Self> {
        writeln!(out, "{}", header.join(","))?;
        Ok(Self {
            out,
            columns: header.len(),
        })
    }

    pub fn row(&mut self, cells: &[String]) -> io::Result<()> {
        debug_assert_eq!(cells.len(), self.columns);
        writeln!(self.out, "{}", cells.join(","))
    }

    pub fn finish(mut self) -> io::Result<()> {
        self.out.flush()
    }
}

pub fn json<T: serde::Serialize>(mut out: impl Write, value: &T) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::num;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(num(0.827669902913), "0.827669902913");
        assert_eq!(num(42.625 / 51.5), "0.827669902913");
        assert_eq!(num(1.0), "1.00000000000");
        assert_eq!(num(0.0), "0");
        assert_eq!(num(-2.5e-9), "-2.50000000000e-9");
        assert_eq!(num(0.99999999999999), "1.00000000000");
        assert_eq!(num(123456.0), "123456.000000");
    }
}
