use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use anyhow::{Context, Result};

/// `%.12g`: 12 significant digits, trailing zeros dropped, exponent form
/// outside `[1e-5, 1e12)`. Negative zero prints as `0`.
pub fn g12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mant, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let fixed = format!("{x:.*}", (11 - exp) as usize);
        trim_zeros(&fixed).to_string()
    } else {
        format!("{}e{}{:02}", trim_zeros(mant), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Header-first CSV with every float through [`g12`].
pub struct Table {
    inner: csv::Writer<BufWriter<File>>,
    width: usize,
}

pub enum Cell {
    F(f64),
    U(u64),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::U(v as u64)
    }
}

impl From<u8> for Cell {
    fn from(v: u8) -> Self {
        Cell::U(v as u64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::U(v as u64)
    }
}

impl Table {
    pub fn create(path: &Path, header: &[&str]) -> Result<Self> {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        let mut inner = csv::Writer::from_writer(BufWriter::new(file));
        inner.write_record(header)?;
        Ok(Table { inner, width: header.len() })
    }

    pub fn row<const N: usize>(&mut self, cells: [Cell; N]) -> Result<()> {
        debug_assert_eq!(N, self.width);
        let fields = cells.iter().map(|c| match c {
            Cell::F(v) => g12(*v),
            Cell::U(v) => v.to_string(),
        });
        self.inner.write_record(fields)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::g12;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(g12(0.1), "0.1");
        assert_eq!(g12(-0.0), "0");
        assert_eq!(g12(1.0 / 3.0), "0.333333333333");
        assert_eq!(g12(2.0f64.sqrt() * 1e3), "1414.21356237");
        assert_eq!(g12(-2.5e-7), "-2.5e-07");
        assert_eq!(g12(123456789012345.0), "1.23456789012e+14");
        assert_eq!(g12(42.0), "42");
        assert_eq!(g12(9.9999999999996), "10");
    }
}
