use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::projective::C64;

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// Header row always present, LF terminators.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(create(path)?);
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Config(format!("csv: {other:?}")),
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Config(format!("json: {e}")))?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn write_jsonl<T: Serialize>(path: &Path, lines: &[T]) -> Result<()> {
    let mut w = create(path)?;
    for l in lines {
        serde_json::to_writer(&mut w, l).map_err(|e| Error::Config(format!("json: {e}")))?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// `x` with 15 significant digits.
pub fn sig15(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        format!("{:.*}", (14 - exp) as usize, x)
    } else {
        format!("{x:.14e}")
    }
}

pub fn complex15(z: C64) -> String {
    if z.im == 0.0 {
        sig15(z.re)
    } else if z.re == 0.0 {
        format!("{}i", sig15(z.im))
    } else {
        let sign = if z.im < 0.0 { '-' } else { '+' };
        format!("{}{sign}{}i", sig15(z.re), sig15(z.im.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(sig15(4.0 / 3.0), "1.33333333333333");
        assert_eq!(sig15((4.0f64 / 3.0).ln()), "0.287682072451781");
        assert_eq!(sig15(1.5), "1.50000000000000");
        assert_eq!(complex15(C64::new(0.0, std::f64::consts::PI)), "3.14159265358979i");
        assert_eq!(complex15(C64::new(1.0, -0.5)), "1.00000000000000-0.500000000000000i");
    }

    #[test]
    fn csv_has_header_and_lf() {
        #[derive(Serialize)]
        struct Row {
            a: u32,
            b: f64,
        }
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x/out.csv");
        write_csv(&p, &[Row { a: 1, b: 0.5 }, Row { a: 2, b: -1e-20 }]).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "a,b\n1,0.5\n2,-1e-20\n");
    }
}
