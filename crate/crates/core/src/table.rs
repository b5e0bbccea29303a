use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::MomentumPoint;

/// Which computation produced a spectrum value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Riccati,
    Born,
    Semiclassical,
    Qve,
    Fermion,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Riccati,
        Method::Born,
        Method::Semiclassical,
        Method::Qve,
        Method::Fermion,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Riccati => "riccati",
            Method::Born => "born",
            Method::Semiclassical => "semiclassical",
            Method::Qve => "qve",
            Method::Fermion => "fermion",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown method tag '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub k_parallel: f64,
    pub k_perp: f64,
    pub f: f64,
    pub method: Method,
}

impl SpectrumRow {
    pub fn momentum(&self) -> MomentumPoint {
        MomentumPoint {
            k_parallel: self.k_parallel,
            k_perp: self.k_perp,
        }
    }
}

/// Ordered momentum grid with one distribution value per row.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTable {
    pub rows: Vec<SpectrumRow>,
}

pub const CSV_HEADER: [&str; 4] = ["k_parallel", "k_perp", "f", "method"];

/// 17 significant digits, which round-trips every `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

impl SpectrumTable {
    pub fn new(rows: Vec<SpectrumRow>) -> Self {
        Self { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn k_parallel(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.k_parallel).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.f).collect()
    }

    /// Rows produced by one method, in table order.
    pub fn only(&self, method: Method) -> SpectrumTable {
        SpectrumTable::new(self.rows.iter().filter(|r| r.method == method).copied().collect())
    }

    /// Distinct method tags in order of first appearance.
    pub fn methods(&self) -> Vec<Method> {
        let mut seen = Vec::new();
        for r in &self.rows {
            if !seen.contains(&r.method) {
                seen.push(r.method);
            }
        }
        seen
    }

    /// Merges tables row by row: `a[0], b[0], a[1], b[1], ...`.
    pub fn interleave(tables: &[SpectrumTable]) -> Result<SpectrumTable> {
        let Some(first) = tables.first() else {
            return Ok(SpectrumTable::default());
        };
        if tables.iter().any(|t| t.len() != first.len()) {
            return Err(Error::InvalidInput("interleaved tables must have equal length".into()));
        }
        let mut rows = Vec::with_capacity(first.len() * tables.len());
        for i in 0..first.len() {
            rows.extend(tables.iter().map(|t| t.rows[i]));
        }
        Ok(SpectrumTable::new(rows))
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(CSV_HEADER)?;
        for r in &self.rows {
            w.write_record([
                format_float(r.k_parallel),
                format_float(r.k_perp),
                format_float(r.f),
                r.method.as_str().to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers()?.clone();
        if header.iter().ne(CSV_HEADER) {
            return Err(Error::InvalidInput(format!(
                "expected header {}, got {}",
                CSV_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut rows = Vec::new();
        for record in r.records() {
            let record = record?;
            let num = |i: usize| -> Result<f64> {
                record[i]
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("bad number '{}' in column {}", &record[i], CSV_HEADER[i])))
            };
            rows.push(SpectrumRow {
                k_parallel: num(0)?,
                k_perp: num(1)?,
                f: num(2)?,
                method: record[3].trim().parse()?,
            });
        }
        Ok(Self { rows })
    }

    pub fn write_csv_path(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn read_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn row(k: f64, f: f64, method: Method) -> SpectrumRow {
        SpectrumRow {
            k_parallel: k,
            k_perp: 0.0,
            f,
            method,
        }
    }

    #[test]
    fn csv_layout() {
        let t = SpectrumTable::new(vec![row(-0.5, 1.2824771073150015e-13, Method::Riccati), row(0.25, 0.0, Method::Qve)]);
        let text = t.to_csv_string();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "k_parallel,k_perp,f,method");
        assert_eq!(
            lines[1],
            "-5.0000000000000000e-1,0.0000000000000000e0,1.2824771073150015e-13,riccati"
        );
        assert_eq!(lines[2], "2.5000000000000000e-1,0.0000000000000000e0,0.0000000000000000e0,qve");
    }

    #[test]
    fn bad_header_and_tags_rejected() {
        assert!(SpectrumTable::read_csv("k,f\n1,2\n".as_bytes()).is_err());
        assert!(SpectrumTable::read_csv("k_parallel,k_perp,f,method\n1,0,2,magic\n".as_bytes()).is_err());
        assert!(SpectrumTable::read_csv("k_parallel,k_perp,f,method\n1,0,x,qve\n".as_bytes()).is_err());
    }

    #[test]
    fn interleave_alternates_rows() {
        let a = SpectrumTable::new(vec![row(0.0, 1.0, Method::Riccati), row(1.0, 2.0, Method::Riccati)]);
        let b = SpectrumTable::new(vec![row(0.0, 3.0, Method::Fermion), row(1.0, 4.0, Method::Fermion)]);
        let m = SpectrumTable::interleave(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(m.values(), vec![1.0, 3.0, 2.0, 4.0]);
        assert_eq!(m.methods(), vec![Method::Riccati, Method::Fermion]);
        assert_eq!(m.only(Method::Fermion), b);
        assert!(SpectrumTable::interleave(&[a, SpectrumTable::default()]).is_err());
    }

    proptest! {
        #[test]
        fn csv_round_trip(values in proptest::collection::vec((any::<f64>(), 0.0..1e3f64, any::<f64>(), 0usize..5), 0..40)) {
            let rows: Vec<SpectrumRow> = values
                .into_iter()
                .filter(|(k, _, f, _)| k.is_finite() && f.is_finite())
                .map(|(k, kp, f, m)| SpectrumRow { k_parallel: k, k_perp: kp, f, method: Method::ALL[m] })
                .collect();
            let table = SpectrumTable::new(rows);
            let back = SpectrumTable::read_csv(table.to_csv_string().as_bytes()).unwrap();
            prop_assert_eq!(back, table);
        }
    }
}
