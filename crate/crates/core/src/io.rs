//! Headered CSV input and output. Lines starting with `#` are comments;
//! writers put a `#schema=<name>/v1` line first.

use std::io::{Read, Write};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::series::{MultiSeries, TimeSeries};

/// Numeric table read from CSV, stored by column.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn read<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(r);
        let names: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if names.is_empty() {
            return Err(Error::Parse("CSV has no header".into()));
        }
        let mut columns = vec![Vec::new(); names.len()];
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            for (j, v) in rec.iter().enumerate() {
                let x = v
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("row {}, column `{}`: `{v}` is not a number", i + 1, names[j])))?;
                columns[j].push(x);
            }
        }
        Ok(Table { names, columns })
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        Table::read(std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?)
    }

    pub fn index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::Parse(format!("no column `{name}`; have {}", self.names.join(", "))))
    }

    /// Named column, or the first one.
    pub fn series(&self, name: Option<&str>) -> Result<TimeSeries> {
        let j = match name {
            Some(n) => self.index(n)?,
            None => 0,
        };
        TimeSeries::new(self.columns[j].clone())
    }

    /// Named columns, or every column when `names` is empty.
    pub fn multi(&self, names: &[String]) -> Result<MultiSeries> {
        let idx: Vec<usize> = if names.is_empty() {
            (0..self.names.len()).collect()
        } else {
            names.iter().map(|n| self.index(n)).collect::<Result<_>>()?
        };
        let rows = self.columns[0].len();
        MultiSeries::new(DMatrix::from_fn(rows, idx.len(), |t, j| self.columns[idx[j]][t]))
    }
}

/// Write equal-length columns under a schema line and header.
pub fn write_columns<W: Write>(mut w: W, schema: &str, names: &[&str], columns: &[&[f64]]) -> Result<()> {
    if names.len() != columns.len() {
        return Err(Error::Size("one name per column".into()));
    }
    let rows = columns.first().map_or(0, |c| c.len());
    if columns.iter().any(|c| c.len() != rows) {
        return Err(Error::Size("columns differ in length".into()));
    }
    writeln!(w, "#schema={schema}/v1")?;
    writeln!(w, "{}", names.join(","))?;
    for t in 0..rows {
        let line: Vec<String> = columns.iter().map(|c| c[t].to_string()).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

/// `name,value` rows.
pub fn write_pairs<W: Write>(mut w: W, schema: &str, pairs: &[(&str, f64)]) -> Result<()> {
    writeln!(w, "#schema={schema}/v1")?;
    writeln!(w, "name,value")?;
    for (k, v) in pairs {
        writeln!(w, "{k},{v}")?;
    }
    Ok(())
}

pub fn write_multi<W: Write>(w: W, schema: &str, names: &[&str], m: &MultiSeries) -> Result<()> {
    let cols: Vec<Vec<f64>> = (0..m.ncols()).map(|j| m.column(j).into_vec()).collect();
    let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
    write_columns(w, schema, names, &refs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut buf = Vec::new();
        write_columns(&mut buf, "t", &["a", "b"], &[&[1.0, 0.1 + 0.2], &[-3.5, 1e-300]]).unwrap();
        let t = Table::read(buf.as_slice()).unwrap();
        assert_eq!(t.names, vec!["a", "b"]);
        assert_eq!(t.columns[0], vec![1.0, 0.1 + 0.2]);
        assert_eq!(t.series(Some("b")).unwrap().values(), &[-3.5, 1e-300]);
        assert_eq!(t.multi(&[]).unwrap().ncols(), 2);
    }

    #[test]
    fn bad_cells_are_reported() {
        let e = Table::read("x,y\n1,2\n3,oops\n".as_bytes()).unwrap_err();
        assert!(e.to_string().contains("oops"));
        assert!(Table::read("x\n1\n".as_bytes()).unwrap().series(Some("z")).is_err());
    }
}
