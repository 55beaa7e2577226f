//! Field files: `sheet,k,m,re,im` rows plus a `<stem>.grid.json` sidecar.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wormszego::{BoundaryField, Complex64, LogGrid, Sheet};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub beta: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
}

impl Sidecar {
    pub fn grid(&self) -> Result<LogGrid, String> {
        LogGrid::new(self.x_min, self.x_max, self.n, self.m).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    sheet: usize,
    k: usize,
    m: usize,
    re: f64,
    im: f64,
}

pub fn sidecar_path(field: &Path) -> PathBuf {
    field.with_extension("grid.json")
}

pub fn read_sidecar(field: &Path) -> Result<Sidecar, String> {
    let p = sidecar_path(field);
    let f = File::open(&p).map_err(|e| format!("{}: {e}", p.display()))?;
    serde_json::from_reader(BufReader::new(f)).map_err(|e| format!("{}: {e}", p.display()))
}

/// Rows not present in the file are zero; repeated rows are an error.
pub fn read_field(path: &Path, grid: LogGrid) -> Result<BoundaryField, String> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let headers = rdr.headers().map_err(|e| e.to_string())?.clone();
    if headers.iter().collect::<Vec<_>>() != ["sheet", "k", "m", "re", "im"] {
        return Err(format!("{}: header must be sheet,k,m,re,im", path.display()));
    }
    let mut field = BoundaryField::zeros(grid);
    let mut seen = HashSet::new();
    for (line, row) in rdr.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| format!("{}: {e}", path.display()))?;
        let at = format!("{} row {}", path.display(), line + 2);
        let sheet = Sheet::from_index(row.sheet).map_err(|e| format!("{at}: {e}"))?;
        if row.k >= grid.n || row.m >= grid.m {
            return Err(format!("{at}: (k, m) = ({}, {}) outside the grid", row.k, row.m));
        }
        if !(row.re.is_finite() && row.im.is_finite()) {
            return Err(format!("{at}: non-finite value"));
        }
        if !seen.insert((row.sheet, row.k, row.m)) {
            return Err(format!("{at}: duplicate entry"));
        }
        field.sheets[sheet.index() - 1][row.m * grid.n + row.k] = Complex64::new(row.re, row.im);
    }
    Ok(field)
}

pub fn write_field(path: &Path, field: &BoundaryField, beta: f64) -> Result<(), String> {
    let g = field.grid;
    let io = |e: csv::Error| format!("{}: {e}", path.display());
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    for s in Sheet::ALL {
        let data = &field.sheets[s.index() - 1];
        for m in 0..g.m {
            for k in 0..g.n {
                let v = data[m * g.n + k];
                w.serialize(Row { sheet: s.index(), k, m, re: v.re, im: v.im }).map_err(io)?;
            }
        }
    }
    w.flush().map_err(|e| format!("{}: {e}", path.display()))?;
    let side = Sidecar { beta, x_min: g.x_min, x_max: g.x_max, n: g.n, m: g.m };
    let sp = sidecar_path(path);
    let f = File::create(&sp).map_err(|e| format!("{}: {e}", sp.display()))?;
    let mut out = BufWriter::new(f);
    serde_json::to_writer_pretty(&mut out, &side).map_err(|e| e.to_string())?;
    writeln!(out).map_err(|e| e.to_string())?;
    Ok(())
}
