//! The canonical CSV time series shared by every subcommand.

use std::io::Write;
use std::path::Path;

use skdv_core::diagnostics::DiagnosticsRecord;

use crate::error::{io_err, CliError, Result};

pub const MASS_FIELDS: [&str; 5] = ["mass_v2", "mass_u2", "mass_dv2", "mass_du2", "mass_u4"];

/// Column names for the given region labels (`omega`, `gamma`).
pub fn header(regions: &[&str]) -> Vec<String> {
    let mut h: Vec<String> = ["t", "i1", "i2", "i3", "j", "i", "residual_j", "residual_i"].map(String::from).into();
    h.extend((1..=8).map(|k| format!("a1_{k}")));
    h.extend(["a2", "a3", "a4"].map(String::from));
    h.extend((1..=13).map(|k| format!("b{k}")));
    for r in regions {
        h.extend(MASS_FIELDS.iter().map(|m| format!("{m}_{r}")));
    }
    h.extend(["pj", "pi"].map(String::from));
    h.extend(regions.iter().map(|r| format!("tailmin_{r}")));
    h.push("p_open".into());
    h
}

pub fn row(rec: &DiagnosticsRecord) -> Vec<f64> {
    const NAN: f64 = f64::NAN;
    let mut r = vec![rec.t, rec.conserved.i1, rec.conserved.i2, rec.conserved.i3];
    r.push(rec.j_terms.map_or(NAN, |j| j.j));
    r.push(rec.i_terms.map_or(NAN, |i| i.i));
    r.push(rec.budget_j.map_or(NAN, |b| b.residual));
    r.push(rec.budget_i.map_or(NAN, |b| b.residual));
    match rec.j_terms {
        Some(j) => r.extend(j.a1_parts.iter().copied().chain([j.a2, j.a3, j.a4])),
        None => r.extend([NAN; 11]),
    }
    match rec.i_terms {
        Some(i) => r.extend(i.b),
        None => r.extend([NAN; 13]),
    }
    for reg in &rec.regions {
        let m = reg.mass;
        r.extend([m.mass_v2, m.mass_u2, m.mass_dv2, m.mass_du2, m.mass_u4]);
    }
    r.push(rec.partials.map_or(NAN, |p| p.pj));
    r.push(rec.partials.map_or(NAN, |p| p.pi));
    r.extend(rec.regions.iter().map(|reg| reg.tail_min));
    r.push(rec.partials.map_or(NAN, |p| p.open));
    r
}

/// `{:?}` is the shortest representation that parses back to the same f64.
pub fn format_row(values: &[f64]) -> String {
    let mut s = values.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",");
    s.push('\n');
    s
}

pub fn write_header(out: &mut impl Write, header: &[String], path: &Path) -> Result<()> {
    writeln!(out, "{}", header.join(",")).map_err(io_err(path))
}

/// A parsed CSV: header plus row-major values.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| CliError::Schema("empty CSV: no header".into()))?
            .split(',')
            .map(|s| s.trim().to_owned())
            .collect();
        if header.first().map(String::as_str) != Some("t") {
            return Err(CliError::Schema("first column must be `t`".into()));
        }
        let mut rows = Vec::new();
        for (k, line) in lines.enumerate() {
            let row = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| CliError::Schema(format!("row {}: {e}", k + 1)))?;
            if row.len() != header.len() {
                return Err(CliError::Schema(format!(
                    "row {} has {} fields, header has {}",
                    k + 1,
                    row.len(),
                    header.len()
                )));
            }
            rows.push(row);
        }
        Ok(Self { header, rows })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path).map_err(io_err(path))?)
    }

    pub fn index(&self, name: &str) -> Result<usize> {
        self.header.iter().position(|h| h == name).ok_or_else(|| CliError::Schema(format!("missing column `{name}`")))
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let k = self.index(name)?;
        Ok(self.rows.iter().map(|r| r[k]).collect())
    }

    /// Region labels present, in column order.
    pub fn regions(&self) -> Vec<String> {
        self.header.iter().filter_map(|h| h.strip_prefix("mass_v2_").map(str::to_owned)).collect()
    }
}
