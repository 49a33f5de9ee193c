//! CSV rows. Numbers use twelve significant digits and `.` as decimal
//! separator; fields containing commas (distribution specs) are quoted.

use std::io::Write;
use std::str::FromStr;

use aoi_core::format::sig12;
use aoi_core::{Scheme, ServiceDistribution};

pub const RESULT_HEADER: [&str; 10] = [
    "scheme",
    "dist",
    "lambda",
    "eps_i",
    "eps_b",
    "avg_aoi",
    "avg_peak_aoi",
    "source",
    "se_aoi",
    "se_peak",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Analytic,
    Sim,
}

impl Source {
    fn as_str(self) -> &'static str {
        match self {
            Source::Analytic => "analytic",
            Source::Sim => "sim",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResultRow {
    pub scheme: Scheme,
    pub dist: ServiceDistribution,
    pub lambda: f64,
    pub eps_i: f64,
    pub eps_b: f64,
    pub avg_aoi: f64,
    pub avg_peak_aoi: f64,
    pub source: Source,
    /// `None` for analytic rows.
    pub se: Option<(f64, f64)>,
}

impl ResultRow {
    pub fn record(&self) -> Vec<String> {
        let (se_aoi, se_peak) = match self.se {
            Some((a, p)) => (sig12(a), sig12(p)),
            None => (String::new(), String::new()),
        };
        vec![
            self.scheme.to_string(),
            self.dist.to_string(),
            sig12(self.lambda),
            sig12(self.eps_i),
            sig12(self.eps_b),
            sig12(self.avg_aoi),
            sig12(self.avg_peak_aoi),
            self.source.as_str().to_string(),
            se_aoi,
            se_peak,
        ]
    }

    /// Parses a record written by [`ResultRow::record`].
    pub fn from_record(rec: &csv::StringRecord) -> Result<Self, String> {
        if rec.len() != RESULT_HEADER.len() {
            return Err(format!(
                "expected {} fields, got {}",
                RESULT_HEADER.len(),
                rec.len()
            ));
        }
        let num = |i: usize| -> Result<f64, String> {
            rec[i]
                .parse::<f64>()
                .map_err(|_| format!("{}: `{}` is not a number", RESULT_HEADER[i], &rec[i]))
        };
        let source = match &rec[7] {
            "analytic" => Source::Analytic,
            "sim" => Source::Sim,
            other => return Err(format!("unknown source `{other}`")),
        };
        let se = if rec[8].is_empty() && rec[9].is_empty() {
            None
        } else {
            Some((num(8)?, num(9)?))
        };
        Ok(ResultRow {
            scheme: Scheme::from_str(&rec[0]).map_err(|e| e.to_string())?,
            dist: ServiceDistribution::from_str(&rec[1]).map_err(|e| e.to_string())?,
            lambda: num(2)?,
            eps_i: num(3)?,
            eps_b: num(4)?,
            avg_aoi: num(5)?,
            avg_peak_aoi: num(6)?,
            source,
            se,
        })
    }
}

/// Writes a header and records, ending with a newline.
pub fn write_table<W: Write>(out: W, header: &[&str], rows: &[Vec<String>]) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()
}

pub fn emit_csv<W: Write>(out: W, rows: &[ResultRow]) -> std::io::Result<()> {
    let records: Vec<Vec<String>> = rows.iter().map(ResultRow::record).collect();
    write_table(out, &RESULT_HEADER, &records)
}
