//! Per-sample run telemetry and its CSV form.
//!
//! The schema is versioned by the exact header line. Floats are written
//! as `{:.9e}` so a file round-trips bit-identically for every value a run
//! can produce, including NaN (used for φ on samples where the measurement
//! guard trips).

use crate::HarnessError;
use so3_core::Vec3;
use std::io::{BufWriter, Write};
use std::path::Path;

pub const CSV_HEADER: &str =
    "t,j,attitude_error_deg,dist_RI,btilde_x,btilde_y,btilde_z,ratilde_norm,phi,V,jump_flag";

/// One telemetry sample. `phi` is NaN when the measurement guard tripped
/// at that sample; `jump_flag` marks the first sample after a reset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TelemetryRow {
    pub t: f64,
    pub j: u32,
    pub attitude_error_deg: f64,
    pub dist_ri: f64,
    pub btilde: Vec3,
    pub ratilde_norm: f64,
    pub phi: f64,
    pub v: f64,
    pub jump_flag: bool,
}

pub fn write_csv(path: &Path, rows: &[TelemetryRow]) -> Result<(), HarnessError> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{:.6},{},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{}",
            r.t,
            r.j,
            r.attitude_error_deg,
            r.dist_ri,
            r.btilde.x,
            r.btilde.y,
            r.btilde.z,
            r.ratilde_norm,
            r.phi,
            r.v,
            u8::from(r.jump_flag),
        )?;
    }
    w.flush()?;
    Ok(())
}

fn field_f64(rec: &csv::StringRecord, idx: usize, line: u64) -> Result<f64, HarnessError> {
    let raw = rec.get(idx).ok_or_else(|| {
        HarnessError::Telemetry(format!("record {line}: missing field {idx}"))
    })?;
    raw.parse().map_err(|_| {
        HarnessError::Telemetry(format!("record {line}: field {idx}: bad number `{raw}`"))
    })
}

pub fn read_csv(path: &Path) -> Result<Vec<TelemetryRow>, HarnessError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let header = reader
        .headers()
        .map_err(|e| HarnessError::Telemetry(format!("{}: {e}", path.display())))?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if header != CSV_HEADER {
        return Err(HarnessError::Telemetry(format!(
            "{}: unexpected header `{header}`",
            path.display()
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i as u64 + 2;
        let rec = rec.map_err(|e| HarnessError::Telemetry(format!("{}: {e}", path.display())))?;
        if rec.len() != 11 {
            return Err(HarnessError::Telemetry(format!(
                "record {line}: expected 11 fields, got {}",
                rec.len()
            )));
        }
        let j: u32 = rec[1].parse().map_err(|_| {
            HarnessError::Telemetry(format!("record {line}: bad jump count `{}`", &rec[1]))
        })?;
        let jump_flag = match &rec[10] {
            "0" => false,
            "1" => true,
            other => {
                return Err(HarnessError::Telemetry(format!(
                    "record {line}: bad jump flag `{other}`"
                )))
            }
        };
        rows.push(TelemetryRow {
            t: field_f64(&rec, 0, line)?,
            j,
            attitude_error_deg: field_f64(&rec, 2, line)?,
            dist_ri: field_f64(&rec, 3, line)?,
            btilde: Vec3::new(
                field_f64(&rec, 4, line)?,
                field_f64(&rec, 5, line)?,
                field_f64(&rec, 6, line)?,
            ),
            ratilde_norm: field_f64(&rec, 7, line)?,
            phi: field_f64(&rec, 8, line)?,
            v: field_f64(&rec, 9, line)?,
            jump_flag,
        });
    }
    Ok(rows)
}
