use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::fit::Residual;
use super::sweep::SweepRecord;
use super::CharacterizeError;
use crate::scalar::Scalar;

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
struct FrameRow<T> {
    true_range_mm: T,
    theta_deg: T,
    phi_deg: T,
    frame_index: usize,
    mean_reading_mm: T,
}

/// One row per frame: `true_range_mm,theta_deg,phi_deg,frame_index,mean_reading_mm`.
pub fn write_sweep_csv<T: Scalar, W: Write>(records: &[SweepRecord<T>], out: W) -> Result<(), CharacterizeError> {
    let mut w = csv::Writer::from_writer(out);
    for rec in records {
        for (frame_index, r) in rec.readings().iter().enumerate() {
            w.serialize(FrameRow {
                true_range_mm: rec.true_range_mm(),
                theta_deg: rec.theta_deg(),
                phi_deg: rec.phi_deg(),
                frame_index,
                mean_reading_mm: *r,
            })?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Inverse of [`write_sweep_csv`]. A record is a run of rows with identical
/// geometry whose frame indices count up from 0.
pub fn read_sweep_csv<T: Scalar, R: Read>(input: R) -> Result<Vec<SweepRecord<T>>, CharacterizeError> {
    let mut reader = csv::Reader::from_reader(input);
    let mut records = Vec::new();
    let mut current: Option<(T, T, T, Vec<T>)> = None;
    for (i, row) in reader.deserialize::<FrameRow<T>>().enumerate() {
        let row = row?;
        let row_no = i + 2;
        let same = matches!(&current, Some((z, t, p, _))
            if *z == row.true_range_mm && *t == row.theta_deg && *p == row.phi_deg && row.frame_index != 0);
        if same {
            let (_, _, _, readings) = current.as_mut().expect("matched Some");
            if row.frame_index != readings.len() {
                return Err(CharacterizeError::CsvLayout {
                    row: row_no,
                    reason: format!("frame_index {} out of sequence (expected {})", row.frame_index, readings.len()),
                });
            }
            readings.push(row.mean_reading_mm);
        } else {
            if row.frame_index != 0 {
                return Err(CharacterizeError::CsvLayout {
                    row: row_no,
                    reason: "a new pose must start at frame_index 0".into(),
                });
            }
            if let Some((z, t, p, r)) = current.take() {
                records.push(SweepRecord::new(z, t, p, r)?);
            }
            current = Some((row.true_range_mm, row.theta_deg, row.phi_deg, vec![row.mean_reading_mm]));
        }
    }
    if let Some((z, t, p, r)) = current {
        records.push(SweepRecord::new(z, t, p, r)?);
    }
    Ok(records)
}

/// `sweep,true_range_mm,theta_deg,phi_deg,mean_reading_mm,observed,fitted,residual`.
pub fn write_residuals_csv<'a, T: Scalar, W: Write>(
    residuals: impl IntoIterator<Item = &'a Residual<T>>,
    out: W,
) -> Result<(), CharacterizeError> {
    let mut w = csv::Writer::from_writer(out);
    for r in residuals {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_residuals_csv<T: Scalar, R: Read>(input: R) -> Result<Vec<Residual<T>>, CharacterizeError> {
    let mut reader = csv::Reader::from_reader(input);
    Ok(reader.deserialize().collect::<Result<_, _>>()?)
}
