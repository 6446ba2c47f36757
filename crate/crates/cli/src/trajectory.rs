//! Trajectory and limit-point dumps.

use std::path::Path;

use malm::{ScalarOcp, Transcription};
use nalgebra::DVector;

use crate::HarnessError;

/// Writes `samples` equispaced rows `t,y,u` of the interpolated trajectory.
pub fn dump_trajectory<O: ScalarOcp>(
    trans: &Transcription<O>,
    x: &DVector<f64>,
    samples: usize,
    path: &Path,
) -> Result<(), HarnessError> {
    let rows = trans.sample(x, samples)?;
    let err = |source| HarnessError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    w.write_record(["t", "y", "u"]).map_err(err)?;
    for (t, y, u) in rows {
        w.serialize((t, y, u)).map_err(err)?;
    }
    w.flush().map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Circle limit point as a single `x1,x2` row.
pub fn dump_circle_point(x: &DVector<f64>, path: &Path) -> Result<(), HarnessError> {
    let err = |source| HarnessError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    w.write_record(["x1", "x2"]).map_err(err)?;
    w.serialize((x[0], x[1])).map_err(err)?;
    w.flush().map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}
