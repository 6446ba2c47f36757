//! CSV output of a finished sweep.
//!
//! * `<method>.csv`: display table, one row per `ω`, one column per `ε` or `N`;
//!   each cell reads `status;inner_iters;metric1;metric2` in `{:.1e}` notation.
//! * `long.csv`: one row per cell at full precision.
//! * `points/<method>_r<row>_c<col>.csv`: limit point, one coordinate per line.

use std::fs;
use std::path::Path;

use crate::grid::{ExperimentGrid, Family};
use crate::run::{CellResult, CellStatus};
use crate::HarnessError;

/// One significant digit after the point, e.g. `8.8e-3`.
pub fn format_sci(v: f64) -> String {
    format!("{v:.1e}")
}

fn payload(cell: &CellResult) -> String {
    if cell.status == CellStatus::NotApplicable {
        return cell.status.label().to_string();
    }
    let (m1, m2) = match cell.metrics {
        Some((a, b)) => (format_sci(a), format_sci(b)),
        None => (String::new(), String::new()),
    };
    format!("{};{};{};{}", cell.status.label(), cell.inner_iters, m1, m2)
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>, HarnessError> {
    csv::Writer::from_path(path).map_err(|source| HarnessError::Csv {
        path: path.to_path_buf(),
        source,
    })
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes all tables for `results` (as returned by [`crate::run_grid`]) into `out_dir`.
pub fn emit_csv(grid: &ExperimentGrid, results: &[CellResult], out_dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(out_dir.join("points")).map_err(io_err(out_dir))?;
    let csv_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| HarnessError::Csv { path, source }
    };

    for &method in &grid.methods {
        let path = out_dir.join(format!("{}.csv", method.name()));
        let mut w = writer(&path)?;
        let mut header = vec!["omega".to_string()];
        header.extend((0..grid.num_columns()).map(|c| grid.column_label(c)));
        w.write_record(&header).map_err(csv_err(&path))?;
        for (row, &omega) in grid.omegas.iter().enumerate() {
            let mut rec = vec![format_sci(omega)];
            for col in 0..grid.num_columns() {
                let cell = results
                    .iter()
                    .find(|r| r.row == row && r.col == col && r.method == method);
                rec.push(cell.map(payload).unwrap_or_default());
            }
            w.write_record(&rec).map_err(csv_err(&path))?;
        }
        w.flush().map_err(io_err(&path))?;
    }

    let path = out_dir.join("long.csv");
    let mut w = writer(&path)?;
    let (col_name, m1, m2) = match grid.family {
        Family::Circle => ("eps", "e_a", "e_b"),
        Family::Ocp => ("n", "delta_j", "residual_norm"),
    };
    w.write_record([
        "method",
        "omega",
        col_name,
        "status",
        "outer_iters",
        "inner_iters",
        m1,
        m2,
        "limit_point",
        "detail",
    ])
    .map_err(csv_err(&path))?;
    for cell in results {
        let (a, b) = cell
            .metrics
            .map(|(a, b)| (format!("{a:e}"), format!("{b:e}")))
            .unwrap_or_default();
        let column = match grid.family {
            Family::Circle => format!("{:e}", cell.column),
            Family::Ocp => format!("{}", cell.column as usize),
        };
        let point = cell.limit_point_file().unwrap_or_default();
        w.write_record([
            cell.method.name(),
            &format!("{:e}", cell.omega),
            &column,
            cell.status.label(),
            &cell.outer_iters.to_string(),
            &cell.inner_iters.to_string(),
            &a,
            &b,
            &point,
            &cell.detail,
        ])
        .map_err(csv_err(&path))?;
        if let (Some(x), Some(name)) = (&cell.x, cell.limit_point_file()) {
            let p = out_dir.join(name);
            let body: String = x.iter().map(|v| format!("{v:e}\n")).collect();
            fs::write(&p, body).map_err(io_err(&p))?;
        }
    }
    w.flush().map_err(io_err(&path))?;
    Ok(())
}
