use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use malm_experiments::{
    dump_circle_point, dump_trajectory, emit_csv, run_cell, run_grid, CellStatus, ExperimentGrid, Family, Method,
};

#[derive(Parser)]
#[command(name = "malm", version, about = "Penalty and augmented Lagrangian experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Problem {
    Circle,
    Ocp,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolveMethod {
    Qpm,
    Malm,
    /// Classical augmented Lagrangian, i.e. `malm` with ω = 0.
    Alm,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and print status, iteration counts and metrics.
    Solve {
        #[arg(long, value_enum, env = "MALM_PROBLEM")]
        problem: Problem,
        /// Curvature of the circle instance.
        #[arg(long, env = "MALM_EPS", default_value_t = 0.0)]
        eps: f64,
        /// Number of finite elements of the control instance.
        #[arg(long = "N", env = "MALM_N", default_value_t = 64)]
        elements: usize,
        #[arg(long, env = "MALM_OMEGA", default_value_t = 0.0)]
        omega: f64,
        #[arg(long, value_enum, env = "MALM_METHOD", default_value = "malm")]
        method: SolveMethod,
        #[arg(long, env = "MALM_TOL")]
        tol: Option<f64>,
        #[arg(long, env = "MALM_KMAX")]
        kmax: Option<usize>,
        /// Write the limit point here (circle: `x1,x2`; control: `index,value`).
        #[arg(long, env = "MALM_OUT")]
        out: Option<PathBuf>,
    },
    /// Run every cell of a grid file and write CSV tables.
    Sweep {
        #[arg(long, env = "MALM_GRID_SPEC")]
        grid_spec: PathBuf,
        #[arg(long, env = "MALM_OUT_DIR")]
        out_dir: PathBuf,
    },
    /// Solve the control instance and dump the sampled trajectory as `t,y,u`.
    Trajectory {
        #[arg(long = "N", env = "MALM_N", default_value_t = 40)]
        elements: usize,
        #[arg(long, env = "MALM_OMEGA", default_value_t = 0.1)]
        omega: f64,
        #[arg(long, env = "MALM_SAMPLES", default_value_t = 201)]
        samples: usize,
        #[arg(long, env = "MALM_OUT")]
        out: PathBuf,
        #[arg(long, value_enum, env = "MALM_METHOD", default_value = "qpm")]
        method: SolveMethod,
    },
}

fn grid_method(method: SolveMethod, omega: f64) -> Result<Method> {
    Ok(match method {
        SolveMethod::Qpm => Method::Qpm,
        SolveMethod::Malm => Method::Malm,
        SolveMethod::Alm if omega == 0.0 => Method::Malm,
        SolveMethod::Alm => bail!("--method alm requires --omega 0, got {omega}"),
    })
}

fn single_cell(
    mut grid: ExperimentGrid,
    method: Method,
    tol: Option<f64>,
    kmax: Option<usize>,
) -> Result<ExperimentGrid> {
    grid.methods = vec![method];
    grid.tol = tol;
    grid.k_max = kmax;
    grid.validate()?;
    Ok(grid)
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Solve {
            problem,
            eps,
            elements,
            omega,
            method,
            tol,
            kmax,
            out,
        } => {
            let m = grid_method(method, omega)?;
            let grid = match problem {
                Problem::Circle => ExperimentGrid::circle(vec![omega], vec![eps]),
                Problem::Ocp => ExperimentGrid::ocp(vec![omega], vec![elements]),
            };
            let grid = single_cell(grid, m, tol, kmax)?;
            let start = Instant::now();
            let cell = run_cell(&grid, 0, 0, m);
            println!("status       {}", cell.status.label());
            if !cell.detail.is_empty() {
                println!("detail       {}", cell.detail);
            }
            println!("outer_iters  {}", cell.outer_iters);
            println!("inner_iters  {}", cell.inner_iters);
            if let Some((a, b)) = cell.metrics {
                let (na, nb) = match grid.family {
                    Family::Circle => ("e_a", "e_b"),
                    Family::Ocp => ("delta_j", "residual"),
                };
                println!("{na:<12} {a:e}");
                println!("{nb:<12} {b:e}");
            }
            println!("elapsed      {:.3}s", start.elapsed().as_secs_f64());
            if let (Some(path), Some(x)) = (out, &cell.x) {
                match grid.family {
                    Family::Circle => dump_circle_point(x, &path)?,
                    Family::Ocp => {
                        let mut w = csv::Writer::from_path(&path).with_context(|| path.display().to_string())?;
                        w.write_record(["index", "value"])?;
                        for (i, v) in x.iter().enumerate() {
                            w.serialize((i, v))?;
                        }
                        w.flush()?;
                    }
                }
            }
            if cell.status == CellStatus::NotApplicable {
                bail!("the penalty method needs omega > 0");
            }
        }
        Command::Sweep { grid_spec, out_dir } => {
            let grid = ExperimentGrid::load(&grid_spec)?;
            let start = Instant::now();
            let results = run_grid(&grid);
            emit_csv(&grid, &results, &out_dir)?;
            let converged = results.iter().filter(|r| r.status == CellStatus::Converged).count();
            println!(
                "{} cells ({} converged) in {:.2}s, tables in {}",
                results.len(),
                converged,
                start.elapsed().as_secs_f64(),
                out_dir.display()
            );
        }
        Command::Trajectory {
            elements,
            omega,
            samples,
            out,
            method,
        } => {
            let m = grid_method(method, omega)?;
            let grid = single_cell(ExperimentGrid::ocp(vec![omega], vec![elements]), m, None, None)?;
            let cell = run_cell(&grid, 0, 0, m);
            let Some(x) = &cell.x else {
                bail!("no solution: {} {}", cell.status.label(), cell.detail);
            };
            let trans = malm::ocp_instance(elements)?;
            dump_trajectory(&trans, x, samples, &out)?;
            println!(
                "{} after {} inner iterations, {} samples in {}",
                cell.status.label(),
                cell.inner_iters,
                samples,
                out.display()
            );
        }
    }
    Ok(())
}
