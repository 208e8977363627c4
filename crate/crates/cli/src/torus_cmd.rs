use std::path::PathBuf;

use clap::{Args, ValueEnum};
use obstruct_core::torus::{coarsening_study, cos_family, grid_density, refine_and_extrapolate, Refiner, TorusGrid};
use serde_json::json;

use crate::manifest::{input_err, CliError, CliResult, RunManifest};
use crate::{Common, Outcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    /// `φ = ε cos(2πx/lx)`.
    Cos,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RefineMode {
    /// Coarser levels by subsampling; the study ends at the input grid.
    Down,
    /// Finer levels by spectral interpolation (or resampling a family).
    Up,
}

#[derive(Args, Clone)]
pub struct TorusArgs {
    /// CSV grid of φ samples: one row per y, one column per x.
    #[arg(long, conflicts_with = "family")]
    phi: Option<PathBuf>,
    #[arg(long, value_enum)]
    family: Option<Family>,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// Grid size for a family, both directions.
    #[arg(long, default_value_t = 256)]
    n: usize,
    /// Fundamental-domain periods `lx,ly`.
    #[arg(long, default_value = "1,1")]
    periods: String,
    /// Grids in the convergence study (none if absent).
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long, value_enum, default_value_t = RefineMode::Down)]
    refine: RefineMode,
    /// Also write `i,j,x,y,phi,density` for the input grid.
    #[arg(long)]
    dump_density: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

fn parse_periods(s: &str) -> CliResult<(f64, f64)> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(CliError::Input(format!("--periods expects lx,ly, got {s:?}")));
    }
    let p = |t: &str| t.parse::<f64>().map_err(|_| CliError::Input(format!("bad period {t:?}")));
    Ok((p(parts[0])?, p(parts[1])?))
}

fn read_csv_grid(bytes: &[u8], lx: f64, ly: f64) -> CliResult<TorusGrid> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(bytes);
    let mut values = Vec::new();
    let mut nx = None;
    let mut ny = 0;
    for rec in rdr.records() {
        let rec = rec.map_err(input_err)?;
        if nx.is_some_and(|w| w != rec.len()) {
            return Err(CliError::Input(format!("row {ny} has {} columns, expected {}", rec.len(), nx.unwrap_or(0))));
        }
        nx = Some(rec.len());
        for (i, f) in rec.iter().enumerate() {
            values.push(f.parse::<f64>().map_err(|_| CliError::Input(format!("bad number {f:?} at row {ny}, column {i}")))?);
        }
        ny += 1;
    }
    TorusGrid::new(nx.unwrap_or(0), ny, lx, ly, values).map_err(input_err)
}

fn dump(path: &PathBuf, g: &TorusGrid, density: &[f64]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(input_err)?;
    w.write_record(["i", "j", "x", "y", "phi", "density"]).map_err(input_err)?;
    let (hx, hy) = g.spacing();
    for j in 0..g.ny() {
        for i in 0..g.nx() {
            let row = [
                i.to_string(),
                j.to_string(),
                (i as f64 * hx).to_string(),
                (j as f64 * hy).to_string(),
                g.at(i, j).to_string(),
                density[j * g.nx() + i].to_string(),
            ];
            w.write_record(&row).map_err(input_err)?;
        }
    }
    w.flush().map_err(input_err)
}

pub fn torus(m: &mut RunManifest, a: &TorusArgs) -> CliResult<Outcome> {
    let (lx, ly) = parse_periods(&a.periods)?;
    let family = a.family.map(|Family::Cos| cos_family(a.eps, lx));
    let grid = match (&a.phi, &family) {
        (Some(p), None) => read_csv_grid(&m.read_input(p)?, lx, ly)?,
        (None, Some(f)) => TorusGrid::from_fn(a.n, a.n, lx, ly, f).map_err(input_err)?,
        _ => return Err(CliError::Input("give exactly one of --phi and --family".into())),
    };
    m.set_truncation("nx", grid.nx());
    m.set_truncation("ny", grid.ny());
    if let Some(l) = a.levels {
        m.set_truncation("levels", l);
        m.set_truncation("refine", format!("{:?}", a.refine).to_lowercase());
    }
    let report = grid_density(&grid);
    if let Some(p) = &a.dump_density {
        dump(p, &grid, &report.density)?;
    }
    let convergence = match a.levels {
        None => None,
        Some(l) => Some(match (a.refine, &family) {
            (RefineMode::Down, _) => coarsening_study(&grid, l),
            (RefineMode::Up, Some(f)) => refine_and_extrapolate(&grid, l, Refiner::Analytic(f)),
            (RefineMode::Up, None) => refine_and_extrapolate(&grid, l, Refiner::Spectral),
        }
        .map_err(input_err)?),
    };
    let dichotomy = report.sign_dichotomy_holds();
    let integral_ok = report.integral.abs() <= 1e-9 * report.abs_integral.max(1.0);
    let failure = if !integral_ok {
        Some(CliError::Invariant(format!("discrete integral {} is not zero", report.integral)))
    } else if !dichotomy {
        Some(CliError::Invariant("density has one sign only".into()))
    } else {
        None
    };
    let body = json!({
        "periods": [lx, ly],
        "report": report,
        "sign_dichotomy": dichotomy,
        "convergence": convergence,
        "observed_orders": convergence.as_ref().map(|c| c.orders()),
    });
    Ok(Outcome { body, failure })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periods() {
        assert_eq!(parse_periods("1, 2.5").unwrap(), (1.0, 2.5));
        assert!(parse_periods("1").is_err());
        assert!(parse_periods("a,b").is_err());
    }

    #[test]
    fn csv_grid_layout() {
        let rows: Vec<String> = (0..8).map(|j| (0..10).map(|i| format!("{}", i + 10 * j)).collect::<Vec<_>>().join(",")).collect();
        let g = read_csv_grid(rows.join("\n").as_bytes(), 1.0, 1.0).unwrap();
        assert_eq!((g.nx(), g.ny()), (10, 8));
        assert_eq!(g.at(3, 2), 23.0);
        assert!(read_csv_grid(b"1,x\n", 1.0, 1.0).is_err());
    }
}
