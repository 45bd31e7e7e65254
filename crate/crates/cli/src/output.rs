use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::svg::Chart;

/// One CSV line. `extra` carries an analytic overlay or a preset-specific
/// companion value and is empty when there is none.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scheme: String,
    pub nt: usize,
    pub snr_db: f64,
    pub tfb: u32,
    pub b: u32,
    pub users: usize,
    pub mean_rate: f64,
    pub std_error: f64,
    pub trials: u64,
    pub extra: Option<f64>,
}

pub fn write_csv(path: &Path, rows: &[ResultRow]) -> CliResult<()> {
    let csv_err = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_csv(path: &Path) -> CliResult<Vec<ResultRow>> {
    let csv_err = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize().collect::<Result<_, _>>().map_err(csv_err)
}

/// Paths of the files written for one run or preset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Written {
    pub csv: PathBuf,
    pub svg: PathBuf,
}

/// Writes `<dir>/<name>.csv` and `<dir>/<name>.svg`, creating `dir`.
pub fn write_outputs(
    dir: &Path,
    name: &str,
    rows: &[ResultRow],
    chart: &Chart,
) -> CliResult<Written> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let csv = dir.join(format!("{name}.csv"));
    let svg = dir.join(format!("{name}.svg"));
    write_csv(&csv, rows)?;
    fs::write(&svg, chart.render()).map_err(|e| CliError::io(&svg, e))?;
    Ok(Written { csv, svg })
}
