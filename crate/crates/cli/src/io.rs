//! Dataset ingestion and band/report serialization.
//!
//! Numeric CSV output is written with 17 significant digits so values
//! round-trip bit-exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use tikhonov_bands::{ConfidenceBand, EcdfBand, FunRegData, Grid, NoiseDensity, NpivData};

use crate::CliError;

fn parse_field(field: &str, line: usize, column: &str) -> Result<f64, CliError> {
    field.trim().parse::<f64>().map_err(|_| CliError::Parse {
        line,
        message: format!("cannot parse {column:?} value {:?}", field.trim()),
    })
}

fn split_header(header: &str) -> Vec<String> {
    header.split(',').map(|s| s.trim().to_string()).collect()
}

fn data_lines(content: &str) -> impl Iterator<Item = (usize, &str)> {
    content
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .skip(1)
        .filter(|(_, l)| !l.trim().is_empty())
}

/// Read a `y,z,w` CSV into an instrumental-regression sample.
pub fn load_npiv_csv(path: &Path) -> Result<NpivData, CliError> {
    let content = read(path)?;
    let header = split_header(content.lines().next().unwrap_or(""));
    for col in ["y", "z", "w"] {
        if !header.iter().any(|h| h == col) {
            return Err(CliError::MissingColumn(col.into()));
        }
    }
    let idx = |name: &str| header.iter().position(|h| h == name).unwrap();
    let (iy, iz, iw) = (idx("y"), idx("z"), idx("w"));

    let mut y = Vec::new();
    let mut z = Vec::new();
    let mut w = Vec::new();
    for (line, row) in data_lines(&content) {
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() < header.len() {
            return Err(CliError::Parse {
                line,
                message: format!("expected {} fields, found {}", header.len(), fields.len()),
            });
        }
        y.push(parse_field(fields[iy], line, "y")?);
        z.push(parse_field(fields[iz], line, "z")?);
        w.push(parse_field(fields[iw], line, "w")?);
    }
    if y.len() < 2 {
        return Err(CliError::TooFewRows(y.len()));
    }
    Ok(NpivData::new(y, z, w)?)
}

/// Read a wide `y,z_1..z_mt,w_1..w_ms` CSV into a functional-regression
/// sample; the grids carry the caller-supplied bounds.
pub fn load_funreg_csv(
    path: &Path,
    t_bounds: (f64, f64),
    s_bounds: (f64, f64),
) -> Result<FunRegData, CliError> {
    let content = read(path)?;
    let header = split_header(content.lines().next().unwrap_or(""));
    if header.first().map(String::as_str) != Some("y") {
        return Err(CliError::MissingColumn("y".into()));
    }
    let m_t = header.iter().filter(|h| h.starts_with("z_")).count();
    let m_s = header.iter().filter(|h| h.starts_with("w_")).count();
    if m_t < 2 {
        return Err(CliError::MissingColumn("z_1".into()));
    }
    if m_s < 2 {
        return Err(CliError::MissingColumn("w_1".into()));
    }
    if header.len() != 1 + m_t + m_s {
        return Err(CliError::Parse {
            line: 1,
            message: "header must be y,z_1..z_mt,w_1..w_ms".into(),
        });
    }

    let mut y = Vec::new();
    let mut rows_z: Vec<f64> = Vec::new();
    let mut rows_w: Vec<f64> = Vec::new();
    for (line, row) in data_lines(&content) {
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != header.len() {
            return Err(CliError::Parse {
                line,
                message: format!("expected {} fields, found {}", header.len(), fields.len()),
            });
        }
        y.push(parse_field(fields[0], line, "y")?);
        for (j, field) in fields[1..1 + m_t].iter().enumerate() {
            rows_z.push(parse_field(field, line, &format!("z_{}", j + 1))?);
        }
        for (j, field) in fields[1 + m_t..].iter().enumerate() {
            rows_w.push(parse_field(field, line, &format!("w_{}", j + 1))?);
        }
    }
    let n = y.len();
    if n < 2 {
        return Err(CliError::TooFewRows(n));
    }
    let z_curves = DMatrix::from_row_iterator(n, m_t, rows_z);
    let w_curves = DMatrix::from_row_iterator(n, m_s, rows_w);
    let grid_t = Grid::uniform(t_bounds.0, t_bounds.1, m_t)?;
    let grid_s = Grid::uniform(s_bounds.0, s_bounds.1, m_s)?;
    Ok(FunRegData::new(y, z_curves, w_curves, grid_t, grid_s)?)
}

/// Read a single-column CSV (header `y` or `x`) into a vector.
pub fn load_column_csv(path: &Path, column: &str) -> Result<Vec<f64>, CliError> {
    let content = read(path)?;
    let header = split_header(content.lines().next().unwrap_or(""));
    let idx = header
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| CliError::MissingColumn(column.into()))?;
    let mut out = Vec::new();
    for (line, row) in data_lines(&content) {
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() <= idx {
            return Err(CliError::Parse {
                line,
                message: format!("missing field for column {column:?}"),
            });
        }
        out.push(parse_field(fields[idx], line, column)?);
    }
    if out.is_empty() {
        return Err(CliError::TooFewRows(0));
    }
    Ok(out)
}

/// Read a tabulated `u,f` density.
pub fn load_density_csv(path: &Path) -> Result<NoiseDensity, CliError> {
    let content = read(path)?;
    let header = split_header(content.lines().next().unwrap_or(""));
    for col in ["u", "f"] {
        if !header.iter().any(|h| h == col) {
            return Err(CliError::MissingColumn(col.into()));
        }
    }
    let iu = header.iter().position(|h| h == "u").unwrap();
    let iff = header.iter().position(|h| h == "f").unwrap();
    let mut u = Vec::new();
    let mut f = Vec::new();
    for (line, row) in data_lines(&content) {
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() < header.len() {
            return Err(CliError::Parse {
                line,
                message: format!("expected {} fields, found {}", header.len(), fields.len()),
            });
        }
        u.push(parse_field(fields[iu], line, "u")?);
        f.push(parse_field(fields[iff], line, "f")?);
    }
    let density = NoiseDensity::Tabulated { u, f };
    density.validate()?;
    Ok(density)
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write a confidence band as `z,estimate,lower,upper` plus a sibling
/// `<path>.meta.json` with the band metadata.
pub fn write_band_csv(band: &ConfidenceBand, path: &Path) -> Result<(), CliError> {
    let mut out = String::from("z,estimate,lower,upper\n");
    let grid = band.estimate.grid();
    for k in 0..grid.len() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(grid.point(k)),
            fmt_f64(band.estimate.value(k)),
            fmt_f64(band.lower.value(k)),
            fmt_f64(band.upper.value(k))
        );
    }
    write(path, &out)?;

    let method = match band.request.method {
        tikhonov_bands::BandMethod::Gauss => "gauss",
        tikhonov_bands::BandMethod::Concentration => "concentration",
    };
    let meta = serde_json::json!({
        "method": method,
        "process": band.request.process.as_u8(),
        "gamma": band.request.gamma,
        "alpha": band.diagnostics.alpha,
        "h": band.diagnostics.h,
        "half_width": band.half_width,
        "norm_2inf": band.diagnostics.norm_2inf,
        "n": band.diagnostics.n,
        "seed": band.request.seed,
    });
    write_meta(path, meta)
}

/// Write an empirical-CDF band as `x,ecdf,lower,upper` plus metadata.
pub fn write_ecdf_csv(band: &EcdfBand, path: &Path) -> Result<(), CliError> {
    let mut out = String::from("x,ecdf,lower,upper\n");
    let grid = band.estimate.grid();
    for k in 0..grid.len() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(grid.point(k)),
            fmt_f64(band.estimate.value(k)),
            fmt_f64(band.lower.value(k)),
            fmt_f64(band.upper.value(k))
        );
    }
    write(path, &out)?;
    let meta = serde_json::json!({
        "method": "dkw",
        "process": serde_json::Value::Null,
        "gamma": band.gamma,
        "alpha": serde_json::Value::Null,
        "h": serde_json::Value::Null,
        "half_width": band.half_width,
        "norm_2inf": serde_json::Value::Null,
        "n": band.n,
        "seed": serde_json::Value::Null,
    });
    write_meta(path, meta)
}

pub fn meta_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(".meta.json");
    std::path::PathBuf::from(s)
}

fn write_meta(path: &Path, meta: serde_json::Value) -> Result<(), CliError> {
    let pretty = serde_json::to_string_pretty(&meta).expect("metadata is serializable");
    write(&meta_path(path), &format!("{pretty}\n"))
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Io { path: path.display().to_string(), source: e })
}

pub fn write(path: &Path, content: &str) -> Result<(), CliError> {
    fs::write(path, content)
        .map_err(|e| CliError::Io { path: path.display().to_string(), source: e })
}
