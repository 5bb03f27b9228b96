//! PNG, CSV and JSON writers for real fields, plus readers for round trips.
//!
//! CSV rows use `{:.16e}` (17 significant digits), enough for every `f64` to
//! survive a text round trip. JSON keys appear in a fixed order:
//! `L`/`K`, `region`, `method`, `shannon`, `retained`, `rank`, `eigenvalue`,
//! `values`. Keys without a value for the run are omitted.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::CliError;

/// Ramp endpoints: the minimum maps to `LOW`, the maximum to `HIGH`.
pub const LOW: [u8; 3] = [33, 102, 172];
pub const HIGH: [u8; 3] = [178, 24, 43];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Format {
    Png,
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Png => "png",
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Parses `png,csv,json` (any non-empty subset, duplicates collapsed).
pub fn parse_formats(spec: &str) -> Result<Vec<Format>, CliError> {
    let mut out = Vec::new();
    for tok in spec.split(',') {
        let f = match tok.trim() {
            "png" => Format::Png,
            "csv" => Format::Csv,
            "json" => Format::Json,
            other => return Err(CliError::usage(format!("--format: unknown format `{other}`"))),
        };
        if !out.contains(&f) {
            out.push(f);
        }
    }
    out.sort();
    Ok(out)
}

/// `stem` with the format's extension appended.
pub fn output_path(stem: &Path, format: Format) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(".");
    s.push(format.extension());
    PathBuf::from(s)
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Pixel colour of `v` on the ramp over `[lo, hi]`; a flat field sits at the midpoint.
pub fn ramp(v: f64, lo: f64, hi: f64) -> [u8; 3] {
    let t = if hi > lo { ((v - lo) / (hi - lo)).clamp(0.0, 1.0) } else { 0.5 };
    let mut px = [0u8; 3];
    for c in 0..3 {
        let a = LOW[c] as f64;
        let b = HIGH[c] as f64;
        px[c] = (a + t * (b - a)).round() as u8;
    }
    px
}

/// Equirectangular RGB image, `n_phi` wide and `n_theta` tall, row 0 at the
/// smallest colatitude. `values` are row-major in `(θ, φ)`.
pub fn render_equirect(values: &[f64], n_theta: usize, n_phi: usize, path: &Path) -> Result<(), CliError> {
    if values.len() != n_theta * n_phi {
        return Err(CliError::Io(format!(
            "{}: expected {} samples, found {}",
            path.display(),
            n_theta * n_phi,
            values.len()
        )));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let data: Vec<u8> = values.iter().flat_map(|&v| ramp(v, lo, hi)).collect();
    let file = fs::File::create(path).map_err(|e| io_error(path, e))?;
    let mut enc = png::Encoder::new(BufWriter::new(file), n_phi as u32, n_theta as u32);
    enc.set_color(png::ColorType::Rgb);
    enc.set_depth(png::BitDepth::Eight);
    enc.set_compression(png::Compression::Default);
    enc.set_filter(png::FilterType::NoFilter);
    let png_error = |e: png::EncodingError| CliError::Io(format!("{}: {e}", path.display()));
    let mut writer = enc.write_header().map_err(png_error)?;
    writer.write_image_data(&data).map_err(png_error)?;
    writer.finish().map_err(png_error)
}

/// Grid samples as `theta,phi,value` rows.
pub fn write_grid_csv(
    thetas: &[f64],
    phis: &[f64],
    values: &[f64],
    path: &Path,
) -> Result<(), CliError> {
    let mut out = String::from("theta,phi,value\n");
    for (i, t) in thetas.iter().enumerate() {
        for (j, p) in phis.iter().enumerate() {
            out.push_str(&format!("{t:.16e},{p:.16e},{:.16e}\n", values[i * phis.len() + j]));
        }
    }
    fs::write(path, out).map_err(|e| io_error(path, e))
}

/// Per-vertex values as `vertex,value` rows.
pub fn write_vertex_csv(values: &[f64], path: &Path) -> Result<(), CliError> {
    let mut out = String::from("vertex,value\n");
    for (v, x) in values.iter().enumerate() {
        out.push_str(&format!("{v},{x:.16e}\n"));
    }
    fs::write(path, out).map_err(|e| io_error(path, e))
}

/// A parsed CSV file: header names and numeric rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

pub fn read_csv(path: &Path) -> Result<CsvTable, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| CliError::usage(format!("{}: empty file", path.display())))?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let row = line
            .split(',')
            .map(|t| t.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::usage(format!("{}:{}: {e}", path.display(), n + 2)))?;
        if row.len() != header.len() {
            return Err(CliError::usage(format!(
                "{}:{}: expected {} columns, found {}",
                path.display(),
                n + 2,
                header.len(),
                row.len()
            )));
        }
        rows.push(row);
    }
    Ok(CsvTable { header, rows })
}

/// Re-emits a table in the writer's format.
pub fn write_csv_table(table: &CsvTable, path: &Path) -> Result<(), CliError> {
    let mut out = table.header.join(",");
    out.push('\n');
    let vertex = table.header.first().is_some_and(|h| h == "vertex");
    for row in &table.rows {
        let cells: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(k, x)| if vertex && k == 0 { format!("{}", *x as usize) } else { format!("{x:.16e}") })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| io_error(path, e))
}

/// Summary written next to the field data.
#[derive(Debug, Clone, Default)]
pub struct Report {
    /// `("L", 16)` on the sphere, `("K", 20)` on a mesh.
    pub size: (&'static str, usize),
    pub region: Option<Value>,
    pub method: String,
    pub shannon: Option<f64>,
    pub retained: Option<usize>,
    pub rank: Option<usize>,
    pub eigenvalue: Option<f64>,
}

impl Report {
    pub fn to_json(&self, values: &[f64]) -> Value {
        let mut m = Map::new();
        m.insert(self.size.0.into(), self.size.1.into());
        m.insert("region".into(), self.region.clone().unwrap_or(Value::Null));
        m.insert("method".into(), self.method.clone().into());
        if let Some(n) = self.shannon {
            m.insert("shannon".into(), n.into());
        }
        if let Some(p) = self.retained {
            m.insert("retained".into(), p.into());
        }
        if let Some(r) = self.rank {
            m.insert("rank".into(), r.into());
        }
        if let Some(l) = self.eigenvalue {
            m.insert("eigenvalue".into(), l.into());
        }
        m.insert("values".into(), values.iter().copied().map(Value::from).collect());
        Value::Object(m)
    }
}

pub fn write_json(value: &Value, path: &Path) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_error(path, e))
}

pub fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

/// Checks the documented layout: required keys, key order and value types.
pub fn validate_report(value: &Value) -> Result<(), String> {
    const ORDER: [&str; 9] = ["L", "K", "region", "method", "shannon", "retained", "rank", "eigenvalue", "values"];
    let obj = value.as_object().ok_or("top level is not an object")?;
    let keys: Vec<&str> = obj.keys().map(String::as_str).collect();
    if let Some(k) = keys.iter().find(|k| !ORDER.contains(k)) {
        return Err(format!("unexpected key `{k}`"));
    }
    let positions: Vec<usize> = keys.iter().map(|k| ORDER.iter().position(|o| o == k).unwrap_or(0)).collect();
    if positions.windows(2).any(|w| w[0] >= w[1]) {
        return Err(format!("keys out of order: {keys:?}"));
    }
    let size_keys = ["L", "K"].iter().filter(|k| obj.contains_key(**k)).count();
    if size_keys != 1 {
        return Err("exactly one of `L` and `K` is required".into());
    }
    for k in ["L", "K", "retained", "rank"] {
        if obj.get(k).is_some_and(|v| !v.is_u64()) {
            return Err(format!("`{k}` must be a non-negative integer"));
        }
    }
    for k in ["shannon", "eigenvalue"] {
        if obj.get(k).is_some_and(|v| !v.is_number()) {
            return Err(format!("`{k}` must be a number"));
        }
    }
    if !obj.get("method").is_some_and(Value::is_string) {
        return Err("`method` must be a string".into());
    }
    match obj.get("values").and_then(Value::as_array) {
        Some(vs) if vs.iter().all(Value::is_number) => Ok(()),
        _ => Err("`values` must be an array of numbers".into()),
    }
}

/// Real samples to export: on the sampling grid or per mesh vertex.
#[derive(Debug, Clone, Copy)]
pub enum FieldData<'a> {
    Grid {
        thetas: &'a [f64],
        phis: &'a [f64],
        values: &'a [f64],
    },
    Vertices(&'a [f64]),
}

impl FieldData<'_> {
    pub fn values(&self) -> &[f64] {
        match self {
            FieldData::Grid { values, .. } => values,
            FieldData::Vertices(values) => values,
        }
    }
}

/// Writes `data` to `path` in `format`; PNG needs grid data.
pub fn export_field(data: FieldData<'_>, report: &Report, path: &Path, format: Format) -> Result<(), CliError> {
    match (format, data) {
        (Format::Png, FieldData::Grid { thetas, phis, values }) => {
            render_equirect(values, thetas.len(), phis.len(), path)
        }
        (Format::Png, FieldData::Vertices(_)) => Err(CliError::usage("--format: png is only available on the sphere")),
        (Format::Csv, FieldData::Grid { thetas, phis, values }) => write_grid_csv(thetas, phis, values, path),
        (Format::Csv, FieldData::Vertices(values)) => write_vertex_csv(values, path),
        (Format::Json, data) => write_json(&report.to_json(data.values()), path),
    }
}
