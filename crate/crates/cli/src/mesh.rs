//! The `mesh` command.

use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde_json::Value;
use slepiankit::mesh::{
    load_mesh, mesh_basis, mesh_laplacian, mesh_slepian, mesh_wavelets, read_vertex_region, LaplacianKind,
};

use crate::output::{export_field, output_path, parse_formats, FieldData, Report};
use crate::{component, component_window, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Basis,
    Slepian,
    Wavelet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Cotangent,
    Combinatorial,
}

/// Render Laplacian eigenfunctions, Slepian functions or Slepian wavelet
/// kernels on a triangle mesh (OFF or OBJ).
#[derive(Debug, Parser)]
#[command(name = "mesh", version)]
pub struct MeshArgs {
    pub mesh: PathBuf,
    /// Number of Laplacian eigenfunctions K.
    #[arg(long = "basis", value_name = "K")]
    pub basis: usize,
    /// File of vertex indices, one per line.
    #[arg(long)]
    pub region: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Method::Basis)]
    pub method: Method,
    #[arg(long, default_value_t = 0)]
    pub rank: usize,
    #[arg(long = "B", default_value_t = 2.0)]
    pub b: f64,
    #[arg(long = "Jmin", default_value_t = 0)]
    pub j_min: u32,
    #[arg(long)]
    pub scale: Option<u32>,
    #[arg(long)]
    pub scaling: bool,
    #[arg(long, value_enum, default_value_t = Kind::Cotangent)]
    pub kind: Kind,
    #[arg(short = 'o', value_name = "PATH")]
    pub output: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    pub format: String,
}

pub fn run(args: &MeshArgs) -> Result<(), CliError> {
    let formats = parse_formats(&args.format)?;
    if formats.contains(&crate::output::Format::Png) {
        return Err(CliError::usage("--format: png is only available on the sphere"));
    }
    if args.method != Method::Basis && args.region.is_none() {
        return Err(CliError::usage(format!(
            "--method {} needs --region",
            format!("{:?}", args.method).to_lowercase()
        )));
    }
    let which = match args.method {
        Method::Wavelet => Some(component(args.scale, args.scaling)?),
        _ => None,
    };
    let stem: &Path = args.output.as_deref().ok_or_else(|| CliError::usage("-o <path> is required"))?;
    let mesh = load_mesh(&args.mesh).map_err(CliError::input)?;
    if args.basis == 0 || args.basis > mesh.len() {
        return Err(CliError::usage(format!("--basis {} outside 1..={}", args.basis, mesh.len())));
    }
    let kind = match args.kind {
        Kind::Cotangent => LaplacianKind::Cotangent,
        Kind::Combinatorial => LaplacianKind::Combinatorial,
    };
    let laplacian = mesh_laplacian(&mesh, kind).map_err(CliError::input)?;
    let basis = mesh_basis(&laplacian, mesh.vertex_weights(), args.basis, true)?;
    let mut report = Report {
        size: ("K", args.basis),
        method: format!("{:?}", args.method).to_lowercase(),
        ..Default::default()
    };
    let values = match args.method {
        Method::Basis => {
            if args.rank >= basis.size() {
                return Err(CliError::usage(format!("--rank {} outside 0..{}", args.rank, basis.size())));
            }
            report.rank = Some(args.rank);
            report.eigenvalue = Some(basis.eigenvalues()[args.rank]);
            basis.function(args.rank)
        }
        Method::Slepian | Method::Wavelet => {
            let path = args.region.as_deref().expect("checked above");
            let region = read_vertex_region(path).map_err(CliError::input)?;
            let msb = mesh_slepian(&basis, &region).map_err(CliError::input)?;
            report.region = Some(Value::from(msb.region().to_vec()));
            report.shannon = Some(msb.shannon());
            println!("shannon number: {:.6}", msb.shannon());
            match which {
                None => {
                    if args.rank >= msb.len() {
                        return Err(CliError::usage(format!("--rank {} outside 0..{}", args.rank, msb.len())));
                    }
                    report.rank = Some(args.rank);
                    report.eigenvalue = Some(msb.eigenvalues()[args.rank]);
                    msb.function(args.rank)
                }
                Some(which) => {
                    let tiling = mesh_wavelets(&msb, args.b, args.j_min)?;
                    let window = component_window(&tiling, which)?;
                    report.retained = Some(window.len());
                    println!("retained: {}", window.len());
                    // kernel of the selected component: all-ones Slepian coefficients through the window
                    msb.synthesize(&window)
                }
            }
        }
    };
    for format in formats {
        export_field(FieldData::Vertices(&values), &report, &output_path(stem, format), format)?;
    }
    Ok(())
}
