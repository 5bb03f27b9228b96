//! The `sphere` command.

use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde_json::Value;
use slepiankit::cache::{compute_cached, CACHE_DIR_ENV};
use slepiankit::sifting::translate;
use slepiankit::wavelets::{analysis, build_tiling};
use slepiankit::{
    forward_slepian, inverse_sht, inverse_slepian, make_grid, parse_region, region_limited_forward, Bandlimit, Region,
    RegionQuadrature, SampledField, SlepianBasis, SlepianCoefficients, SphericalCoefficients, TilingParams,
};

use crate::output::{export_field, output_path, parse_formats, FieldData, Report};
use crate::{component, component_window, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Harmonic,
    Slepian,
    Wavelet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Part {
    Real,
    Imag,
    Abs,
}

/// Render a bandlimited function on the Gauss–Legendre sampling grid.
///
/// FUNCTION is one of gaussian, elongated-gaussian, random, harmonic, or
/// slepian (the rank-p Slepian function of --region).
#[derive(Debug, Parser)]
#[command(name = "sphere", version)]
pub struct SphereArgs {
    pub function: String,
    /// Bandlimit (degrees l < L).
    #[arg(short = 'L', value_name = "INT")]
    pub bandlimit: usize,
    /// polar-cap:<deg> | latlon:<θmin>,<θmax>,<φmin>,<φmax> | mask:<file>
    #[arg(long)]
    pub region: Option<String>,
    #[arg(long, value_enum, default_value_t = Method::Harmonic)]
    pub method: Method,
    /// Slepian rank, for the `slepian` function.
    #[arg(long)]
    pub rank: Option<usize>,
    /// Wavelet scale to keep.
    #[arg(long)]
    pub scale: Option<u32>,
    /// Keep the scaling part instead of a wavelet scale.
    #[arg(long)]
    pub scaling: bool,
    /// Tiling dilation.
    #[arg(long = "B", default_value_t = 2.0)]
    pub b: f64,
    /// Lowest wavelet scale.
    #[arg(long = "Jmin", default_value_t = 0)]
    pub j_min: u32,
    /// Function parameter, `key=value`; repeatable.
    #[arg(long = "param", value_name = "K=V")]
    pub params: Vec<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sifting translation to `θ,φ` (degrees) before rendering.
    #[arg(long, value_name = "THETA,PHI")]
    pub translate: Option<String>,
    /// Slepian truncation P (default ⌈N⌉).
    #[arg(long)]
    pub truncation: Option<usize>,
    /// Estimate Slepian coefficients from samples inside the region only.
    #[arg(long)]
    pub region_limited: bool,
    /// Smallest concentration accepted by --region-limited.
    #[arg(long, default_value_t = slepiankit::concentration::DEFAULT_LAMBDA_MIN)]
    pub lambda_min: f64,
    /// Component of a complex field to render.
    #[arg(long, value_enum, default_value_t = Part::Real)]
    pub part: Part,
    /// Output stem; each format appends its extension.
    #[arg(short = 'o', value_name = "PATH")]
    pub output: Option<PathBuf>,
    #[arg(long, default_value = "png")]
    pub format: String,
}

pub(crate) fn parse_params(raw: &[String]) -> Result<Vec<(String, f64)>, CliError> {
    raw.iter()
        .map(|p| {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("--param: expected key=value, got `{p}`")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| CliError::usage(format!("--param: `{v}` is not a number")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

fn parse_translation(spec: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::usage(format!("--translate: expected `theta,phi` in degrees, got `{spec}`"));
    let (t, p) = spec.split_once(',').ok_or_else(bad)?;
    let t: f64 = t.trim().parse().map_err(|_| bad())?;
    let p: f64 = p.trim().parse().map_err(|_| bad())?;
    if !(0.0..=180.0).contains(&t) || !p.is_finite() {
        return Err(bad());
    }
    Ok((t.to_radians(), p.to_radians()))
}

fn require_region(args: &SphereArgs) -> Result<Region, CliError> {
    let spec = args.region.as_deref().ok_or_else(|| {
        CliError::usage(match args.function.as_str() {
            "slepian" => "the slepian function needs --region".to_string(),
            _ => format!("--method {:?} needs --region", args.method).to_lowercase(),
        })
    })?;
    parse_region(spec).map_err(|e| CliError::usage(format!("--region: {e}")))
}

fn basis_for(region: &Region, bandlimit: Bandlimit) -> Result<SlepianBasis, CliError> {
    let dir = std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from);
    Ok(compute_cached(dir.as_deref(), region, bandlimit)?)
}

struct Computed {
    coefficients: SphericalCoefficients,
    report: Report,
}

fn compute(args: &SphereArgs, bandlimit: Bandlimit) -> Result<Computed, CliError> {
    let mut report = Report {
        size: ("L", bandlimit.get()),
        method: format!("{:?}", args.method).to_lowercase(),
        ..Default::default()
    };
    if args.function == "slepian" {
        if args.method != Method::Harmonic {
            return Err(CliError::usage("--method does not apply to the slepian function"));
        }
        let region = require_region(args)?;
        let basis = basis_for(&region, bandlimit)?;
        let p = args.rank.unwrap_or(0);
        if p >= basis.len() {
            return Err(CliError::usage(format!("--rank {p} outside 0..{}", basis.len())));
        }
        report.method = "slepian-function".into();
        report.region = args.region.clone().map(Value::from);
        report.shannon = Some(basis.shannon());
        report.rank = Some(p);
        report.eigenvalue = Some(basis.eigenvalues()[p]);
        print_shannon(&basis, None);
        return Ok(Computed {
            coefficients: basis.vector(p),
            report,
        });
    }
    if args.rank.is_some() {
        return Err(CliError::usage("--rank only applies to the slepian function"));
    }
    let params = parse_params(&args.params)?;
    let mut f = slepiankit::functions::by_name(&args.function, bandlimit, &params, args.seed)
        .map_err(|e| CliError::usage(e.to_string()))?;
    if let Some(spec) = &args.translate {
        let (t, p) = parse_translation(spec)?;
        f = translate(&f, t, p);
    }
    if args.method == Method::Harmonic {
        return Ok(Computed { coefficients: f, report });
    }
    let which = match args.method {
        Method::Wavelet => Some(component(args.scale, args.scaling)?),
        _ => None,
    };
    let region = require_region(args)?;
    let basis = basis_for(&region, bandlimit)?;
    let truncation = args.truncation.unwrap_or_else(|| basis.shannon_ceiling());
    if truncation == 0 || truncation > basis.len() {
        return Err(CliError::usage(format!("--truncation {truncation} outside 1..={}", basis.len())));
    }
    let mut fp = if args.region_limited {
        let quad = RegionQuadrature::new(&region, bandlimit)?;
        let samples: Vec<_> = quad.points().iter().map(|&(t, p)| f.evaluate(t, p)).collect();
        region_limited_forward(&samples, &basis, &quad, truncation, args.lambda_min)?
            .values()
            .to_vec()
    } else {
        forward_slepian(&f, &basis, truncation)?.values().to_vec()
    };
    if let Some(which) = which {
        let tiling = build_tiling(TilingParams::new(args.b, args.j_min, truncation)?)?;
        let window = component_window(&tiling, which)?;
        let w = analysis(&fp, &tiling);
        // keep one component: V(t) η(t) or W^j(t) κ_j(t)
        let kept = match which {
            crate::Component::Scaling => &w.scaling,
            crate::Component::Scale(j) => &w.wavelets[(j - tiling.params().j_min()) as usize],
        };
        fp = kept.iter().zip(&window).map(|(c, k)| c * *k).collect();
    }
    report.region = args.region.clone().map(Value::from);
    report.shannon = Some(basis.shannon());
    report.retained = Some(truncation);
    print_shannon(&basis, Some(truncation));
    let coefficients = inverse_slepian(&SlepianCoefficients::new(&basis, fp)?);
    Ok(Computed { coefficients, report })
}

fn print_shannon(basis: &SlepianBasis, retained: Option<usize>) {
    println!("shannon number: {:.6}", basis.shannon());
    if let Some(p) = retained {
        println!("retained: {p}");
    }
}

/// The rendered real values of `field`.
pub fn project(field: &SampledField, part: Part) -> Vec<f64> {
    match part {
        Part::Real => field.real_part(),
        Part::Imag => field.values().iter().map(|z| z.im).collect(),
        Part::Abs => field.values().iter().map(|z| z.norm()).collect(),
    }
}

pub fn run(args: &SphereArgs) -> Result<(), CliError> {
    let bandlimit = Bandlimit::new(args.bandlimit).map_err(|e| CliError::usage(format!("-L: {e}")))?;
    let formats = parse_formats(&args.format)?;
    if (args.method != Method::Harmonic || args.function == "slepian") && args.region.is_none() {
        require_region(args)?;
    }
    let stem: &Path = args.output.as_deref().ok_or_else(|| CliError::usage("-o <path> is required"))?;
    let computed = compute(args, bandlimit)?;
    let grid = make_grid(bandlimit);
    let field = inverse_sht(&computed.coefficients, &grid)?;
    let values = project(&field, args.part);
    let data = FieldData::Grid {
        thetas: grid.thetas(),
        phis: grid.phis(),
        values: &values,
    };
    for format in formats {
        export_field(data, &computed.report, &output_path(stem, format), format)?;
    }
    Ok(())
}
