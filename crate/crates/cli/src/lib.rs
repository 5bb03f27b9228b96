//! Command-line front ends: `sphere` renders fields on the sampling grid,
//! `mesh` renders per-vertex fields on triangle meshes.
//!
//! Exit codes: `0` success, `1` numerical or output failure, `2` usage,
//! parse or input-file error.

use std::ffi::OsString;

use clap::Parser;
use thiserror::Error;

pub mod mesh;
pub mod output;
pub mod sphere;

pub use output::{export_field, render_equirect};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 1,
        }
    }

    /// Errors while reading inputs (mesh, mask, region files) are usage errors.
    pub(crate) fn input(e: slepiankit::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

impl From<slepiankit::Error> for CliError {
    fn from(e: slepiankit::Error) -> Self {
        match e {
            e if e.is_numerical() => CliError::Numerical(e.to_string()),
            slepiankit::Error::Io { .. } => CliError::Io(e.to_string()),
            e => CliError::Usage(e.to_string()),
        }
    }
}

/// Parses `argv` with clap, printing help or errors; `Err` carries the exit code.
pub(crate) fn parse_args<T: Parser, I, A>(argv: I) -> Result<T, i32>
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    T::try_parse_from(argv).map_err(|e| {
        let _ = e.print();
        if e.use_stderr() {
            2
        } else {
            0
        }
    })
}

pub(crate) fn finish(result: Result<(), CliError>) -> i32 {
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs the `sphere` command on a full argument vector (program name first).
pub fn run_sphere_cli<I, A>(argv: I) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    match parse_args::<sphere::SphereArgs, _, _>(argv) {
        Ok(args) => finish(sphere::run(&args)),
        Err(code) => code,
    }
}

/// Runs the `mesh` command on a full argument vector (program name first).
pub fn run_mesh_cli<I, A>(argv: I) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    match parse_args::<mesh::MeshArgs, _, _>(argv) {
        Ok(args) => finish(mesh::run(&args)),
        Err(code) => code,
    }
}

/// Wavelet component selected on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Scaling,
    Scale(u32),
}

pub(crate) fn component(scale: Option<u32>, scaling: bool) -> Result<Component, CliError> {
    match (scale, scaling) {
        (Some(j), false) => Ok(Component::Scale(j)),
        (None, true) => Ok(Component::Scaling),
        (None, false) => Err(CliError::usage("--method wavelet needs --scale <j> or --scaling")),
        (Some(_), true) => Err(CliError::usage("--scale and --scaling are mutually exclusive")),
    }
}

/// Window of one wavelet component along the line, checked against the tiling.
pub(crate) fn component_window(
    tiling: &slepiankit::TilingFunctions,
    which: Component,
) -> Result<Vec<f64>, CliError> {
    match which {
        Component::Scaling => Ok(tiling.eta().to_vec()),
        Component::Scale(j) => tiling.kappa(j).map(<[f64]>::to_vec).ok_or_else(|| {
            let s = tiling.scales();
            CliError::usage(format!("--scale {j} outside the tiling scales {}..={}", s.start(), s.end()))
        }),
    }
}
