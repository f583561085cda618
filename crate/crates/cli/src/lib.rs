//! Command-line front end for `gcf-core`.
//!
//! Every subcommand validates its flags into a filter specification before
//! computing anything and writes CSV or JSON to stdout or `--out`. Exit
//! codes: 0 on success, 1 for invalid flags or specifications, 2 for
//! runtime failures (I/O, numerical breakdown).

mod commands;
pub mod output;
pub mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gcf_core::{CascadeSpec, GcfError, GcfSpec};
use thiserror::Error;

pub use output::{Format, Table};
pub use report::DesignReport;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<GcfError> for CliError {
    fn from(e: GcfError) -> Self {
        match e {
            GcfError::NonZeroRemainder(_)
            | GcfError::ImaginaryResidue(_)
            | GcfError::DegenerateZero { .. }
            | GcfError::NoConvergence { .. } => CliError::Runtime(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "gcf",
    version,
    about = "Generalized comb decimation filter toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Filter specification flags shared by the subcommands.
#[derive(Debug, Clone, Args)]
pub struct FilterArgs {
    /// Filter order N.
    #[arg(long, default_value_t = 3)]
    pub order: usize,
    /// Decimation factor D.
    #[arg(long)]
    pub d: Option<usize>,
    /// Oversampling ratio ν of the signal band, f_c = 1/(2νD).
    #[arg(long, default_value_t = 4)]
    pub nu: usize,
    /// Polyphase index p_p in [-1, log2(D) - 1]; D1 = 2^(p_p + 1).
    /// Defaults to log2(D) - 1, the whole filter in polyphase form.
    #[arg(long, allow_hyphen_values = true)]
    pub pp: Option<i32>,
    /// Zero rotations q, comma separated. Defaults to the optimized set for
    /// the order.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub q: Option<Vec<f64>>,
}

impl FilterArgs {
    fn decimation(&self) -> Result<usize, CliError> {
        self.d
            .ok_or_else(|| CliError::Validation("--d is required".into()))
    }

    pub fn gcf_spec(&self) -> Result<GcfSpec, CliError> {
        let d = self.decimation()?;
        let spec = match &self.q {
            Some(q) => GcfSpec::new(self.order, d, q.clone(), self.nu)?,
            None => GcfSpec::optimal(self.order, d, self.nu)?,
        };
        Ok(spec)
    }

    /// The partial polyphase layout; only third-order filters with
    /// power-of-two D have one.
    pub fn cascade(&self, spec: &GcfSpec) -> Result<CascadeSpec, CliError> {
        let p = spec.decimation.trailing_zeros() as i32;
        Ok(CascadeSpec::from_gcf(spec, self.pp.unwrap_or(p - 1))?)
    }

    pub fn cascade_spec(&self) -> Result<CascadeSpec, CliError> {
        self.cascade(&self.gcf_spec()?)
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputKind {
    Impulse,
    Noise,
    File,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Coefficients of H_GCF, h_P, the polyphase bank, stage multipliers and
    /// zeros, as JSON.
    Design {
        #[command(flatten)]
        filter: FilterArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Magnitude and phase of H, H_P and H_N on a uniform grid.
    Freqresp {
        #[command(flatten)]
        filter: FilterArgs,
        /// Number of grid points on [0, 0.5].
        #[arg(long, default_value_t = 8192)]
        grid: usize,
        /// Also report the response with coefficients rounded to this error.
        #[arg(long)]
        quantize: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// First-order error functions ΔH1 and ΔH2,u under uniform errors.
    Sensitivity {
        #[command(flatten)]
        filter: FilterArgs,
        #[arg(long, default_value_t = 8192)]
        grid: usize,
        /// Error added to every raw polyphase coefficient.
        #[arg(long, default_value_t = 1e-4, allow_hyphen_values = true)]
        delta_h: f64,
        /// Error added to every H_N stage multiplier.
        #[arg(long, default_value_t = 1e-4, allow_hyphen_values = true)]
        delta_r: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Nominal zeros of H_P and H_N with their predicted displacement.
    Zeros {
        #[command(flatten)]
        filter: FilterArgs,
        #[arg(long, default_value_t = 1e-6, allow_hyphen_values = true)]
        delta_h: f64,
        #[arg(long, default_value_t = 1e-6, allow_hyphen_values = true)]
        delta_r: f64,
        /// Add the displacement measured by root finding on the perturbed
        /// polynomials.
        #[arg(long)]
        oracle: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Folding-band quantization noise ΔP_qn of H_P versus comb³ over a grid
    /// of D1 and coefficient error Δh.
    Qnsweep {
        #[arg(long, value_delimiter = ',', required = true)]
        d1: Vec<usize>,
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_hyphen_values = true
        )]
        dh: Vec<f64>,
        #[arg(long, default_value_t = 0.79)]
        q: f64,
        #[arg(long, default_value_t = 4)]
        nu: usize,
        /// Modulator order.
        #[arg(long, default_value_t = 2)]
        b: u32,
        /// Quantization noise level S_e.
        #[arg(long, default_value_t = 1.0)]
        se: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Streams a signal through the partial polyphase decimator.
    Simulate {
        #[command(flatten)]
        filter: FilterArgs,
        #[arg(long, value_enum, default_value_t = InputKind::Impulse)]
        input: InputKind,
        /// Samples for `--input file`, one per line.
        #[arg(long)]
        input_file: Option<PathBuf>,
        /// Input length for the built-in sources.
        #[arg(long, default_value_t = 4096)]
        len: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Use the coefficients of a `design` report instead of the flags.
        #[arg(long)]
        filter_file: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    commands::run(cli.command)
}
