//! Argument parsing and subcommand dispatch.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{ArgGroup, Args, CommandFactory, Parser, Subcommand, ValueEnum};
use isoprofile_core::config::Tolerances;
use isoprofile_core::kernels::CurvatureParams;

use crate::commands;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "isoprofile",
    version,
    about = "Sharp isoperimetric profiles of MCP(K,N) densities"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the profile Ĩ_{K,N,D}(v) and its small-mass asymptote.
    #[command(group(ArgGroup::new("grid").required(true).args(["v_log", "v_grid"])))]
    Profile {
        #[command(flatten)]
        curvature: CurvatureArgs,
        /// Log-spaced masses `lo:hi:n`.
        #[arg(long, value_name = "LO:HI:N")]
        v_log: Option<String>,
        /// Comma-separated masses.
        #[arg(long, value_name = "V,...")]
        v_grid: Option<String>,
        #[command(flatten)]
        tol: ToleranceArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Check a density against the MCP(K,N) condition and the sup bound.
    #[command(group(ArgGroup::new("density").required(true).args(["constant", "a", "tabulated"])))]
    DensityCheck {
        #[command(flatten)]
        curvature: CurvatureArgs,
        /// Constant density on [0, D]; `--value` overrides the default 1/D.
        #[arg(long)]
        constant: bool,
        #[arg(long, requires = "constant")]
        value: Option<f64>,
        /// Model density h_a with split point a.
        #[arg(long)]
        a: Option<f64>,
        /// Two-column CSV `x,h` with header.
        #[arg(long, value_name = "PATH")]
        tabulated: Option<PathBuf>,
        #[arg(long, default_value_t = 40)]
        grid_n: usize,
        /// Number of worst violations kept in the report.
        #[arg(long, default_value_t = 100)]
        max_violations: usize,
        #[command(flatten)]
        tol: ToleranceArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Evaluate the sharpness ratio of the principal constant along h_a.
    #[command(group(ArgGroup::new("grid").required(true).args(["a_log", "a_grid"])))]
    Sharpness {
        #[command(flatten)]
        curvature: CurvatureArgs,
        #[arg(long, value_name = "LO:HI:N")]
        a_log: Option<String>,
        #[arg(long, value_name = "A,...")]
        a_grid: Option<String>,
        /// Upper limit asserted on the last ratio.
        #[arg(long, default_value_t = 1.02)]
        limit: f64,
        #[command(flatten)]
        tol: ToleranceArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Verify the localized inequality on needle decompositions, or the
    /// local isoperimetric conclusion on the sharpness family.
    #[command(group(ArgGroup::new("source").required(true).args(["decomposition", "trials", "family_a"])))]
    Verify {
        #[command(flatten)]
        curvature: OptionalCurvatureArgs,
        /// Decomposition JSON file.
        #[arg(long, value_name = "PATH")]
        decomposition: Option<PathBuf>,
        /// Number of seeded random decompositions.
        #[arg(long)]
        trials: Option<usize>,
        /// Needles per random decomposition cycle through 1..=max.
        #[arg(long, default_value_t = 5, requires = "trials")]
        max_needles: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        delta: Option<f64>,
        /// Write the generated decomposition (requires `--trials 1`).
        #[arg(long, value_name = "PATH", requires = "trials")]
        save_decomposition: Option<PathBuf>,
        /// Split point a of the sharpness family; checks E = [0, a].
        #[arg(long)]
        family_a: Option<f64>,
        #[arg(long, requires = "family_a")]
        psi_band: Option<f64>,
        #[arg(long, requires = "family_a")]
        eta: Option<f64>,
        /// Lattice size for needle MCP certificates.
        #[arg(long, default_value_t = 24)]
        grid_n: usize,
        #[command(flatten)]
        tol: ToleranceArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Compare the profile with a brute-force minimization over intervals.
    #[command(group(ArgGroup::new("grid").required(true).args(["v_log", "v_grid"])))]
    Oracle {
        #[command(flatten)]
        curvature: CurvatureArgs,
        #[arg(long, value_name = "LO:HI:N")]
        v_log: Option<String>,
        #[arg(long, value_name = "V,...")]
        v_grid: Option<String>,
        #[arg(long, default_value_t = 512)]
        grid_n: usize,
        /// Relative agreement asserted per row.
        #[arg(long, default_value_t = 1e-4)]
        rel_tol: f64,
        #[command(flatten)]
        tol: ToleranceArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Clone, Copy, Args)]
pub struct CurvatureArgs {
    #[arg(long = "K", value_name = "K", allow_hyphen_values = true)]
    pub k: f64,
    #[arg(long = "N", value_name = "N")]
    pub n: f64,
    #[arg(long = "D", value_name = "D")]
    pub d: f64,
}

impl CurvatureArgs {
    pub fn params(&self) -> Result<CurvatureParams, CliError> {
        Ok(CurvatureParams::new(self.k, self.n, self.d)?)
    }
}

#[derive(Debug, Clone, Copy, Args)]
pub struct OptionalCurvatureArgs {
    #[arg(long = "K", value_name = "K", allow_hyphen_values = true)]
    pub k: Option<f64>,
    #[arg(long = "N", value_name = "N")]
    pub n: Option<f64>,
    #[arg(long = "D", value_name = "D")]
    pub d: Option<f64>,
}

impl OptionalCurvatureArgs {
    pub fn params(&self) -> Result<Option<CurvatureParams>, CliError> {
        match (self.k, self.n, self.d) {
            (None, None, None) => Ok(None),
            (Some(k), Some(n), Some(d)) => Ok(Some(CurvatureParams::new(k, n, d)?)),
            _ => Err(CliError::Input("--K, --N and --D must be given together".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, Args)]
pub struct ToleranceArgs {
    /// Relative quadrature tolerance.
    #[arg(long)]
    pub tol_quad: Option<f64>,
    /// Residual target for the mass inversion.
    #[arg(long)]
    pub tol_inv: Option<f64>,
    /// Tight relative quadrature for tiny masses.
    #[arg(long)]
    pub extended: bool,
}

impl ToleranceArgs {
    pub fn resolve(&self) -> Result<Tolerances, CliError> {
        let mut tol = if self.extended {
            Tolerances::extended()
        } else {
            Tolerances::default()
        };
        if let Some(q) = self.tol_quad {
            if !(q > 0.0 && q.is_finite()) {
                return Err(CliError::Input(format!("--tol-quad must be positive, got {q}")));
            }
            tol.quad = tol.quad.with_rel_tol(q);
        }
        if let Some(i) = self.tol_inv {
            if !(i > 0.0 && i.is_finite()) {
                return Err(CliError::Input(format!("--tol-inv must be positive, got {i}")));
            }
            tol.inversion = i;
        }
        Ok(tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

/// Whether the command's checks held.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Passed,
    Failed(String),
}

/// Output sink: the `--out` file or the caller's stdout.
pub(crate) fn with_sink<F>(out: &Option<PathBuf>, stdout: &mut dyn Write, body: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> Result<(), CliError>,
{
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            body(&mut w)?;
            w.flush()?;
            Ok(())
        }
        None => body(stdout),
    }
}

/// Parses `args` (program name first) and runs the command; returns the
/// process exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let text = e.render().to_string();
                let _ = write!(stderr, "{text}");
                if !text.contains("Usage:") {
                    let _ = writeln!(stderr, "\n{}", Cli::command().render_usage());
                }
                2
            } else {
                let _ = write!(stdout, "{}", e.render());
                0
            };
            return code;
        }
    };
    match commands::dispatch(&cli.command, stdout) {
        Ok(Outcome::Passed) => 0,
        Ok(Outcome::Failed(msg)) => {
            let _ = writeln!(stderr, "assertion failed: {msg}");
            1
        }
        Err(e) => {
            let code = e.exit_code();
            let _ = writeln!(stderr, "error: {e}");
            if e.is_usage_error() {
                let name = subcommand_name(&cli.command);
                let mut cmd = Cli::command();
                cmd.build();
                let usage = match cmd.find_subcommand_mut(name) {
                    Some(sub) => sub.render_usage(),
                    None => cmd.render_usage(),
                };
                let _ = writeln!(stderr, "\n{usage}");
            }
            code
        }
    }
}

fn subcommand_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Profile { .. } => "profile",
        Command::DensityCheck { .. } => "density-check",
        Command::Sharpness { .. } => "sharpness",
        Command::Verify { .. } => "verify",
        Command::Oracle { .. } => "oracle",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn negative_curvature_parses() {
        let cli = Cli::try_parse_from([
            "isoprofile",
            "profile",
            "--K",
            "-2",
            "--N",
            "3",
            "--D",
            "1",
            "--v-grid",
            "0.1",
        ])
        .unwrap();
        match cli.command {
            Command::Profile { curvature, .. } => assert_eq!(curvature.k, -2.0),
            _ => unreachable!(),
        }
    }

    #[test]
    fn tolerances_must_be_positive() {
        let t = ToleranceArgs {
            tol_quad: Some(0.0),
            tol_inv: None,
            extended: false,
        };
        assert!(t.resolve().is_err());
        let t = ToleranceArgs {
            tol_quad: Some(1e-8),
            tol_inv: Some(1e-9),
            extended: false,
        };
        let r = t.resolve().unwrap();
        assert_eq!(r.quad.rel_tol, 1e-8);
        assert_eq!(r.inversion, 1e-9);
    }
}
