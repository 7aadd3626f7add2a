use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Deserialize;

use modspace::field_io::{read_field, write_field};
use modspace::gabor::{modulation_norm, stft, Window};
use modspace::lattice::{GridSpec, SampledField};
use modspace::mixed_norm::{Exponent, Flavor};
use modspace::psdo::{amplitude_mod_norm, op_from_amplitude, op_from_symbol, reduce_amplitude, QuantizationMatrix};
use modspace::spectral::{schatten_bound_experiment, SchattenConfig};
use modspace::trace::{trace_bound_experiment, TraceExperimentConfig};
use modspace::verify::{run_suite, Suite, VerifyManifest};
use modspace::{Error, Weight};

#[derive(Parser)]
#[command(name = "modspace", version, about = "Modulation-space numerics on periodic grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full short-time Fourier transform of a field file.
    Stft {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Window field file; defaults to the L²-normalized Gaussian on the input grid.
        #[arg(long)]
        window: Option<PathBuf>,
    },
    /// Modulation or amplitude norm of a field, as described by a JSON manifest.
    Norm {
        input: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Trace boundedness experiment.
    TraceCheck {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reduce an amplitude `a(x, y, ζ)` to its Kohn-Nirenberg symbol.
    PsdoReduce {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply `Op_t(a)` (symbol) or `Op(a)` (amplitude) to a field.
    PsdoApply {
        input: PathBuf,
        #[arg(long, conflicts_with = "amplitude", required_unless_present = "amplitude")]
        symbol: Option<PathBuf>,
        #[arg(long)]
        amplitude: Option<PathBuf>,
        /// Quantization parameter: 0 (Kohn-Nirenberg), 0.5 (Weyl) or 1.
        #[arg(long, default_value_t = 0.0)]
        t: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Schatten bound experiment.
    Schatten {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite: young, moyal, trace, reduce, transfer, schatten or all.
    Verify {
        suite: String,
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Leave wall times out of the report.
        #[arg(long)]
        deterministic: bool,
        #[arg(long, default_value = "verify-report.json")]
        out: PathBuf,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NormManifest {
    p: Vec<Exponent>,
    q: Vec<Exponent>,
    #[serde(default)]
    weight: Weight,
    #[serde(default = "default_flavor")]
    flavor: Flavor,
    #[serde(default = "unit_strides")]
    strides: (usize, usize),
    /// Treat the field as an amplitude on `3d` axes; `p` and `q` then have three entries.
    #[serde(default)]
    amplitude: bool,
}

fn default_flavor() -> Flavor {
    Flavor::M
}

fn unit_strides() -> (usize, usize) {
    (1, 1)
}

enum Failure {
    Lib(Error),
    Criteria,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Lib(e.into())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(e.into())
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::GridMismatch(_) | Error::DimensionMismatch { .. } => 3,
        Error::InvalidExponent(_) | Error::ExponentViolation(_) => 4,
        _ => 2,
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

fn emit_json(value: &impl serde::Serialize, out: Option<&Path>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(p) => fs::write(p, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn same_grid(a: &GridSpec, b: &GridSpec) -> Result<(), Error> {
    if a.n() != b.n() || a.step() != b.step() || a.dim() != b.dim() {
        return Err(Error::GridMismatch(format!(
            "window grid (dim {}, N {}) differs from field grid (dim {}, N {})",
            b.dim(),
            b.n(),
            a.dim(),
            a.n()
        )));
    }
    Ok(())
}

fn cmd_stft(input: &Path, out: &Path, window: Option<&Path>) -> Result<(), Failure> {
    let f = read_field(input)?;
    let g = *f.spec();
    let phi = match window {
        Some(p) => {
            let w = read_field(p)?;
            same_grid(&g, w.spec())?;
            Window::custom(w)?
        }
        None => Window::gaussian(&g),
    };
    let v = stft(&f, &phi)?;
    let phase = GridSpec::new(2 * g.dim(), g.n(), g.step())?;
    write_field(out, &SampledField::new(phase, v.into_values())?)?;
    Ok(())
}

fn cmd_norm(input: &Path, manifest: &Path) -> Result<(), Failure> {
    let m: NormManifest = read_json(manifest)?;
    for e in m.p.iter().chain(&m.q) {
        e.validate()?;
    }
    let f = read_field(input)?;
    let g = *f.spec();
    let value = if m.amplitude {
        let (Ok(p), Ok(q)) = (<[Exponent; 3]>::try_from(m.p.as_slice()), <[Exponent; 3]>::try_from(m.q.as_slice())) else {
            return Err(Error::Config("amplitude norms take three p and three q exponents".into()).into());
        };
        amplitude_mod_norm(&f, &Window::gaussian(&g), &p, &q, &m.weight, m.flavor, m.strides)?
    } else {
        modulation_norm(&f, &Window::gaussian(&g), &m.p, &m.q, &m.weight, m.flavor, m.strides)?
    };
    if value == 0.0 {
        println!("0");
    } else {
        println!("{value:.16e}");
    }
    Ok(())
}

fn cmd_psdo_apply(input: &Path, symbol: Option<&Path>, amplitude: Option<&Path>, t: f64, out: &Path) -> Result<(), Failure> {
    let f = read_field(input)?;
    let op = match (symbol, amplitude) {
        (Some(s), _) => op_from_symbol(&read_field(s)?, QuantizationMatrix::new(t)?)?,
        (None, Some(a)) => op_from_amplitude(&read_field(a)?)?,
        (None, None) => return Err(Error::Config("pass --symbol or --amplitude".into()).into()),
    };
    write_field(out, &op.apply(&f)?)?;
    Ok(())
}

fn cmd_verify(suite: &str, manifest: Option<&Path>, deterministic: bool, out: &Path) -> Result<(), Failure> {
    let suite: Suite = suite.parse()?;
    let m: VerifyManifest = match manifest {
        Some(p) => read_json(p)?,
        None => VerifyManifest::default(),
    };
    let report = run_suite(suite, &m, deterministic)?;
    print!("{}", report.table());
    emit_json(&report, Some(out))?;
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Criteria)
    }
}

fn configure_threads() -> Result<(), Error> {
    let Ok(raw) = std::env::var("MODSPACE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("MODSPACE_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(e.to_string()))
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    match cli.command {
        Command::Stft { input, out, window } => cmd_stft(&input, &out, window.as_deref()),
        Command::Norm { input, manifest } => cmd_norm(&input, &manifest),
        Command::TraceCheck { manifest, out } => {
            let cfg: TraceExperimentConfig = read_json(&manifest)?;
            emit_json(&trace_bound_experiment(&cfg)?, out.as_deref())
        }
        Command::PsdoReduce { input, out } => {
            write_field(&out, &reduce_amplitude(&read_field(&input)?)?)?;
            Ok(())
        }
        Command::PsdoApply { input, symbol, amplitude, t, out } => {
            cmd_psdo_apply(&input, symbol.as_deref(), amplitude.as_deref(), t, &out)
        }
        Command::Schatten { manifest, out } => {
            let cfg: SchattenConfig = read_json(&manifest)?;
            emit_json(&schatten_bound_experiment(&cfg)?, out.as_deref())
        }
        Command::Verify { suite, manifest, deterministic, out } => {
            cmd_verify(&suite, manifest.as_deref(), deterministic, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Criteria) => ExitCode::from(1),
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
