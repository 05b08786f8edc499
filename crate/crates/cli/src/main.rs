//! `npm`: curves, optimization, coding tables, file coding and link
//! simulation for zero-signal constellations.
//!
//! Exit codes: 0 ok, 2 invalid configuration, 3 unreachable target,
//! 4 integrity failure, 5 correction failure. `NPM_THREADS` caps the
//! worker pool.

mod grid;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use npm_core::bits::{bits_to_bytes, bytes_to_bits};
use npm_core::channel::{
    curve_scan, find_p_for_noisy_efficiency, mutual_information, ChannelError, CurveRow, NoiseModel,
    QuadratureSpec, ScanError,
};
use npm_core::constellation::{find_p_for_efficiency, ConstellationError};
use npm_core::fec::{
    frame_message, receive, simulate_pipeline, unframe_message, FecError, PipelineConfig, RedundancyScheme,
    DEFAULT_BUDGET_PER_SYMBOL,
};
use npm_core::rng;
use npm_core::rtans::{encode_stream, AnsTables, Frame, RtansError, INITIAL_STATE};
use npm_core::{Constellation, ConstellationKind, Efficiency, SymbolDistribution};

use grid::{GridError, GridSpec};

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Unreachable(String),
    #[error("integrity check failed: {0}")]
    Integrity(String),
    #[error("correction failed: {0}")]
    Correction(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Unreachable(_) => 3,
            CliError::Integrity(_) => 4,
            CliError::Correction(_) => 5,
        }
    }
}

impl From<GridError> for CliError {
    fn from(e: GridError) -> Self {
        CliError::Config(format!("grid: {e}"))
    }
}

impl From<ConstellationError> for CliError {
    fn from(e: ConstellationError) -> Self {
        match e {
            ConstellationError::UnreachableEfficiency { .. } => CliError::Unreachable(e.to_string()),
            e => CliError::Config(e.to_string()),
        }
    }
}

impl From<ChannelError> for CliError {
    fn from(e: ChannelError) -> Self {
        match e {
            ChannelError::UnreachableEfficiency { .. } => CliError::Unreachable(e.to_string()),
            ChannelError::Constellation(c) => c.into(),
            e => CliError::Config(e.to_string()),
        }
    }
}

impl From<ScanError> for CliError {
    fn from(e: ScanError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<RtansError> for CliError {
    fn from(e: RtansError) -> Self {
        match e {
            RtansError::Corrupt(_) | RtansError::Frame(_) | RtansError::UnknownSymbol(_) => {
                CliError::Integrity(e.to_string())
            }
            e => CliError::Config(e.to_string()),
        }
    }
}

impl From<FecError> for CliError {
    fn from(e: FecError) -> Self {
        match e {
            FecError::Rtans(r) => r.into(),
            FecError::Channel(c) => c.into(),
            FecError::Constellation(c) => c.into(),
            FecError::ConstraintViolated(_) | FecError::InvalidLength(_) | FecError::MissingTerminator => {
                CliError::Integrity(e.to_string())
            }
            e => CliError::Config(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "npm", version, about = "Nonuniform probability modulation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Binary,
    Ternary,
    Hexagonal,
}

impl From<Kind> for ConstellationKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Binary => ConstellationKind::Binary,
            Kind::Ternary => ConstellationKind::Ternary,
            Kind::Hexagonal => ConstellationKind::Hexagonal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// `none`, or `k/(k+1)` for a forced zero every `k + 1` positions.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Rate(RedundancyScheme);

fn parse_rate(s: &str) -> Result<Rate, String> {
    if s.eq_ignore_ascii_case("none") {
        return Ok(Rate(RedundancyScheme::unconstrained()));
    }
    let (k, n) = s
        .split_once('/')
        .ok_or_else(|| format!("rate '{s}' is neither 'none' nor a fraction like 1/2"))?;
    let (k, n): (usize, usize) = match (k.trim().parse(), n.trim().parse()) {
        (Ok(k), Ok(n)) => (k, n),
        _ => return Err(format!("rate '{s}' is not a fraction of integers")),
    };
    if k == 0 || n != k + 1 {
        return Err(format!("rate must have the form k/(k+1), got {s}"));
    }
    RedundancyScheme::with_period(n).map(Rate).map_err(|e| e.to_string())
}

fn parse_grid(s: &str) -> Result<GridSpec, String> {
    s.parse().map_err(|e: GridError| e.to_string())
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Entropy or mutual information, energy and efficiency over a grid of p.
    Curves {
        #[arg(long, value_enum)]
        kind: Kind,
        /// Noise variance per component; noise-free when absent.
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long, value_parser = parse_grid, default_value = "0:0.001:1")]
        grid: GridSpec,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Finds p at which efficiency is `multiple` times the uniform one.
    Optimize {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, default_value_t = 2.0)]
        multiple: f64,
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dumps the sender table shaped for p.
    Tables {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        p: f64,
        #[arg(long = "R", default_value_t = 11)]
        precision: u32,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Shapes a file into a framed symbol stream.
    Encode {
        input: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        p: f64,
        #[arg(long = "R", default_value_t = 11)]
        precision: u32,
        #[arg(long, value_parser = parse_rate, default_value = "none")]
        rate: Rate,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recovers a file from a frame, optionally through a simulated channel.
    Decode {
        input: PathBuf,
        #[arg(long, value_parser = parse_rate, default_value = "none")]
        rate: Rate,
        /// Noise variance of the simulated channel.
        #[arg(long, visible_alias = "noise")]
        channel: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Node expansions allowed; 64 per symbol by default.
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Runs a random message through the whole link and prints a summary.
    Simulate {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        p: f64,
        #[arg(long = "R", default_value_t = 11)]
        precision: u32,
        #[arg(long)]
        noise: f64,
        #[arg(long, value_parser = parse_rate, default_value = "1/2")]
        rate: Rate,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 4096)]
        bits: usize,
        #[arg(long)]
        budget: Option<usize>,
    },
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            let mut stdout = io::stdout().lock();
            // A closed pipe is not worth a failure exit.
            let _ = stdout.write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn read_input(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

fn noise_model(noise: Option<f64>) -> Result<Option<NoiseModel>, CliError> {
    noise.map(NoiseModel::new).transpose().map_err(CliError::from)
}

fn family_size(kind: ConstellationKind) -> usize {
    kind.size().expect("standard family")
}

fn curves_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from("p,information,energy,efficiency\n");
    for r in rows {
        let eta = match r.efficiency {
            Efficiency::Finite(v) | Efficiency::Limit(v) => v.to_string(),
            Efficiency::Unbounded => "inf".to_string(),
        };
        out.push_str(&format!("{},{},{},{}\n", r.p, r.information, r.energy, eta));
    }
    out
}

fn cmd_curves(
    kind: ConstellationKind,
    noise: Option<f64>,
    grid: &GridSpec,
    format: Format,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let model = noise_model(noise)?;
    let points = grid.points(Some(1.0 / family_size(kind) as f64));
    let rows = curve_scan(kind, model.as_ref(), &points, &QuadratureSpec::default())?;
    let text = match format {
        Format::Csv => curves_csv(&rows),
        Format::Json => to_json(&rows),
    };
    write_output(out, &text)
}

#[derive(Debug, Serialize)]
struct OptimizeReport {
    kind: ConstellationKind,
    noise: Option<f64>,
    multiple: f64,
    p: f64,
    /// Uniform-point entropy (or information) over that at `p`.
    information_ratio: f64,
    efficiency: f64,
    uniform_efficiency: f64,
}

fn cmd_optimize(
    kind: ConstellationKind,
    multiple: f64,
    noise: Option<f64>,
    format: Format,
    out: Option<&Path>,
) -> Result<(), CliError> {
    if !(multiple >= 1.0 && multiple.is_finite()) {
        return Err(CliError::Config(format!("multiple must be at least 1, got {multiple}")));
    }
    let p_upm = 1.0 / family_size(kind) as f64;
    let model = noise_model(noise)?;
    let quad = QuadratureSpec::default();
    let information = |p: f64| -> Result<(f64, f64), CliError> {
        let dist = SymbolDistribution::zero_signal_family(kind, p)?;
        let info = match &model {
            Some(m) => mutual_information(&dist, m, &quad)?,
            None => dist.entropy(),
        };
        Ok((info, info / dist.average_energy()))
    };
    let (info_upm, eta_upm) = information(p_upm)?;
    let target = multiple * eta_upm;
    let p = match &model {
        Some(m) => find_p_for_noisy_efficiency(kind, m, target, &quad)?,
        None => find_p_for_efficiency(kind, target)?,
    };
    let (info, eta) = information(p)?;
    let report = OptimizeReport {
        kind,
        noise,
        multiple,
        p,
        information_ratio: info_upm / info,
        efficiency: eta,
        uniform_efficiency: eta_upm,
    };
    let text = match format {
        Format::Json => to_json(&report),
        Format::Csv => format!(
            "kind,noise,multiple,p,information_ratio,efficiency,uniform_efficiency\n{},{},{},{},{},{},{}\n",
            report.kind,
            noise.map(|n| n.to_string()).unwrap_or_default(),
            multiple,
            p,
            report.information_ratio,
            eta,
            eta_upm
        ),
    };
    write_output(out, &text)
}

fn shaped_tables(kind: ConstellationKind, p: f64, precision: u32) -> Result<AnsTables, CliError> {
    let dist = SymbolDistribution::zero_signal_family(kind, p)?;
    Ok(AnsTables::for_distribution(&dist, precision)?)
}

#[derive(Serialize)]
struct TableRecord {
    state: u32,
    symbol: usize,
    nb_bits: u32,
    new_state: u32,
}

#[derive(Serialize)]
struct TablesReport {
    kind: ConstellationKind,
    p: f64,
    precision: u32,
    counts: Vec<u32>,
    encoding: Vec<TableRecord>,
}

fn cmd_tables(
    kind: ConstellationKind,
    p: f64,
    precision: u32,
    format: Format,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let tables = shaped_tables(kind, p, precision)?;
    let text = match format {
        Format::Csv => tables.encoding.to_csv(),
        Format::Json => to_json(&TablesReport {
            kind,
            p,
            precision,
            counts: tables.quantized.counts().to_vec(),
            encoding: tables
                .encoding
                .entries()
                .iter()
                .enumerate()
                .map(|(s, e)| TableRecord {
                    state: s as u32,
                    symbol: e.symbol,
                    nb_bits: e.nb_bits,
                    new_state: e.new_state,
                })
                .collect(),
        }),
    };
    write_output(out, &text)
}

fn cmd_encode(
    input: &Path,
    kind: ConstellationKind,
    p: f64,
    precision: u32,
    scheme: &RedundancyScheme,
    out: &Path,
) -> Result<(), CliError> {
    let tables = shaped_tables(kind, p, precision)?;
    let message = bytes_to_bits(&read_input(input)?);
    let frame = if scheme.period().is_none() {
        Frame::encode(&message, &tables)?
    } else {
        // The payload is the framed stream up to the block boundary.
        let framed = frame_message(&message, scheme);
        let stream = encode_stream(&framed, &tables.encoding, INITIAL_STATE)?;
        Frame {
            precision: precision as u8,
            counts: tables.quantized.counts().iter().map(|&c| c as u16).collect(),
            payload_bits: u32::try_from(stream.consumed_bits)
                .map_err(|_| CliError::Config("input too large for one frame".into()))?,
            final_state: stream.final_state as u16,
            symbols: stream.symbols.iter().map(|&x| x as u8).collect(),
        }
    };
    fs::write(out, frame.to_bytes()).map_err(|source| CliError::Io {
        path: out.to_path_buf(),
        source,
    })
}

fn message_bytes(bits: &[bool]) -> Result<Vec<u8>, CliError> {
    if !bits.len().is_multiple_of(8) {
        return Err(CliError::Integrity(format!(
            "recovered {} bits, not a whole number of bytes",
            bits.len()
        )));
    }
    Ok(bits_to_bytes(bits))
}

fn kind_for_alphabet(m: usize) -> Result<ConstellationKind, CliError> {
    match m {
        2 => Ok(ConstellationKind::Binary),
        3 => Ok(ConstellationKind::Ternary),
        7 => Ok(ConstellationKind::Hexagonal),
        _ => Err(CliError::Config(format!("no standard constellation has {m} symbols"))),
    }
}

fn cmd_decode(
    input: &Path,
    scheme: &RedundancyScheme,
    channel: Option<f64>,
    seed: Option<u64>,
    budget: Option<usize>,
    out: &Path,
) -> Result<(), CliError> {
    let frame = Frame::from_bytes(&read_input(input)?)?;
    let message = match channel {
        None => {
            let payload = frame.decode()?;
            if scheme.period().is_some() {
                unframe_message(&payload, scheme)?
            } else {
                payload
            }
        }
        Some(noise) => {
            if scheme.period().is_none() {
                return Err(CliError::Config("channel decoding needs a redundancy rate".into()));
            }
            let seed = seed.ok_or_else(|| CliError::Config("channel decoding needs --seed".into()))?;
            let model = NoiseModel::new(noise)?;
            let tables = frame.tables()?;
            let kind = kind_for_alphabet(frame.counts.len())?;
            let dist = SymbolDistribution::new(Constellation::standard(kind)?, tables.quantized.probabilities())?;
            let points = dist.constellation().points();
            let mut received: Vec<_> = frame.symbols.iter().map(|&x| points[x as usize]).collect();
            model.add_noise(&mut rng::stream(seed, 1), &mut received);
            let budget = budget.unwrap_or(DEFAULT_BUDGET_PER_SYMBOL * received.len());
            let (decoded, report) = receive(
                &received,
                &tables,
                &dist,
                &model,
                scheme,
                frame.final_state as u32,
                frame.payload_bits as usize,
                budget,
            )?;
            decoded.ok_or_else(|| {
                CliError::Correction(format!(
                    "budget of {budget} expansions exhausted after {} nodes",
                    report.nodes_expanded
                ))
            })?
        }
    };
    fs::write(out, message_bytes(&message)?).map_err(|source| CliError::Io {
        path: out.to_path_buf(),
        source,
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Curves {
            kind,
            noise,
            grid,
            format,
            out,
        } => cmd_curves(kind.into(), noise, &grid, format, out.as_deref()),
        Command::Optimize {
            kind,
            multiple,
            noise,
            format,
            out,
        } => cmd_optimize(kind.into(), multiple, noise, format, out.as_deref()),
        Command::Tables {
            kind,
            p,
            precision,
            format,
            out,
        } => cmd_tables(kind.into(), p, precision, format, out.as_deref()),
        Command::Encode {
            input,
            kind,
            p,
            precision,
            rate,
            out,
        } => cmd_encode(&input, kind.into(), p, precision, &rate.0, &out),
        Command::Decode {
            input,
            rate,
            channel,
            seed,
            budget,
            out,
        } => cmd_decode(&input, &rate.0, channel, seed, budget, &out),
        Command::Simulate {
            kind,
            p,
            precision,
            noise,
            rate,
            seed,
            bits,
            budget,
        } => {
            let message = rng::random_bits(&mut rng::stream(seed, 0), bits);
            let config = PipelineConfig {
                kind: kind.into(),
                p,
                precision,
                noise,
                scheme: rate.0,
                seed,
                budget,
            };
            let summary = simulate_pipeline(&message, &config)?;
            write_output(None, &to_json(&summary))
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("NPM_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("NPM_THREADS must be a positive integer, got '{value}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|()| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("npm: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use npm_core::rtans::Corruption;

    #[test]
    fn rates() {
        assert_eq!(parse_rate("none").unwrap().0, RedundancyScheme::unconstrained());
        assert_eq!(parse_rate("1/2").unwrap().0, RedundancyScheme::rate_half());
        assert_eq!(parse_rate("2/3").unwrap().0.period(), Some(3));
        assert!(parse_rate("1/3").is_err());
        assert!(parse_rate("0/1").is_err());
        assert!(parse_rate("half").is_err());
    }

    #[test]
    fn exit_codes() {
        let unreachable = ConstellationError::UnreachableEfficiency {
            target: 1.0,
            min: 2.0,
            max: 3.0,
        };
        assert_eq!(CliError::from(unreachable).exit_code(), 3);
        let corrupt = RtansError::Corrupt(Corruption::NonZeroPadding);
        assert_eq!(CliError::from(FecError::Rtans(corrupt)).exit_code(), 4);
        assert_eq!(CliError::from(FecError::MissingTerminator).exit_code(), 4);
        assert_eq!(CliError::from(RtansError::InvalidPrecision(40)).exit_code(), 2);
    }
}
