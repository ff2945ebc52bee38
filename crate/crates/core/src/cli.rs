// SPDX-License-Identifier: Apache-2.0

//! Command-line front end and the streaming pipelines behind it.
//!
//! Exit codes: 0 success, 1 usage or invalid configuration, 2 malformed
//! input, 3 I/O failure.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::ci::{self, CiError, PipelineConfig};
use crate::daikon::{self, DtraceError, DtraceReader, DtraceWriter};
use crate::miner::{self, MinerConfig, TernaryMode, UnknownPolicy};
use crate::spec::{self, Counts, FileUnreadable, SizeReport, Specification};
use crate::state::{sample_stream, SampleError, SamplingPolicy, TrackerError};
use crate::vcd::{open_trace, VcdError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FORMAT: i32 = 2;
pub const EXIT_IO: i32 = 3;

pub const WORKFLOW_FILE: &str = "rtlspec.yml";
pub const MAKE_FILE: &str = "rtlspec.mk";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Vcd(#[from] VcdError),
    #[error(transparent)]
    Tracker(#[from] TrackerError),
    #[error(transparent)]
    Dtrace(#[from] DtraceError),
    #[error(transparent)]
    Ci(#[from] CiError),
    #[error(transparent)]
    Unreadable(#[from] FileUnreadable),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl From<SampleError> for PipelineError {
    fn from(e: SampleError) -> Self {
        match e {
            SampleError::Vcd(e) => PipelineError::Vcd(e),
            SampleError::Tracker(e) => PipelineError::Tracker(e),
        }
    }
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Vcd(e) if e.is_io() => EXIT_IO,
            PipelineError::Dtrace(DtraceError::Io(_)) => EXIT_IO,
            PipelineError::Vcd(_) | PipelineError::Dtrace(_) => EXIT_FORMAT,
            PipelineError::Tracker(
                TrackerError::NoSuchClock(_)
                | TrackerError::AmbiguousClock(_)
                | TrackerError::NotAScalarClock { .. },
            ) => EXIT_USAGE,
            PipelineError::Tracker(_) => EXIT_FORMAT,
            PipelineError::Ci(CiError::Io(_)) => EXIT_IO,
            PipelineError::Ci(_) | PipelineError::Usage(_) => EXIT_USAGE,
            PipelineError::Unreadable(_) | PipelineError::Io { .. } => EXIT_IO,
        }
    }
}

fn io_at(path: &Path) -> impl Fn(io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io { path: path.to_path_buf(), source }
}

/// Result of a streaming translation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TranslateSummary {
    pub variables: usize,
    pub records: u64,
    pub warnings: u64,
}

/// Streams a VCD into decls and dtrace sinks without holding the trace.
pub fn translate_stream<R: Read, D: Write, T: Write>(
    input: R,
    decls: &mut D,
    dtrace: T,
    policy: &SamplingPolicy,
    ppt: &str,
) -> Result<TranslateSummary, PipelineError> {
    let (header, events) = open_trace(input)?;
    let names = daikon::variable_names(&header);
    let mut samples = sample_stream(&header, events, policy)?;
    let sink_error = |e: io::Error| PipelineError::Io { path: PathBuf::from("<output>"), source: e };
    daikon::write_decls_for(&names, ppt, decls).map_err(sink_error)?;
    let mut writer = DtraceWriter::new(dtrace, &names, ppt);
    for s in samples.by_ref() {
        writer.write_record(&s?).map_err(sink_error)?;
    }
    let records = writer.records();
    writer.finish().map_err(sink_error)?;
    Ok(TranslateSummary { variables: names.len(), records, warnings: samples.warnings() })
}

/// Mines a VCD stream directly.
pub fn mine_vcd<R: Read>(
    input: R,
    policy: &SamplingPolicy,
    ppt: &str,
    config: &MinerConfig,
) -> Result<Specification, PipelineError> {
    let (header, events) = open_trace(input)?;
    let names = daikon::variable_names(&header);
    let samples = sample_stream(&header, events, policy)?;
    Ok(miner::mine(&names, ppt, samples, config)?)
}

/// Mines a dtrace stream. `declared` supplies the variable names and
/// program point when a decls document is available; otherwise both come
/// from the first record.
pub fn mine_dtrace<R: BufRead>(
    input: R,
    declared: Option<(String, Vec<String>)>,
    ppt: Option<&str>,
    config: &MinerConfig,
) -> Result<Specification, PipelineError> {
    let reader = DtraceReader::open(input)?;
    let (decl_ppt, names) = match declared {
        Some((p, n)) => (Some(p), n),
        None => (None, reader.names().to_vec()),
    };
    if reader.names().len() != names.len() && !reader.names().is_empty() {
        return Err(PipelineError::Dtrace(DtraceError::Format {
            line: 0,
            message: format!(
                "trace records have {} variables, declarations list {}",
                reader.names().len(),
                names.len()
            ),
        }));
    }
    let ppt = ppt
        .map(str::to_string)
        .or(decl_ppt)
        .or_else(|| reader.ppt().map(str::to_string))
        .unwrap_or_else(|| daikon::DEFAULT_PPT.to_string());
    Ok(miner::mine(&names, &ppt, reader, config)?)
}

/// Program point and variable names of the first declaration block.
pub fn read_decls<R: BufRead>(input: R) -> io::Result<Option<(String, Vec<String>)>> {
    let mut ppt = None;
    let mut names = Vec::new();
    for line in input.lines() {
        let line = line?;
        match (&ppt, line.strip_prefix("ppt ")) {
            (None, Some(p)) => ppt = Some(p.trim().to_string()),
            (Some(_), Some(_)) => break,
            _ => {
                if let Some(n) = line.strip_prefix("variable ") {
                    names.push(n.trim().to_string());
                }
            }
        }
    }
    Ok(ppt.map(|p| (p, names)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Vcd,
    Dtrace,
}

/// Classifies a stream by its first non-blank byte: VCD headers start with
/// a `$` directive. Nothing is consumed but leading whitespace.
pub fn detect_format<R: BufRead>(input: &mut R) -> io::Result<InputFormat> {
    loop {
        let buf = input.fill_buf()?;
        if buf.is_empty() {
            return Ok(InputFormat::Dtrace);
        }
        match buf.iter().position(|b| !b.is_ascii_whitespace()) {
            Some(i) => {
                let format = if buf[i] == b'$' { InputFormat::Vcd } else { InputFormat::Dtrace };
                input.consume(i);
                return Ok(format);
            }
            None => {
                let n = buf.len();
                input.consume(n);
            }
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "rtlspec", version, about = "Mine likely invariants from RTL simulation traces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Convert a VCD into `.decls` and `.dtrace` files.
    Translate {
        vcd: PathBuf,
        /// Output prefix; writes `<prefix>.decls` and `<prefix>.dtrace`.
        #[arg(short, long)]
        out: PathBuf,
        #[command(flatten)]
        sampling: SamplingArgs,
        #[arg(long, default_value = daikon::DEFAULT_PPT)]
        ppt: String,
    },
    /// Mine a specification from a VCD or a dtrace file.
    Mine {
        input: PathBuf,
        /// Specification path; standard output when absent.
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        sampling: SamplingArgs,
        #[command(flatten)]
        miner: MinerArgs,
        /// Program point name; for dtrace input defaults to the trace's own.
        #[arg(long)]
        ppt: Option<String>,
    },
    /// Write a CI workflow and make fragment from a pipeline config.
    EmitCi {
        config: PathBuf,
        #[arg(short, long, default_value = ".")]
        out: PathBuf,
    },
    /// Print line, word and byte counts.
    Stats {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EdgeArg {
    Rising,
    Falling,
}

#[derive(Args, Debug)]
pub struct SamplingArgs {
    /// Sample on edges of this 1-bit signal.
    #[arg(long, conflicts_with = "every_timestamp")]
    pub clock: Option<String>,
    #[arg(long, value_enum, requires = "clock")]
    pub edge: Option<EdgeArg>,
    /// Sample at the end of every timestamp with a change (default).
    #[arg(long)]
    pub every_timestamp: bool,
}

impl SamplingArgs {
    pub fn policy(&self) -> SamplingPolicy {
        match (&self.clock, self.edge) {
            (None, _) => SamplingPolicy::EveryTimestamp,
            (Some(c), Some(EdgeArg::Falling)) => SamplingPolicy::ClockFalling(c.clone()),
            (Some(c), _) => SamplingPolicy::ClockRising(c.clone()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum UnknownArg {
    Neutral,
    Literal,
}

#[derive(Args, Debug)]
pub struct MinerArgs {
    /// Minimum number of supporting samples for a reported invariant.
    #[arg(long, default_value_t = 5)]
    pub min_support: u64,
    /// Three-variable linear relations; automatic by design size if unset.
    #[arg(long, value_enum)]
    pub ternary: Option<Switch>,
    #[arg(long, value_enum, default_value = "neutral")]
    pub unknown: UnknownArg,
    /// Candidate partitions mined in parallel.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=256))]
    pub partitions: u32,
}

impl MinerArgs {
    pub fn config(&self) -> MinerConfig {
        MinerConfig {
            min_support: self.min_support,
            ternary: match self.ternary {
                None => TernaryMode::Auto,
                Some(Switch::On) => TernaryMode::On,
                Some(Switch::Off) => TernaryMode::Off,
            },
            unknown: match self.unknown {
                UnknownArg::Neutral => UnknownPolicy::Neutral,
                UnknownArg::Literal => UnknownPolicy::Literal,
            },
            partitions: self.partitions as usize,
            ..MinerConfig::default()
        }
    }
}

fn open(path: &Path) -> Result<BufReader<File>, PipelineError> {
    File::open(path).map(|f| BufReader::with_capacity(1 << 16, f)).map_err(io_at(path))
}

fn with_extension(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_os_string();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn temp_beside(path: &Path) -> Result<tempfile::NamedTempFile, PipelineError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    tempfile::Builder::new().prefix(".rtlspec").tempfile_in(dir).map_err(io_at(path))
}

fn count_file(path: &Path) -> Result<Counts, PipelineError> {
    File::open(path)
        .and_then(Counts::of_reader)
        .map_err(|source| FileUnreadable { path: path.to_path_buf(), source }.into())
}

fn cmd_translate(
    vcd: &Path,
    prefix: &Path,
    policy: &SamplingPolicy,
    ppt: &str,
    stdout: &mut dyn Write,
) -> Result<(), PipelineError> {
    let decls_path = with_extension(prefix, "decls");
    let dtrace_path = with_extension(prefix, "dtrace");
    let input = File::open(vcd).map_err(io_at(vcd))?;
    let mut decls = BufWriter::new(temp_beside(&decls_path)?);
    let mut dtrace = BufWriter::with_capacity(1 << 16, temp_beside(&dtrace_path)?);
    let summary = translate_stream(input, &mut decls, &mut dtrace, policy, ppt)?;
    let decls = decls.into_inner().map_err(|e| io_at(&decls_path)(e.into_error()))?;
    let dtrace = dtrace.into_inner().map_err(|e| io_at(&dtrace_path)(e.into_error()))?;
    decls.persist(&decls_path).map_err(|e| io_at(&decls_path)(e.error))?;
    dtrace.persist(&dtrace_path).map_err(|e| io_at(&dtrace_path)(e.error))?;
    log::info!("{} variables, {} records, {} warnings", summary.variables, summary.records, summary.warnings);

    let mut report = SizeReport::default();
    for path in [vcd, &decls_path, &dtrace_path] {
        report.push(path.display().to_string(), count_file(path)?);
    }
    write!(stdout, "{report}").map_err(io_at(Path::new("<stdout>")))
}

fn cmd_mine(
    input: &Path,
    out: Option<&Path>,
    policy: &SamplingPolicy,
    config: &MinerConfig,
    ppt: Option<&str>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), PipelineError> {
    let mut reader = open(input)?;
    let spec = match detect_format(&mut reader).map_err(io_at(input))? {
        InputFormat::Vcd => mine_vcd(reader, policy, ppt.unwrap_or(daikon::DEFAULT_PPT), config)?,
        InputFormat::Dtrace => {
            if *policy != SamplingPolicy::EveryTimestamp {
                return Err(PipelineError::Usage("sampling flags apply to VCD input only".into()));
            }
            let decls_path = input.with_extension("decls");
            let declared = if decls_path != input && decls_path.is_file() {
                read_decls(open(&decls_path)?).map_err(io_at(&decls_path))?
            } else {
                None
            };
            mine_dtrace(reader, declared, ppt, config)?
        }
    };
    let text = spec::render_spec_string(&spec);
    let summary = format!(
        "{} invariants, {} survivors, {} dropped by support\n",
        spec.invariants.len(),
        spec.survivors,
        spec.dropped
    );
    match out {
        Some(path) => {
            let mut tmp = temp_beside(path)?;
            tmp.write_all(text.as_bytes()).map_err(io_at(path))?;
            tmp.persist(path).map_err(|e| io_at(path)(e.error))?;
            stdout.write_all(summary.as_bytes()).map_err(io_at(Path::new("<stdout>")))
        }
        None => {
            stdout.write_all(text.as_bytes()).map_err(io_at(Path::new("<stdout>")))?;
            stderr.write_all(summary.as_bytes()).map_err(io_at(Path::new("<stderr>")))
        }
    }
}

fn cmd_emit_ci(config: &Path, out: &Path) -> Result<(), PipelineError> {
    let text = fs::read_to_string(config).map_err(io_at(config))?;
    let cfg = PipelineConfig::from_yaml(&text)?;
    let mut workflow = Vec::new();
    ci::emit_workflow(&cfg, &mut workflow)?;
    let mut make = Vec::new();
    ci::emit_make_fragment(&cfg, &mut make)?;
    fs::create_dir_all(out).map_err(io_at(out))?;
    for (name, bytes) in [(WORKFLOW_FILE, workflow), (MAKE_FILE, make)] {
        let path = out.join(name);
        fs::write(&path, bytes).map_err(io_at(&path))?;
    }
    Ok(())
}

fn dispatch(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), PipelineError> {
    match cli.command {
        Command::Translate { vcd, out, sampling, ppt } => {
            cmd_translate(&vcd, &out, &sampling.policy(), &ppt, stdout)
        }
        Command::Mine { input, out, sampling, miner, ppt } => cmd_mine(
            &input,
            out.as_deref(),
            &sampling.policy(),
            &miner.config(),
            ppt.as_deref(),
            stdout,
            stderr,
        ),
        Command::EmitCi { config, out } => cmd_emit_ci(&config, &out),
        Command::Stats { paths } => {
            let report = spec::stats(&paths)?;
            write!(stdout, "{report}").map_err(io_at(Path::new("<stdout>")))
        }
    }
}

/// Runs one invocation and returns its exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render().ansi());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "rtlspec: {e}");
            e.exit_code()
        }
    }
}
