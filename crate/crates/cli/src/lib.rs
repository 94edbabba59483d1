//! Command-line front end for the benchmark suite.

use std::io::Write;
use std::path::PathBuf;

use clap::Parser;
use virtbench::calibration::Calibration;
use virtbench::catalog::{Catalog, MetricId};
use virtbench::report::{emit_comparison_txt, write_outputs};
use virtbench::runner::compare_reports;
use virtbench::{run_benchmark, Mode, RunConfig};

/// Environment variable naming a calibration file, used when
/// `--calibration` is absent.
pub const CALIBRATION_ENV: &str = "VIRTBENCH_CALIBRATION";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUN: i32 = 2;

/// Benchmark GPU virtualization layers against a hardware-partition baseline.
///
/// All measurements run on a simulated device in virtual time; tenants
/// ("processes") are interleaved streams on one clock.
#[derive(Debug, Clone, PartialEq, Parser)]
#[command(name = "virtbench", version)]
pub struct CliArgs {
    /// System under test: native, hami, fcsp or mig.
    #[arg(long, value_parser = parse_mode)]
    pub system: Mode,
    #[arg(long, default_value_t = 100)]
    pub iterations: usize,
    #[arg(long, default_value_t = 10)]
    pub warmup: usize,
    /// Concurrent tenants. Multi-tenant metrics use 4 when this is 1.
    #[arg(long, default_value_t = 1)]
    pub processes: usize,
    /// Per-tenant memory limit in MB.
    #[arg(long = "memory-limit")]
    pub memory_limit: Option<u64>,
    /// Per-tenant SM limit in percent.
    #[arg(long = "compute-limit")]
    pub compute_limit: Option<f64>,
    /// Comma-separated metric ids, e.g. OH-001,LLM-004.
    #[arg(long, value_delimiter = ',', value_parser = parse_metric)]
    pub metrics: Option<Vec<MetricId>>,
    /// Earlier JSON report to compare against.
    #[arg(long)]
    pub compare: Option<PathBuf>,
    /// Calibration file layered over the built-in profiles.
    #[arg(long)]
    pub calibration: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Output path prefix; defaults to results/<system>-<seed>.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse::<Mode>().map_err(|e| e.to_string())
}

fn parse_metric(s: &str) -> Result<MetricId, String> {
    s.trim()
        .parse::<MetricId>()
        .map_err(|_| format!("malformed metric id `{s}`"))
}

impl CliArgs {
    pub fn run_config(&self) -> RunConfig {
        RunConfig {
            system: self.system,
            iterations: self.iterations,
            warmup: self.warmup,
            tenants: self.processes,
            memory_limit_mb: self.memory_limit,
            compute_limit_percent: self.compute_limit,
            metric_filter: self.metrics.clone(),
            seed: self.seed,
            compare_path: self.compare.clone(),
            ..RunConfig::default()
        }
    }

    pub fn output_prefix(&self) -> PathBuf {
        self.output
            .clone()
            .unwrap_or_else(|| PathBuf::from(format!("results/{}-{}", self.system, self.seed)))
    }
}

pub fn parse_args<I, T>(argv: I) -> Result<CliArgs, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    CliArgs::try_parse_from(argv)
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match parse_args(argv) {
        Ok(a) => a,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(&args, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_RUN
        }
    }
}

fn execute(args: &CliArgs, out: &mut dyn Write) -> virtbench::Result<()> {
    let cal_path = args
        .calibration
        .clone()
        .or_else(|| std::env::var_os(CALIBRATION_ENV).map(PathBuf::from));
    let cal = Calibration::load(cal_path.as_deref())?;
    let catalog = Catalog::from_calibration(&cal)?;
    let config = args.run_config();
    if let Some(path) = &config.compare_path {
        if !path.is_file() {
            return Err(virtbench::Error::Compare {
                path: path.clone(),
                message: "file not found".into(),
            });
        }
    }
    let report = run_benchmark(&config, &catalog, &cal)?;
    let paths = write_outputs(&report, &args.output_prefix())?;
    let o = &report.overall;
    let parity = o
        .mig_parity
        .map_or_else(|| "--".to_string(), |p| format!("{:.1}%", p * 100.0));
    let _ = writeln!(
        out,
        "{}: overall {:.1}%  grade {}  MIG parity {}",
        report.system.display_name,
        o.weighted_score * 100.0,
        o.grade,
        parity
    );
    for p in &paths {
        let _ = writeln!(out, "wrote {}", p.display());
    }
    if let Some(path) = &config.compare_path {
        let cmp = compare_reports(&report, path)?;
        let _ = write!(out, "{}", emit_comparison_txt(&cmp));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<CliArgs, clap::Error> {
        parse_args(std::iter::once("virtbench").chain(s.split_whitespace()))
    }

    #[test]
    fn defaults_match_run_config() {
        let a = parse("--system native").unwrap();
        let c = a.run_config();
        let d = RunConfig::default();
        assert_eq!((c.iterations, c.warmup, c.tenants, c.seed), (d.iterations, d.warmup, d.tenants, d.seed));
        assert_eq!(a.output_prefix(), PathBuf::from("results/native-42"));
    }

    #[test]
    fn limits_and_tenants() {
        let a = parse("--system hami --memory-limit 2048 --compute-limit 30 --processes 4").unwrap();
        assert_eq!(a.memory_limit, Some(2048));
        assert_eq!(a.compute_limit, Some(30.0));
        assert_eq!(a.processes, 4);
    }

    #[test]
    fn metric_list() {
        let a = parse("--system fcsp --metrics LLM-001,LLM-002,LLM-003,LLM-004").unwrap();
        assert_eq!(a.metrics.unwrap().len(), 4);
        let e = parse("--system fcsp --metrics LLM-001,LLM-2").unwrap_err();
        assert!(e.to_string().contains("LLM-2"));
    }

    #[test]
    fn bad_system_lists_keys() {
        let e = parse("--system bogus").unwrap_err();
        let msg = e.to_string();
        for k in ["native", "hami", "fcsp", "mig"] {
            assert!(msg.contains(k), "{msg}");
        }
        assert!(parse("--system native --turbo").is_err());
        assert!(parse("--iterations 5").is_err());
    }
}
