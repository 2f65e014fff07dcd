//! Argument parsing and dispatch.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use treeiso_core::asymptotics::AsymptoticsConfig;
use treeiso_core::enumerate::Ceilings;
use treeiso_core::samplers::CiMethod;

use crate::args::{parse_interval, parse_list, parse_range, parse_rational, parse_usize, resolve_model, resolve_precision, ModelSpec};
use crate::commands::{self, Done, RunConfig};
use crate::failure::{Failure, Outcome, EXIT_INVALID, EXIT_OK};
use crate::report::Format;

#[derive(Parser, Debug)]
#[command(name = "treeiso", version, about = "Exact, asymptotic and sampled isomorphism probabilities of random trees")]
pub struct Cli {
    /// Output format (default depends on the command).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// labeled, plane, ub, binary121, binary, or degree (with --D).
    #[arg(long)]
    pub model: Option<String>,
    /// Allowed out-degrees, e.g. 0,1,2.
    #[arg(long = "D")]
    pub degrees: Option<String>,
    /// Weights matching --D; rationals such as 1/2 are allowed. Default all 1.
    #[arg(long = "w")]
    pub weights: Option<String>,
}

impl ModelArgs {
    fn resolve(&self) -> Outcome<ModelSpec> {
        resolve_model(self.model.as_deref(), self.degrees.as_deref(), self.weights.as_deref())
    }
}

#[derive(Args, Debug, Clone)]
pub struct CeilingArgs {
    /// Enumeration ceiling for unbounded degree sets.
    #[arg(long, default_value_t = Ceilings::default().unrestricted)]
    pub ceiling_unrestricted: usize,
    /// Enumeration ceiling for finite degree sets.
    #[arg(long, default_value_t = Ceilings::default().restricted)]
    pub ceiling_restricted: usize,
}

impl CeilingArgs {
    fn get(&self) -> Ceilings {
        Ceilings { unrestricted: self.ceiling_unrestricted, restricted: self.ceiling_restricted }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CiArg {
    Wilson,
    Normal,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Exact collision probabilities from enumeration.
    Exact {
        #[command(flatten)]
        model: ModelArgs,
        /// Size or inclusive range a..b.
        #[arg(long)]
        n: String,
        /// Also list every class with its statistics.
        #[arg(long)]
        dump_classes: bool,
        /// Significant digits of decimal renderings.
        #[arg(long, default_value_t = 20)]
        digits: usize,
        #[command(flatten)]
        ceilings: CeilingArgs,
    },
    /// Coefficients of the generating function at parameter t.
    Series {
        /// polya, or a finite degree model (ub, binary121, binary, degree with --D).
        #[arg(long, default_value = "polya")]
        family: String,
        #[arg(long = "D")]
        degrees: Option<String>,
        #[arg(long = "w")]
        weights: Option<String>,
        /// Rational literal; integers give exact coefficients.
        #[arg(long)]
        t: String,
        #[arg(long)]
        order: usize,
        /// Working precision in bits for non-integer t.
        #[arg(long)]
        precision: Option<usize>,
        #[arg(long, default_value_t = 20)]
        digits: usize,
        /// Largest size compared against enumeration.
        #[arg(long, default_value_t = 15)]
        oracle_max: usize,
        #[command(flatten)]
        ceilings: CeilingArgs,
    },
    /// Monte Carlo estimate of the collision probability.
    Mc {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        n: String,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads; 0 uses every available core.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long, value_enum, default_value = "wilson")]
        ci: CiArg,
        /// Exit with status 2 when an exact value falls outside its interval.
        #[arg(long)]
        strict: bool,
        /// Largest size for which the exact value is enumerated.
        #[arg(long, default_value_t = 12)]
        exact_max: usize,
        #[command(flatten)]
        ceilings: CeilingArgs,
    },
    /// Asymptotic and central-limit constants, checked against reference values.
    Asym {
        /// labeled, ub, collision, leaf, logweight, aut, degree or all.
        #[arg(long, default_value = "all")]
        which: String,
        #[command(flatten)]
        model: ModelArgs,
        /// Marked degrees for --which degree.
        #[arg(long, default_value = "0,1,2,3")]
        marks: String,
        #[arg(long)]
        order: Option<usize>,
        #[arg(long)]
        nested_degree: Option<usize>,
        #[arg(long)]
        precision: Option<usize>,
        #[arg(long)]
        fd_step: Option<f64>,
        #[arg(long)]
        tolerance: Option<f64>,
        /// Search interval for alpha, lo,hi.
        #[arg(long)]
        bracket: Option<String>,
        /// Recompute at doubled truncation and require relative change below 1e-6.
        #[arg(long)]
        check_truncation: bool,
    },
    /// Data-producing experiments.
    Experiment {
        #[command(subcommand)]
        which: Experiment,
    },
    /// Every isomorphism class of one size.
    Enumerate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        n: usize,
        /// Directory of the binary record cache.
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        #[command(flatten)]
        ceilings: CeilingArgs,
    },
}

#[derive(Subcommand, Debug)]
pub enum Experiment {
    /// Exact plane-tree collision probabilities and rates.
    PlaneDecay {
        #[arg(long, default_value_t = 18)]
        n_max: usize,
        /// Digits of decimal renderings.
        #[arg(long, default_value_t = 12)]
        digits: usize,
        #[command(flatten)]
        ceilings: CeilingArgs,
    },
}

fn dispatch(cli: &Cli) -> Outcome<Done> {
    let out = cli.output.as_deref();
    let fmt = |default: Format| cli.format.unwrap_or(default);
    match &cli.command {
        Command::Exact { model, n, dump_classes, digits, ceilings } => {
            let cfg = RunConfig::new("exact", fmt(Format::Json), out);
            commands::exact(cfg, &model.resolve()?, &parse_range(n)?, ceilings.get(), *digits, *dump_classes)
        }
        Command::Series { family, degrees, weights, t, order, precision, digits, oracle_max, ceilings } => {
            let cfg = RunConfig::new("series", fmt(Format::Json), out);
            let spec = match family.as_str() {
                "polya" if degrees.is_none() && weights.is_none() => None,
                "polya" => return Err(Failure::invalid("--D/--w do not apply to the polya family")),
                f => Some(resolve_model(Some(f), degrees.as_deref(), weights.as_deref())?),
            };
            let t = parse_rational(t)?;
            let name = spec.as_ref().map_or("polya".to_string(), |s| s.name.clone());
            commands::series(cfg, &name, spec.as_ref(), &t, *order, resolve_precision(*precision)?, *digits, *oracle_max, ceilings.get())
        }
        Command::Mc { model, n, samples, seed, workers, ci, strict, exact_max, ceilings } => {
            let cfg = RunConfig::new("mc", fmt(Format::Json), out);
            let method = if *ci == CiArg::Wilson { CiMethod::Wilson } else { CiMethod::Normal };
            commands::monte_carlo(cfg, &model.resolve()?, &parse_range(n)?, *samples, *seed, *workers, method, *strict, *exact_max, ceilings.get())
        }
        Command::Asym { which, model, marks, order, nested_degree, precision, fd_step, tolerance, bracket, check_truncation } => {
            let cfg = RunConfig::new("asym", fmt(Format::Json), out);
            let d = AsymptoticsConfig::default();
            let acfg = AsymptoticsConfig {
                order: order.unwrap_or(d.order),
                nested_degree: nested_degree.unwrap_or(d.nested_degree),
                precision: resolve_precision(*precision)?,
                fd_step: fd_step.unwrap_or(d.fd_step),
                tolerance: tolerance.unwrap_or(d.tolerance),
                alpha_bracket: bracket.as_deref().map(parse_interval).transpose()?.unwrap_or(d.alpha_bracket),
            };
            if acfg.order < 8 || acfg.nested_degree == 0 || acfg.nested_degree > acfg.order {
                return Err(Failure::invalid("need order >= 8 and 0 < nested-degree <= order"));
            }
            if !(acfg.fd_step > 0.0 && acfg.fd_step < 0.1) {
                return Err(Failure::invalid("--fd-step must lie in (0, 0.1)"));
            }
            let spec = if model.model.is_some() || model.degrees.is_some() { Some(model.resolve()?) } else { None };
            if let Some(s) = &spec {
                if !s.model.is_finite() {
                    return Err(Failure::invalid("--model must have a finite degree set here"));
                }
            }
            let which = which.as_str();
            if which != "all" && which != "collision" && !commands::ASYM_GROUPS.contains(&which) {
                return Err(Failure::invalid(format!("unknown --which {which:?}")));
            }
            let degrees = parse_list(marks, parse_usize)?;
            commands::asym(cfg, which, spec.as_ref(), &degrees, &acfg, *check_truncation)
        }
        Command::Experiment { which: Experiment::PlaneDecay { n_max, digits, ceilings } } => {
            let mut cfg = RunConfig::new("experiment plane-decay", fmt(Format::Csv), out);
            cfg.set("n_max", n_max);
            commands::plane_decay(cfg, *n_max, ceilings.get(), *digits)
        }
        Command::Enumerate { model, n, cache_dir, ceilings } => {
            let cfg = RunConfig::new("enumerate", fmt(Format::Jsonl), out);
            commands::enumerate(cfg, &model.resolve()?, *n, ceilings.get(), cache_dir.as_deref())
        }
    }
}

/// Runs the CLI on `args`; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {f}");
            f.code
        }
    }
}

fn execute(cli: &Cli) -> Outcome<()> {
    let done = dispatch(cli)?;
    let format = serde_json::from_value::<Format>(done.report.config["format"].clone()).unwrap_or(Format::Json);
    match &cli.output {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            done.report.write(format, &mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            done.report.write(format, &mut w)?;
            w.flush()?;
        }
    }
    match done.breach {
        Some(f) => Err(f),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
