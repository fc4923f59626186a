use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use wlrefine::analysis::aux_trace;
use wlrefine::aux::ThresholdConfig;
use wlrefine::experiment::{measure, sweep, SweepConfig, SweepReport, CSV_HEADER};
use wlrefine::game::{run_game, GameConfig, P1Strategy, P2Strategy};
use wlrefine::generators::{Family, FamilySpec};
use wlrefine::io::{parse_graph, parse_graph6, to_json};
use wlrefine::refine::distinguish_wl1;
use wlrefine::{distinguish, ColoredGraph, RefinementVariant};

/// Default directory for transcripts written by `game`.
const OUT_DIR_VAR: &str = "WLREFINE_OUT_DIR";

#[derive(Parser)]
#[command(name = "wlrefine", version)]
#[command(about = "Weisfeiler-Leman refinement, clean-up and refinement-game experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stabilize one graph and print its experiment record
    Stabilize {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value = "counting")]
        variant: RefinementVariant,
        /// Print a CSV header and row instead of JSON
        #[arg(long)]
        csv: bool,
    },
    /// Compare two graphs by the class sizes of their joint refinement
    Distinguish {
        /// First graph: graph6:STR, file:PATH or a family spec like cycle:n=6
        a: String,
        /// Second graph, same forms
        b: String,
        #[arg(long, default_value = "counting")]
        variant: RefinementVariant,
        /// Use 1-dimensional color refinement
        #[arg(long)]
        wl1: bool,
    },
    /// Play the refinement game and write the transcript
    Game {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value = "wl-step")]
        p1: P1Strategy,
        #[arg(long, default_value = "stabilize")]
        p2: P2Strategy,
        #[arg(long, default_value = "counting")]
        variant: RefinementVariant,
        /// Fixed small/large threshold instead of log2(n)/2
        #[arg(long)]
        threshold: Option<f64>,
        /// Transcript path; defaults to a file in $WLREFINE_OUT_DIR or the working directory
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stabilize a family over a range of sizes
    Sweep {
        /// Family name
        #[arg(long)]
        family: String,
        /// Sizes: "8,16,32" or "8..64" or "8..64:8" (inclusive)
        #[arg(long)]
        ns: String,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 3)]
        t: usize,
        /// Cycle length for disjoint_cycles
        #[arg(long, default_value_t = 3)]
        length: usize,
        #[arg(long, default_value = "counting")]
        variant: RefinementVariant,
        #[arg(long, default_value_t = 1)]
        repetitions: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        csv: bool,
        /// Write the report here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the aux-guided loop alone and dump the auxiliary graphs
    AuxTrace {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value = "counting")]
        variant: RefinementVariant,
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Print the canonical JSON document of a graph
    Canon {
        #[command(flatten)]
        input: InputArgs,
    },
}

#[derive(Args)]
struct InputArgs {
    /// graph6:STR, file:PATH or a family spec like gnp:n=12,p=0.5,seed=1
    spec: Option<String>,
    /// graph6 string
    #[arg(long)]
    graph6: Option<String>,
    /// File with a graph6 string, an edge list or a JSON colored graph
    #[arg(long)]
    input: Option<PathBuf>,
    /// Generator family
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    #[arg(long, default_value_t = 3)]
    t: usize,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long, default_value_t = 3)]
    length: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

struct Loaded {
    graph: ColoredGraph,
    label: String,
    family: String,
    class_bound: Option<usize>,
}

fn family_from_flags(name: &str, n: Option<usize>, p: f64, t: usize, count: Option<usize>, length: usize) -> Result<Family> {
    let need_n = || n.with_context(|| format!("--n is required for family {name}"));
    Ok(match name.replace('-', "_").as_str() {
        "path" => Family::Path { n: need_n()? },
        "cycle" => Family::Cycle { n: need_n()? },
        "complete" => Family::Complete { n: need_n()? },
        "gnp" => Family::Gnp { n: need_n()?, p },
        "bounded_color_class" => Family::BoundedColorClass { n: need_n()?, t, p },
        "disjoint_cycles" => Family::DisjointCycles {
            count: count.or(n.map(|n| n / length.max(1))).context("--count or --n is required for disjoint_cycles")?,
            length,
        },
        "appendix_a" => Family::SeparatedLoops { t },
        other => bail!("unknown family {other:?}"),
    })
}

fn from_family(spec: FamilySpec) -> Result<Loaded> {
    let class_bound = match spec.family {
        Family::BoundedColorClass { t, .. } => Some(t),
        _ => None,
    };
    Ok(Loaded {
        graph: spec.generate()?,
        label: spec.to_string(),
        family: spec.name().to_string(),
        class_bound,
    })
}

fn from_file(path: &Path) -> Result<Loaded> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let graph = parse_graph(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(Loaded {
        graph,
        label: path.display().to_string(),
        family: "file".into(),
        class_bound: None,
    })
}

fn from_graph6(s: &str) -> Result<Loaded> {
    Ok(Loaded {
        graph: parse_graph6(s)?.encode()?,
        label: format!("graph6:{s}"),
        family: "graph6".into(),
        class_bound: None,
    })
}

fn load_spec(spec: &str) -> Result<Loaded> {
    if let Some(s) = spec.strip_prefix("graph6:") {
        from_graph6(s)
    } else if let Some(path) = spec.strip_prefix("file:") {
        from_file(Path::new(path))
    } else {
        from_family(spec.parse()?)
    }
}

impl InputArgs {
    fn load(&self) -> Result<Loaded> {
        let given = [self.spec.is_some(), self.graph6.is_some(), self.input.is_some(), self.family.is_some()];
        match given.iter().filter(|&&g| g).count() {
            0 => bail!("no input: give a SPEC, --graph6, --input or --family"),
            1 => {}
            _ => bail!("more than one input given"),
        }
        if let Some(spec) = &self.spec {
            load_spec(spec)
        } else if let Some(s) = &self.graph6 {
            from_graph6(s)
        } else if let Some(path) = &self.input {
            from_file(path)
        } else {
            let name = self.family.as_deref().expect("one input is present");
            let family = family_from_flags(name, self.n, self.p, self.t, self.count, self.length)?;
            from_family(FamilySpec::new(family, self.seed))
        }
    }
}

fn threshold(t: Option<f64>) -> Result<ThresholdConfig> {
    match t {
        Some(t) if !(t.is_finite() && t > 0.0) => bail!("threshold must be positive, got {t}"),
        Some(t) => Ok(ThresholdConfig::fixed(t)),
        None => Ok(ThresholdConfig::default()),
    }
}

fn parse_ns(s: &str) -> Result<Vec<usize>> {
    let number = |x: &str| x.trim().parse::<usize>().with_context(|| format!("bad size {x:?}"));
    if let Some((lo, rest)) = s.split_once("..") {
        let (hi, step) = rest.split_once(':').map_or((rest, "1"), |(h, st)| (h, st));
        let (lo, hi, step) = (number(lo)?, number(hi)?, number(step)?);
        if step == 0 || lo > hi {
            bail!("empty size range {s:?}");
        }
        Ok((lo..=hi).step_by(step).collect())
    } else {
        s.split(',').map(number).collect()
    }
}

fn out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_VAR).map_or_else(|| PathBuf::from("."), PathBuf::from)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' })
        .collect()
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Stabilize { input, variant, csv } => {
            let loaded = input.load()?;
            let record = measure(&loaded.graph, loaded.label, loaded.family, input.seed, variant, loaded.class_bound)?;
            if csv {
                println!("{CSV_HEADER}\n{}", record.csv_row());
            } else {
                println!("{}", serde_json::to_string_pretty(&record)?);
            }
        }
        Command::Distinguish { a, b, variant, wl1 } => {
            let (a, b) = (load_spec(&a)?, load_spec(&b)?);
            let verdict = if wl1 {
                distinguish_wl1(&a.graph, &b.graph)
            } else {
                distinguish(&a.graph, &b.graph, variant)?
            };
            println!("{}", serde_json::to_string_pretty(&verdict)?);
        }
        Command::Game { input, p1, p2, variant, threshold: t, out } => {
            let loaded = input.load()?;
            let config = GameConfig {
                variant,
                threshold: threshold(t)?,
            };
            let transcript = run_game(&loaded.graph, p1, p2, input.seed, config)?;
            let path = out.unwrap_or_else(|| {
                out_dir().join(format!("game-{}-seed{}.json", sanitize(&loaded.label), input.seed))
            });
            write_file(&path, &serde_json::to_string_pretty(&transcript.document())?)?;
            let s = transcript.summary();
            println!(
                "{}",
                json!({
                    "total_cost": s.total_cost,
                    "wl_iterations": s.wl_iterations,
                    "vertex_splits": s.vertex_splits,
                    "n": s.n,
                    "moves": transcript.moves.len(),
                    "transcript": path,
                })
            );
        }
        Command::Sweep {
            family,
            ns,
            p,
            t,
            length,
            variant,
            repetitions,
            seed,
            csv,
            out,
        } => {
            let ns = parse_ns(&ns)?;
            let template = family_from_flags(&family, Some(ns[0]), p, t, None, length)?;
            let report: SweepReport = sweep(&SweepConfig {
                family: template,
                ns,
                variant,
                repetitions,
                seed,
            })?;
            for skipped in &report.skipped {
                eprintln!("skipped {}: {}", skipped.spec, skipped.error);
            }
            let text = if csv { report.to_csv() } else { serde_json::to_string_pretty(&report)? + "\n" };
            match out {
                Some(path) => write_file(&path, &text)?,
                None => print!("{text}"),
            }
        }
        Command::AuxTrace { input, variant, threshold: t } => {
            let loaded = input.load()?;
            let trace = aux_trace(&loaded.graph, variant, threshold(t)?)?;
            println!("{}", serde_json::to_string_pretty(&trace)?);
            if trace.cap_exceeded {
                eprintln!("error: loop cap exceeded after {} iterations", trace.iterations);
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Canon { input } => {
            println!("{}", to_json(&input.load()?.graph));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
