use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use lowdeg::io::{self as lio, Config};
use lowdeg::model::{self, SbmParams, TwoParams};
use lowdeg::pipeline;
use lowdeg::spectrum;
use lowdeg::{rng, Error, Result};

#[derive(Parser)]
#[command(
    name = "lowdeg",
    version,
    about = "Low-degree estimators for sparse block models"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Base seed; drawn from the clock and reported when absent.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// `key = value` file supplying values for options not given on the command line.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct ModelArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Args, Clone)]
struct WalkArgs {
    #[arg(long)]
    ell: Option<usize>,
    #[arg(long)]
    colorings: Option<usize>,
    #[arg(long)]
    palette: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SampleModel {
    Two,
    Mm,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpectrumMode {
    Cycles,
    Mass,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a block-model graph; writes the edge list to --out.
    Sample {
        #[arg(long, value_enum, default_value = "mm")]
        model: SampleModel,
        #[command(flatten)]
        params: ModelArgs,
        /// Where to write the planted labels.
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Two-community recovery; writes `vertex,sign`.
    Recover2 {
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        params: ModelArgs,
        #[command(flatten)]
        walk: WalkArgs,
        /// Planted labels, to report the overlap on stderr.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Mixed-membership recovery; writes a label CSV.
    RecoverMm {
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        params: ModelArgs,
        #[command(flatten)]
        walk: WalkArgs,
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Unit vector correlated with a centered community vector.
    RecoverMatrix {
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        params: ModelArgs,
        #[command(flatten)]
        walk: WalkArgs,
        #[arg(long)]
        top_r: Option<usize>,
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Spiked Wigner demo; writes `metric,value`.
    Wigner {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        lambda: Option<f64>,
        #[command(flatten)]
        walk: WalkArgs,
    },
    /// Low-degree likelihood-ratio mass on a small block model.
    Spectrum {
        #[arg(long, value_enum, default_value = "cycles")]
        mode: SpectrumMode,
        #[command(flatten)]
        params: ModelArgs,
        /// Longest cycle (cycles) or largest edge subset (mass).
        #[arg(long)]
        max: Option<usize>,
    },
    /// Parameter sweep described by --config; writes the experiment CSV.
    Experiment,
}

struct Ctx {
    cfg: Config,
    seed: u64,
    out: Option<PathBuf>,
}

impl Ctx {
    fn writer(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }

    fn get<T: std::str::FromStr>(&self, cli: Option<T>, key: &str) -> Result<Option<T>> {
        match cli {
            Some(v) => Ok(Some(v)),
            None => self.cfg.get(key),
        }
    }

    fn need<T: std::str::FromStr>(&self, cli: Option<T>, key: &str) -> Result<T> {
        self.get(cli, key)?.ok_or_else(|| {
            Error::InvalidParams(format!(
                "--{} is required (or `{key}` in the config)",
                key.replace('_', "-")
            ))
        })
    }

    fn or<T: std::str::FromStr>(&self, cli: Option<T>, key: &str, default: T) -> Result<T> {
        Ok(self.get(cli, key)?.unwrap_or(default))
    }

    /// Copies command-line walk options into the config so the knob readers see them.
    fn absorb_walk(&mut self, w: &WalkArgs) {
        if let Some(v) = w.ell {
            self.cfg.set("ell", v.to_string());
        }
        if let Some(v) = w.colorings {
            self.cfg.set("colorings", v.to_string());
        }
        if let Some(v) = w.palette {
            self.cfg.set("palette", v.to_string());
        }
    }

    fn sbm(&self, p: &ModelArgs, n: Option<usize>) -> Result<SbmParams> {
        SbmParams::new(
            match n {
                Some(n) => n,
                None => self.need(p.n, "n")?,
            },
            self.need(p.d, "d")?,
            self.need(p.eps, "eps")?,
            self.or(p.k, "k", 3)?,
            self.or(p.alpha, "alpha", 0.0)?,
        )
    }

    fn two(&self, p: &ModelArgs, n: Option<usize>) -> Result<TwoParams> {
        TwoParams::new(
            match n {
                Some(n) => n,
                None => self.need(p.n, "n")?,
            },
            self.need(p.d, "d")?,
            self.need(p.eps, "eps")?,
        )
    }
}

fn read_graph(path: &Path) -> Result<model::Graph> {
    lio::read_edge_list(BufReader::new(File::open(path)?))
}

fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.common.config {
        Some(p) => Config::read(p)?,
        None => Config::default(),
    };
    let seed = match cli.common.seed {
        Some(s) => s,
        None => match cfg.get::<u64>("seed")? {
            Some(s) => s,
            None => std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_nanos() as u64)
                .unwrap_or(0),
        },
    };
    eprintln!("seed = {seed}");
    let threads = match cli.common.threads {
        Some(t) => t,
        None => cfg.get_or("threads", 1)?,
    };
    if threads == 0 {
        return Err(Error::InvalidParams("--threads must be at least 1".into()));
    }
    pipeline::set_threads(threads);
    let mut ctx = Ctx {
        cfg,
        seed,
        out: cli.common.out,
    };
    let mut r = rng::seeded(ctx.seed);

    match cli.command {
        Command::Sample {
            model: which,
            params,
            labels,
        } => {
            let labels_path = labels.or(ctx.cfg.get("labels")?);
            match which {
                SampleModel::Two => {
                    let p = ctx.two(&params, None)?;
                    let (g, y) = model::sample_two_communities(&p, &mut r)?;
                    lio::write_edge_list(&g, ctx.writer()?)?;
                    if let Some(path) = labels_path {
                        lio::write_signs_csv(&y, BufWriter::new(File::create(path)?))?;
                    }
                }
                SampleModel::Mm => {
                    let p = ctx.sbm(&params, None)?;
                    let (g, sigma) = model::sample_mixed_membership(&p, &mut r)?;
                    lio::write_edge_list(&g, ctx.writer()?)?;
                    if let Some(path) = labels_path {
                        lio::write_labels_csv(&sigma, BufWriter::new(File::create(path)?))?;
                    }
                }
            }
        }
        Command::Recover2 {
            graph,
            params,
            walk,
            truth,
        } => {
            ctx.absorb_walk(&walk);
            let g = read_graph(&graph)?;
            let p = ctx.two(&params, Some(g.n()))?;
            let res =
                pipeline::recover_two_communities(&g, &p, &pipeline::two_knobs(&ctx.cfg)?, &mut r)?;
            if res.fallback {
                eprintln!(
                    "projection failed (residual {:.3}); labels are random",
                    res.residual
                );
            }
            lio::write_signs_csv(&res.labels, ctx.writer()?)?;
            if let Some(t) = truth {
                let y = lio::read_signs_csv(File::open(t)?)?;
                eprintln!("overlap = {:.6}", pipeline::sign_overlap(&res.labels, &y));
            }
        }
        Command::RecoverMm {
            graph,
            params,
            walk,
            truth,
        } => {
            ctx.absorb_walk(&walk);
            let g = read_graph(&graph)?;
            let p = ctx.sbm(&params, Some(g.n()))?;
            let res = pipeline::recover_mixed_membership(
                &g,
                &p,
                &pipeline::mixed_knobs(&ctx.cfg)?,
                &mut r,
            )?;
            eprintln!("branch = {}", res.branch.name());
            if let Some(why) = &res.fallback {
                eprintln!("fallback: {why}");
            }
            lio::write_labels_csv(&res.labels, ctx.writer()?)?;
            if let Some(t) = truth {
                let sigma = lio::read_labels_csv(File::open(t)?)?;
                eprintln!("corr = {:.6}", model::corr(&sigma, &res.labels)?);
            }
        }
        Command::RecoverMatrix {
            graph,
            params,
            walk,
            top_r,
            truth,
        } => {
            ctx.absorb_walk(&walk);
            if let Some(t) = top_r {
                ctx.cfg.set("top_r", t.to_string());
            }
            let g = read_graph(&graph)?;
            let p = ctx.sbm(&params, Some(g.n()))?;
            let res =
                pipeline::recover_matrix_mm(&g, &p, &pipeline::matrix_knobs(&ctx.cfg)?, &mut r)?;
            lio::write_vector_csv("x", &res.x, ctx.writer()?)?;
            if let Some(t) = truth {
                let sigma = lio::read_labels_csv(File::open(t)?)?;
                eprintln!(
                    "best_overlap = {:.6}",
                    pipeline::best_community_overlap(&res.x, &sigma, p.alpha)
                );
            }
        }
        Command::Wigner { n, lambda, walk } => {
            ctx.absorb_walk(&walk);
            let n = ctx.need(n, "n")?;
            let lambda = ctx.need(lambda, "lambda")?;
            let ell = ctx.or(walk.ell, "ell", 6)?;
            let rep =
                pipeline::wigner_demo(n, lambda, ell, &pipeline::wigner_knobs(&ctx.cfg)?, &mut r)?;
            let mut w = ctx.writer()?;
            writeln!(w, "metric,value")?;
            writeln!(w, "correlation,{}", rep.correlation)?;
            w.flush()?;
        }
        Command::Spectrum { mode, params, max } => {
            let p = ctx.sbm(&params, None)?;
            match mode {
                SpectrumMode::Cycles => {
                    let terms = spectrum::cycle_sum_contribution(&p, ctx.or(max, "max", 12)?)?;
                    let mut w = ctx.writer()?;
                    writeln!(w, "t,term,cumulative")?;
                    for c in terms {
                        writeln!(w, "{},{},{}", c.t, c.term, c.cumulative)?;
                    }
                    w.flush()?;
                }
                SpectrumMode::Mass => {
                    let mass = spectrum::low_degree_mass_by_size(&p, ctx.or(max, "max", 3)?)?;
                    let mut w = ctx.writer()?;
                    writeln!(w, "subset_size,mass")?;
                    for (s, m) in mass.iter().enumerate() {
                        writeln!(w, "{s},{m}")?;
                    }
                    w.flush()?;
                }
            }
        }
        Command::Experiment => {
            ctx.cfg.set("seed", ctx.seed.to_string());
            let rows = pipeline::run_experiment(&ctx.cfg)?;
            pipeline::write_rows(&rows, ctx.writer()?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
