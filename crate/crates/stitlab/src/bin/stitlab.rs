//! Thin command-line front end; all behavior lives in the library.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use stitlab::factor::{cftp_sample, CftpMode, CftpOutcome};
use stitlab::field::RandomnessField;
use stitlab::io::{self, CftpFile, ChainFile, Config, Meta, PolyDto, StateDto};
use stitlab::render::{render_svg, RenderOptions};
use stitlab::renorm::z_trajectory;
use stitlab::rng::{derive_stream, StreamPart};
use stitlab::sim::run_with_budget;
use stitlab::verify::{run_suite, SuiteParams, SuiteScale, SUITE_NAMES};

#[derive(Parser)]
#[command(
    name = "stitlab",
    about = "Simulation laboratory for iteration-stable random tessellations",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Config file (JSON); defaults to $STITLAB_CONFIG.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the config's seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl ConfigArgs {
    fn load(&self) -> Result<Config, io::IoError> {
        let mut cfg = Config::load(self.config.as_deref())?;
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the continuous-time process on the window and write the final
    /// tessellation (optionally the full event log).
    Simulate {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Override the config's time horizon.
        #[arg(long)]
        time: Option<f64>,
        /// Output tessellation file.
        #[arg(long)]
        out: PathBuf,
        /// Also write the event log (newline-delimited JSON).
        #[arg(long)]
        events: Option<PathBuf>,
    },
    /// Sample the renormalized chain for a number of steps.
    Chain {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Override the config's step count.
        #[arg(long)]
        steps: Option<u32>,
        /// Output chain file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Coupling from the past: sample the chain's stationary trajectory
    /// on [0, horizon] exactly.
    Cftp {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value_t = 0)]
        horizon: u32,
        /// Deepest start time probed before giving up.
        #[arg(long, default_value_t = 64)]
        max_depth: u32,
        /// Use the heuristic doubling rule instead of certificates.
        #[arg(long)]
        heuristic: bool,
        /// Output CFTP report (with the sampled states).
        #[arg(long)]
        out: PathBuf,
    },
    /// Run statistical verification suites.
    Verify {
        /// Suites to run (repeatable); defaults to the config's list or
        /// all of them.
        #[arg(long = "suite")]
        suites: Vec<String>,
        /// Replica scale.
        #[arg(long, default_value = "standard")]
        scale: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Optional config supplying suite list and seed.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write the canonical JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Render a tessellation file to SVG.
    Render {
        /// Input tessellation file.
        #[arg(long = "in")]
        input: PathBuf,
        /// Output SVG path.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 480.0)]
        width: f64,
        /// Mark the origin.
        #[arg(long)]
        origin: bool,
        /// Label cells with their enumeration indices.
        #[arg(long)]
        labels: bool,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match cli.command {
        Command::Simulate {
            cfg,
            time,
            out,
            events,
        } => {
            let mut config = cfg.load()?;
            if let Some(t) = time {
                config.time = t;
                config.validate()?;
            }
            let window = config.window()?;
            let measure = config.measure()?;
            let mut rng = derive_stream(config.seed, &[StreamPart::Tag("simulate")]);
            let sim = run_with_budget(
                window.as_poly(),
                &measure,
                config.time,
                config.max_events,
                &mut rng,
            )?;
            let meta = Meta {
                time: config.time,
                seed: config.seed,
                measure: measure.kind_label(),
                config_hash: config.hash(),
            };
            io::write_tessellation(&out, sim.final_tess(), meta)?;
            if let Some(ev) = events {
                io::write_event_log(&ev, sim.events())?;
            }
            println!(
                "simulate: t={} cells={} -> {}",
                config.time,
                sim.final_tess().cell_count(),
                out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Chain { cfg, steps, out } => {
            let mut config = cfg.load()?;
            if let Some(s) = steps {
                config.steps = s;
            }
            let rc = config.renorm()?;
            let mut rng = derive_stream(config.seed, &[StreamPart::Tag("chain")]);
            let traj = z_trajectory(&rc, config.steps, &mut rng)?;
            let file = ChainFile {
                dim: config.dimension,
                window: PolyDto::of(rc.window().as_poly()),
                states: traj
                    .states
                    .iter()
                    .enumerate()
                    .map(|(i, t)| StateDto::of(i as i64, t))
                    .collect(),
                meta: Meta {
                    time: config.steps as f64,
                    seed: config.seed,
                    measure: rc.measure().kind_label(),
                    config_hash: config.hash(),
                },
            };
            io::write_chain(&out, &file)?;
            println!(
                "chain: {} steps, final cells={} -> {}",
                config.steps,
                traj.states.last().unwrap().cell_count(),
                out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Cftp {
            cfg,
            horizon,
            max_depth,
            heuristic,
            out,
        } => {
            let config = cfg.load()?;
            let rc = config.renorm()?;
            let field = RandomnessField::new(config.seed);
            let mode = if heuristic {
                CftpMode::Heuristic
            } else {
                CftpMode::Certified
            };
            let outcome = cftp_sample(&field, &rc, horizon, max_depth, mode)?;
            let meta = Meta {
                time: horizon as f64,
                seed: config.seed,
                measure: rc.measure().kind_label(),
                config_hash: config.hash(),
            };
            let window = PolyDto::of(rc.window().as_poly());
            match outcome {
                CftpOutcome::Coalesced(s) => {
                    let file = CftpFile {
                        dim: config.dimension,
                        window,
                        horizon,
                        coalesced: true,
                        depth: Some(s.depth),
                        probes: s.probes.iter().map(|p| (p.depth, p.ok)).collect(),
                        states: s
                            .values
                            .iter()
                            .enumerate()
                            .map(|(i, t)| StateDto::of(i as i64, t))
                            .collect(),
                        meta,
                    };
                    io::write_cftp(&out, &file)?;
                    println!(
                        "cftp: coalesced at depth {} (certified range {:?}) -> {}",
                        s.depth,
                        s.certified_range,
                        out.display()
                    );
                    Ok(ExitCode::SUCCESS)
                }
                CftpOutcome::DepthCapExceeded { cap, probes } => {
                    let file = CftpFile {
                        dim: config.dimension,
                        window,
                        horizon,
                        coalesced: false,
                        depth: None,
                        probes: probes.iter().map(|p| (p.depth, p.ok)).collect(),
                        states: vec![],
                        meta,
                    };
                    io::write_cftp(&out, &file)?;
                    eprintln!("cftp: no coalescence within depth cap {cap}");
                    Ok(ExitCode::FAILURE)
                }
            }
        }
        Command::Verify {
            suites,
            scale,
            seed,
            config,
            report,
        } => {
            let cfg = match &config {
                Some(p) => Some(Config::from_path(p)?),
                None => None,
            };
            let names: Vec<String> = if !suites.is_empty() {
                suites
            } else if let Some(c) = cfg.as_ref().filter(|c| !c.suites.is_empty()) {
                c.suites.clone()
            } else {
                SUITE_NAMES.iter().map(|s| s.to_string()).collect()
            };
            let params = SuiteParams {
                master_seed: seed.or(cfg.as_ref().map(|c| c.seed)).unwrap_or(17),
                scale: match scale.as_str() {
                    "standard" => SuiteScale::Standard,
                    "quick" => SuiteScale::Quick,
                    other => return Err(format!("unknown scale `{other}`").into()),
                },
            };
            let mut reports = Vec::new();
            let mut all_pass = true;
            for name in &names {
                let r = run_suite(name, &params)?;
                for line in r.summary_lines() {
                    println!("{line}");
                }
                println!(
                    "suite {name} => {} ({} checks, {} ms)",
                    if r.pass { "PASS" } else { "FAIL" },
                    r.checks.len(),
                    r.wall_ms
                );
                all_pass &= r.pass;
                reports.push(r);
            }
            if let Some(path) = report {
                io::write_reports(&path, &reports)?;
            }
            Ok(if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Render {
            input,
            out,
            width,
            origin,
            labels,
        } => {
            let (tess, _meta) = io::read_tessellation(&input)?;
            let svg = render_svg(
                &tess,
                &RenderOptions {
                    width,
                    origin_marker: origin,
                    cell_labels: labels,
                },
            );
            std::fs::write(&out, svg)?;
            println!(
                "render: {} cells -> {}",
                tess.cell_count(),
                out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}
