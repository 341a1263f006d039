//! `worldsim`: validate world files, run episodes, run the statistics agent,
//! transform worlds and compare their traces.
//!
//! Exit codes: 0 ok, 1 validation or runtime failure, 2 parse or input
//! error, 3 resource cap exceeded.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use worldsim::agent::{run_agent_replay, Agent, AgentSpec, AgentSpecFile, ReportMeta, TheoryReport};
use worldsim::chance::Seeds;
use worldsim::history::{parse_log, write_log, History};
use worldsim::run::run_episode_with;
use worldsim::theory::{GroupingSpec, TheoryConfig, TheoryOutput};
use worldsim::transform::{
    def3_to_def2, def4_to_def3_capped, trace_distance, Def1Family, EpisodeSource, FlattenOptions, TraceOptions,
};
use worldsim::world::{StepLetter, WorldModel};
use worldsim::worldfile::{parse_world, write_world, AnyWorld};
use worldsim::{with_world, WorldError};

#[derive(Parser)]
#[command(name = "worldsim", version, about = "Partially observable world simulator and test-state agent")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check every distribution of a world file.
    Validate { world: PathBuf },
    /// Run episodes under the seeded uniform policy and write the history log.
    Run {
        world: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        seeds: SeedArgs,
        /// Log file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Collect test statistics live or from a log and write a theory report.
    Agent {
        world: PathBuf,
        /// Agent file with tests, experiments and an optional grouping.
        spec: PathBuf,
        /// Replay this history log instead of running the world.
        #[arg(long)]
        log: Option<PathBuf>,
        /// Grouping file that overrides the one in the agent file.
        #[arg(long)]
        grouping: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        seeds: SeedArgs,
        #[arg(long, default_value_t = TheoryConfig::default().c0)]
        c0: f64,
        #[arg(long, default_value_t = TheoryConfig::default().half_life)]
        half_life: f64,
        /// Report file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the live run's history log here.
        #[arg(long, conflicts_with = "log")]
        save_log: Option<PathBuf>,
    },
    /// Convert a world to a lower definition.
    Transform {
        /// Source definition; taken from the file when absent.
        #[arg(long, value_enum)]
        from: Option<Level>,
        #[arg(long, value_enum)]
        to: Level,
        input: PathBuf,
        /// Output file; standard output when absent.
        output: Option<PathBuf>,
        /// Largest number of states any stage may build.
        #[arg(long, default_value_t = 1_000_000)]
        cap: usize,
        /// Stop flattening at this breadth-first depth.
        #[arg(long)]
        reach_bound: Option<usize>,
    },
    /// Estimate the total-variation distance between two worlds' traces.
    EquivCheck {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        episodes: usize,
        #[arg(long, default_value_t = 5)]
        horizon: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Compare against the determinized family of B, which must be def2.
        #[arg(long)]
        determinize: bool,
        /// Fail with exit code 1 when the distance exceeds this.
        #[arg(long)]
        max_tv: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a theory report as text.
    Report {
        report: PathBuf,
        /// Only this test.
        #[arg(long)]
        test: Option<String>,
    },
}

#[derive(Args, Clone, Copy)]
struct RunArgs {
    #[arg(long, default_value_t = 1)]
    episodes: usize,
    /// Steps after the opening `Nothing` step.
    #[arg(long, default_value_t = 100)]
    horizon: usize,
}

#[derive(Args, Clone, Copy)]
struct SeedArgs {
    /// Base seed for all four chance channels.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    seed_predictable: Option<u64>,
    #[arg(long)]
    seed_unpredictable: Option<u64>,
    #[arg(long)]
    seed_noise: Option<u64>,
    #[arg(long)]
    seed_policy: Option<u64>,
}

impl SeedArgs {
    fn seeds(&self) -> Seeds {
        let base = Seeds::uniform(self.seed);
        Seeds {
            predictable: self.seed_predictable.unwrap_or(base.predictable),
            unpredictable: self.seed_unpredictable.unwrap_or(base.unpredictable),
            noise: self.seed_noise.unwrap_or(base.noise),
            policy: self.seed_policy.unwrap_or(base.policy),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
enum Level {
    Def2,
    Def3,
    Def4,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn validation(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }

    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn world(context: &str, e: WorldError) -> Self {
        let code = if matches!(e, WorldError::CapExceeded { .. }) { 3 } else { 1 };
        Failure {
            code,
            message: format!("{context}: {e}"),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { world } => validate(&world),
        Command::Run { world, run, seeds, out } => run_cmd(&world, run, seeds.seeds(), out.as_deref()),
        Command::Agent {
            world,
            spec,
            log,
            grouping,
            run,
            seeds,
            c0,
            half_life,
            out,
            save_log,
        } => agent_cmd(AgentJob {
            world,
            spec,
            log,
            grouping,
            run,
            seeds: seeds.seeds(),
            config: TheoryConfig { c0, half_life },
            out,
            save_log,
        }),
        Command::Transform {
            from,
            to,
            input,
            output,
            cap,
            reach_bound,
        } => transform(from, to, &input, output.as_deref(), cap, reach_bound),
        Command::EquivCheck {
            a,
            b,
            episodes,
            horizon,
            seed,
            determinize,
            max_tv,
            out,
        } => equiv_check(&a, &b, TraceOptions { episodes, horizon, seed }, determinize, max_tv, out.as_deref()),
        Command::Report { report, test } => report_cmd(&report, test.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::validation(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_world(path: &Path) -> Result<AnyWorld, Failure> {
    parse_world(&read(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn validate(path: &Path) -> Outcome {
    let world = load_world(path)?;
    let findings = world.validate();
    for f in &findings {
        println!("{f}");
    }
    if findings.is_empty() {
        println!("{}: {} world is valid", path.display(), world.kind());
        Ok(())
    } else {
        Err(Failure::validation(format!("{} distribution(s) break a constraint", findings.len())))
    }
}

enum Feed<'a> {
    Begin,
    Letter(&'a StepLetter),
    End,
}

/// Runs the episodes and reports their boundaries and letters to `feed`.
/// A failing step is reported with its episode and step number.
fn run_episodes<W: WorldModel>(
    world: &W,
    run: RunArgs,
    seeds: &Seeds,
    mut feed: impl FnMut(Feed),
) -> Result<Vec<History>, Failure> {
    let mut out = Vec::with_capacity(run.episodes);
    for k in 0..run.episodes {
        feed(Feed::Begin);
        let mut step = 0usize;
        let h = run_episode_with(world, &seeds.for_episode(k as u64), run.horizon, |l| {
            step += 1;
            feed(Feed::Letter(l));
        })
        .map_err(|e| Failure::world(&format!("episode {k}, step {}", step + 1), e))?;
        feed(Feed::End);
        out.push(h);
    }
    Ok(out)
}

fn run_cmd(path: &Path, run: RunArgs, seeds: Seeds, out: Option<&Path>) -> Outcome {
    let world = load_world(path)?;
    let histories = with_world!(&world, w => run_episodes(w, run, &seeds, |_| {}))?;
    emit(out, &write_log(&histories))
}

struct AgentJob {
    world: PathBuf,
    spec: PathBuf,
    log: Option<PathBuf>,
    grouping: Option<PathBuf>,
    run: RunArgs,
    seeds: Seeds,
    config: TheoryConfig,
    out: Option<PathBuf>,
    save_log: Option<PathBuf>,
}

fn load_spec(job: &AgentJob, world: &AnyWorld) -> Result<AgentSpec, Failure> {
    let sig = world.signature();
    let text = read(&job.spec)?;
    let bad = |p: &Path, e: &dyn std::fmt::Display| Failure::input(format!("{}: {e}", p.display()));
    let mut file: AgentSpecFile = serde_json::from_str(&text).map_err(|e| bad(&job.spec, &e))?;
    if let Some(gp) = &job.grouping {
        let g: GroupingSpec = serde_json::from_str(&read(gp)?).map_err(|e| bad(gp, &e))?;
        file.grouping = Some(g);
    }
    let implicit = file.grouping.is_none();
    let mut spec = AgentSpec::from_file(&file, sig).map_err(|e| bad(&job.spec, &e))?;
    if implicit {
        spec.grouping = world
            .default_grouping()
            .map_err(|e| Failure::input(format!("built-in grouping: {e}")))?;
    }
    Ok(spec)
}

fn world_parameters(world: &AnyWorld) -> Option<Value> {
    match world {
        AnyWorld::Chess(w) => serde_json::to_value(w.config()).ok(),
        AnyWorld::Doors(c, _) => serde_json::to_value(c).ok(),
        _ => None,
    }
}

fn agent_cmd(job: AgentJob) -> Outcome {
    let world = load_world(&job.world)?;
    let spec = load_spec(&job, &world)?;
    let mut meta = ReportMeta {
        world: job.world.display().to_string(),
        seeds: None,
        horizon: None,
        parameters: world_parameters(&world),
    };
    let agent = match &job.log {
        Some(log) => {
            let histories = parse_log(&read(log)?, world.signature())
                .map_err(|e| Failure::input(format!("{}: {e}", log.display())))?;
            run_agent_replay(&histories, spec, job.config)
        }
        None => {
            meta.seeds = Some(job.seeds);
            meta.horizon = Some(job.run.horizon);
            let mut agent = Agent::new(spec, job.config);
            let histories = with_world!(&world, w => run_episodes(
                w,
                job.run,
                &job.seeds,
                |f| match f {
                    Feed::Begin => agent.begin_episode(),
                    Feed::Letter(l) => agent.push(l),
                    Feed::End => agent.end_episode(),
                },
            ))?;
            if let Some(p) = &job.save_log {
                emit(Some(p), &write_log(&histories))?;
            }
            agent
        }
    };
    emit(job.out.as_deref(), &(agent.report(meta).to_json() + "\n"))
}

fn transform(
    from: Option<Level>,
    to: Level,
    input: &Path,
    output: Option<&Path>,
    cap: usize,
    reach_bound: Option<usize>,
) -> Outcome {
    let world = load_world(input)?;
    let found = match &world {
        AnyWorld::Def2(_) => Level::Def2,
        AnyWorld::Def3(_) | AnyWorld::Doors(..) => Level::Def3,
        AnyWorld::Def4(_) => Level::Def4,
        AnyWorld::Chess(_) => {
            return Err(Failure::input("the chess world is programmatic and has no table form to transform"))
        }
    };
    if from.is_some_and(|f| f != found) {
        return Err(Failure::input(format!("{} holds a {} world", input.display(), world.kind())));
    }
    if to >= found {
        return Err(Failure::input(format!(
            "{} worlds can only be lowered; the determinized form has no file representation",
            world.kind()
        )));
    }
    let def3 = match world {
        AnyWorld::Def4(w) => def4_to_def3_capped(&w, cap).map_err(|e| Failure::world("def4 to def3", e))?.world,
        AnyWorld::Def3(w) | AnyWorld::Doors(_, w) => w,
        _ => unreachable!("checked above"),
    };
    let result = if to == Level::Def3 {
        AnyWorld::Def3(def3)
    } else {
        let flat = def3_to_def2(&def3, FlattenOptions { reach_bound, cap })
            .map_err(|e| Failure::world("def3 to def2", e))?;
        if !flat.closed {
            eprintln!("warning: the reach bound cut the state search short; frontier states have no transitions");
        }
        AnyWorld::Def2(flat.world)
    };
    emit(output, &(write_world(&result) + "\n"))
}

fn equiv_check(
    a: &Path,
    b: &Path,
    options: TraceOptions,
    determinize: bool,
    max_tv: Option<f64>,
    out: Option<&Path>,
) -> Outcome {
    let wa = load_world(a)?;
    let wb = load_world(b)?;
    let family;
    let sb: &dyn EpisodeSource = match (&wb, determinize) {
        (AnyWorld::Def2(w), true) => {
            family = Def1Family { base: w.clone() };
            &family
        }
        (_, true) => return Err(Failure::input("--determinize needs a def2 world as B")),
        (w, false) => with_world!(w, w => w as &dyn EpisodeSource),
    };
    let sa: &dyn EpisodeSource = with_world!(&wa, w => w as &dyn EpisodeSource);
    let report = trace_distance(sa, sb, options).map_err(|e| match e {
        WorldError::SignatureMismatch(_) => Failure::input(e.to_string()),
        e => Failure::world("trace distance", e),
    })?;
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    emit(out, &text)?;
    match max_tv {
        Some(limit) if report.distance > limit => Err(Failure::validation(format!(
            "distance {:.4} exceeds {limit}",
            report.distance
        ))),
        _ => Ok(()),
    }
}

fn fmt_output(o: &TheoryOutput) -> String {
    format!("p={:.3} c={:.3}", o.prediction, o.confidence)
}

fn report_cmd(path: &Path, only: Option<&str>) -> Outcome {
    let report: TheoryReport =
        serde_json::from_str(&read(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let cfg = &report.config;
    println!(
        "world {}  c0 {}  half-life {}  episodes {}  steps {}",
        cfg.meta.world, cfg.c0, cfg.half_life, report.episodes, report.steps
    );
    let tests: Vec<_> = report.tests.iter().filter(|t| only.is_none_or(|n| n == t.name)).collect();
    if let (Some(n), true) = (only, tests.is_empty()) {
        return Err(Failure::input(format!("no test named `{n}`")));
    }
    for t in tests {
        println!();
        println!("test {}: {} / {}", t.name, t.condition, t.result);
        println!("  defined at {} moments, now in group {}", t.defined_moments, t.current_group);
        for g in &t.groups {
            let last = match g.last_value {
                Some(v) => format!("{v} at {}", g.last_moment.unwrap_or_default()),
                None => "never seen".into(),
            };
            println!(
                "  [{}] estimate {}  stability {}  last {last}",
                g.group,
                fmt_output(&g.estimate),
                fmt_output(&g.stability)
            );
            for e in &g.experiments {
                println!("    {:>6} {:>6}  {}  {}", e.n, e.m, fmt_output(&e.output), e.experiment);
            }
        }
    }
    Ok(())
}
