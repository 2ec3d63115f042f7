use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use thickknot::diagram::Diagram;
use thickknot::families::Family;
use thickknot::lifted::FilteredLiftedGraph;
use thickknot::moves::{ball, DEFAULT_BALL_BUDGET};
use thickknot::optimizer::{ideal_stratum_estimate, tighten_restarts, trace_csv, AnnealConfig};
use thickknot::pattern::{recognition_length_estimate, visibility_length, FinitePattern, MirrorPolicy};
use thickknot::projection::{check_regularity, extract_diagram, project, Direction, Thresholds};
use thickknot::sweep::{sweep_many, PolygonPath, SweepOptions, SweepReport, DEFAULT_STEP, DEFAULT_T_TOL};
use thickknot::Polygon3;

#[derive(Parser)]
#[command(name = "thickknot", version, about = "Thick polygonal knots and their filtered Reidemeister graphs")]
#[command(args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the JSON result here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON object whose entries override the flags of the same name.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for sweeps and restarts.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// MinRad, doubly-critical self-distance, thickness and ropelength of a polygon.
    Thickness {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Planar projection and its regularity margins.
    Project {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_parser = parse_dir, default_value = "0,0,1")]
        dir: [f64; 3],
    },
    /// Knot diagram of a regular projection, or of PD text.
    Diagram {
        #[arg(long = "in", conflicts_with = "pd")]
        input: Option<PathBuf>,
        #[arg(long, value_parser = parse_dir, default_value = "0,0,1")]
        dir: [f64; 3],
        #[arg(long)]
        pd: Option<String>,
    },
    /// Rooted typed ball in the Reidemeister graph.
    Ball {
        #[arg(long, default_value = "empty")]
        pd: String,
        #[arg(long)]
        radius: usize,
        #[arg(long, default_value_t = DEFAULT_BALL_BUDGET)]
        budget: usize,
    },
    /// Reidemeister events along a path (or every path of a family).
    Sweep {
        #[arg(long, alias = "in")]
        path: PathBuf,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Filtered lifted graph of a family, or its level graph at `--lambda`.
    Graph {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Reidemeister radius, diameter and crossing profile per level.
    Growth {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Merge tree of the ideal-level components.
    MergeTree {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Recognition length estimate of a diagram, or visibility of a pattern file.
    Recognize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "empty")]
        pd: String,
        /// Characteristic ball radius.
        #[arg(long, default_value_t = 1)]
        radius: usize,
        /// Further radii to report.
        #[arg(long, value_delimiter = ',')]
        radii: Vec<usize>,
        #[arg(long, default_value = "match-direct")]
        policy: String,
        #[arg(long)]
        pattern: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_BALL_BUDGET)]
        budget: usize,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Anneal a polygon towards minimal ropelength.
    Tighten {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        restarts: Option<usize>,
        /// Initial step as a fraction of the mean edge length.
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        temperature: Option<f64>,
        #[arg(long)]
        ratio: Option<f64>,
        /// CSV trace of the best run.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SweepArgs {
    /// Projection direction; defaults to the family's own.
    #[arg(long, value_parser = parse_dir)]
    dir: Option<[f64; 3]>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_STEP)]
    step: f64,
    #[arg(long, default_value_t = DEFAULT_T_TOL)]
    ttol: f64,
}

impl SweepArgs {
    fn options(&self) -> SweepOptions {
        SweepOptions {
            step: self.step,
            t_tol: self.ttol,
            lambda: self.lambda,
        }
    }
}

fn parse_dir(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    <[f64; 3]>::try_from(parts).map_err(|p| format!("expected x,y,z, got {} numbers", p.len()))
}

enum Failure {
    Domain(thickknot::Error),
    Io { path: PathBuf, message: String },
}

impl From<thickknot::Error> for Failure {
    fn from(e: thickknot::Error) -> Self {
        Failure::Domain(e)
    }
}

impl Failure {
    fn to_json(&self) -> Value {
        match self {
            Failure::Domain(e) => json!({"error": {"kind": e.kind(), "message": e.to_string()}}),
            Failure::Io { path, message } => {
                json!({"error": {"kind": "Io", "message": message, "path": path.display().to_string()}})
            }
        }
    }
}

type Outcome<T> = Result<T, Failure>;

fn read(path: &Path) -> Outcome<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn write(path: &Path, text: &str) -> Outcome<()> {
    std::fs::write(path, text).map_err(|e| Failure::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn direction(d: [f64; 3]) -> Outcome<Direction> {
    Ok(Direction::from_xyz(d[0], d[1], d[2])?)
}

fn load_polygon(path: &Path) -> Outcome<Polygon3> {
    Ok(Polygon3::from_json(&read(path)?)?)
}

/// Accepts `empty`, a canonical key, a PD file, or inline PD such as
/// `X(1,4,2,5) X(3,6,4,1) X(5,2,6,3)`.
fn load_diagram(spec: &str) -> Outcome<Diagram> {
    if spec.starts_with('K') && spec.contains(':') {
        return Ok(Diagram::from_key(spec)?);
    }
    let path = Path::new(spec);
    let text = if path.is_file() { read(path)? } else { spec.to_string() };
    let text = text
        .replace("X(", "X ")
        .replace([',', ';'], " ")
        .replace(')', "\n");
    Ok(Diagram::parse_pd(&text)?)
}

/// A family file, or a single path or polygon file wrapped as a one-path family.
fn load_family(path: &Path, dir: Option<[f64; 3]>) -> Outcome<Family> {
    let text = read(path)?;
    let value: Value = serde_json::from_str(&text).map_err(thickknot::Error::from)?;
    let mut family = if value.get("paths").is_some() {
        Family::from_json(&text)?
    } else {
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "path".into());
        Family {
            name: id.clone(),
            direction: Direction::z(),
            paths: vec![(id, PolygonPath::from_json(&text)?)],
        }
    };
    if let Some(d) = dir {
        family.direction = direction(d)?;
    }
    Ok(family)
}

fn sweep_family(family: &Family, opts: &SweepOptions) -> Outcome<Vec<SweepReport>> {
    let jobs: Vec<_> = family
        .paths
        .iter()
        .map(|(id, p)| (id.clone(), p.clone(), family.direction))
        .collect();
    Ok(sweep_many(&jobs, opts).into_iter().collect::<thickknot::Result<_>>()?)
}

fn lifted(input: &Path, args: &SweepArgs) -> Outcome<FilteredLiftedGraph> {
    let family = load_family(input, args.dir)?;
    Ok(FilteredLiftedGraph::build(&sweep_family(&family, &args.options())?)?)
}

fn diagram_json(d: &Diagram) -> Value {
    json!({
        "key": d.key(),
        "crossings": d.n_crossings(),
        "writhe": d.writhe(),
        "determinant": d.determinant(),
        "pd": d.to_pd(),
    })
}

fn run(command: Command) -> Outcome<Value> {
    match command {
        Command::Thickness { input } => {
            let p = load_polygon(&input)?;
            let t = p.thickness()?;
            Ok(json!({
                "min_rad": t.min_rad,
                "dcsd": t.dcsd,
                "thickness": t.thickness,
                "length": p.total_length(),
                "ropelength": p.total_length() / t.thickness,
            }))
        }
        Command::Project { input, dir } => {
            let p = load_polygon(&input)?;
            let u = direction(dir)?;
            let proj = project(&p, &u);
            let (e1, e2) = u.frame();
            Ok(json!({
                "direction": u.as_vec().as_slice(),
                "frame": [e1.as_slice(), e2.as_slice()],
                "points": proj.points.iter().map(|q| [q.x, q.y]).collect::<Vec<_>>(),
                "depths": proj.depths,
                "regularity": check_regularity(&p, &u, &Thresholds::default()),
            }))
        }
        Command::Diagram { input, dir, pd } => {
            let d = match (input, pd) {
                (Some(input), _) => extract_diagram(&load_polygon(&input)?, &direction(dir)?)?,
                (None, Some(pd)) => load_diagram(&pd)?,
                (None, None) => load_diagram("empty")?,
            };
            Ok(diagram_json(&d))
        }
        Command::Ball { pd, radius, budget } => {
            let b = ball(&load_diagram(&pd)?, radius, budget)?;
            let mut v = serde_json::to_value(&b).map_err(thickknot::Error::from)?;
            v["distances"] = json!(b.distances());
            Ok(v)
        }
        Command::Sweep { path, sweep } => {
            let family = load_family(&path, sweep.dir)?;
            let reports = sweep_family(&family, &sweep.options())?;
            if reports.len() == 1 {
                return Ok(serde_json::to_value(&reports[0]).map_err(thickknot::Error::from)?);
            }
            Ok(json!({"family": family.name, "reports": reports}))
        }
        Command::Graph { input, sweep } => {
            let g = lifted(&input, &sweep)?;
            match sweep.lambda {
                Some(level) => Ok(serde_json::to_value(g.at(level)).map_err(thickknot::Error::from)?),
                None => Ok(g.export()),
            }
        }
        Command::Growth { input, sweep } => {
            let g = lifted(&input, &sweep)?;
            let levels: Vec<f64> = match sweep.lambda {
                Some(level) => vec![level],
                None => g.grid().to_vec(),
            };
            let rows: Vec<Value> = levels
                .into_iter()
                .map(|level| {
                    let view = g.at(level);
                    json!({
                        "level": level,
                        "vertices": view.vertices.len(),
                        "edges": view.edges.len(),
                        "components": g.components_at(level).len(),
                        "reidemeister_radius": g.reidemeister_radius(level),
                        "diameter": g.diameter(level),
                        "crossing_profile": g.crossing_profile(level, None),
                    })
                })
                .collect();
            Ok(json!({"ideal_level": g.ideal_level(), "levels": rows}))
        }
        Command::MergeTree { input, sweep } => {
            let g = lifted(&input, &sweep)?;
            let tree = g.merge_tree();
            let mut v = serde_json::from_str::<Value>(&tree.to_json()).map_err(thickknot::Error::from)?;
            v["ideal_components"] = json!(g.ideal_component_count());
            v["internal_nodes"] = json!(tree.internal_nodes());
            v["caveat"] = json!("sampled-upper-bound");
            Ok(v)
        }
        Command::Recognize {
            input,
            pd,
            radius,
            radii,
            policy,
            pattern,
            budget,
            sweep,
        } => {
            let policy = match policy.as_str() {
                "match-direct" => MirrorPolicy::Direct,
                "match-either" => MirrorPolicy::Either,
                other => {
                    return Err(thickknot::Error::InvalidPattern(format!("unknown mirror policy {other:?}")).into())
                }
            };
            let pattern = match pattern {
                Some(file) => Some(FinitePattern::from_json(&read(&file)?)?.with_policy(policy)),
                None => None,
            };
            let root = load_diagram(&pd)?;
            let g = lifted(&input, &sweep)?;
            match pattern {
                Some(q) => Ok(json!({"visibility_length": visibility_length(&q, &g)})),
                None => {
                    let est = recognition_length_estimate(&root, &radii, radius, &g, policy, budget)?;
                    Ok(serde_json::to_value(est).map_err(thickknot::Error::from)?)
                }
            }
        }
        Command::Tighten {
            input,
            seed,
            iterations,
            restarts,
            step,
            temperature,
            ratio,
            trace,
        } => {
            let p = load_polygon(&input)?;
            let defaults = AnnealConfig::default();
            let cfg = AnnealConfig {
                seed,
                iterations: iterations.unwrap_or(defaults.iterations),
                restarts: restarts.unwrap_or(defaults.restarts),
                initial_step: step.unwrap_or(defaults.initial_step),
                initial_temperature: temperature.unwrap_or(defaults.initial_temperature),
                ratio: ratio.unwrap_or(defaults.ratio),
                ..defaults
            };
            cfg.validate()?;
            let runs = tighten_restarts(&p, &cfg)?;
            let estimate = ideal_stratum_estimate(&runs).expect("at least one restart");
            let best = &runs[estimate.representatives[0]];
            if let Some(file) = trace {
                write(&file, &trace_csv(&best.trace))?;
            }
            Ok(json!({
                "seed": seed,
                "config": cfg,
                "initial_ropelength": best.initial_ropelength,
                "ropelength": best.ropelength,
                "restart": best.restart,
                "polygon": best.polygon.to_json_value(),
                "runs": runs.iter().map(|r| json!({"restart": r.restart, "ropelength": r.ropelength})).collect::<Vec<_>>(),
                "ideal_stratum": {"rop_min": estimate.rop_min, "representatives": estimate.representatives},
            }))
        }
    }
}

/// Command-line arguments with the entries of a `--config` file appended, so
/// that they take precedence over flags given directly.
fn with_config(args: Vec<String>) -> Result<Vec<String>, String> {
    let path = args.iter().enumerate().find_map(|(k, a)| {
        a.strip_prefix("--config=")
            .map(str::to_string)
            .or_else(|| (a == "--config").then(|| args.get(k + 1).cloned()).flatten())
    });
    let Some(path) = path else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("config {path}: {e}"))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| format!("config {path}: {e}"))?;
    let Value::Object(map) = value else {
        return Err(format!("config {path}: expected a JSON object"));
    };
    let mut out = args;
    for (key, v) in map {
        let flag = format!("--{}", key.replace('_', "-"));
        if flag == "--config" {
            continue;
        }
        match v {
            Value::Bool(true) => out.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::String(s) => out.extend([flag, s]),
            Value::Array(items) => {
                let joined: Vec<String> = items
                    .iter()
                    .map(|x| match x {
                        Value::String(s) => s.clone(),
                        other => other.to_string(),
                    })
                    .collect();
                out.extend([flag, joined.join(",")]);
            }
            other => out.extend([flag, other.to_string()]),
        }
    }
    Ok(out)
}

fn main() -> ExitCode {
    let args = match with_config(std::env::args().collect()) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let cli = Cli::parse_from(args);
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = run(cli.command).and_then(|v| {
        let text = serde_json::to_string_pretty(&v).map_err(thickknot::Error::from)?;
        match &cli.out {
            Some(path) => write(path, &(text + "\n")),
            None => {
                // a closed pipe downstream is not our failure
                let _ = writeln!(std::io::stdout().lock(), "{text}");
                Ok(())
            }
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let text = serde_json::to_string_pretty(&f.to_json()).expect("error serialization");
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            ExitCode::from(1)
        }
    }
}
