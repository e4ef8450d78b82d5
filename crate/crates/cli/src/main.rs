//! `rhombikit` command-line tool.
//!
//! Exit codes: 0 success, 1 validation error (including usage errors),
//! 2 no path, 3 state budget exhausted, 4 I/O error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use rhombikit::analytics::{analyze_trials, report_table, summarize, RotationParams, TableFormat};
use rhombikit::docking::{enumerate_valid_layouts, validate_genderless};
use rhombikit::geometry::{classify_ground_contact, structure_mesh};
use rhombikit::io::{self, IoError, PlanFile};
use rhombikit::planner::{plan, NoPathReason, ReplayError};
use rhombikit::{Algorithm, PlanError, PlannerOptions, Rotation3};

#[derive(Parser, Debug)]
#[command(name = "rhombikit", version, about = "Rhombic dodecahedral modular robot toolkit")]
struct Cli {
    /// Emit machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check lattice parity, duplicates and connectivity of a structure.
    Validate {
        /// Structure JSON file
        structure: PathBuf,
    },
    /// Check a magnet layout for genderless docking, or enumerate valid
    /// polarity patterns for a set of face magnet positions.
    DockCheck {
        /// Cell magnet layout JSON to check
        #[arg(long)]
        layout: Option<PathBuf>,
        /// Enumerate polarity patterns instead of checking a layout
        #[arg(long, requires_all = ["positions", "symmetry"])]
        enumerate: bool,
        /// Face magnet positions JSON
        #[arg(long)]
        positions: Option<PathBuf>,
        /// Rotational symmetry order k of the face.
        #[arg(long)]
        symmetry: Option<usize>,
        /// Single-face condition for an abstract k-fold face instead of one
        /// pattern shared by all twelve rhombic faces.
        #[arg(long)]
        generalized: bool,
    },
    /// Find a shortest pivot sequence between two structures.
    Plan {
        /// Start structure JSON
        #[arg(long)]
        from: PathBuf,
        /// Goal structure JSON
        #[arg(long)]
        to: PathBuf,
        /// Search algorithm
        #[arg(long, value_enum, default_value_t = AlgorithmArg::Astar)]
        algorithm: AlgorithmArg,
        /// Expansion budget before giving up
        #[arg(long, default_value_t = 1_000_000)]
        max_states: usize,
        /// Write the plan as JSON to this file
        #[arg(long)]
        plan_out: Option<PathBuf>,
        /// Match the goal at its exact position instead of up to translation.
        #[arg(long)]
        absolute: bool,
        /// Distinguish active from passive cells when matching the goal.
        #[arg(long)]
        kind_sensitive: bool,
        /// Require every destination to touch a cell besides the substrate.
        #[arg(long)]
        strict_stability: bool,
    },
    /// Replay a plan file, checking every move.
    Replay {
        /// Plan JSON file
        #[arg(long)]
        plan: PathBuf,
    },
    /// Classify ground contact of a structure under a world rotation.
    Contact {
        /// Structure JSON file
        #[arg(long)]
        structure: PathBuf,
        /// Axis-angle rotation "ax,ay,az,deg".
        #[arg(long, allow_hyphen_values = true)]
        rot: String,
    },
    /// Summarize tracked trials per design as a table.
    Analyze {
        /// Trajectory CSV, one per design, paired in order with --design.
        #[arg(long, required = true)]
        csv: Vec<PathBuf>,
        /// Design metadata JSON, one per --csv
        #[arg(long, required = true)]
        design: Vec<PathBuf>,
        /// Table format
        #[arg(long, value_enum, default_value_t = FormatArg::Md)]
        format: FormatArg,
        /// Net heading change (degrees) needed to call a turning direction.
        #[arg(long, default_value_t = 180.0)]
        theta_min_deg: f64,
    },
    /// Write the outer surface of a structure as Wavefront OBJ.
    Export {
        /// Structure JSON file
        #[arg(long)]
        structure: PathBuf,
        /// Output OBJ path
        #[arg(long)]
        obj: PathBuf,
        /// Centimetres per canonical unit; defaults to the structure's scale
        /// or 1.
        #[arg(long)]
        scale: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Bfs,
    Astar,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Md,
    Csv,
}

enum Failure {
    Validation(String),
    NoPath(String),
    Budget(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::NoPath(_) => 2,
            Failure::Budget(_) => 3,
            Failure::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::NoPath(m) | Failure::Budget(m) | Failure::Io(m) => m,
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Io { .. } => Failure::Io(e.to_string()),
            other => Failure::Validation(other.to_string()),
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> Failure {
    Failure::Validation(e.to_string())
}

/// What a successful command prints: text for humans, JSON for `--json`.
struct Output {
    text: String,
    json: Value,
}

fn read_structure(path: &Path) -> Result<io::Structure, Failure> {
    Ok(io::read_structure(path)?)
}

fn validate(path: &Path) -> Result<Output, Failure> {
    let s = read_structure(path)?;
    let c = &s.config;
    let connected = c.is_connected().map_err(invalid)?;
    if !connected {
        return Err(Failure::Validation(format!("{}: structure is not connected", path.display())));
    }
    let active = c.cells().filter(|x| x.kind == rhombikit::CellKind::Active).count();
    Ok(Output {
        text: format!("ok: {} cells ({active} active, {} passive), connected", c.len(), c.len() - active),
        json: json!({"ok": true, "cells": c.len(), "active": active, "connected": true}),
    })
}

fn dock_check(
    layout: Option<&Path>,
    enumerate: bool,
    positions: Option<&Path>,
    symmetry: Option<usize>,
    generalized: bool,
) -> Result<Output, Failure> {
    if layout.is_none() && !enumerate {
        return Err(invalid("dock-check needs --layout or --enumerate"));
    }
    let mut text = Vec::new();
    let mut out = serde_json::Map::new();
    let mut failure = None;
    if let Some(path) = layout {
        let layout = io::parse_layout(&io::read_file(path)?)?;
        let verdict = validate_genderless(&layout).map_err(invalid)?;
        match &verdict.counterexample {
            None => text.push(format!("genderless: yes ({} alignments checked)", verdict.alignments_checked)),
            Some(a) => {
                text.push(format!("genderless: no; repulsive contact: {a}"));
                failure = Some(format!("layout is not genderless: {a}"));
            }
        }
        out.insert(
            "layout".into(),
            json!({
                "genderless": verdict.is_genderless(),
                "alignments_checked": verdict.alignments_checked,
                "counterexample": verdict.counterexample.map(|a| a.to_string()),
            }),
        );
    }
    if enumerate {
        let positions = io::parse_positions(&io::read_file(positions.expect("clap requires --positions"))?)?;
        let k = symmetry.expect("clap requires --symmetry");
        let patterns = enumerate_valid_layouts(&positions, k, !generalized).map_err(invalid)?;
        let rendered: Vec<String> = patterns.iter().map(|p| p.iter().map(|x| x.to_string()).collect()).collect();
        text.push(format!("{} valid patterns of {}", patterns.len(), 1u64 << positions.len()));
        text.extend(rendered.iter().cloned());
        out.insert("patterns".into(), json!(rendered));
    }
    if let Some(msg) = failure {
        return Err(Failure::Validation(msg));
    }
    Ok(Output { text: text.join("\n"), json: Value::Object(out) })
}

#[allow(clippy::too_many_arguments)]
fn plan_cmd(
    from: &Path,
    to: &Path,
    algorithm: AlgorithmArg,
    max_states: usize,
    plan_out: Option<&Path>,
    absolute: bool,
    kind_sensitive: bool,
    strict_stability: bool,
) -> Result<Output, Failure> {
    let start = read_structure(from)?.config;
    let goal = read_structure(to)?.config;
    if max_states == 0 {
        return Err(invalid("--max-states must be at least 1"));
    }
    let opts = PlannerOptions {
        max_states,
        algorithm: match algorithm {
            AlgorithmArg::Bfs => Algorithm::Bfs,
            AlgorithmArg::Astar => Algorithm::AStar,
        },
        match_up_to_translation: !absolute,
        strict_stability,
        kind_sensitive,
    };
    let p = plan(&start, &goal, &opts).map_err(|e| match e {
        PlanError::NoPath(NoPathReason::SizeMismatch { .. }) | PlanError::NoPath(NoPathReason::Unreachable { .. }) => {
            Failure::NoPath(e.to_string())
        }
        PlanError::BudgetExhausted { .. } => Failure::Budget(e.to_string()),
        other => invalid(other),
    })?;
    let file = PlanFile::from_plan(&start, &p);
    if let Some(path) = plan_out {
        io::write_file(path, &io::plan_to_json(&file))?;
    }
    let mut text = vec![format!(
        "plan: {} moves ({} states expanded, frontier peak {})",
        p.len(),
        p.stats.states_expanded,
        p.stats.frontier_peak
    )];
    text.extend(p.moves.iter().enumerate().map(|(i, m)| format!("{:>4}. {m}", i + 1)));
    let moves: Vec<Value> = p
        .moves
        .iter()
        .map(|m| {
            json!({
                "mover": m.mover().to_array(),
                "substrate": m.substrate().to_array(),
                "from": m.from_dir().index(),
                "to": m.to_dir().index(),
            })
        })
        .collect();
    Ok(Output {
        text: text.join("\n"),
        json: json!({
            "length": p.len(),
            "states_expanded": p.stats.states_expanded,
            "frontier_peak": p.stats.frontier_peak,
            "moves": moves,
        }),
    })
}

fn replay_cmd(path: &Path) -> Result<Output, Failure> {
    let file = io::parse_plan(&io::read_file(path)?)?;
    let end = file.replay().map_err(|e| match e {
        ReplayError::IllegalMove { index, legality } => {
            Failure::Validation(format!("move {} is illegal: {legality}", index + 1))
        }
        ReplayError::GoalMismatch => Failure::Validation(e.to_string()),
    })?;
    let goal = if file.goal.is_some() { "; goal matched" } else { "" };
    let cells: Vec<[i32; 3]> = end.positions().map(|p| p.to_array()).collect();
    Ok(Output {
        text: format!(
            "replayed {} moves{goal}\nfinal cells: {}",
            file.moves.len(),
            cells.iter().map(|c| format!("({}, {}, {})", c[0], c[1], c[2])).collect::<Vec<_>>().join(" ")
        ),
        json: json!({"moves": file.moves.len(), "goal_matched": file.goal.is_some(), "final": cells}),
    })
}

fn parse_rot(s: &str) -> Result<Rotation3, Failure> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| invalid(format!("--rot: expected \"ax,ay,az,deg\", got {s:?}")))?;
    let [ax, ay, az, deg] = parts[..] else {
        return Err(invalid(format!("--rot: expected 4 numbers, got {}", parts.len())));
    };
    Rotation3::from_axis_angle([ax, ay, az], deg).map_err(|e| invalid(format!("--rot: {e}")))
}

fn contact(structure: &Path, rot: &str) -> Result<Output, Failure> {
    let c = read_structure(structure)?.config;
    let rot = parse_rot(rot)?;
    let report = classify_ground_contact(&c, &rot).map_err(invalid)?;
    let support: Vec<[f64; 3]> = report.support.iter().map(|p| p.map(|v| (v * 1e6).round() / 1e6 + 0.0)).collect();
    let mut text = vec![report.overall.to_string(), format!("support ({} points):", support.len())];
    text.extend(support.iter().map(|p| format!("  {:.6} {:.6} {:.6}", p[0], p[1], p[2])));
    Ok(Output {
        text: text.join("\n"),
        json: json!({"contact": report.overall.to_string(), "support": support}),
    })
}

fn analyze(csvs: &[PathBuf], designs: &[PathBuf], format: FormatArg, theta_min_deg: f64) -> Result<Output, Failure> {
    if csvs.len() != designs.len() {
        return Err(invalid(format!("{} --csv files but {} --design files; pass them in pairs", csvs.len(), designs.len())));
    }
    let params = RotationParams { theta_min: theta_min_deg.to_radians(), ..Default::default() };
    let mut summaries = Vec::new();
    for (csv, design) in csvs.iter().zip(designs) {
        let trials = io::parse_trajectories(&io::read_file(csv)?).map_err(|e| invalid(format!("{}: {e}", csv.display())))?;
        let meta = io::parse_design(&io::read_file(design)?).map_err(|e| invalid(format!("{}: {e}", design.display())))?;
        let stats = analyze_trials(&trials, &params);
        summaries.push((summarize(&stats, &meta).map_err(invalid)?, stats));
    }
    let table_format = match format {
        FormatArg::Md => TableFormat::Markdown,
        FormatArg::Csv => TableFormat::Csv,
    };
    let only: Vec<_> = summaries.iter().map(|(s, _)| s.clone()).collect();
    let table = report_table(&only, table_format).map_err(invalid)?;
    let json = json!(summaries
        .iter()
        .map(|(s, stats)| json!({"summary": s, "trials": stats}))
        .collect::<Vec<_>>());
    Ok(Output { text: table.trim_end().to_string(), json })
}

fn export(structure: &Path, obj: &Path, scale: Option<f64>) -> Result<Output, Failure> {
    let s = read_structure(structure)?;
    let mesh = structure_mesh(&s.config).map_err(invalid)?;
    let scale = scale.or(s.scale_cm_per_unit).unwrap_or(1.0);
    let text = io::export_obj(&mesh, scale)?;
    io::write_file(obj, &text)?;
    Ok(Output {
        text: format!("wrote {}: {} vertices, {} faces", obj.display(), mesh.vertices.len(), mesh.faces.len()),
        json: json!({"path": obj.display().to_string(), "vertices": mesh.vertices.len(), "faces": mesh.faces.len()}),
    })
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("RHOMBIKIT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| invalid(format!("RHOMBIKIT_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(invalid)
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    configure_threads()?;
    match &cli.command {
        Command::Validate { structure } => validate(structure),
        Command::DockCheck { layout, enumerate, positions, symmetry, generalized } => {
            dock_check(layout.as_deref(), *enumerate, positions.as_deref(), *symmetry, *generalized)
        }
        Command::Plan { from, to, algorithm, max_states, plan_out, absolute, kind_sensitive, strict_stability } => plan_cmd(
            from,
            to,
            *algorithm,
            *max_states,
            plan_out.as_deref(),
            *absolute,
            *kind_sensitive,
            *strict_stability,
        ),
        Command::Replay { plan } => replay_cmd(plan),
        Command::Contact { structure, rot } => contact(structure, rot),
        Command::Analyze { csv, design, format, theta_min_deg } => analyze(csv, design, *format, *theta_min_deg),
        Command::Export { structure, obj, scale } => export(structure, obj, *scale),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(out) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&out.json).expect("JSON values serialize"));
            } else {
                println!("{}", out.text);
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            if cli.json {
                println!("{}", json!({"error": f.message(), "exit_code": f.code()}));
            } else {
                eprintln!("error: {}", f.message());
            }
            ExitCode::from(f.code())
        }
    }
}
