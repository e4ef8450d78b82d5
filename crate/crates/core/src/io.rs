//! File formats: JSON structures, plans, magnet layouts and design
//! metadata; CSV trajectories; Wavefront OBJ export.
//!
//! Every JSON document carries a `format_version` (currently 1; a missing
//! field is read as 1). Face directions are stored by index.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytics::{AnalyticsError, DesignMeta, Sample, Trajectory};
use crate::docking::{CellLayout, DockingError, FaceLayout, MagnetSpec};
use crate::geometry::Mesh;
use crate::kinematics::{KinematicsError, MoveRules, PivotMove};
use crate::lattice::{Cell, CellKind, Configuration, FaceDir, LatticeError, LatticePos, Rotation24};
use crate::planner::{replay, replay_moves, GoalCriterion, Plan, ReplayError};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid {document} JSON at line {line}, column {column}: {message}")]
    Json { document: &'static str, line: usize, column: usize, message: String },
    #[error("unsupported format_version {0} (expected {FORMAT_VERSION})")]
    FormatVersion(u32),
    #[error("{field}: {source}")]
    Lattice { field: String, source: LatticeError },
    #[error("{field}: {source}")]
    Move { field: String, source: KinematicsError },
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
    #[error("{0}")]
    Docking(#[from] DockingError),
    #[error("CSV line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error("{0}")]
    Trajectory(#[from] AnalyticsError),
    #[error("mesh has no faces")]
    EmptyMesh,
}

pub fn read_file(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::Io { path: path.to_path_buf(), source })
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), IoError> {
    std::fs::write(path, contents).map_err(|source| IoError::Io { path: path.to_path_buf(), source })
}

fn parse_json<'a, T: Deserialize<'a>>(document: &'static str, text: &'a str) -> Result<T, IoError> {
    serde_json::from_str(text).map_err(|e| IoError::Json {
        document,
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn to_json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents serialize");
    s.push('\n');
    s
}

fn default_version() -> u32 {
    FORMAT_VERSION
}

fn check_version(v: u32) -> Result<(), IoError> {
    if v == FORMAT_VERSION {
        Ok(())
    } else {
        Err(IoError::FormatVersion(v))
    }
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> IoError {
    IoError::Invalid { field: field.into(), message: message.into() }
}

// ---------------------------------------------------------------- structures

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CellDoc {
    pos: [i64; 3],
    #[serde(default)]
    kind: CellKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    orient: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StructureBody {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scale_cm_per_unit: Option<f64>,
    cells: Vec<CellDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StructureDoc {
    #[serde(default = "default_version")]
    format_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scale_cm_per_unit: Option<f64>,
    cells: Vec<CellDoc>,
}

/// A configuration with its optional physical scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Structure {
    pub config: Configuration,
    pub scale_cm_per_unit: Option<f64>,
}

impl StructureBody {
    fn from_structure(s: &Structure) -> StructureBody {
        StructureBody {
            scale_cm_per_unit: s.scale_cm_per_unit,
            cells: s
                .config
                .cells()
                .map(|c| CellDoc {
                    pos: c.pos.to_array().map(i64::from),
                    kind: c.kind,
                    orient: (c.orient != Rotation24::IDENTITY).then(|| c.orient.index()),
                })
                .collect(),
        }
    }

    fn into_structure(self, prefix: &str) -> Result<Structure, IoError> {
        if let Some(s) = self.scale_cm_per_unit {
            if !(s.is_finite() && s > 0.0) {
                return Err(invalid(format!("{prefix}scale_cm_per_unit"), format!("must be a positive number, got {s}")));
            }
        }
        let mut config = Configuration::default();
        for (i, c) in self.cells.into_iter().enumerate() {
            let field = || format!("{prefix}cells[{i}]");
            let pos = parse_pos(c.pos).map_err(|source| IoError::Lattice { field: format!("{}.pos", field()), source })?;
            let orient = match c.orient {
                None => Rotation24::IDENTITY,
                Some(o) => Rotation24::from_index(o)
                    .map_err(|source| IoError::Lattice { field: format!("{}.orient", field()), source })?,
            };
            config
                .insert(Cell { pos, kind: c.kind, orient })
                .map_err(|source| IoError::Lattice { field: field(), source })?;
        }
        Ok(Structure { config, scale_cm_per_unit: self.scale_cm_per_unit })
    }
}

fn parse_pos(p: [i64; 3]) -> Result<LatticePos, LatticeError> {
    let small = |v: i64| i32::try_from(v).map_err(|_| LatticeError::OddParity(p[0], p[1], p[2]));
    if p.iter().sum::<i64>().rem_euclid(2) != 0 {
        return Err(LatticeError::OddParity(p[0], p[1], p[2]));
    }
    LatticePos::new(small(p[0])?, small(p[1])?, small(p[2])?)
}

/// Parses a structure document. Duplicate and odd-parity positions are
/// reported with the offending cell index.
pub fn parse_structure(text: &str) -> Result<Structure, IoError> {
    let doc: StructureDoc = parse_json("structure", text)?;
    check_version(doc.format_version)?;
    StructureBody { scale_cm_per_unit: doc.scale_cm_per_unit, cells: doc.cells }.into_structure("")
}

pub fn structure_to_json(s: &Structure) -> String {
    let body = StructureBody::from_structure(s);
    to_json(&StructureDoc { format_version: FORMAT_VERSION, scale_cm_per_unit: body.scale_cm_per_unit, cells: body.cells })
}

pub fn read_structure(path: &Path) -> Result<Structure, IoError> {
    parse_structure(&read_file(path)?)
}

// --------------------------------------------------------------------- plans

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MoveDoc {
    mover: [i64; 3],
    substrate: [i64; 3],
    from: usize,
    to: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanDoc {
    #[serde(default = "default_version")]
    format_version: u32,
    start: StructureBody,
    moves: Vec<MoveDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    goal: Option<StructureBody>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    criterion: Option<GoalCriterion>,
    #[serde(default)]
    strict_stability: bool,
}

/// A stored plan: start configuration, moves, and optionally the goal it was
/// planned for together with the matching criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanFile {
    pub start: Configuration,
    pub moves: Vec<PivotMove>,
    pub goal: Option<(Configuration, GoalCriterion)>,
    pub rules: MoveRules,
}

impl PlanFile {
    pub fn from_plan(start: &Configuration, plan: &Plan) -> PlanFile {
        PlanFile {
            start: start.clone(),
            moves: plan.moves.clone(),
            goal: Some((plan.goal.clone(), plan.criterion)),
            rules: plan.rules,
        }
    }

    /// Replays the moves; when a goal is recorded the result must match it.
    pub fn replay(&self) -> Result<Configuration, ReplayError> {
        match &self.goal {
            Some((goal, criterion)) => replay(
                &self.start,
                &Plan {
                    moves: self.moves.clone(),
                    goal: goal.clone(),
                    criterion: *criterion,
                    rules: self.rules,
                    stats: Default::default(),
                },
            ),
            None => replay_moves(&self.start, &self.moves, self.rules),
        }
    }
}

fn structure_body(c: &Configuration) -> StructureBody {
    StructureBody::from_structure(&Structure { config: c.clone(), scale_cm_per_unit: None })
}

/// Serializes a plan. Timing statistics are omitted so output is
/// deterministic.
pub fn plan_to_json(p: &PlanFile) -> String {
    let doc = PlanDoc {
        format_version: FORMAT_VERSION,
        start: structure_body(&p.start),
        moves: p
            .moves
            .iter()
            .map(|m| MoveDoc {
                mover: m.mover().to_array().map(i64::from),
                substrate: m.substrate().to_array().map(i64::from),
                from: m.from_dir().index(),
                to: m.to_dir().index(),
            })
            .collect(),
        goal: p.goal.as_ref().map(|(g, _)| structure_body(g)),
        criterion: p.goal.as_ref().map(|(_, c)| *c),
        strict_stability: p.rules.strict_stability,
    };
    to_json(&doc)
}

pub fn parse_plan(text: &str) -> Result<PlanFile, IoError> {
    let doc: PlanDoc = parse_json("plan", text)?;
    check_version(doc.format_version)?;
    let start = doc.start.into_structure("start.")?.config;
    let mut moves = Vec::with_capacity(doc.moves.len());
    for (i, m) in doc.moves.into_iter().enumerate() {
        let lattice = |field: &str, source| IoError::Lattice { field: format!("moves[{i}].{field}"), source };
        let mover = parse_pos(m.mover).map_err(|e| lattice("mover", e))?;
        let substrate = parse_pos(m.substrate).map_err(|e| lattice("substrate", e))?;
        let from = FaceDir::from_index(m.from).map_err(|e| lattice("from", e))?;
        let to = FaceDir::from_index(m.to).map_err(|e| lattice("to", e))?;
        let mv = PivotMove::with_mover(mover, substrate, from, to)
            .map_err(|source| IoError::Move { field: format!("moves[{i}]"), source })?;
        moves.push(mv);
    }
    let goal = match doc.goal {
        Some(g) => Some((g.into_structure("goal.")?.config, doc.criterion.unwrap_or_default())),
        None => None,
    };
    Ok(PlanFile { start, moves, goal, rules: MoveRules { strict_stability: doc.strict_stability } })
}

// ------------------------------------------------------------------- layouts

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FaceDoc {
    face: usize,
    magnets: Vec<MagnetSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayoutDoc {
    #[serde(default = "default_version")]
    format_version: u32,
    faces: Vec<FaceDoc>,
}

/// Parses a per-face magnet layout; all twelve faces must be listed once.
pub fn parse_layout(text: &str) -> Result<CellLayout, IoError> {
    let doc: LayoutDoc = parse_json("layout", text)?;
    check_version(doc.format_version)?;
    let mut faces: Vec<Option<FaceLayout>> = vec![None; 12];
    for (i, f) in doc.faces.into_iter().enumerate() {
        let field = format!("faces[{i}]");
        let d = FaceDir::from_index(f.face)
            .map_err(|source| IoError::Lattice { field: format!("{field}.face"), source })?;
        if faces[d.index()].is_some() {
            return Err(invalid(field, format!("face {} listed twice", d.index())));
        }
        let layout = FaceLayout::new(f.magnets).map_err(|e| invalid(field.clone(), e.to_string()))?;
        faces[d.index()] = Some(layout);
    }
    let faces: Option<Vec<FaceLayout>> = faces.into_iter().collect();
    let faces = faces.ok_or_else(|| invalid("faces", "all 12 faces must be given"))?;
    Ok(CellLayout::new(faces)?)
}

pub fn layout_to_json(layout: &CellLayout) -> String {
    let faces = layout
        .faces()
        .iter()
        .enumerate()
        .map(|(face, f)| FaceDoc { face, magnets: f.magnets().to_vec() })
        .collect();
    to_json(&LayoutDoc { format_version: FORMAT_VERSION, faces })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PositionsDoc {
    #[serde(default = "default_version")]
    format_version: u32,
    positions: Vec<[f64; 2]>,
}

/// In-plane magnet positions `{"positions": [[u, v], ...]}` in face-frame
/// coordinates.
pub fn parse_positions(text: &str) -> Result<Vec<[f64; 2]>, IoError> {
    let doc: PositionsDoc = parse_json("positions", text)?;
    check_version(doc.format_version)?;
    for (i, p) in doc.positions.iter().enumerate() {
        if !p.iter().all(|v| v.is_finite()) {
            return Err(invalid(format!("positions[{i}]"), "coordinates must be finite"));
        }
    }
    Ok(doc.positions)
}

pub fn positions_to_json(positions: &[[f64; 2]]) -> String {
    to_json(&PositionsDoc { format_version: FORMAT_VERSION, positions: positions.to_vec() })
}

// ------------------------------------------------------------ design metadata

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DesignDoc {
    #[serde(default = "default_version")]
    format_version: u32,
    #[serde(flatten)]
    meta: DesignMeta,
}

pub fn parse_design(text: &str) -> Result<DesignMeta, IoError> {
    let doc: DesignDoc = parse_json("design", text)?;
    check_version(doc.format_version)?;
    let m = doc.meta;
    if m.active == 0 {
        return Err(invalid("active", "at least one active cell is required"));
    }
    for (field, v) in [("body_length_cm", m.body_length_cm), ("body_weight_g", m.body_weight_g)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(invalid(field, format!("must be a non-negative number, got {v}")));
        }
    }
    Ok(m)
}

pub fn design_to_json(meta: &DesignMeta) -> String {
    to_json(&DesignDoc { format_version: FORMAT_VERSION, meta: meta.clone() })
}

// ---------------------------------------------------------------- trajectories

struct Rows {
    samples: Vec<Sample>,
    heading: Vec<f64>,
    first_line: u64,
}

/// Parses `trial_id,t,x,y[,heading]` CSV (seconds, cm, radians) into one
/// trajectory per trial id, in order of first appearance.
pub fn parse_trajectories(text: &str) -> Result<Vec<Trajectory>, IoError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| IoError::Csv { line: 1, message: e.to_string() })?.clone();
    let names: Vec<&str> = header.iter().collect();
    let has_heading = match names.as_slice() {
        ["trial_id", "t", "x", "y"] => false,
        ["trial_id", "t", "x", "y", "heading"] => true,
        _ => {
            return Err(IoError::Csv {
                line: 1,
                message: format!("header must be trial_id,t,x,y[,heading]; got {}", names.join(",")),
            })
        }
    };
    let mut order: Vec<String> = Vec::new();
    let mut trials: HashMap<String, Rows> = HashMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| IoError::Csv {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let number = |i: usize| -> Result<f64, IoError> {
            let raw = &record[i];
            raw.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| IoError::Csv {
                line,
                message: format!("field {}: expected a finite number, got {raw:?}", names[i]),
            })
        };
        let id = record[0].to_string();
        if id.is_empty() {
            return Err(IoError::Csv { line, message: "field trial_id: empty".into() });
        }
        let sample = Sample { t: number(1)?, x: number(2)?, y: number(3)? };
        let rows = trials.entry(id.clone()).or_insert_with(|| {
            order.push(id.clone());
            Rows { samples: Vec::new(), heading: Vec::new(), first_line: line }
        });
        if let Some(prev) = rows.samples.last() {
            if sample.t <= prev.t {
                return Err(IoError::Csv {
                    line,
                    message: format!("field t: trial {id:?} timestamps must strictly increase"),
                });
            }
        }
        rows.samples.push(sample);
        if has_heading {
            rows.heading.push(number(4)?);
        }
    }
    if order.is_empty() {
        return Err(IoError::Csv { line: 2, message: "no samples".into() });
    }
    order
        .into_iter()
        .map(|id| {
            let rows = trials.remove(&id).expect("every id has rows");
            let heading = has_heading.then_some(rows.heading);
            Trajectory::new(id, rows.samples, heading).map_err(|e| IoError::Csv { line: rows.first_line, message: e.to_string() })
        })
        .collect()
}

pub fn trajectories_to_csv(trials: &[Trajectory]) -> String {
    let has_heading = trials.iter().any(|t| t.heading().is_some());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["trial_id", "t", "x", "y"];
    if has_heading {
        header.push("heading");
    }
    w.write_record(&header).expect("in-memory write");
    for tr in trials {
        for (i, s) in tr.samples().iter().enumerate() {
            let mut row = vec![tr.trial_id().to_string(), s.t.to_string(), s.x.to_string(), s.y.to_string()];
            if has_heading {
                row.push(tr.heading().map_or(0.0, |h| h[i]).to_string());
            }
            w.write_record(&row).expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
}

// ----------------------------------------------------------------------- OBJ

/// Wavefront OBJ text: `v` lines with six decimals, then 1-based `f` lines
/// in the mesh's outward counter-clockwise winding.
pub fn export_obj(m: &Mesh, scale: f64) -> Result<String, IoError> {
    if m.faces.is_empty() {
        return Err(IoError::EmptyMesh);
    }
    if !(scale.is_finite() && scale > 0.0) {
        return Err(invalid("scale", format!("must be a positive number, got {scale}")));
    }
    let mut out = String::new();
    for v in &m.vertices {
        // Adding 0.0 turns -0.0 into 0.0.
        let [x, y, z] = v.map(|c| c * scale + 0.0);
        writeln!(out, "v {x:.6} {y:.6} {z:.6}").expect("writing to a String");
    }
    for f in &m.faces {
        let idx: Vec<String> = f.iter().map(|i| (i + 1).to_string()).collect();
        writeln!(out, "f {}", idx.join(" ")).expect("writing to a String");
    }
    Ok(out)
}
