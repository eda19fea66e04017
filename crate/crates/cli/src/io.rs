//! File formats: game, equilibrium and model JSON, and the CSV artifacts.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use asymdynkin_core::dynamics::{DiffusionModel, Expr, GridSize, PdeGrid, PdeSurfaces, StoppingPayoffs};
use asymdynkin_core::game::{FiltrationTree, GeneratingProcess, NodeSpec, PayoffTriple, TimeGrid};
use asymdynkin_core::oracle::ScenarioSolution;
use asymdynkin_core::scenario::{ScenarioGame, StrategyProfile};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Provenance stored with every artifact.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paths: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

impl Meta {
    pub fn new(command: &str) -> Self {
        Self { command: command.to_string(), ..Default::default() }
    }

    /// `# key=value ...` line heading the CSV artifacts.
    pub fn comment(&self) -> String {
        let mut s = format!("# command={}", self.command);
        if let Some(v) = self.seed {
            s += &format!(" seed={v}");
        }
        if let Some(v) = self.dt {
            s += &format!(" dt={v:?}");
        }
        if let Some(v) = &self.grid {
            s += &format!(" grid={v}");
        }
        if let Some(v) = self.paths {
            s += &format!(" paths={v}");
        }
        if let Some(v) = self.tol {
            s += &format!(" tol={v:?}");
        }
        s
    }

    /// Inverse of [`Meta::comment`].
    pub fn parse_comment(line: &str) -> Option<Self> {
        let mut meta = Meta::default();
        for item in line.strip_prefix('#')?.split_whitespace() {
            let (k, v) = item.split_once('=')?;
            match k {
                "command" => meta.command = v.to_string(),
                "seed" => meta.seed = Some(v.parse().ok()?),
                "dt" => meta.dt = Some(v.parse().ok()?),
                "grid" => meta.grid = Some(v.to_string()),
                "paths" => meta.paths = Some(v.parse().ok()?),
                "tol" => meta.tol = Some(v.parse().ok()?),
                _ => return None,
            }
        }
        Some(meta)
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> CliError + '_ {
    move |e| CliError::Csv { path: path.to_path_buf(), message: e.to_string() }
}

/// Reads a JSON file, naming the offending field on failure.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        CliError::Json { path: path.to_path_buf(), field, message: e.into_inner().to_string() }
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("artifacts serialize");
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

/// CSV writer whose first line is the metadata comment.
pub fn csv_writer(path: &Path, meta: &Meta) -> Result<csv::Writer<fs::File>, CliError> {
    let mut file = fs::File::create(path).map_err(io_err(path))?;
    writeln!(file, "{}", meta.comment()).map_err(io_err(path))?;
    Ok(csv::Writer::from_writer(file))
}

pub fn finish_csv(mut w: csv::Writer<fs::File>, path: &Path) -> Result<(), CliError> {
    w.flush().map_err(io_err(path))
}

/// Reads the metadata comment and the records of a CSV artifact.
pub fn read_csv(path: &Path) -> Result<(Meta, csv::Reader<BufReader<fs::File>>), CliError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut reader = BufReader::new(file);
    let mut first = String::new();
    reader.read_line(&mut first).map_err(io_err(path))?;
    let meta = Meta::parse_comment(first.trim_end())
        .ok_or_else(|| CliError::Csv { path: path.to_path_buf(), message: "missing metadata line".into() })?;
    Ok((meta, csv::Reader::from_reader(reader)))
}

/// Full-precision text for CSV cells.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

// ---------------------------------------------------------------------------
// scenario games

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeEntry {
    pub id: usize,
    pub parent: Option<usize>,
    #[serde(default)]
    pub p: f64,
}

/// Payoff values per node, either shared by both regimes or one array per
/// regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PayoffTable {
    PerRegime([Vec<f64>; 2]),
    Shared(Vec<f64>),
}

impl PayoffTable {
    fn regime(&self, i: usize) -> &[f64] {
        match self {
            PayoffTable::PerRegime(a) => &a[i],
            PayoffTable::Shared(a) => a,
        }
    }

    fn from_regimes(a: &[f64], b: &[f64]) -> Self {
        if a == b {
            PayoffTable::Shared(a.to_vec())
        } else {
            PayoffTable::PerRegime([a.to_vec(), b.to_vec()])
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffEntry {
    pub f: PayoffTable,
    pub g: PayoffTable,
    pub h: PayoffTable,
}

/// Game file: `{grid, tree, payoffs, prior}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameFile {
    pub grid: Vec<f64>,
    pub tree: Vec<NodeEntry>,
    pub payoffs: PayoffEntry,
    pub prior: f64,
}

impl GameFile {
    pub fn to_game(&self) -> Result<ScenarioGame<f64>, CliError> {
        let grid = TimeGrid::new(self.grid.clone()).map_err(|e| CliError::field("grid", e))?;
        let specs: Vec<NodeSpec<f64>> =
            self.tree.iter().map(|n| NodeSpec { id: n.id, parent: n.parent, p: n.p }).collect();
        let tree = FiltrationTree::new(&specs, grid.steps()).map_err(|e| CliError::field("tree", e))?;
        let triple = |i: usize| {
            PayoffTriple::new(
                self.payoffs.f.regime(i).to_vec(),
                self.payoffs.g.regime(i).to_vec(),
                self.payoffs.h.regime(i).to_vec(),
            )
        };
        let payoffs = [triple(0).map_err(|e| CliError::field("payoffs", e))?, triple(1).map_err(|e| CliError::field("payoffs", e))?];
        ScenarioGame::new(grid, tree, payoffs, self.prior).map_err(|e| CliError::field("payoffs", e))
    }

    pub fn from_game(game: &ScenarioGame<f64>) -> Self {
        let [a, b] = &game.payoffs;
        Self {
            grid: game.grid.points().to_vec(),
            tree: game.tree.specs().into_iter().map(|s| NodeEntry { id: s.id, parent: s.parent, p: s.p }).collect(),
            payoffs: PayoffEntry {
                f: PayoffTable::from_regimes(&a.f, &b.f),
                g: PayoffTable::from_regimes(&a.g, &b.g),
                h: PayoffTable::from_regimes(&a.h, &b.h),
            },
            prior: game.prior,
        }
    }
}

pub fn read_game(path: &Path) -> Result<ScenarioGame<f64>, CliError> {
    read_json::<GameFile>(path)?.to_game().map_err(|e| e.in_file(path))
}

// ---------------------------------------------------------------------------
// equilibria

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeValues {
    pub u0: Vec<f64>,
    pub u1: Vec<f64>,
    pub v: Vec<f64>,
}

/// One pure rule in the support of an equilibrium mix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixEntry {
    /// Nodes where the rule stops.
    pub stop_nodes: Vec<usize>,
    pub informed0: f64,
    pub informed1: f64,
    pub uninformed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mixes {
    pub lower: f64,
    pub upper: f64,
    pub gap: f64,
    pub support: Vec<MixEntry>,
}

/// Equilibrium file: generating processes as `[node] -> level` arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumFile {
    pub xi0: Vec<f64>,
    pub xi1: Vec<f64>,
    pub zeta: Vec<f64>,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surfaces: Option<NodeValues>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixes: Option<Mixes>,
    #[serde(default)]
    pub meta: Meta,
}

impl EquilibriumFile {
    pub fn from_profile(profile: &StrategyProfile<f64>, value: f64, meta: Meta) -> Self {
        Self {
            xi0: profile.xi[0].levels().to_vec(),
            xi1: profile.xi[1].levels().to_vec(),
            zeta: profile.zeta.levels().to_vec(),
            value,
            surfaces: None,
            mixes: None,
            meta,
        }
    }

    pub fn from_solution(sol: &ScenarioSolution<f64>, meta: Meta) -> Self {
        let support = sol
            .rules
            .iter()
            .enumerate()
            .filter(|&(k, _)| sol.informed_mix[0][k] > 0.0 || sol.informed_mix[1][k] > 0.0 || sol.uninformed_mix[k] > 0.0)
            .map(|(k, r)| MixEntry {
                stop_nodes: (0..r.stop.len()).filter(|&n| r.stop[n]).collect(),
                informed0: sol.informed_mix[0][k],
                informed1: sol.informed_mix[1][k],
                uninformed: sol.uninformed_mix[k],
            })
            .collect();
        let mut out = Self::from_profile(&sol.profile, sol.value, meta);
        out.mixes = Some(Mixes { lower: sol.lower, upper: sol.upper, gap: sol.gap, support });
        out
    }

    pub fn to_profile(&self, game: &ScenarioGame<f64>) -> Result<StrategyProfile<f64>, CliError> {
        let process = |name: &str, levels: &[f64]| {
            if levels.len() != game.tree.len() {
                return Err(CliError::Input(format!(
                    "field `{name}`: {} levels for a tree of {} nodes",
                    levels.len(),
                    game.tree.len()
                )));
            }
            GeneratingProcess::new(&game.tree, levels.to_vec()).map_err(|e| CliError::field(name, e))
        };
        Ok(StrategyProfile {
            xi: [process("xi0", &self.xi0)?, process("xi1", &self.xi1)?],
            zeta: process("zeta", &self.zeta)?,
        })
    }
}

// ---------------------------------------------------------------------------
// diffusion models

/// Model file: the diffusion fields plus the stopping payoffs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub mu0: Expr,
    pub mu1: Expr,
    pub sigma: Expr,
    pub x0: f64,
    pub pi: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub domain: [f64; 2],
    pub payoffs: StoppingPayoffs,
}

impl ModelFile {
    pub fn new(model: &DiffusionModel, payoffs: &StoppingPayoffs) -> Self {
        Self {
            mu0: model.mu0.clone(),
            mu1: model.mu1.clone(),
            sigma: model.sigma.clone(),
            x0: model.x0,
            pi: model.pi,
            horizon: model.horizon,
            domain: model.domain,
            payoffs: payoffs.clone(),
        }
    }

    pub fn to_model(&self) -> Result<(DiffusionModel, StoppingPayoffs), CliError> {
        let model = DiffusionModel::new(
            self.mu0.clone(),
            self.mu1.clone(),
            self.sigma.clone(),
            self.x0,
            self.pi,
            self.horizon,
            self.domain,
        )
        .map_err(|e| CliError::field("model", e))?;
        self.payoffs.validate(&model).map_err(|e| CliError::field("payoffs", e))?;
        Ok((model, self.payoffs.clone()))
    }
}

pub fn read_model(path: &Path) -> Result<(DiffusionModel, StoppingPayoffs), CliError> {
    read_json::<ModelFile>(path)?.to_model().map_err(|e| e.in_file(path))
}

/// Surfaces CSV: one row per grid node, `t` slowest and `pi` fastest.
pub fn write_surfaces(path: &Path, s: &PdeSurfaces, meta: &Meta) -> Result<(), CliError> {
    let mut w = csv_writer(path, meta)?;
    let g = s.grid;
    w.write_record(["t", "pi", "x", "u0", "u1", "v", "in_S0", "in_S1", "in_S"]).map_err(csv_err(path))?;
    for k in 0..g.size.nt {
        for m in 0..g.size.nx {
            for j in 0..g.size.npi {
                let i = g.index(k, j, m);
                let flag = |b: bool| if b { "1" } else { "0" }.to_string();
                w.write_record([
                    num(g.t(k)),
                    num(g.pi(j)),
                    num(g.x(m)),
                    num(s.u[0][i]),
                    num(s.u[1][i]),
                    num(s.v[i]),
                    flag(s.informed_stop[0][i]),
                    flag(s.informed_stop[1][i]),
                    flag(s.uninformed_stop[i]),
                ])
                .map_err(csv_err(path))?;
            }
        }
    }
    finish_csv(w, path)
}

/// Reads surfaces written by [`write_surfaces`]. The grid comes from the
/// metadata, the obstacles from `payoffs`; stopping sets are reclassified
/// with `set_tol`.
pub fn read_surfaces(
    path: &Path,
    model: &DiffusionModel,
    payoffs: &StoppingPayoffs,
    set_tol: f64,
) -> Result<(Meta, PdeSurfaces), CliError> {
    let (meta, mut reader) = read_csv(path)?;
    let size: GridSize = meta
        .grid
        .as_deref()
        .ok_or_else(|| CliError::Csv { path: path.to_path_buf(), message: "metadata has no grid".into() })?
        .parse()
        .map_err(|e| CliError::field("grid", e).in_file(path))?;
    let grid = PdeGrid::for_model(size, model).map_err(|e| CliError::field("grid", e).in_file(path))?;
    let len = size.nt * size.npi * size.nx;
    let (mut u0, mut u1, mut v) = (Vec::with_capacity(len), Vec::with_capacity(len), Vec::with_capacity(len));
    for rec in reader.records() {
        let rec = rec.map_err(csv_err(path))?;
        let cell = |c: usize| -> Result<f64, CliError> {
            rec.get(c)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| CliError::Csv { path: path.to_path_buf(), message: format!("bad cell {c} in row {:?}", rec.position().map(|p| p.line())) })
        };
        u0.push(cell(3)?);
        u1.push(cell(4)?);
        v.push(cell(5)?);
    }
    if v.len() != len {
        return Err(CliError::Csv { path: path.to_path_buf(), message: format!("{} rows for a {size} grid", v.len()) });
    }
    let (mut f, mut g) = (Vec::with_capacity(size.nt * size.nx), Vec::with_capacity(size.nt * size.nx));
    for k in 0..size.nt {
        for m in 0..size.nx {
            let (fv, gv, _) = payoffs.eval(grid.t(k), grid.x(m));
            f.push(fv);
            g.push(gv);
        }
    }
    let mut s = PdeSurfaces {
        grid,
        u: [u0, u1],
        v,
        f,
        g,
        informed_stop: [Vec::new(), Vec::new()],
        uninformed_stop: Vec::new(),
        set_tol,
        iterations: vec![0; size.nt],
        link_residual: 0.0,
    };
    s.classify();
    Ok((meta, s))
}

pub fn out_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}
