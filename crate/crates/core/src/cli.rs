//! Command-line front end: argument parsing, the four model-checking
//! routes, type and closure dumps, and the seeded instance generator.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::{json, Value};

use crate::decomp::{
    branch_dag, dag_from_order, dag_modelcheck_stats, kelly_from_order, kelly_modelcheck_stats, min_width_order,
    order_width, shortcut_kelly, validate_dag, validate_kelly, DagDecomposition, KellyDecomposition,
};
use crate::error::{Error, Result};
use crate::formula::{annotate, cl, cl_p, default_var_sequence, markers, parse_formula, Formula, VarSequence};
use crate::games::{build_mc_game, eval_naive, solve};
use crate::profiles::{mc_ptype, StartRule};
use crate::structures::Structure;
use crate::types::compute_types;

#[derive(Parser, Debug)]
#[command(name = "mudecomp", version, about = "Modal mu-calculus model checking over graph decompositions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide whether a formula holds at a node.
    Check(CheckArgs),
    /// Dump the types of every node under a marker colouring.
    Types(TypesArgs),
    /// Emit a seeded random instance bundle.
    Gen(GenArgs),
    /// Dump the closure and its marker-tracking variants.
    Closure(ClosureArgs),
    /// Dump ptypes of the anchored model-checking game.
    Ptype(PtypeArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Naive,
    Game,
    Kelly,
    Dag,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Text,
}

#[derive(Args, Debug)]
pub struct FormulaArgs {
    /// Formula text, e.g. "nu Y. <>Y".
    #[arg(long, conflicts_with = "formula_file")]
    pub formula: Option<String>,
    /// File holding the formula text.
    #[arg(long)]
    pub formula_file: Option<PathBuf>,
    /// Variable order, e.g. "X,Y"; defaults to first-binding order.
    #[arg(long)]
    pub vars: Option<String>,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[arg(long, value_enum, default_value = "naive")]
    pub mode: Mode,
    #[arg(long)]
    pub structure: PathBuf,
    #[command(flatten)]
    pub formula: FormulaArgs,
    /// Node at which to evaluate.
    #[arg(long)]
    pub node: String,
    /// Kelly or DAG decomposition file (required by those modes).
    #[arg(long)]
    pub decomposition: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct TypesArgs {
    #[arg(long)]
    pub structure: PathBuf,
    /// Formulas of L (repeatable).
    #[arg(long = "formula", required = true)]
    pub formulas: Vec<String>,
    /// Anchor nodes, comma separated, coloured by _P1, _P2, ...
    #[arg(long, default_value = "")]
    pub anchors: String,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long)]
    pub seed: u64,
    /// Largest structure size (at most 8, the exhaustive search limit).
    #[arg(long, default_value_t = 8)]
    pub max_nodes: usize,
    /// Largest decomposition width accepted.
    #[arg(long, default_value_t = 3)]
    pub max_width: usize,
}

#[derive(Args, Debug)]
pub struct ClosureArgs {
    #[command(flatten)]
    pub formula: FormulaArgs,
    /// Number of markers for the tracking variants.
    #[arg(long, default_value_t = 0)]
    pub markers: usize,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct PtypeArgs {
    #[arg(long)]
    pub structure: PathBuf,
    #[command(flatten)]
    pub formula: FormulaArgs,
    /// Anchor nodes, comma separated.
    #[arg(long, default_value = "")]
    pub anchors: String,
    /// Restrict the dump to one node.
    #[arg(long)]
    pub node: Option<String>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

/// Result of a command: exit code and document.
pub struct Outcome {
    pub code: i32,
    pub doc: Value,
    pub format: Format,
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

impl FormulaArgs {
    fn load(&self) -> Result<(Formula, VarSequence)> {
        let text = match (&self.formula, &self.formula_file) {
            (Some(t), _) => t.clone(),
            (None, Some(p)) => read(p)?,
            (None, None) => return Err(Error::Input("a formula is required (--formula or --formula-file)".into())),
        };
        let phi = parse_formula(text.trim())?;
        let zs = match &self.vars {
            Some(v) => {
                let names: Vec<&str> = v.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
                VarSequence::from_names(&phi, &names)?
            }
            None => default_var_sequence(&phi)?,
        };
        Ok((phi, zs))
    }
}

fn node_list(g: &Structure, s: &str) -> Result<Vec<usize>> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(|x| g.node(x)).collect()
}

/// Decomposition given to the decomposition-based routes.
pub enum Decomposition<'a> {
    None,
    Kelly(&'a KellyDecomposition),
    Dag(&'a DagDecomposition),
}

/// Runs one route; returns the verdict and route statistics.
pub fn decide(
    mode: Mode,
    g: &Structure,
    v: usize,
    phi: &Formula,
    zs: &VarSequence,
    d: Decomposition<'_>,
) -> Result<(bool, Value)> {
    if v >= g.len() {
        return Err(Error::UnknownNode(format!("#{v}")));
    }
    match (mode, d) {
        (Mode::Naive, _) => {
            phi.ensure_closed()?;
            Ok((eval_naive(g, v, phi), json!({})))
        }
        (Mode::Game, _) => {
            let ann = annotate(phi, zs)?;
            let game = build_mc_game(g, &ann);
            let sol = solve(game.game());
            Ok((
                sol.diamond_wins(game.id(v, 0)),
                json!({ "gameNodes": game.game().len(), "gameEdges": game.game().edge_count() }),
            ))
        }
        (Mode::Kelly, Decomposition::Kelly(d)) => {
            let (b, stored) = kelly_modelcheck_stats(g, v, phi, zs, d)?;
            Ok((b, json!({ "width": d.width(), "tableEntries": stored })))
        }
        (Mode::Dag, Decomposition::Dag(d)) => {
            let (b, stored) = dag_modelcheck_stats(g, v, phi, zs, d)?;
            Ok((b, json!({ "width": d.width(), "tableEntries": stored })))
        }
        (m, _) => Err(Error::Input(format!("mode {m:?} needs a matching decomposition"))),
    }
}

fn cmd_check(a: &CheckArgs) -> Result<Outcome> {
    let g = Structure::from_json(&read(&a.structure)?)?;
    let (phi, zs) = a.formula.load()?;
    let v = g.node(&a.node)?;
    let start = Instant::now();
    let text = match (a.mode, &a.decomposition) {
        (Mode::Kelly | Mode::Dag, None) => return Err(Error::Input("this mode requires --decomposition".into())),
        (_, Some(p)) if matches!(a.mode, Mode::Kelly | Mode::Dag) => Some(read(p)?),
        _ => None,
    };
    let (holds, mut stats) = match a.mode {
        Mode::Kelly => {
            let d = KellyDecomposition::from_json(&g, text.as_deref().unwrap_or_default())?;
            decide(a.mode, &g, v, &phi, &zs, Decomposition::Kelly(&d))?
        }
        Mode::Dag => {
            let d = DagDecomposition::from_json(&g, text.as_deref().unwrap_or_default())?;
            decide(a.mode, &g, v, &phi, &zs, Decomposition::Dag(&d))?
        }
        _ => decide(a.mode, &g, v, &phi, &zs, Decomposition::None)?,
    };
    stats["millis"] = json!(start.elapsed().as_secs_f64() * 1000.0);
    let mode = format!("{:?}", a.mode).to_lowercase();
    let doc = json!({ "mode": mode, "node": a.node, "formula": phi.to_string(), "holds": holds, "stats": stats });
    Ok(Outcome { code: if holds { 0 } else { 1 }, doc, format: a.format })
}

fn cmd_types(a: &TypesArgs) -> Result<Outcome> {
    let g = Structure::from_json(&read(&a.structure)?)?;
    let ls = a.formulas.iter().map(|f| parse_formula(f)).collect::<Result<Vec<_>>>()?;
    let xs = node_list(&g, &a.anchors)?;
    let ps = markers("P", xs.len());
    let table = compute_types(&g, &xs, &ls, &ps)?;
    Ok(Outcome { code: 0, doc: table.to_json(&g), format: a.format })
}

fn cmd_closure(a: &ClosureArgs) -> Result<Outcome> {
    let (phi, _) = a.formula.load()?;
    let plain: Vec<Value> = cl(&phi)
        .iter()
        .map(|f| json!({ "position": f.position.to_string(), "formula": f.formula.to_string() }))
        .collect();
    let ps = markers("P", a.markers);
    let tracked: Vec<String> = cl_p([&phi], &ps).iter().map(|f| f.to_string()).collect();
    Ok(Outcome {
        code: 0,
        doc: json!({ "formula": phi.to_string(), "cl": plain, "markers": ps, "clP": tracked }),
        format: a.format,
    })
}

fn cmd_ptype(a: &PtypeArgs) -> Result<Outcome> {
    let g = Structure::from_json(&read(&a.structure)?)?;
    let (phi, zs) = a.formula.load()?;
    let ann = annotate(&phi, &zs)?;
    let xs = node_list(&g, &a.anchors)?;
    let nodes: Vec<usize> = match &a.node {
        Some(n) => vec![g.node(n)?],
        None => (0..g.len()).collect(),
    };
    let positions = cl(&phi);
    let mut rows = Vec::new();
    for &v in &nodes {
        for (id, f) in positions.iter().enumerate() {
            let t = mc_ptype(&g, &ann, &xs, v, id, StartRule::Visit)?;
            rows.push(json!({ "node": g.id(v), "position": f.position.to_string(), "ptype": t.to_string() }));
        }
    }
    let anchors: Vec<&str> = xs.iter().map(|&x| g.id(x)).collect();
    Ok(Outcome {
        code: 0,
        doc: json!({ "formula": phi.to_string(), "anchors": anchors, "ptypes": rows }),
        format: a.format,
    })
}

/// A seeded instance: structure, formula, node and both decompositions.
#[derive(Clone, Debug)]
pub struct Bundle {
    pub seed: u64,
    pub structure: Structure,
    pub formula: Formula,
    pub vars: VarSequence,
    pub node: usize,
    pub kelly: KellyDecomposition,
    pub dag: DagDecomposition,
}

impl Bundle {
    pub fn to_json(&self) -> Value {
        let vars: Vec<&str> = self.vars.vars.iter().map(|(x, _)| x.as_str()).collect();
        json!({
            "seed": self.seed,
            "structure": self.structure.to_json(),
            "formula": self.formula.to_string(),
            "vars": vars.join(","),
            "node": self.structure.id(self.node),
            "kelly": self.kelly.to_json(&self.structure),
            "dag": self.dag.to_json(&self.structure),
        })
    }
}

/// Builds the bundle for `seed`: structures are redrawn until the
/// exhaustive search finds a decomposition of width at most `max_width`.
pub fn random_bundle(seed: u64, max_nodes: usize, max_width: usize) -> Result<Bundle> {
    if max_nodes == 0 || max_nodes > crate::decomp::SEARCH_LIMIT {
        return Err(Error::Input(format!("max nodes must be within 1..={}", crate::decomp::SEARCH_LIMIT)));
    }
    let mut rng = crate::gen::rng(seed);
    for _ in 0..64 {
        let n = rng.gen_range(1..=max_nodes);
        let density = rng.gen_range(0.15..0.4);
        let g = crate::gen::random_structure(&mut rng, n, density);
        let order = min_width_order(&g)?;
        if order_width(&g, &order) > max_width {
            continue;
        }
        let formula = crate::gen::random_formula(&mut rng, crate::gen::FormulaShape::default());
        let vars = default_var_sequence(&formula)?;
        let shortcuts: Vec<(usize, usize)> = (0..2).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect();
        let kelly = shortcut_kelly(&g, &kelly_from_order(&g, &order)?, &shortcuts);
        let mut dag = dag_from_order(&g, &order)?;
        if n > 2 {
            dag = branch_dag(&g, &dag, rng.gen_range(0..n - 2));
        }
        validate_kelly(&g, &kelly).map_err(|vs| crate::decomp::violations_error(&vs))?;
        validate_dag(&g, &dag).map_err(|vs| crate::decomp::violations_error(&vs))?;
        let node = *(0..n).collect::<Vec<_>>().choose(&mut rng).expect("non-empty");
        return Ok(Bundle { seed, structure: g, formula, vars, node, kelly, dag });
    }
    Err(Error::SizeGuard(format!("no structure of width at most {max_width} found for seed {seed}")))
}

fn cmd_gen(a: &GenArgs) -> Result<Outcome> {
    let b = random_bundle(a.seed, a.max_nodes, a.max_width)?;
    Ok(Outcome { code: 0, doc: b.to_json(), format: Format::Json })
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Outcome {
    let (result, format) = match &cli.command {
        Command::Check(a) => (cmd_check(a), a.format),
        Command::Types(a) => (cmd_types(a), a.format),
        Command::Gen(a) => (cmd_gen(a), Format::Json),
        Command::Closure(a) => (cmd_closure(a), a.format),
        Command::Ptype(a) => (cmd_ptype(a), a.format),
    };
    result.unwrap_or_else(|e| Outcome { code: 2, doc: json!({ "error": e.kind(), "message": e.to_string() }), format })
}

/// Renders a document as pretty JSON or as aligned `key: value` lines.
pub fn render(doc: &Value, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(doc).expect("serializable"),
        Format::Text => {
            let mut out = String::new();
            text_lines(doc, "", &mut out);
            out
        }
    }
}

fn text_lines(v: &Value, prefix: &str, out: &mut String) {
    match v {
        Value::Object(m) => {
            let width = m.keys().map(|k| k.len()).max().unwrap_or(0);
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                if x.is_object() || (x.is_array() && x.as_array().is_some_and(|a| a.iter().any(|e| e.is_object()))) {
                    text_lines(x, &key, out);
                } else {
                    out.push_str(&format!(
                        "{key:<width$}  {}\n",
                        scalar(x),
                        width = width + prefix.len() + usize::from(!prefix.is_empty())
                    ));
                }
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                text_lines(x, &format!("{prefix}[{i}]"), out);
            }
        }
        _ => out.push_str(&format!("{prefix}  {}\n", scalar(v))),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(a) => a.iter().map(scalar).collect::<Vec<_>>().join(", "),
        other => other.to_string(),
    }
}
