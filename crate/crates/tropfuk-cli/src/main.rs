mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use tropfuk::exec::{self, Mode};
use tropfuk::fukaya_products::{
    assemble_mu, chain_map_check, slot_basis, triangle_oracle, verify_a_infinity, verify_quantum, MuTensor, RelationReport, Settings,
    SignConvention,
};
use tropfuk::rat;
use tropfuk::stable_graph::{enumerate_iso_classes, MAX_FLAGS};

use config::RunConfig;

#[derive(Parser)]
#[command(name = "tropfuk", version, about = "Tropical counts of polygons and annuli on the elliptic curve")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    b: Option<u32>,
    /// Circumference of the base circle.
    #[arg(long, global = true)]
    d: Option<i64>,
    /// Area cutoff Q (integer or p/q).
    #[arg(long = "q-order", global = true)]
    q_order: Option<String>,
    /// Boundary partition, e.g. "(1 2)(3)".
    #[arg(long, global = true)]
    sigma: Option<String>,
    /// Seed for "random" offsets.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long = "json-out", global = true)]
    json_out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Isomorphism classes of stable graphs with n legs and genus b.
    Graphs,
    /// The product tensor of one boundary configuration.
    Product,
    /// Check a relation: exit 0 when it holds, 1 when it fails.
    Verify {
        #[arg(value_enum)]
        relation: Relation,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Relation {
    Ainf,
    Quantum,
    Chainmap,
}

fn config(c: &Common) -> Result<RunConfig> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if c.n.is_some() {
        cfg.n = c.n;
    }
    if c.b.is_some() {
        cfg.b = c.b;
    }
    if c.d.is_some() {
        cfg.d = c.d;
    }
    if let Some(q) = &c.q_order {
        cfg.q_order = Some(Value::String(q.clone()));
    }
    if c.sigma.is_some() {
        cfg.sigma = c.sigma.clone();
    }
    if c.seed.is_some() {
        cfg.seed = c.seed;
    }
    Ok(cfg)
}

fn graphs(cfg: &RunConfig) -> Result<Value> {
    let n = cfg.n.ok_or_else(|| anyhow!("graphs needs --n"))?;
    let b = cfg.b.unwrap_or(0);
    let max_flags = cfg.max_flags.unwrap_or(MAX_FLAGS);
    let classes = enumerate_iso_classes(n, b, max_flags, Mode::Auto)?;
    Ok(json!({
        "command": "graphs",
        "n": n,
        "b": b,
        "max_flags": max_flags,
        "count": classes.len(),
        "classes": classes.iter().map(|g| g.to_json()).collect::<Vec<_>>(),
    }))
}

fn product(cfg: &RunConfig) -> Result<Value> {
    let req = cfg.request(None)?;
    let mu = assemble_mu(&req)?;
    let t = &mu.tensor;
    let slots: Vec<Value> = (0..mu.boundary.len())
        .map(|s| {
            let sl = mu.boundary.slots[s];
            let gens: Vec<Value> = slot_basis(&mu.boundary, s)
                .iter()
                .map(|(g, c)| json!({"key": g.key, "degree": g.degree, "base": rat::show(c.base.value())}))
                .collect();
            json!({
                "slot": s + 1,
                "source": mu.boundary.lagrangians[sl.source].to_string(),
                "target": mu.boundary.lagrangians[sl.target].to_string(),
                "generators": gens,
            })
        })
        .collect();
    let coefficients = match cfg.points()? {
        None => t.to_json(),
        Some(tuples) => {
            let mut rows = Vec::new();
            for tuple in tuples {
                if tuple.len() != t.arity() || tuple.iter().enumerate().any(|(s, &i)| i >= t.slots[s].len()) {
                    bail!("point tuple {:?} does not fit the slots", tuple.iter().map(|i| i + 1).collect::<Vec<_>>());
                }
                let keys: Vec<String> = t.entry(&tuple).iter().map(|g| g.key.clone()).collect();
                rows.push(json!({"tuple": keys, "series": t.coeff(&tuple).to_json()}));
            }
            Value::Array(rows)
        }
    };
    let note = match (mu.b, t.is_zero()) {
        (0, _) => None,
        (_, true) => Some("annulus tensor is zero"),
        (_, false) => Some("annulus tensor is nonzero"),
    };
    Ok(json!({
        "command": "product",
        "d": req.d,
        "b": mu.b,
        "q_order": rat::show(&req.settings.q),
        "declared_degree": t.declared_degree,
        "slots": slots,
        "admissible_tuples": mu.admissible,
        "rigid_solutions": mu.solution_count(),
        "empty_reason": mu.empty_reason,
        "zero": t.is_zero(),
        "note": note,
        "oracle_agrees": triangle_cross_check(&mu, &req.settings),
        "coefficients": coefficients,
    }))
}

/// Compares a triangle tensor with the universal-cover count on every
/// tuple. `None` when the count does not apply: annuli, other arities,
/// surface signs, or a corner between parallel Lagrangians.
fn triangle_cross_check(mu: &MuTensor, st: &Settings) -> Option<bool> {
    let b = &mu.boundary;
    if mu.b != 0 || b.len() != 3 || st.convention != SignConvention::Unit {
        return None;
    }
    let chain: [_; 3] = std::array::from_fn(|s| b.lagrangians[b.slots[s].source].clone());
    if (0..3).any(|s| chain[s].slope == chain[(s + 1) % 3].slope) {
        return None;
    }
    let bases: Vec<Vec<_>> = (0..3).map(|s| slot_basis(b, s).into_iter().map(|(_, c)| c.base.value().clone()).collect()).collect();
    for i in 0..bases[0].len() {
        for j in 0..bases[1].len() {
            for k in 0..bases[2].len() {
                let ys = [bases[0][i].clone(), bases[1][j].clone(), bases[2][k].clone()];
                let want: Vec<_> = triangle_oracle(b.d, &chain, &ys, &st.q).terms().map(|(e, c)| (e.clone(), *c)).collect();
                let got: Vec<_> = mu.tensor.coeff(&[i, j, k]).terms().map(|(e, c)| (e.clone(), *c)).collect();
                if want != got {
                    return Some(false);
                }
            }
        }
    }
    Some(true)
}

fn verify(cfg: &RunConfig, relation: Relation) -> Result<RelationReport> {
    let st = cfg.settings()?;
    match relation {
        Relation::Ainf => {
            let req = cfg.request(Some(&[0, 1, 2, 3]))?;
            if req.chains.len() != 1 || req.chains[0].len() != 4 {
                bail!("ainf needs a single chain of four Lagrangians");
            }
            Ok(verify_a_infinity(req.d, &req.chains[0], &req.settings, cfg.certificate.unwrap_or(true))?)
        }
        Relation::Quantum => {
            let mut cfg2 = RunConfig { sigma: cfg.sigma.clone().or_else(|| Some("(1 2)(3)".into())), ..RunConfig::default() };
            cfg2.d = cfg.d;
            cfg2.slopes = cfg.slopes.clone();
            cfg2.offsets = cfg.offsets.clone();
            cfg2.q_order = cfg.q_order.clone();
            cfg2.seed = cfg.seed;
            cfg2.convention = cfg.convention.clone();
            cfg2.b = cfg.b;
            Ok(verify_quantum(&cfg2.request(None)?)?)
        }
        Relation::Chainmap => {
            let n = cfg.n.ok_or_else(|| anyhow!("chainmap needs --n"))?;
            let b = cfg.b.ok_or_else(|| anyhow!("chainmap needs --b"))?;
            Ok(chain_map_check(n, b, cfg.sigma()?.as_ref(), cfg.d(), &st)?)
        }
    }
}

fn emit(v: &Value, out: Option<&PathBuf>) -> Result<()> {
    let text = serde_json::to_string_pretty(v)? + "\n";
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<bool> {
    let cfg = config(&cli.common)?;
    let (value, ok) = match &cli.command {
        Command::Graphs => (graphs(&cfg)?, true),
        Command::Product => (product(&cfg)?, true),
        Command::Verify { relation } => {
            let r = verify(&cfg, *relation)?;
            let ok = r.passed();
            let mut v = r.to_json();
            v["command"] = "verify".into();
            (v, ok)
        }
    };
    emit(&value, cli.common.json_out.as_ref())?;
    Ok(ok)
}

fn main() -> ExitCode {
    if let Some(n) = std::env::var("TF_THREADS").ok().and_then(|s| s.parse().ok()) {
        exec::set_threads(n);
    }
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
