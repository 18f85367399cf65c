//! Run configuration: one JSON file plus flag overrides.

use std::collections::BTreeSet;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::Value;

use tropfuk::base_geometry::{auto_perturb, is_transversal, Lagrangian};
use tropfuk::fukaya_products::{default_request, ProductRequest, Settings, SignConvention};
use tropfuk::perm_operad::{Letter, Perm};
use tropfuk::rat::{self, Rational};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub d: Option<i64>,
    /// One list per boundary circle, or a flat list for a single circle.
    pub slopes: Option<Value>,
    /// `"auto"`, `"random"` (seeded) or rationals shaped like `slopes`.
    pub offsets: Option<Value>,
    pub sigma: Option<String>,
    /// `"all"` or a list of tuples of 1-based generator indices.
    pub points: Option<Value>,
    pub n: Option<usize>,
    pub b: Option<u32>,
    pub q_order: Option<Value>,
    pub seed: Option<u64>,
    /// `"unit"` (default) or `"surface"`.
    pub convention: Option<String>,
    /// Walk the families behind each term (default true).
    pub certificate: Option<bool>,
    pub max_flags: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn d(&self) -> i64 {
        self.d.unwrap_or(1)
    }

    pub fn q(&self) -> Result<Rational> {
        match &self.q_order {
            None => Ok(rat::int(4)),
            Some(v) => {
                let s = scalar(v)?;
                let q = rat::parse(&s).ok_or_else(|| anyhow!("q_order {s:?} is not a rational"))?;
                if q <= rat::zero() {
                    bail!("q_order must be positive");
                }
                Ok(q)
            }
        }
    }

    pub fn sigma(&self) -> Result<Option<Perm>> {
        self.sigma.as_deref().map(|s| s.parse::<Perm>().map_err(|e| anyhow!("sigma: {e}"))).transpose()
    }

    pub fn settings(&self) -> Result<Settings> {
        let mut st = Settings::new(self.q()?);
        st.convention = match self.convention.as_deref() {
            None | Some("unit") => SignConvention::Unit,
            Some("surface") => SignConvention::Surface,
            Some(other) => bail!("unknown sign convention {other:?}"),
        };
        Ok(st)
    }

    /// Slopes grouped by boundary circle, split by the cycle lengths of
    /// `sizes` when given flat.
    fn slope_circles(&self, sizes: &[usize]) -> Result<Option<Vec<Vec<i64>>>> {
        let Some(v) = &self.slopes else { return Ok(None) };
        let arr = v.as_array().ok_or_else(|| anyhow!("slopes must be a list"))?;
        let circles: Vec<Vec<i64>> = if arr.iter().all(Value::is_array) {
            arr.iter().map(|c| ints(c)).collect::<Result<_>>()?
        } else {
            let flat = ints(v)?;
            if sizes.iter().sum::<usize>() != flat.len() {
                bail!("{} slopes for {} slots", flat.len(), sizes.iter().sum::<usize>());
            }
            let mut out = Vec::new();
            let mut at = 0;
            for &k in sizes {
                out.push(flat[at..at + k].to_vec());
                at += k;
            }
            out
        };
        if circles.iter().map(Vec::len).collect::<Vec<_>>() != sizes {
            bail!("slope circles do not match the cycles of sigma");
        }
        Ok(Some(circles))
    }

    /// The request described by `slopes`, `offsets` and `sigma`. Without
    /// slopes, `sigma` picks the default chains. `fallback` supplies slopes
    /// when neither is given.
    pub fn request(&self, fallback: Option<&[i64]>) -> Result<ProductRequest> {
        let d = self.d();
        if d <= 0 {
            bail!("d must be positive");
        }
        let sigma = match self.sigma()? {
            Some(s) => s,
            None => {
                let k = match (&self.slopes, fallback) {
                    (Some(v), _) => ints(v).map(|x| x.len()).context("slopes without sigma must be one flat list")?,
                    (None, Some(f)) => f.len(),
                    (None, None) => bail!("either slopes or sigma is required"),
                };
                let cyc: Vec<Letter> = (1..=k as u32).map(Letter::Num).collect();
                Perm::from_cycles(&[cyc]).map_err(|e| anyhow!(e))?
            }
        };
        let cycles: Vec<Vec<usize>> = sigma
            .cycles()
            .iter()
            .map(|c| {
                c.iter()
                    .map(|l| if let Letter::Num(k) = l { Ok(*k as usize - 1) } else { Err(anyhow!("sigma may only use numbered letters")) })
                    .collect()
            })
            .collect::<Result<_>>()?;
        let sizes: Vec<usize> = cycles.iter().map(Vec::len).collect();
        if let Some(b) = self.b {
            if b as usize + 1 != cycles.len() {
                bail!("b = {b} needs {} boundary circles, sigma has {}", b + 1, cycles.len());
            }
        }
        let slopes = match self.slope_circles(&sizes)? {
            Some(s) => s,
            None if self.sigma.is_none() => vec![fallback.unwrap_or_default().to_vec()],
            None => {
                if self.offsets.as_ref().is_some_and(|o| *o != "auto") {
                    bail!("explicit offsets need explicit slopes");
                }
                let mut req = default_request(d, &sigma, self.q()?)?;
                req.settings = self.settings()?;
                return Ok(req);
            }
        };
        let chains = self.lagrangians(d, &slopes)?;
        Ok(ProductRequest { d, chains, cycles, settings: self.settings()? })
    }

    fn lagrangians(&self, d: i64, slopes: &[Vec<i64>]) -> Result<Vec<Vec<Lagrangian>>> {
        let distinct: Vec<i64> = slopes.iter().flatten().copied().collect::<BTreeSet<_>>().into_iter().collect();
        let by_slope = |lags: &[Lagrangian]| -> Vec<Vec<Lagrangian>> {
            slopes.iter().map(|c| c.iter().map(|s| lags[distinct.iter().position(|x| x == s).unwrap()].clone()).collect()).collect()
        };
        match &self.offsets {
            None => Ok(by_slope(&auto_perturb(&distinct, d))),
            Some(Value::String(s)) if s == "auto" => Ok(by_slope(&auto_perturb(&distinct, d))),
            Some(Value::String(s)) if s == "random" => {
                let seed = self.seed.ok_or_else(|| anyhow!("random offsets need a seed"))?;
                Ok(by_slope(&random_offsets(&distinct, d, seed)?))
            }
            Some(Value::String(s)) => bail!("unknown offsets keyword {s:?}"),
            Some(v) => {
                let arr = v.as_array().ok_or_else(|| anyhow!("offsets must be a keyword or a list"))?;
                let flat: Vec<Value> = if arr.iter().all(Value::is_array) {
                    arr.iter().flat_map(|c| c.as_array().cloned().unwrap_or_default()).collect()
                } else {
                    arr.clone()
                };
                let all: Vec<i64> = slopes.iter().flatten().copied().collect();
                if flat.len() != all.len() {
                    bail!("{} offsets for {} chain positions", flat.len(), all.len());
                }
                let mut it = flat.iter();
                let mut out = Vec::new();
                for c in slopes {
                    let mut chain = Vec::new();
                    for &s in c {
                        let text = scalar(it.next().unwrap())?;
                        let off = rat::parse(&text).ok_or_else(|| anyhow!("offset {text:?} is not a rational"))?;
                        chain.push(Lagrangian::new(s, off));
                    }
                    out.push(chain);
                }
                Ok(out)
            }
        }
    }

    /// Requested tuples as 0-based indices, `None` for all.
    pub fn points(&self) -> Result<Option<Vec<Vec<usize>>>> {
        match &self.points {
            None => Ok(None),
            Some(Value::String(s)) if s == "all" => Ok(None),
            Some(Value::Array(rows)) => rows
                .iter()
                .map(|r| {
                    let t = ints(r)?;
                    t.iter().map(|&i| if i >= 1 { Ok(i as usize - 1) } else { Err(anyhow!("generator indices are 1-based")) }).collect()
                })
                .collect::<Result<Vec<_>>>()
                .map(Some),
            Some(_) => bail!("points must be \"all\" or a list of index tuples"),
        }
    }
}

fn scalar(v: &Value) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) if n.is_i64() => Ok(n.to_string()),
        _ => bail!("expected an integer or a rational string, got {v}"),
    }
}

fn ints(v: &Value) -> Result<Vec<i64>> {
    v.as_array()
        .ok_or_else(|| anyhow!("expected a list of integers"))?
        .iter()
        .map(|x| x.as_i64().ok_or_else(|| anyhow!("expected an integer, got {x}")))
        .collect()
}

/// Seeded offsets in `[0, 1/8)` with denominator 997, redrawn until the
/// family is transversal.
fn random_offsets(slopes: &[i64], d: i64, seed: u64) -> Result<Vec<Lagrangian>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..1000 {
        let mut offs: Vec<i64> = (0..slopes.len()).map(|_| rng.gen_range(0..125)).collect();
        offs.sort();
        let lags: Vec<Lagrangian> = slopes.iter().zip(&offs).map(|(&s, &o)| Lagrangian::new(s, rat::frac(o, 997))).collect();
        if slopes.len() < 2 || is_transversal(&lags, d).map(|t| t.transversal).unwrap_or(false) {
            return Ok(lags);
        }
    }
    bail!("no transversal random offsets found for seed {seed}")
}
