//! File formats: data CSV, schema JSON, constraint JSON and the JSON
//! emitted for rankings, fairness vectors and leximin traces.
//!
//! Every rational is written twice: `exact` as a `numerator/denominator`
//! string and `value` as the nearest f64, so downstream tooling can choose
//! between precision and convenience.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use fairsel_core::constraints::proportional_bounds;
use fairsel_core::{
    igf_vector, AttributeSchema, Dataset, DiversityConstraints, IgfMode, IgfVector, LeximinTrace,
    Outcome, Rat, RawRow,
};

/// Schema file: `{"attributes":[{"name":...,"values":[...]}]}`.
#[derive(Debug, Serialize, Deserialize)]
pub struct SchemaFile {
    pub attributes: Vec<AttributeSpec>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AttributeSpec {
    pub name: String,
    pub values: Vec<String>,
}

pub fn read_schema(path: &Path) -> Result<AttributeSchema> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading schema {}", path.display()))?;
    let file: SchemaFile = serde_json::from_str(&text)
        .with_context(|| format!("parsing schema {}", path.display()))?;
    let parts: Vec<(String, Vec<String>)> = file
        .attributes
        .into_iter()
        .map(|a| (a.name, a.values))
        .collect();
    AttributeSchema::from_parts(parts).map_err(|e| anyhow::anyhow!("invalid schema: {e}"))
}

pub fn write_schema(path: &Path, schema: &AttributeSchema) -> Result<()> {
    let file = SchemaFile {
        attributes: (0..schema.num_attrs())
            .map(|a| AttributeSpec {
                name: schema.attr_name(a).to_string(),
                values: schema
                    .values_of_attr(a)
                    .iter()
                    .map(|&v| schema.value_name(v).to_string())
                    .collect(),
            })
            .collect(),
    };
    write_json(path, &file)
}

/// Data CSV: header `id,score,<attr1>,<attr2>,...`; attribute columns may
/// appear in any order but must cover the schema exactly.
pub fn read_rows(path: &Path, schema: &AttributeSchema) -> Result<Vec<RawRow>> {
    let mut reader = csv::Reader::from_path(path)
        .with_context(|| format!("reading data {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let cols: Vec<&str> = headers.iter().collect();
    if cols.len() < 2 || cols[0] != "id" || cols[1] != "score" {
        bail!("data header must start with `id,score`, got `{}`", cols.join(","));
    }
    let mut attr_col = Vec::with_capacity(schema.num_attrs());
    for a in 0..schema.num_attrs() {
        let name = schema.attr_name(a);
        let idx = cols
            .iter()
            .position(|&c| c == name)
            .with_context(|| format!("data is missing the `{name}` column"))?;
        attr_col.push(idx);
    }
    if cols.len() != 2 + schema.num_attrs() {
        bail!(
            "data has {} columns but the schema declares {} attributes",
            cols.len(),
            schema.num_attrs()
        );
    }
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.with_context(|| format!("data record {}", line + 2))?;
        let get = |i: usize| record.get(i).unwrap_or("").trim().to_string();
        rows.push(RawRow {
            id: get(0),
            score: get(1),
            labels: attr_col.iter().map(|&i| get(i)).collect(),
        });
    }
    Ok(rows)
}

pub fn write_rows(path: &Path, schema: &AttributeSchema, rows: &[RawRow]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)
        .with_context(|| format!("writing data {}", path.display()))?;
    let mut header = vec!["id".to_string(), "score".to_string()];
    header.extend((0..schema.num_attrs()).map(|a| schema.attr_name(a).to_string()));
    writer.write_record(&header)?;
    for row in rows {
        let mut record = vec![row.id.clone(), row.score.clone()];
        record.extend(row.labels.iter().cloned());
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// Constraint file, either explicit bounds or proportional parameters.
#[derive(Debug, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum ConstraintFile {
    Explicit {
        k: usize,
        bounds: Vec<BoundSpec>,
    },
    Proportional {
        alpha: f64,
        checkpoints: Vec<usize>,
        /// Optional; the `--k` flag wins when both are given.
        k: Option<usize>,
    },
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BoundSpec {
    pub value: String,
    pub position: usize,
    pub min: u32,
}

/// Resolve the constraint spec against a dataset. `k_flag` overrides any k
/// in the file; with no file at all the constraints are empty and k must
/// come from the flag.
pub fn read_constraints(
    path: Option<&Path>,
    ds: &Dataset,
    k_flag: Option<usize>,
) -> Result<DiversityConstraints> {
    let Some(path) = path else {
        let k = k_flag.context("--k is required when no constraint file is given")?;
        return Ok(DiversityConstraints::unconstrained(k));
    };
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading constraints {}", path.display()))?;
    let file: ConstraintFile = serde_json::from_str(&text)
        .with_context(|| format!("parsing constraints {}", path.display()))?;
    match file {
        ConstraintFile::Explicit { k, bounds } => {
            let k = k_flag.unwrap_or(k);
            let mut entries = Vec::with_capacity(bounds.len());
            for b in &bounds {
                let v = ds
                    .schema()
                    .value_id(&b.value)
                    .with_context(|| format!("unknown attribute value `{}`", b.value))?;
                entries.push((v, b.position, b.min));
            }
            let (cons, lifted) = DiversityConstraints::from_entries(k, &entries)
                .map_err(|e| anyhow::anyhow!("invalid constraints: {e}"))?;
            for (v, p) in lifted {
                eprintln!(
                    "note: bound for {} at position {p} raised to keep the table monotone",
                    ds.schema().value_name(v)
                );
            }
            Ok(cons)
        }
        ConstraintFile::Proportional {
            alpha,
            checkpoints,
            k,
        } => {
            let k = k_flag
                .or(k)
                .context("--k is required with proportional constraints")?;
            let alpha = parse_decimal(&format_f64(alpha))
                .with_context(|| format!("alpha {alpha} is not a plain decimal"))?;
            proportional_bounds(ds, k, &checkpoints, alpha)
                .map_err(|e| anyhow::anyhow!("invalid constraints: {e}"))
        }
    }
}

fn format_f64(x: f64) -> String {
    // Round-trips plain decimals like 0.25 without binary noise.
    format!("{x}")
}

/// Parse a plain decimal literal into an exact rational.
pub fn parse_decimal(text: &str) -> Result<Rat> {
    let text = text.trim();
    let (int_part, frac_part) = match text.split_once('.') {
        Some((i, f)) => (i, f),
        None => (text, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        bail!("empty decimal literal");
    }
    let digits: String = format!("{int_part}{frac_part}");
    let numer: i64 = digits
        .parse()
        .with_context(|| format!("`{text}` is not a decimal literal"))?;
    let denom = 10i64
        .checked_pow(frac_part.len() as u32)
        .context("too many decimal places")?;
    Ok(Rat::new(numer, denom))
}

/// A rational rendered both exactly and approximately.
#[derive(Debug, Serialize, Deserialize)]
pub struct JsonRat {
    pub exact: String,
    pub value: f64,
}

impl JsonRat {
    pub fn from_rat(r: Rat) -> Self {
        JsonRat {
            exact: format!("{}/{}", r.numer(), r.denom()),
            value: *r.numer() as f64 / *r.denom() as f64,
        }
    }
}

pub fn rat_to_f64(r: Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[derive(Debug, Serialize)]
pub struct RankingFile {
    pub status: String,
    pub k: usize,
    /// Total utility in the dataset's score units, exactly formatted.
    pub utility: String,
    pub ranking: Vec<RankedItem>,
}

#[derive(Debug, Serialize)]
pub struct RankedItem {
    pub position: usize,
    pub id: String,
    pub score: String,
}

pub fn ranking_file(ds: &Dataset, outcome: &Outcome, status: &str) -> RankingFile {
    RankingFile {
        status: status.to_string(),
        k: outcome.k(),
        utility: ds.format_score(outcome.total_utility(ds)),
        ranking: outcome
            .ranking()
            .iter()
            .enumerate()
            .map(|(p, &i)| RankedItem {
                position: p + 1,
                id: ds.item(i).id.clone(),
                score: ds.format_score(ds.item(i).score),
            })
            .collect(),
    }
}

#[derive(Debug, Serialize)]
pub struct IgfFile {
    pub mode: String,
    pub groups: BTreeMap<String, JsonRat>,
    pub min: Option<JsonRat>,
}

pub fn igf_file(ds: &Dataset, vector: &IgfVector) -> IgfFile {
    IgfFile {
        mode: vector.mode.to_string(),
        groups: vector
            .values
            .iter()
            .map(|(&v, &q)| (ds.schema().value_name(v).to_string(), JsonRat::from_rat(q)))
            .collect(),
        min: vector.min_value().map(JsonRat::from_rat),
    }
}

#[derive(Debug, Serialize)]
pub struct TraceFile {
    pub mode: String,
    pub epsilon: JsonRat,
    pub probes: u64,
    pub rounds: Vec<TraceRound>,
    pub bounds: BTreeMap<String, JsonRat>,
    pub utility: String,
}

#[derive(Debug, Serialize)]
pub struct TraceRound {
    pub steps: Vec<TraceStep>,
    pub q_star: JsonRat,
    pub frozen: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct TraceStep {
    pub lo: JsonRat,
    pub hi: JsonRat,
    pub mid: JsonRat,
    pub feasible: bool,
}

pub fn trace_file(ds: &Dataset, mode: IgfMode, eps: Rat, trace: &LeximinTrace) -> TraceFile {
    TraceFile {
        mode: mode.to_string(),
        epsilon: JsonRat::from_rat(eps),
        probes: trace.probes,
        rounds: trace
            .rounds
            .iter()
            .map(|round| TraceRound {
                steps: round
                    .steps
                    .iter()
                    .map(|s| TraceStep {
                        lo: JsonRat::from_rat(s.lo),
                        hi: JsonRat::from_rat(s.hi),
                        mid: JsonRat::from_rat(s.mid),
                        feasible: s.feasible,
                    })
                    .collect(),
                q_star: JsonRat::from_rat(round.q_star),
                frozen: round
                    .frozen
                    .iter()
                    .map(|&v| ds.schema().value_name(v).to_string())
                    .collect(),
            })
            .collect(),
        bounds: trace
            .bounds
            .entries()
            .map(|(v, qb)| {
                (
                    ds.schema().value_name(v).to_string(),
                    JsonRat::from_rat(qb.q),
                )
            })
            .collect(),
        utility: trace
            .solution
            .objective
            .map(|u| ds.format_score(u))
            .unwrap_or_default(),
    }
}

/// Serialize as pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Round-trip check on an emitted ranking: the id list must reproduce a
/// feasible outcome for the constraints and satisfy the declared q bounds.
pub fn verify_ranking(
    ds: &Dataset,
    cons: &DiversityConstraints,
    mode: IgfMode,
    floors: &BTreeMap<String, Rat>,
    ids: &[String],
) -> Result<()> {
    let outcome = Outcome::from_ids(ds, ids).map_err(|e| anyhow::anyhow!("bad ranking: {e}"))?;
    for (v, p, bound) in cons.entries() {
        let have = outcome
            .ranking()
            .iter()
            .take(p)
            .filter(|&&i| ds.group(v).contains(&i))
            .count();
        if have < bound as usize {
            bail!(
                "ranking violates the {} bound at position {p}: {have} < {bound}",
                ds.schema().value_name(v)
            );
        }
    }
    let vector = igf_vector(ds, &outcome, mode);
    for (name, &q) in floors {
        let v = ds
            .schema()
            .value_id(name)
            .with_context(|| format!("unknown group `{name}`"))?;
        if let Some(&achieved) = vector.values.get(&v) {
            if achieved < q {
                bail!("ranking violates the {name} fairness floor");
            }
        }
    }
    Ok(())
}
