//! The per-k utility/fairness report: unconstrained vs. diversity-only vs.
//! leximin-balanced utility, percentage losses, and per-group fairness
//! vectors before and after balancing.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use fairsel_core::{
    igf_vector, leximin_solve, solve_ip_with_clock, Clock, Dataset, DiversityConstraints,
    IgfMode, IgfVector, Outcome, Rat, SolveStatus, SolverOptions,
};

use crate::io::{rat_to_f64, JsonRat};

#[derive(Debug, Serialize)]
pub struct Report {
    pub records: Vec<KRecord>,
    /// Set when a sub-run failed and the remaining ks were skipped.
    pub partial: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct KRecord {
    pub k: usize,
    /// Utilities in score units.
    pub unconstrained_utility: String,
    pub diversity_utility: String,
    pub leximin_utility: BTreeMap<String, String>,
    /// Full-precision percentage losses; the stdout table rounds these.
    pub diversity_loss_pct: f64,
    pub balance_loss_pct: BTreeMap<String, f64>,
    pub igf: BTreeMap<String, ModeRecord>,
    pub nodes: u64,
}

#[derive(Debug, Serialize)]
pub struct ModeRecord {
    pub before: BTreeMap<String, JsonRat>,
    pub after: BTreeMap<String, JsonRat>,
}

fn vector_map(ds: &Dataset, vector: &IgfVector) -> BTreeMap<String, JsonRat> {
    vector
        .values
        .iter()
        .map(|(&v, &q)| (ds.schema().value_name(v).to_string(), JsonRat::from_rat(q)))
        .collect()
}

/// Run the three-way comparison for each k. `constraints_for` resolves the
/// constraint spec at a given k (proportional tables rescale, explicit
/// tables are reused as-is).
pub fn build_report(
    ds: &Dataset,
    ks: &[usize],
    constraints_for: &dyn Fn(usize) -> Result<DiversityConstraints>,
    eps: Rat,
    options: &SolverOptions,
    clock: &dyn Clock,
) -> Result<Report> {
    let mut records = Vec::new();
    for &k in ks {
        match build_record(ds, k, constraints_for, eps, options, clock) {
            Ok(record) => records.push(record),
            Err(err) => {
                return Ok(Report {
                    records,
                    partial: Some(format!("k={k}: {err:#}")),
                })
            }
        }
    }
    Ok(Report {
        records,
        partial: None,
    })
}

fn build_record(
    ds: &Dataset,
    k: usize,
    constraints_for: &dyn Fn(usize) -> Result<DiversityConstraints>,
    eps: Rat,
    options: &SolverOptions,
    clock: &dyn Clock,
) -> Result<KRecord> {
    let cons = constraints_for(k)?;
    if cons.k() != k {
        bail!("constraint spec resolves to k={}, expected {k}", cons.k());
    }

    let free = DiversityConstraints::unconstrained(k);
    let unconstrained = solve_for(ds, &free, options, clock)
        .context("unconstrained solve")?;
    let diversity = solve_for(ds, &cons, options, clock).context("diversity-only solve")?;

    let u_free = unconstrained.total_utility(ds);
    let u_div = diversity.total_utility(ds);
    let mut nodes = 0;

    let mut leximin_utility = BTreeMap::new();
    let mut balance_loss = BTreeMap::new();
    let mut igf = BTreeMap::new();
    for mode in [IgfMode::Ratio, IgfMode::Aggregated] {
        let trace = leximin_solve(ds, &cons, mode, eps, options, clock)
            .map_err(|e| anyhow::anyhow!("leximin ({mode}): {e}"))?;
        let outcome = trace
            .solution
            .outcome
            .as_ref()
            .context("leximin returned no outcome")?;
        let u_lex = outcome.total_utility(ds);
        if u_lex > u_div || u_div > u_free {
            bail!("utility ordering violated at k={k} ({mode})");
        }
        nodes += trace.solution.nodes;
        leximin_utility.insert(mode.to_string(), ds.format_score(u_lex));
        balance_loss.insert(mode.to_string(), pct_loss(u_div, u_lex));
        igf.insert(
            mode.to_string(),
            ModeRecord {
                before: vector_map(ds, &igf_vector(ds, &diversity, mode)),
                after: vector_map(ds, &igf_vector(ds, outcome, mode)),
            },
        );
    }

    Ok(KRecord {
        k,
        unconstrained_utility: ds.format_score(u_free),
        diversity_utility: ds.format_score(u_div),
        leximin_utility,
        diversity_loss_pct: pct_loss(u_free, u_div),
        balance_loss_pct: balance_loss,
        igf,
        nodes,
    })
}

fn solve_for(
    ds: &Dataset,
    cons: &DiversityConstraints,
    options: &SolverOptions,
    clock: &dyn Clock,
) -> Result<Outcome> {
    let bounds = fairsel_core::IgfBounds::unconstrained(IgfMode::Ratio);
    let prog = fairsel_core::build_model(ds, cons, &bounds)
        .map_err(|e| anyhow::anyhow!("model: {e}"))?;
    let solution =
        solve_ip_with_clock(ds, &prog, options, clock).map_err(|e| anyhow::anyhow!("solve: {e}"))?;
    match solution.status {
        SolveStatus::Optimal => solution.outcome.context("optimal without outcome"),
        SolveStatus::Infeasible => bail!("constraints are infeasible"),
        SolveStatus::LimitReached => bail!("solver limit reached"),
    }
}

fn pct_loss(full: i64, reduced: i64) -> f64 {
    if full == 0 {
        return 0.0;
    }
    100.0 * (full - reduced) as f64 / full as f64
}

/// Flat CSV of the per-group vectors: one row per (k, mode, phase, group).
pub fn write_report_csv(path: &Path, report: &Report) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)
        .with_context(|| format!("writing {}", path.display()))?;
    writer.write_record(["k", "mode", "phase", "group", "exact", "value"])?;
    for record in &report.records {
        for (mode, mr) in &record.igf {
            for (phase, map) in [("diversity", &mr.before), ("leximin", &mr.after)] {
                for (group, jr) in map {
                    writer.write_record([
                        record.k.to_string(),
                        mode.clone(),
                        phase.to_string(),
                        group.clone(),
                        jr.exact.clone(),
                        format!("{}", jr.value),
                    ])?;
                }
            }
        }
    }
    writer.flush()?;
    Ok(())
}

/// Human-readable loss table, percentages rounded to whole percent.
pub fn render_table(report: &Report) -> String {
    let mut out = String::new();
    out.push_str("  k | diversity | ratio | agg\n");
    out.push_str("----+-----------+-------+----\n");
    for r in &report.records {
        let ratio = r.balance_loss_pct.get("ratio").copied().unwrap_or(0.0);
        let agg = r.balance_loss_pct.get("aggregated").copied().unwrap_or(0.0);
        out.push_str(&format!(
            "{:>3} | {:>8}% | {:>4}% | {:>2}%\n",
            r.k,
            r.diversity_loss_pct.round() as i64,
            ratio.round() as i64,
            agg.round() as i64,
        ));
    }
    if let Some(reason) = &report.partial {
        out.push_str(&format!("(partial: {reason})\n"));
    }
    out
}

/// Smallest group value under a mode, used by the balance summary.
pub fn min_igf(ds: &Dataset, outcome: &Outcome, mode: IgfMode) -> Option<f64> {
    igf_vector(ds, outcome, mode).min_value().map(rat_to_f64)
}
