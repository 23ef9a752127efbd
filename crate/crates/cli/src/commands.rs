//! The four commands. Each renders its whole output into a string so that
//! reruns with the same configuration are byte-identical.

use std::fmt::Write as _;

use anyhow::{bail, Result};
use serde::Serialize;
use supersingular::checks::{
    carry_suite, check_coset_relations, check_plain_invariants, generalized_t_suite, hecke_equivariance_suite,
    radius_one_suite, schedule_suite, shifted_s_noninvariance,
};
use supersingular::induction::Model;
use supersingular::invariants::{eigen_character, enumerate_invariants, QuotientContext};
use supersingular::quotient::{run_f2_ramified, run_unramified, RunOptions, StagedReport};
use supersingular::report::Report;
use supersingular::weights::{weight_set, SerreWeight};

use crate::config::{reject, Format, RunConfig};

/// Rendered output and whether every claim it makes was verified.
pub struct Outcome {
    pub body: String,
    pub verified: bool,
}

fn csv_string(rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.write_record(row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn json_string<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

#[derive(Serialize)]
struct BasisRow {
    index: usize,
    radius: u32,
    alpha: u64,
    beta: u64,
    support: usize,
    certified: bool,
}

#[derive(Serialize)]
struct InvariantsOutput {
    weight: SerreWeight,
    e: u32,
    radius: u32,
    dimension: usize,
    per_radius: Vec<usize>,
    warnings: Vec<String>,
    basis: Vec<BasisRow>,
}

/// Eigenbasis of the I(1)-invariants of `ind σ/(T)` through the radius;
/// each vector's character is re-certified in the quotient.
pub fn invariants(cfg: &RunConfig) -> Result<Outcome> {
    let Some(radius) = cfg.radius else {
        reject!("invariants needs an explicit --radius");
    };
    let weight = cfg.weight()?;
    let en = enumerate_invariants(&weight, cfg.e, radius)?;
    let model = Model::new(&weight, cfg.e, radius)?;
    let ctx = QuotientContext::new(&model, radius);
    let mut basis = Vec::new();
    for (index, b) in en.basis.iter().enumerate() {
        let certified = eigen_character(&b.element, &ctx)? == Some(b.character);
        basis.push(BasisRow {
            index,
            radius: b.radius,
            alpha: b.character.alpha,
            beta: b.character.beta,
            support: b.element.len(),
            certified,
        });
    }
    let verified = basis.iter().all(|b| b.certified);
    let out = InvariantsOutput {
        weight,
        e: cfg.e,
        radius,
        dimension: en.dimension(),
        per_radius: en.per_radius(),
        warnings: en.warnings.clone(),
        basis,
    };
    let body = match cfg.format {
        Format::Json => json_string(&out)?,
        Format::Csv => {
            let mut rows = vec![["index", "radius", "alpha", "beta", "support", "certified"].map(String::from).to_vec()];
            rows.extend(out.basis.iter().map(|b| {
                vec![b.index, b.radius as usize, b.alpha as usize, b.beta as usize, b.support]
                    .into_iter()
                    .map(|x| x.to_string())
                    .chain([b.certified.to_string()])
                    .collect()
            }));
            csv_string(rows)?
        }
        Format::Text => {
            let mut s = String::new();
            writeln!(s, "I(1)-invariants of ind σ/(T): {cfg} radius={radius}")?;
            writeln!(s, "weight: {}", out.weight)?;
            writeln!(s, "dimension: {}", out.dimension)?;
            writeln!(s, "new per radius: {:?}", out.per_radius)?;
            for w in &out.warnings {
                writeln!(s, "warning: {w}")?;
            }
            for b in &out.basis {
                let mark = if b.certified { "certified" } else { "NOT CERTIFIED" };
                writeln!(
                    s,
                    "  #{:<3} radius {}  a^{} d^{}  support {}  [{mark}]",
                    b.index, b.radius, b.alpha, b.beta, b.support
                )?;
            }
            s
        }
    };
    Ok(Outcome { body, verified })
}

#[derive(Serialize)]
struct WeightRow {
    label: String,
    r_vec: Vec<u32>,
    w: u64,
    param: u64,
    tuple: Vec<u64>,
    display: String,
}

/// The labelled weight set with its tuples `(r_0, w_0, …)`; verified when the
/// weights are pairwise distinct and there are `2^f` (or `4e²`) of them.
pub fn weight_set_cmd(cfg: &RunConfig) -> Result<Outcome> {
    cfg.require_weight_set_regime()?;
    let seed = cfg.weight()?;
    let set = weight_set(&seed, cfg.e)?;
    let rows: Vec<WeightRow> = set
        .iter()
        .map(|lw| WeightRow {
            label: lw.label.to_string(),
            r_vec: lw.weight.r.clone(),
            w: lw.weight.w,
            param: lw.weight.param(),
            tuple: lw.weight.tuple(),
            display: lw.weight.to_string(),
        })
        .collect();
    let expected = if cfg.e == 1 { 1usize << cfg.f } else { 4 * (cfg.e * cfg.e) as usize };
    let mut distinct: Vec<&SerreWeight> = set.iter().map(|lw| &lw.weight).collect();
    distinct.sort();
    distinct.dedup();
    let verified = rows.len() == expected && distinct.len() == expected;
    let body = match cfg.format {
        Format::Json => json_string(&rows)?,
        Format::Csv => {
            let mut header = vec!["label".to_string()];
            for j in 0..cfg.f {
                header.push(format!("r_{j}"));
                header.push(format!("w_{j}"));
            }
            let mut table = vec![header];
            table.extend(rows.iter().map(|r| {
                std::iter::once(r.label.clone()).chain(r.tuple.iter().map(|x| x.to_string())).collect()
            }));
            csv_string(table)?
        }
        Format::Text => {
            let mut s = String::new();
            writeln!(s, "weight set: {cfg}")?;
            for r in &rows {
                writeln!(s, "  {:<14} {:<28} param {:<6} tuple {:?}", r.label, r.display, r.param, r.tuple)?;
            }
            writeln!(s, "{} weights, {} distinct, expected {expected}", rows.len(), distinct.len())?;
            s
        }
    };
    Ok(Outcome { body, verified })
}

/// The staged construction: unramified strings for e = 1, the f = 2 chains
/// otherwise. `--radius` is the radius budget.
pub fn quotient(cfg: &RunConfig) -> Result<Outcome> {
    cfg.require_generic()?;
    cfg.require_weight_set_regime()?;
    let Some(budget) = cfg.radius else {
        reject!("quotient needs an explicit --radius (0 = schedules only, 1 = local certification, 2+ = transport)");
    };
    let seed = cfg.weight()?;
    let opts = RunOptions { budget, levels: cfg.stages, ..RunOptions::default() };
    let report: StagedReport = if cfg.e == 1 { run_unramified(&seed, opts)? } else { run_f2_ramified(&seed, cfg.e, opts)? };
    let verified = report.report.status;
    let body = match cfg.format {
        Format::Json => json_string(&report)?,
        Format::Csv => {
            let mut header: Vec<String> =
                ["record", "stage", "label", "letter", "source", "param", "in_target", "survived"].map(String::from).to_vec();
            for j in 0..cfg.f {
                header.push(format!("r_{j}"));
                header.push(format!("w_{j}"));
            }
            let mut table = vec![header];
            let opt = |x: Option<String>| x.unwrap_or_default();
            for (i, r) in report.records.iter().enumerate() {
                let mut row = vec![
                    i.to_string(),
                    r.stage.to_string(),
                    r.label.clone(),
                    opt(r.letter.map(|l| l.to_string())),
                    opt(r.source.map(|s| s.to_string())),
                    r.weight.param().to_string(),
                    r.in_target.to_string(),
                    opt(r.survived.map(|s| s.to_string())),
                ];
                row.extend(r.tuple.iter().map(|x| x.to_string()));
                table.push(row);
            }
            csv_string(table)?
        }
        Format::Text => {
            let mut s = report.to_string();
            for c in &report.chains {
                let path: Vec<String> = c.path.iter().map(|i| format!("#{i}")).collect();
                writeln!(s, "  chain {} -> {}: {} ({} elided)", c.label, c.target, path.join(" "), c.elided)?;
            }
            for step in &report.cleanup {
                writeln!(
                    s,
                    "  cleanup {}: removed {:?}, kept {:?}, rank gained {}",
                    step.iteration, step.removed, step.kept, step.rank_gained
                )?;
            }
            s
        }
    };
    Ok(Outcome { body, verified })
}

pub const SUITES: [&str; 8] = ["relations", "plain", "radius-one", "t-elements", "shifted", "hecke", "schedule", "carry"];

fn suite_reports(name: &str, cfg: &RunConfig, weight: &SerreWeight) -> Result<Vec<Report>> {
    let e = cfg.e;
    let f = cfg.f;
    Ok(match name {
        "relations" => vec![check_coset_relations(weight)?],
        "plain" => vec![check_plain_invariants(weight, cfg.radius.unwrap_or(1))?],
        "radius-one" => vec![radius_one_suite(weight, e)?],
        "t-elements" => {
            if e < 2 {
                return Ok(Vec::new());
            }
            let mut ks: Vec<Vec<u32>> = (0..f as usize)
                .map(|j| (0..f as usize).map(|i| (i == j) as u32).collect())
                .collect();
            if f > 1 {
                ks.push(vec![1; f as usize]);
            }
            ks.retain(|k| k.iter().zip(&weight.r).all(|(&kj, &rj)| kj == 0 || kj < rj / 2));
            ks.iter().map(|k| generalized_t_suite(weight, k, e)).collect::<Result<_, _>>()?
        }
        "shifted" => (0..f)
            .filter(|&l| weight.r[l as usize] + 1 < cfg.p)
            .map(|l| shifted_s_noninvariance(weight, l, 1, e, 1))
            .collect::<Result<_, _>>()?,
        "hecke" => vec![hecke_equivariance_suite(weight, e, 2, 100, cfg.seed)?],
        "schedule" => {
            if cfg.p < 7 {
                return Ok(Vec::new());
            }
            vec![schedule_suite(cfg.p, f, 10, cfg.seed)?]
        }
        "carry" => vec![carry_suite(cfg.p, f, e)?],
        other => bail!("unknown suite {other:?}; known suites: all, {}", SUITES.join(", ")),
    })
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    parameters: String,
    seed: u64,
    status: bool,
    reports: &'a [Report],
}

/// Runs the selected verification suites and summarises pass/fail.
pub fn verify(cfg: &RunConfig) -> Result<Outcome> {
    let weight = cfg.weight()?;
    let mut names: Vec<&str> = Vec::new();
    for s in &cfg.suite {
        if s == "all" {
            names.extend(SUITES);
        } else if let Some(known) = SUITES.iter().find(|k| *k == s) {
            names.push(known);
        } else {
            bail!("unknown suite {s:?}; known suites: all, {}", SUITES.join(", "));
        }
    }
    names.dedup();
    let mut reports = Vec::new();
    for name in names {
        reports.extend(suite_reports(name, cfg, &weight)?);
    }
    let verified = reports.iter().all(|r| r.status);
    let body = match cfg.format {
        Format::Json => json_string(&VerifyOutput { parameters: cfg.to_string(), seed: cfg.seed, status: verified, reports: &reports })?,
        Format::Csv => {
            let mut table = vec![["claim", "parameters", "check", "expected", "observed", "pass"].map(String::from).to_vec()];
            for r in &reports {
                for c in &r.checks {
                    table.push(vec![
                        r.claim.clone(),
                        r.parameters.clone(),
                        c.name.clone(),
                        c.expected.clone(),
                        c.observed.clone(),
                        c.pass.to_string(),
                    ]);
                }
            }
            csv_string(table)?
        }
        Format::Text => {
            let mut s = String::new();
            for r in &reports {
                write!(s, "{r}")?;
            }
            let passed = reports.iter().filter(|r| r.status).count();
            writeln!(s, "summary: {passed}/{} reports pass", reports.len())?;
            s
        }
    };
    Ok(Outcome { body, verified })
}
