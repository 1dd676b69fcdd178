//! Execution of individual commands.

use std::f64::consts::FRAC_1_SQRT_2;

use rgclt::flow::{
    clt_rate_check, contraction_ratio, lyapunov_trajectory, renorm_trajectory, FlowReport,
    CONTRACTION_CONSTANT, CONTRACTION_SLACK,
};
use rgclt::metric::{
    check_convolution_invariance, check_convolution_subadditivity, check_scaling_ideality,
    check_self_convolution_bound, check_triangle, ds_distance, DistanceResult, InequalityCheck,
};
use rgclt::oracle::{empirical_flow_check, oracle_grid};
use rgclt::report::fmt_f64;
use rgclt::{Error, GridSpec, Measure};

use crate::config::{Command, MeasureTable};
use crate::report::Table;

pub const SCALING_FACTORS: [f64; 4] = [0.5, FRAC_1_SQRT_2, 1.0, 2.0];
pub const EXPONENTS: [f64; 2] = [2.0, 3.0];

/// Tolerance on the geometric decay bound along a flow.
pub const DECAY_SLACK: f64 = 1e-6;

pub struct Context<'a> {
    pub measures: &'a MeasureTable,
    pub grid: GridSpec,
    pub seed: u64,
}

pub fn execute(cmd: &Command, ctx: &Context) -> Result<Table, Error> {
    let names = cmd.measure_names();
    let named: Vec<(&str, &Measure)> = names.iter().map(|n| (n.as_str(), ctx.measures.get(n))).collect();
    match cmd {
        Command::Distance { s, .. } => distance(named[0], named[1], *s, &ctx.grid),
        Command::Flow { steps, .. } => flow(named[0].1, *steps, &ctx.grid),
        Command::VerifyContraction { .. } => verify_contraction(&named, &ctx.grid),
        Command::VerifyIdeal { .. } => verify_ideal(&named, &ctx.grid),
        Command::VerifyLyapunov { steps, .. } => verify_lyapunov(&named, *steps, &ctx.grid),
        Command::VerifyCltRate { n_max, .. } => verify_clt_rate(&named, *n_max, &ctx.grid),
        Command::Oracle { levels, samples, grid, .. } => {
            oracle(&named, *levels, *samples, ctx.seed, &grid.unwrap_or_else(oracle_grid))
        }
    }
}

fn distance(a: (&str, &Measure), b: (&str, &Measure), s: f64, grid: &GridSpec) -> Result<Table, Error> {
    let mut header = vec!["a", "b"];
    header.extend(DistanceResult::CSV_HEADER);
    let mut t = Table::new(&header);
    let d = ds_distance(a.1, b.1, s, grid)?;
    let mut row = vec![a.0.to_string(), b.0.to_string()];
    row.extend(d.csv_record());
    t.push(row);
    Ok(t)
}

fn flow(m: &Measure, steps: u32, grid: &GridSpec) -> Result<Table, Error> {
    let r = renorm_trajectory(m, steps, grid)?;
    let mut t = Table::new(&FlowReport::CSV_HEADER);
    if let Some(d3) = &r.distances_d3 {
        for (n, d) in d3.iter().enumerate().skip(1) {
            let bound = 2f64.powf(-(n as f64) / 2.0) * d3[0] * (1.0 + DECAY_SLACK);
            t.assert(*d <= bound);
        }
    }
    t.assert(r.lyapunov_monotone);
    for row in r.csv_rows() {
        t.push(row);
    }
    Ok(t)
}

fn pairs<T>(items: &[T]) -> impl Iterator<Item = (&T, &T)> {
    items.iter().enumerate().flat_map(move |(i, a)| items[i + 1..].iter().map(move |b| (a, b)))
}

fn verify_contraction(named: &[(&str, &Measure)], grid: &GridSpec) -> Result<Table, Error> {
    let mut t = Table::new(&["a", "b", "before", "after", "ratio", "bound", "holds"]);
    let bound = fmt_f64(CONTRACTION_CONSTANT + CONTRACTION_SLACK);
    for (a, b) in pairs(named) {
        let row = match contraction_ratio(a.1, b.1, grid) {
            Ok(c) => {
                let holds = t.assert(c.holds);
                vec![fmt_f64(c.before), fmt_f64(c.after), fmt_f64(c.ratio), bound.clone(), holds]
            }
            Err(Error::Indistinguishable(d)) => {
                vec![fmt_f64(d), String::new(), String::new(), bound.clone(), "indistinguishable".into()]
            }
            Err(e) => return Err(e),
        };
        let mut full = vec![a.0.to_string(), b.0.to_string()];
        full.extend(row);
        t.push(full);
    }
    Ok(t)
}

const IDEAL_HEADER: [&str; 10] = ["check", "s", "lambda", "nu", "mu", "eta", "lhs", "rhs", "ratio", "holds"];

fn verify_ideal(named: &[(&str, &Measure)], grid: &GridSpec) -> Result<Table, Error> {
    let mut t = Table::new(&IDEAL_HEADER);
    let gamma = Measure::standard_gaussian();
    for s in EXPONENTS {
        let members: Vec<(&str, &Measure)> = named
            .iter()
            .copied()
            .filter(|(_, m)| m.q_membership(s).map(|q| q.is_member).unwrap_or(false))
            .collect();
        let record = |t: &mut Table, check: &str, who: [&str; 3], c: InequalityCheck| {
            let holds = t.assert(c.holds);
            let ratio = if c.rhs > 0.0 { fmt_f64(c.lhs / c.rhs) } else { String::new() };
            t.push(vec![
                check.to_string(),
                fmt_f64(s),
                String::new(),
                who[0].to_string(),
                who[1].to_string(),
                who[2].to_string(),
                fmt_f64(c.lhs),
                fmt_f64(c.rhs),
                ratio,
                holds,
            ]);
        };
        for (a, b) in pairs(&members) {
            for lambda in SCALING_FACTORS {
                let c = check_scaling_ideality(a.1, b.1, lambda, s, grid)?;
                let holds = t.assert(c.holds);
                t.push(vec![
                    "scaling".into(),
                    fmt_f64(s),
                    fmt_f64(lambda),
                    a.0.to_string(),
                    b.0.to_string(),
                    String::new(),
                    fmt_f64(c.scaled),
                    fmt_f64(lambda.powf(s) * c.base),
                    fmt_f64(c.ratio),
                    holds,
                ]);
            }
            let c = check_self_convolution_bound(a.1, b.1, s, grid)?;
            record(&mut t, "self-convolution", [a.0, b.0, ""], c);
            for eta in &members {
                let c = check_convolution_invariance(a.1, b.1, eta.1, s, grid)?;
                record(&mut t, "invariance", [a.0, b.0, eta.0], c);
                let c = check_convolution_subadditivity(a.1, eta.1, b.1, &gamma, s, grid)?;
                record(&mut t, "subadditivity", [a.0, b.0, eta.0], c);
                let c = check_triangle(a.1, eta.1, b.1, s, grid)?;
                record(&mut t, "triangle", [a.0, b.0, eta.0], c);
            }
        }
    }
    Ok(t)
}

fn verify_lyapunov(named: &[(&str, &Measure)], steps: u32, grid: &GridSpec) -> Result<Table, Error> {
    let mut t = Table::new(&["measure", "n", "v_before", "v_after", "margin", "holds"]);
    for (name, m) in named {
        let checks = match lyapunov_trajectory(m, steps, grid) {
            Ok(c) => c,
            Err(Error::Indistinguishable(_)) => continue,
            Err(e) => return Err(e),
        };
        for (n, c) in checks.iter().enumerate() {
            let holds = t.assert(c.holds);
            t.push(vec![
                name.to_string(),
                n.to_string(),
                fmt_f64(c.before),
                fmt_f64(c.after),
                fmt_f64(c.before - c.after),
                holds,
            ]);
        }
    }
    Ok(t)
}

fn verify_clt_rate(named: &[(&str, &Measure)], n_max: u32, grid: &GridSpec) -> Result<Table, Error> {
    let mut t = Table::new(&["measure", "n", "lhs", "rhs", "margin", "holds"]);
    for (name, m) in named {
        for n in 2..=n_max {
            let c = clt_rate_check(m, n, grid)?;
            let holds = t.assert(c.holds);
            t.push(vec![
                name.to_string(),
                n.to_string(),
                fmt_f64(c.lhs),
                fmt_f64(c.rhs),
                fmt_f64(c.margin),
                holds,
            ]);
        }
    }
    Ok(t)
}

fn oracle(
    named: &[(&str, &Measure)],
    levels: u32,
    samples: usize,
    seed: u64,
    grid: &GridSpec,
) -> Result<Table, Error> {
    let mut t = Table::new(&["measure", "level", "max_deviation", "envelope", "holds"]);
    for (name, m) in named {
        let r = empirical_flow_check(m, levels, samples, seed, grid)?;
        for (k, dev) in r.per_level.iter().enumerate() {
            let holds = t.assert(*dev <= r.envelope);
            t.push(vec![name.to_string(), k.to_string(), fmt_f64(*dev), fmt_f64(r.envelope), holds]);
        }
    }
    Ok(t)
}
