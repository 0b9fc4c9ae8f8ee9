//! Implementations behind the `npqueue` binary.
//!
//! Each `run_*` function builds its output record and writes it to the
//! requested sink; the binary itself only parses flags and maps errors to
//! exit codes (0 success, 1 validation failure, 2 usage/domain error).

use crate::asymptotics::{self, TailAsymptote};
use crate::dist::Method;
use crate::model::ModelParams;
use crate::output::{format_float, to_json_value, Cell, OutputFormat, Table};
use crate::validation::{
    self, aggregation_test, ctmc_oracle, monte_carlo, nn_test, quadratic_test, xhi_test, xlo_test,
    DEFAULT_P_LIM, DEFAULT_P_LIM_XHI,
};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;

/// Where rendered output goes.
pub fn write_output(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::Domain(format!("cannot write {}: {e}", path.display()))),
    }
}

fn parse_engine(method: &str, allow_cheb: bool) -> Result<Method> {
    match method {
        "qr" => Ok(Method::QuadraticRecurrence),
        "ri" => Ok(Method::RIntegral),
        "cheb" if allow_cheb => Ok(Method::Chebyshev),
        other => Err(Error::Domain(format!(
            "unknown method '{other}' (expected qr, ri{})",
            if allow_cheb { ", cheb" } else { "" }
        ))),
    }
}

/// `marginal`: the wait-conditional low-priority marginal with its
/// negative base-10 logarithm.
pub fn run_marginal(
    params: &ModelParams,
    n_max: usize,
    method: &str,
    format: OutputFormat,
    out: Option<&Path>,
) -> Result<()> {
    let engine = parse_engine(method, false)?;
    let lo = validation::lo_marginal_by_method(params, n_max, engine)?;
    let mut table = Table::new("marginal", vec!["n", "f_lo", "neglog10"])
        .meta("r", format_float(params.r()))
        .meta("nu", format_float(params.nu()))
        .meta("method", engine.tag())
        .meta("conditional", "true");
    for (n, &v) in lo.values.iter().enumerate() {
        let neglog = if v > 0.0 { -v.log10() } else { f64::INFINITY };
        table.push(vec![Cell::Int(n as i64), Cell::Float(v), Cell::Float(neglog)]);
    }
    write_output(&table.render(format), out)
}

/// `joint`: the dense wait-conditional joint PMF in long form, optionally
/// with the logarithmic map `f <- max(0, 1 + log10(f/f_max)/20)` applied.
pub fn run_joint(
    params: &ModelParams,
    n_max: usize,
    m_max: usize,
    method: &str,
    logmap: bool,
    format: OutputFormat,
    out: Option<&Path>,
) -> Result<()> {
    let engine = parse_engine(method, true)?;
    let joint = validation::joint_by_method(params, n_max, m_max, engine)?;
    let value_col = if logmap { "f_scaled" } else { "f" };
    let mut table = Table::new("joint", vec!["n", "m", value_col])
        .meta("r", format_float(params.r()))
        .meta("nu", format_float(params.nu()))
        .meta("method", engine.tag())
        .meta("logmap", logmap)
        .meta("conditional", "true");
    let f_max = joint.max_value();
    for n in 0..=n_max {
        for m in 0..=m_max {
            let f = joint.get(n, m);
            let v = if logmap {
                if f > 0.0 {
                    (1.0 + (f / f_max).log10() / 20.0).max(0.0)
                } else {
                    0.0
                }
            } else {
                f
            };
            table.push(vec![Cell::Int(n as i64), Cell::Int(m as i64), Cell::Float(v)]);
        }
    }
    write_output(&table.render(format), out)
}

/// `asymptote`: computed marginal, its tail law, and the relative error.
pub fn run_asymptote(
    params: &ModelParams,
    n_lo: usize,
    n_hi: usize,
    format: OutputFormat,
    out: Option<&Path>,
) -> Result<()> {
    let asym = TailAsymptote::new(params)?;
    let marginal = crate::quadratic::lo_marginal_qr(params, n_hi);
    let report =
        asymptotics::asymptote_convergence_report_for(params, &marginal, n_lo.max(1), n_hi)?;
    let mut table = Table::new("asymptote", vec!["n", "f_lo", "asym", "rel_err"])
        .meta("r", format_float(params.r()))
        .meta("nu", format_float(params.nu()))
        .meta("regime", report.regime.label())
        .meta("chi", format_float(asym.chi));
    for &(n, err) in &report.rel_errors {
        table.push(vec![
            Cell::Int(n as i64),
            Cell::Float(marginal.values[n]),
            Cell::Float(asym.eval(n)),
            Cell::Float(err),
        ]);
    }
    write_output(&table.render(format), out)
}

/// Which validation tests to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum TestKind {
    Agg,
    Xhi,
    Xlo,
    Nn,
    Qr,
    Oracle,
    Mc,
}

impl TestKind {
    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "agg" => TestKind::Agg,
            "xhi" => TestKind::Xhi,
            "xlo" => TestKind::Xlo,
            "nn" => TestKind::Nn,
            "qr" => TestKind::Qr,
            "oracle" => TestKind::Oracle,
            "mc" => TestKind::Mc,
            other => {
                return Err(Error::Domain(format!(
                    "unknown test '{other}' (expected agg, xhi, xlo, nn, qr, oracle, mc)"
                )))
            }
        })
    }
}

/// Options for [`run_validate`].
#[derive(Debug, Clone)]
pub struct ValidateOpts {
    pub rs: Vec<f64>,
    pub nus: Vec<f64>,
    pub tests: Vec<TestKind>,
    pub methods: Vec<Method>,
    pub n_lim: usize,
    /// Overrides the per-test default floors when set.
    pub p_lim: Option<f64>,
    pub seed: u64,
    pub events: u64,
    pub servers: u32,
}

/// The standard parameter grid: every traffic intensity from moderate to
/// extreme against the full sweep of high-priority fractions.
pub fn default_grid() -> (Vec<f64>, Vec<f64>) {
    let rs = vec![0.5, 0.75, 0.9, 0.95, 0.99, 0.999, 0.9999];
    let nus: Vec<f64> = (1..=19).map(|i| i as f64 * 0.05).collect();
    (rs, nus)
}

impl Default for ValidateOpts {
    fn default() -> Self {
        let (rs, nus) = default_grid();
        ValidateOpts {
            rs,
            nus,
            tests: vec![TestKind::Agg, TestKind::Xhi, TestKind::Xlo, TestKind::Nn],
            methods: vec![Method::QuadraticRecurrence, Method::RIntegral],
            n_lim: validation::DEFAULT_N_LIM,
            p_lim: None,
            seed: 1,
            events: 1_000_000,
            servers: 1,
        }
    }
}

#[derive(Serialize)]
struct OracleRecord {
    test_name: &'static str,
    r: f64,
    nu: f64,
    truncation: usize,
    max_abs_diff_qr: f64,
    max_abs_diff_ri: f64,
    residual: f64,
    tail_bound: f64,
    passed: bool,
}

#[derive(Serialize)]
struct McRecord {
    test_name: &'static str,
    r: f64,
    nu: f64,
    servers: u32,
    events: u64,
    seed: u64,
    cells_checked: usize,
    cells_outside_3_sigma: usize,
    max_abs_z: f64,
    passed: bool,
}

enum Record {
    Mop(validation::MopReport),
    QrTable(validation::QuadraticTestReport),
    Oracle(OracleRecord),
    Mc(McRecord),
}

impl Record {
    fn sort_key(&self) -> (String, u64, u64, String) {
        fn bits(x: f64) -> u64 {
            x.to_bits()
        }
        match self {
            Record::Mop(m) => (m.test_name.clone(), bits(m.r), bits(m.nu), m.method.clone()),
            Record::QrTable(q) => ("qr".into(), bits(q.mop.r), bits(q.mop.nu), q.mop.method.clone()),
            Record::Oracle(o) => ("oracle".into(), bits(o.r), bits(o.nu), String::new()),
            Record::Mc(m) => ("zmc".into(), bits(m.r), bits(m.nu), String::new()),
        }
    }

    fn passed(&self) -> bool {
        match self {
            Record::Mop(m) => m.passed,
            Record::QrTable(q) => q.mop.passed,
            Record::Oracle(o) => o.passed,
            Record::Mc(m) => m.passed,
        }
    }

    fn to_json_line(&self) -> String {
        match self {
            Record::Mop(m) => to_json_value(m),
            Record::QrTable(q) => to_json_value(q),
            Record::Oracle(o) => to_json_value(o),
            Record::Mc(m) => to_json_value(m),
        }
    }
}

fn oracle_check(params: &ModelParams) -> Result<OracleRecord> {
    let out = ctmc_oracle(params, None)?;
    let window = 20usize.min(out.truncation);
    let qr = validation::joint_by_method(params, window, window, Method::QuadraticRecurrence)?;
    let ri = validation::joint_by_method(params, window, window, Method::RIntegral)?;
    let mut diff_qr = 0.0f64;
    let mut diff_ri = 0.0f64;
    for n in 0..=window {
        for m in 0..=window {
            diff_qr = diff_qr.max((out.joint.get(n, m) - qr.get(n, m)).abs());
            diff_ri = diff_ri.max((out.joint.get(n, m) - ri.get(n, m)).abs());
        }
    }
    Ok(OracleRecord {
        test_name: "oracle",
        r: params.r(),
        nu: params.nu(),
        truncation: out.truncation,
        max_abs_diff_qr: diff_qr,
        max_abs_diff_ri: diff_ri,
        residual: out.residual,
        tail_bound: out.tail_bound,
        passed: diff_qr <= 1e-10 && diff_ri <= 1e-10,
    })
}

fn mc_check(params: &ModelParams, opts: &ValidateOpts) -> Result<McRecord> {
    let with_servers = params.clone().with_servers(opts.servers)?;
    let sim = monte_carlo(&with_servers, opts.events, opts.seed)?;
    let exact = validation::joint_by_method(
        params,
        sim.estimates.n_max.max(2),
        sim.estimates.m_max.max(2),
        Method::QuadraticRecurrence,
    )?;
    let mut checked = 0usize;
    let mut outside = 0usize;
    let mut max_z = 0.0f64;
    for n in 0..=exact.n_max {
        for m in 0..=exact.m_max {
            let want = exact.get(n, m);
            if want <= 1e-3 {
                continue;
            }
            checked += 1;
            let got = if n <= sim.estimates.n_max && m <= sim.estimates.m_max {
                sim.estimates.get(n, m)
            } else {
                0.0
            };
            let se = if n <= sim.estimates.n_max && m <= sim.estimates.m_max {
                sim.std_error(n, m)
            } else {
                f64::INFINITY
            };
            let z = (got - want).abs() / se;
            max_z = max_z.max(z);
            if z > 3.0 {
                outside += 1;
            }
        }
    }
    Ok(McRecord {
        test_name: "mc",
        r: params.r(),
        nu: params.nu(),
        servers: opts.servers,
        events: opts.events,
        seed: opts.seed,
        cells_checked: checked,
        cells_outside_3_sigma: outside,
        max_abs_z: max_z,
        passed: outside == 0 && checked > 0,
    })
}

/// `validate`: runs the requested tests over the parameter grid, writing
/// one record per (test, point, method) in deterministic order. Returns
/// `false` when any record failed its threshold.
pub fn run_validate(opts: &ValidateOpts, format: OutputFormat, out: Option<&Path>) -> Result<bool> {
    let mut points = Vec::new();
    for &r in &opts.rs {
        for &nu in &opts.nus {
            points.push(ModelParams::new(r, nu)?);
        }
    }
    let mop_tests: Vec<TestKind> = opts
        .tests
        .iter()
        .copied()
        .filter(|t| matches!(t, TestKind::Agg | TestKind::Xhi | TestKind::Xlo | TestKind::Nn))
        .collect();

    // The grid points are independent; fan them out.
    let mut records: Vec<Record> = points
        .par_iter()
        .map(|params| -> Result<Vec<Record>> {
            let mut local = Vec::new();
            for &test in &mop_tests {
                for &method in &opts.methods {
                    let report = match test {
                        TestKind::Agg => aggregation_test(
                            params,
                            method,
                            opts.n_lim,
                            opts.p_lim.unwrap_or(DEFAULT_P_LIM),
                        )?,
                        TestKind::Xhi => xhi_test(
                            params,
                            method,
                            opts.n_lim,
                            opts.p_lim.unwrap_or(DEFAULT_P_LIM_XHI),
                        )?,
                        TestKind::Xlo => xlo_test(
                            params,
                            method,
                            opts.n_lim,
                            opts.p_lim.unwrap_or(DEFAULT_P_LIM),
                        )?,
                        TestKind::Nn => nn_test(
                            params,
                            method,
                            opts.n_lim,
                            opts.p_lim.unwrap_or(DEFAULT_P_LIM),
                        )?,
                        _ => unreachable!(),
                    };
                    local.push(Record::Mop(report));
                }
            }
            if opts.tests.contains(&TestKind::Qr) {
                let rep = quadratic_test(params, opts.n_lim, opts.p_lim.unwrap_or(DEFAULT_P_LIM))?;
                local.push(Record::QrTable(rep));
            }
            if opts.tests.contains(&TestKind::Oracle) {
                local.push(Record::Oracle(oracle_check(params)?));
            }
            Ok(local)
        })
        .collect::<Result<Vec<Vec<Record>>>>()?
        .into_iter()
        .flatten()
        .collect();

    // Monte Carlo runs sequentially (it is the only stochastic test and
    // carries its own seed).
    if opts.tests.contains(&TestKind::Mc) {
        for params in &points {
            records.push(Record::Mc(mc_check(params, opts)?));
        }
    }

    records.sort_by_key(|r| r.sort_key());
    let all_passed = records.iter().all(Record::passed);

    let text = match format {
        OutputFormat::Json => {
            let mut s = String::new();
            for rec in &records {
                s.push_str(&rec.to_json_line());
                s.push('\n');
            }
            s
        }
        OutputFormat::Csv => {
            let mut table = Table::new(
                "validate",
                vec![
                    "test", "method", "r", "nu", "xi", "worst_n", "worst_m", "points", "n_hi",
                    "n_lo", "p_min", "passed",
                ],
            )
            .meta("n_lim", opts.n_lim)
            .meta("p_lim", opts.p_lim.map_or("default".into(), format_float));
            for rec in &records {
                match rec {
                    Record::Mop(m) => table.push(vec![
                        Cell::Text(m.test_name.clone()),
                        Cell::Text(m.method.clone()),
                        Cell::Float(m.r),
                        Cell::Float(m.nu),
                        Cell::Float(m.xi),
                        Cell::Int(m.worst_point.0 as i64),
                        Cell::Int(m.worst_point.1 as i64),
                        Cell::Int(m.points as i64),
                        Cell::Text(String::new()),
                        Cell::Text(String::new()),
                        Cell::Text(String::new()),
                        Cell::Int(m.passed as i64),
                    ]),
                    Record::QrTable(q) => table.push(vec![
                        Cell::Text("qr".into()),
                        Cell::Text(q.mop.method.clone()),
                        Cell::Float(q.mop.r),
                        Cell::Float(q.mop.nu),
                        Cell::Float(q.mop.xi),
                        Cell::Int(q.mop.worst_point.0 as i64),
                        Cell::Int(q.mop.worst_point.1 as i64),
                        Cell::Int(q.mop.points as i64),
                        Cell::Int(q.n_hi as i64),
                        Cell::Int(q.n_lo as i64),
                        Cell::Float(q.p_min),
                        Cell::Int(q.mop.passed as i64),
                    ]),
                    Record::Oracle(_) | Record::Mc(_) => {
                        return Err(Error::Domain(
                            "oracle and mc records are JSON-only; use --format json".into(),
                        ))
                    }
                }
            }
            table.to_csv()
        }
    };
    write_output(&text, out)?;
    Ok(all_passed)
}

/// Parses a comma-separated list of floats.
pub fn parse_float_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|e| Error::Domain(format!("bad number '{tok}': {e}")))
        })
        .collect()
}

/// Parses the comma-separated test list.
pub fn parse_tests(s: &str) -> Result<Vec<TestKind>> {
    let mut tests: Vec<TestKind> = s
        .split(',')
        .map(|tok| TestKind::parse(tok.trim()))
        .collect::<Result<Vec<_>>>()?;
    tests.sort();
    tests.dedup();
    Ok(tests)
}

/// Parses the comma-separated engine list for `validate`.
pub fn parse_methods(s: &str) -> Result<Vec<Method>> {
    s.split(',').map(|tok| parse_engine(tok.trim(), true)).collect()
}

/// Renders a compact human-readable summary of validation records to
/// stderr-friendly text (used by the binary after a failing run).
pub fn summarize_failures(all_passed: bool) -> String {
    let mut s = String::new();
    if !all_passed {
        let _ = write!(s, "validation FAILED: at least one record fell below its threshold");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn list_parsers() {
        assert_eq!(parse_float_list("0.5, 0.9").unwrap(), vec![0.5, 0.9]);
        assert!(parse_float_list("0.5,x").is_err());
        assert_eq!(parse_tests("nn,agg,agg").unwrap(), vec![TestKind::Agg, TestKind::Nn]);
        assert!(parse_tests("bogus").is_err());
        assert_eq!(
            parse_methods("qr,cheb").unwrap(),
            vec![Method::QuadraticRecurrence, Method::Chebyshev]
        );
    }

    #[test]
    fn marginal_degenerate_method_is_rejected() {
        let p = ModelParams::new(0.9, 0.5).unwrap();
        let err = run_marginal(&p, 5, "cheb", OutputFormat::Csv, Some(Path::new("/dev/null")));
        assert!(matches!(err, Err(Error::Domain(_))));
    }

    #[test]
    fn validate_single_point_runs_all_mop_tests() {
        let opts = ValidateOpts {
            rs: vec![0.9],
            nus: vec![0.5],
            n_lim: 200,
            ..ValidateOpts::default()
        };
        let tmp = std::env::temp_dir().join("npqueue_validate_test.jsonl");
        let ok = run_validate(&opts, OutputFormat::Json, Some(&tmp)).unwrap();
        assert!(ok);
        let text = std::fs::read_to_string(&tmp).unwrap();
        // 4 tests x 2 engines.
        assert_eq!(text.lines().count(), 8);
        assert!(text.contains("\"test_name\":\"agg\""));
        let _ = std::fs::remove_file(&tmp);
    }
}
