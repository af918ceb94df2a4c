//! One function per subcommand. Each returns the rendered report and whether
//! it found a mathematical violation.

use serde_json::{json, Value};

use sievelab::chen::{gamma_eval, omega_bound_audit, ChiMode, ScanOptions};
use sievelab::expsum::{
    choose_n, hb_identity_sweep, min_sum, min_sum_table, s_sum, FrequencyWeights, MinSumQuery,
    XiWeights,
};
use sievelab::feasibility::{check_constraints, optimize, Axis, Grid, Params};
use sievelab::modone::SmoothingFunction;
use sievelab::report::{to_json_string, Format, Table};
use sievelab::rosser::{build_rosser, fundamental_check, FundamentalReport};
use sievelab::{Error, Result};

use crate::config::{Command, RunConfig};

/// Identity residual above which a scan counts as a violation.
const IDENTITY_TOL: f64 = 1e-9;
const DEFAULT_N: f64 = 1e6;
const CHI_TABLE_ROWS: u64 = 1000;

pub struct Outcome {
    pub text: String,
    pub violation: bool,
}

pub enum Failure {
    /// Bad parameters discovered after parsing; exit code 2.
    Usage(String),
    /// A computation that could not produce a report.
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

type Res = std::result::Result<Outcome, Failure>;

pub fn dispatch(cfg: &RunConfig) -> Res {
    match cfg.command {
        Command::FeasCheck => feas_check(cfg),
        Command::FeasOptimize => feas_optimize(cfg),
        Command::Scan => scan(cfg),
        Command::RosserVerify => rosser_verify(cfg),
        Command::HbVerify => hb_verify(cfg),
        Command::ExpsumSsum => expsum_ssum(cfg),
        Command::ExpsumMinsum => expsum_minsum(cfg),
        Command::ChiInspect => chi_inspect(cfg),
    }
}

fn render(cfg: &RunConfig, value: &Value, table: impl FnOnce() -> Table) -> Result<String> {
    match cfg.format {
        Format::Json => to_json_string(value),
        Format::Csv => table().to_csv_string(),
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn feas_check(cfg: &RunConfig) -> Res {
    let report = check_constraints(&cfg.params);
    let text = render(cfg, &to_value(&report), || {
        let mut t = Table::new(&["name", "lhs", "rhs", "pass", "slack"]);
        for c in &report.constraints {
            t.push(vec![
                json!(c.name),
                json!(c.lhs),
                json!(c.rhs),
                json!(c.pass),
                json!(c.slack),
            ]);
        }
        t
    })?;
    Ok(Outcome {
        text,
        violation: !report.feasible,
    })
}

fn feas_optimize(cfg: &RunConfig) -> Res {
    let p = &cfg.params;
    let around = |c: f64, h: f64, s: f64| Axis::around(c, h, s);
    let [theta, eta, rho, delta, kappa] = cfg.grid.axes.clone();
    let grid = Grid {
        theta: theta.unwrap_or_else(|| Axis::fixed(p.theta)),
        eta: eta.map_or_else(|| around(p.eta, 0.005, 0.001), Ok)?,
        rho: rho.map_or_else(|| around(p.rho, 0.005, 0.001), Ok)?,
        delta: delta.map_or_else(|| around(p.delta, 0.005, 0.001), Ok)?,
        kappa: kappa.map_or_else(|| around(p.kappa, 0.05, 0.01), Ok)?,
    };
    match optimize(&grid, cfg.objective, cfg.workers) {
        Ok(result) => {
            let text = render(cfg, &to_value(&result), || {
                let b = &result.best.params;
                let mut t = Table::new(&[
                    "objective",
                    "score",
                    "theta",
                    "eta",
                    "rho",
                    "delta",
                    "kappa",
                    "evaluated",
                    "feasible_points",
                ]);
                t.push(vec![
                    to_value(&result.objective),
                    json!(result.score),
                    json!(b.theta),
                    json!(b.eta),
                    json!(b.rho),
                    json!(b.delta),
                    json!(b.kappa),
                    json!(result.evaluated),
                    json!(result.feasible_points),
                ]);
                t
            })?;
            Ok(Outcome {
                text,
                violation: false,
            })
        }
        Err(Error::EmptyFeasibleRegion) => {
            let value = json!({"evaluated": grid.len(), "feasible_points": 0});
            let text = render(cfg, &value, || {
                let mut t = Table::new(&["evaluated", "feasible_points"]);
                t.push(vec![json!(grid.len()), json!(0)]);
                t
            })?;
            Ok(Outcome {
                text,
                violation: true,
            })
        }
        Err(e) => Err(e.into()),
    }
}

fn scan(cfg: &RunConfig) -> Res {
    let n = cfg.n.unwrap_or(DEFAULT_N);
    let params = Params {
        n: Some(n),
        ..cfg.params
    };
    let feas = check_constraints(&params);
    if !feas.feasible {
        return Err(Failure::Usage(format!(
            "infeasible parameters: {}",
            feas.failed().join(", ")
        )));
    }
    let opts = ScanOptions {
        workers: cfg.workers,
        chi_mode: if cfg.debug_chi {
            ChiMode::Constant
        } else {
            ChiMode::Smooth
        },
        keep_records: cfg.records || cfg.format == Format::Csv,
        ..ScanOptions::default()
    };
    let scan = gamma_eval(n, &cfg.alpha, cfg.beta, &params, &opts)?;
    let audit = omega_bound_audit(n, &params, cfg.workers)?;
    let violation = !scan.identity_holds(IDENTITY_TOL)
        || !scan.witnesses.violations.is_empty()
        || !audit.violations.is_empty();
    let text = render(
        cfg,
        &json!({"scan": to_value(&scan), "omega_audit": to_value(&audit)}),
        || scan.records_table(),
    )?;
    Ok(Outcome { text, violation })
}

fn rosser_verify(cfg: &RunConfig) -> Res {
    let mut reports: Vec<FundamentalReport> = Vec::new();
    for &sign in &cfg.signs {
        if cfg.sweep {
            for z in 3..=cfg.z.floor() as u64 {
                for level in 1..=cfg.level.floor() as u64 {
                    reports.push(fundamental_check(
                        &build_rosser(sign, level as f64, z as f64)?,
                        cfg.workers,
                    )?);
                }
            }
        } else {
            reports.push(fundamental_check(
                &build_rosser(sign, cfg.level, cfg.z)?,
                cfg.workers,
            )?);
        }
    }
    let failed = reports.iter().filter(|r| !r.passed()).count();
    let value = json!({"configs": reports.len(), "failed": failed, "reports": to_value(&reports)});
    let text = render(cfg, &value, || {
        let mut t = Table::new(&[
            "sign",
            "z",
            "D",
            "checked",
            "violations",
            "table_violations",
        ]);
        for r in &reports {
            t.push(vec![
                json!(r.sign.to_string()),
                json!(r.z),
                json!(r.level),
                json!(r.checked),
                json!(r.violations.len()),
                json!(r.table_violations.len()),
            ]);
        }
        t
    })?;
    Ok(Outcome {
        text,
        violation: failed > 0,
    })
}

fn hb_verify(cfg: &RunConfig) -> Res {
    let x = cfg.x.unwrap_or(cfg.nmax as f64);
    let sweeps = cfg
        .k
        .iter()
        .map(|&k| hb_identity_sweep(cfg.nmax, k, x, cfg.workers))
        .collect::<Result<Vec<_>>>()?;
    let violation = sweeps.iter().any(|s| !s.pass);
    let text = render(cfg, &to_value(&sweeps), || {
        let mut t = Table::new(&[
            "k",
            "nmax",
            "x",
            "z_floor",
            "checked",
            "max_abs_error",
            "failures",
            "pass",
        ]);
        for s in &sweeps {
            t.push(vec![
                json!(s.k),
                json!(s.nmax),
                json!(s.x),
                json!(s.z_floor),
                json!(s.checked),
                json!(s.max_abs_error),
                json!(s.failures.len()),
                json!(s.pass),
            ]);
        }
        t
    })?;
    Ok(Outcome { text, violation })
}

fn expsum_ssum(cfg: &RunConfig) -> Res {
    if let Some(q) = cfg.q {
        let convergents = cfg.alpha.convergents(80)?;
        if !convergents.denominators().any(|d| d == q) {
            return Err(Failure::Usage(format!(
                "q: {q} is not a convergent denominator of {}",
                cfg.alpha
            )));
        }
    }
    let n = match (cfg.n, cfg.q) {
        (Some(n), _) => n,
        (None, Some(q)) => choose_n(q, cfg.params.theta)?,
        (None, None) => return Err(Failure::Usage("expsum-ssum needs n or q".into())),
    };
    let xi = if cfg.use_gamma_weights {
        XiWeights::Gamma
    } else {
        XiWeights::Custom([(1, 1.0.into())].into_iter().collect())
    };
    let report = s_sum(
        n,
        &cfg.alpha,
        cfg.beta,
        &cfg.params,
        &xi,
        &FrequencyWeights::Smoothing,
        cfg.q,
        cfg.workers,
    )?;
    let text = render(cfg, &to_value(&report), || {
        let mut t = Table::new(&["N", "Q", "D", "H", "S_re", "S_im", "abs_S", "ratio_target"]);
        t.push(vec![
            json!(report.n),
            json!(report.q),
            json!(report.level),
            json!(report.cutoff),
            json!(report.s_re),
            json!(report.s_im),
            json!(report.abs_s),
            json!(report.ratio_target),
        ]);
        t
    })?;
    Ok(Outcome {
        text,
        violation: false,
    })
}

fn expsum_minsum(cfg: &RunConfig) -> Res {
    let convergents = cfg.alpha.convergents(cfg.count)?;
    let mut rows = Vec::new();
    for c in convergents.terms().iter().filter(|c| c.denom >= 2) {
        let q = c.denom as f64;
        let query = MinSumQuery::new(
            cfg.alpha,
            c.numer,
            c.denom,
            cfg.x.unwrap_or(q),
            cfg.y.unwrap_or(q * q),
        )?;
        rows.push(min_sum(&query)?);
    }
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let value =
        json!({"alpha": cfg.alpha.to_string(), "rows": to_value(&rows), "max_ratio": max_ratio});
    let text = render(cfg, &value, || min_sum_table(&rows))?;
    Ok(Outcome {
        text,
        violation: false,
    })
}

fn chi_inspect(cfg: &RunConfig) -> Res {
    let n = cfg.n.unwrap_or(DEFAULT_N);
    let chi = SmoothingFunction::for_scale(n, cfg.params.theta)?;
    let tail = chi.tail_majorant(chi.cutoff());
    let support = chi.support_violations(chi.delta() / 1000.0);
    let max_g = (1..=chi.cutoff().min(100_000) as i64)
        .map(|k| chi.g(k).abs())
        .fold(0.0, f64::max);
    let value = json!({
        "N": n,
        "theta": cfg.params.theta,
        "delta": chi.delta(),
        "order": chi.order(),
        "half_width": chi.half_width(),
        "cutoff": chi.cutoff(),
        "support_radius": chi.support_radius(),
        "g0": chi.g(0),
        "max_abs_g_nonzero": max_g,
        "tail_majorant": tail,
        "inverse_n": 1.0 / n,
        "support_violations": support.len(),
    });
    let violation = tail > 1.0 / n || !support.is_empty();
    let text = render(cfg, &value, || {
        let mut t = Table::new(&["k", "g"]);
        for k in 0..=chi.cutoff().min(CHI_TABLE_ROWS) {
            t.push(vec![json!(k), json!(chi.g(k as i64))]);
        }
        t
    })?;
    Ok(Outcome { text, violation })
}
