//! Front-end plumbing: key=value configuration, CSV emission for time
//! series, parameter sweeps and the bound surface, and the validation suite.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::dynamics::{cycle_propagator, evolve, DEFECT_TOL};
use crate::engine::{ring_frequencies, EngineConfig, EngineModel};
use crate::error::{Error, Result};
use crate::gaussian::{entropy_from_nu, ln_two_sinh, thermal_nu};
use crate::sim::{simulate, Simulation};
use crate::thermo::{bound_surface, entropy_report};

/// What the front end should do.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunMode {
    Run,
    Sweep,
    Validate,
    BoundSurface,
}

/// Parsed configuration plus front-end options.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub engine: EngineConfig,
    pub mode: RunMode,
    pub sweep_t_h: Vec<f64>,
    pub sweep_lambda_b: Vec<f64>,
    pub surface_gamma: Vec<f64>,
    pub surface_eta_th: Vec<f64>,
    pub workers: usize,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Parses line-oriented `key = value` text. `#` starts a comment, blank
/// lines are ignored, unknown keys are errors and missing keys take the
/// defaults. List values accept `a,b,c` or `lo:hi:n` (inclusive linspace).
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut engine = EngineConfig::default();
    let mut workers = 1usize;
    let mut sweep_t_h: Option<Vec<f64>> = None;
    let mut sweep_lambda_b: Option<Vec<f64>> = None;
    let mut surface_gamma: Option<Vec<f64>> = None;
    let mut surface_eta_th: Option<Vec<f64>> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: line_no,
            msg: format!("expected `key = value`, got `{line}`"),
        })?;
        let key = key.trim();
        let value = value.trim();
        let float = |v: &str| -> Result<f64> {
            v.parse::<f64>().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("`{v}` is not a number"),
            })
        };
        let integer = |v: &str| -> Result<usize> {
            v.parse::<usize>().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("`{v}` is not a nonnegative integer"),
            })
        };
        match key {
            "omega_c" => engine.omega_c = float(value)?,
            "omega_h" => engine.omega_h = float(value)?,
            "lambda" => engine.lambda = float(value)?,
            "lambda_c" => engine.lambda_c = float(value)?,
            "lambda_h" => engine.lambda_h = float(value)?,
            "T_c" => engine.t_c = float(value)?,
            "T_h" => engine.t_h = float(value)?,
            "n_bath" => engine.n_bath = integer(value)?,
            "n_cycles" => engine.n_cycles = integer(value)?,
            "n_steps_on" => engine.n_steps_on = integer(value)?,
            "delta_frac" => engine.delta_frac = float(value)?,
            "workers" => {
                workers = integer(value)?;
                if workers == 0 {
                    return Err(Error::InvariantViolation(
                        "workers must be at least 1".into(),
                    ));
                }
            }
            "sweep_T_h" => sweep_t_h = Some(parse_list(value, line_no)?),
            "sweep_lambda_b" => sweep_lambda_b = Some(parse_list(value, line_no)?),
            "surface_gamma" => surface_gamma = Some(parse_list(value, line_no)?),
            "surface_eta_th" => surface_eta_th = Some(parse_list(value, line_no)?),
            other => {
                return Err(Error::UnknownKey {
                    line: line_no,
                    key: other.to_string(),
                })
            }
        }
    }
    engine.validate()?;
    let sweep_t_h = sweep_t_h.unwrap_or_else(|| linspace(1.7, 8.0, 10));
    let sweep_lambda_b =
        sweep_lambda_b.unwrap_or_else(|| linspace(engine.lambda / 15.0, engine.lambda / 2.0, 10));
    if sweep_t_h.is_empty() || sweep_lambda_b.is_empty() {
        return Err(Error::InvariantViolation("sweep ranges must be nonempty".into()));
    }
    Ok(RunConfig {
        engine,
        mode: RunMode::Run,
        sweep_t_h,
        sweep_lambda_b,
        surface_gamma: surface_gamma.unwrap_or_else(|| linspace(0.02, 1.0, 50)),
        surface_eta_th: surface_eta_th.unwrap_or_else(|| linspace(0.02, 1.0, 50)),
        workers,
    })
}

fn parse_list(value: &str, line_no: usize) -> Result<Vec<f64>> {
    let bad = |msg: String| Error::Parse { line: line_no, msg };
    if value.contains(':') {
        let parts: Vec<&str> = value.split(':').collect();
        if parts.len() != 3 {
            return Err(bad(format!("range syntax is lo:hi:n, got `{value}`")));
        }
        let lo: f64 = parts[0]
            .trim()
            .parse()
            .map_err(|_| bad(format!("`{}` is not a number", parts[0])))?;
        let hi: f64 = parts[1]
            .trim()
            .parse()
            .map_err(|_| bad(format!("`{}` is not a number", parts[1])))?;
        let n: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| bad(format!("`{}` is not a count", parts[2])))?;
        if n == 0 {
            return Err(bad("range count must be positive".into()));
        }
        return Ok(linspace(lo, hi, n));
    }
    value
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| bad(format!("`{tok}` is not a number")))
        })
        .collect()
}

/// Full-precision, locale-independent float formatting (17 significant
/// digits).
fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt).unwrap_or_default()
}

pub const TIMESERIES_HEADER: &str = "cycle,t,W_cycle,W_cum,Q_c,Q_h,dU_Sc,dU_Sh,dU_int_c,dU_int_h,\
S_Sc,S_Sh,S_Rc,S_Rh,I_SR,C_S,C_R,D_Rc,D_Rh,D_Sc,D_Sh,Sigma,sigma,d_sigma,Tmin_d_sigma,\
eta,gamma,eta_th,eta_C,eta_O,ratio,regime,secondlaw_residual,firstlaw_residual,entropy_drift";

/// One CSV row per cycle with all boundary quantities.
pub fn run_timeseries(cfg: &RunConfig) -> Result<String> {
    let sim = simulate(&cfg.engine)?;
    Ok(timeseries_csv(&sim))
}

pub fn timeseries_csv(sim: &Simulation) -> String {
    let mut out = String::new();
    out.push_str(TIMESERIES_HEADER);
    out.push('\n');
    let mut w_cum = 0.0;
    for rec in &sim.records {
        w_cum += rec.ledger.w_tot;
        let e = &rec.efficiency;
        let r = &rec.report;
        let cols = [
            rec.cycle.to_string(),
            fmt(rec.t_end),
            fmt(rec.ledger.w_tot),
            fmt(w_cum),
            fmt(rec.ledger.heat_c),
            fmt(rec.ledger.heat_h),
            fmt(rec.ledger.du_sys_c),
            fmt(rec.ledger.du_sys_h),
            fmt(rec.ledger.du_int_c),
            fmt(rec.ledger.du_int_h),
            fmt(r.s_sys_c),
            fmt(r.s_sys_h),
            fmt(r.s_bath_c),
            fmt(r.s_bath_h),
            fmt(r.mutual_info),
            fmt(r.corr_sys),
            fmt(r.corr_res),
            fmt(r.d_bath_c),
            fmt(r.d_bath_h),
            fmt(r.d_sys_c),
            fmt(r.d_sys_h),
            fmt(r.production),
            fmt(r.resource),
            fmt(rec.d_sigma),
            fmt(e.t_min * rec.d_sigma),
            fmt_opt(e.eta),
            fmt(e.gamma),
            fmt_opt(e.eta_th),
            fmt(e.eta_carnot),
            fmt(e.eta_otto),
            fmt_opt(e.ratio),
            e.regime.to_string(),
            fmt(rec.second_law_residual),
            fmt(rec.first_law_residual),
            fmt(rec.entropy_drift),
        ];
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    out
}

pub const SWEEP_HEADER: &str =
    "T_h,lambda_b,W_tot,gamma,eta_th,eta,ratio,regime,bound,error";

/// One row per grid point with cycle-1 quantities. Points run concurrently
/// up to `workers`; per-point failures land in the error column and the
/// sweep continues.
pub fn run_sweep(cfg: &RunConfig) -> Result<String> {
    let points: Vec<(f64, f64)> = cfg
        .sweep_t_h
        .iter()
        .flat_map(|&t_h| cfg.sweep_lambda_b.iter().map(move |&l| (t_h, l)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::InvariantViolation(format!("thread pool: {e}")))?;
    let base = cfg.engine.clone();
    let rows: Vec<String> = pool.install(|| {
        points
            .par_iter()
            .map(|&(t_h, lambda_b)| sweep_row(&base, t_h, lambda_b))
            .collect()
    });
    let mut out = String::new();
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    Ok(out)
}

fn sweep_row(base: &EngineConfig, t_h: f64, lambda_b: f64) -> String {
    let cfg = EngineConfig {
        t_h,
        lambda_c: lambda_b,
        lambda_h: lambda_b,
        n_cycles: 1,
        ..base.clone()
    };
    match simulate(&cfg) {
        Ok(sim) => {
            let rec = &sim.records[0];
            let e = &rec.efficiency;
            let bound = match (e.gamma > 0.0, e.eta_th) {
                (true, Some(th)) if e.gamma * th > 0.0 => {
                    Some(1.0 / (e.gamma * th) - 1.0)
                }
                _ => None,
            };
            [
                fmt(t_h),
                fmt(lambda_b),
                fmt(rec.ledger.w_tot),
                fmt(e.gamma),
                fmt_opt(e.eta_th),
                fmt_opt(e.eta),
                fmt_opt(e.ratio),
                e.regime.to_string(),
                fmt_opt(bound),
                String::new(),
            ]
            .join(",")
        }
        Err(err) => format!(
            "{},{},,,,,,,,{}",
            fmt(t_h),
            fmt(lambda_b),
            err.to_string().replace(',', ";")
        ),
    }
}

pub const SURFACE_HEADER: &str = "gamma,eta_th,bound,guaranteed_thermal";

/// Device-independent bound surface on the configured (γ, η_th) grids.
pub fn run_bound_surface(cfg: &RunConfig) -> Result<String> {
    let surface = bound_surface(&cfg.surface_gamma, &cfg.surface_eta_th)?;
    let mut out = String::new();
    out.push_str(SURFACE_HEADER);
    out.push('\n');
    for (i, &g) in surface.gammas.iter().enumerate() {
        for (j, &e) in surface.eta_ths.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                fmt(g),
                fmt(e),
                fmt(surface.values[(i, j)]),
                surface.guaranteed[i][j]
            );
        }
    }
    Ok(out)
}

/// One validation check: a named residual against its tolerance.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub residual: f64,
    pub tol: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.residual.is_finite() && self.residual <= self.tol
    }
}

pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{:<38} residual {:>12.3e}  tol {:>8.1e}  {}",
                c.name,
                c.residual,
                c.tol,
                if c.passed() { "PASS" } else { "FAIL" }
            );
        }
        let _ = writeln!(
            out,
            "validation: {}",
            if self.all_passed() { "all checks passed" } else { "FAILURES present" }
        );
        out
    }
}

/// Oracle and invariant suite at reduced scale: n_bath is forced to 60 and
/// the run is shortened to 10 cycles; every other knob is honored.
pub fn run_validate(cfg: &RunConfig) -> ValidationReport {
    let mut checks = Vec::new();

    // scalar oracles at ω = 1, T = 0.8
    let nu_oracle = 0.5 / f64::tanh(0.625);
    let nbar = 1.0 / (f64::exp(1.25) - 1.0);
    let entropy_oracle = (nbar + 1.0) * (nbar + 1.0).ln() - nbar * nbar.ln();
    checks.push(Check {
        name: "thermal nu vs coth oracle",
        residual: (thermal_nu(1.0, 0.8) - nu_oracle).abs(),
        tol: 1e-10,
    });
    checks.push(Check {
        name: "thermal entropy vs occupation oracle",
        residual: (entropy_from_nu(&[thermal_nu(1.0, 0.8)]) - entropy_oracle).abs(),
        tol: 1e-10,
    });
    checks.push(Check {
        name: "log partition vs scalar oracle",
        residual: (-ln_two_sinh(0.625) - (-(2.0 * f64::sinh(0.625)).ln())).abs(),
        tol: 1e-10,
    });

    let engine_cfg = EngineConfig {
        n_bath: 60,
        n_cycles: cfg.engine.n_cycles.min(10),
        ..cfg.engine.clone()
    };

    // circulant spectrum against a dense eigensolve
    let spectrum_residual = (|| -> Result<f64> {
        let model = EngineModel::new(&engine_cfg)?;
        let dense = model.bath_c_hamiltonian().normal_modes()?;
        let closed = ring_frequencies(engine_cfg.omega_c, engine_cfg.lambda_c, engine_cfg.n_bath)?;
        Ok(dense
            .frequencies()
            .iter()
            .zip(&closed)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    })();
    checks.push(Check {
        name: "ring spectrum vs circulant formula",
        residual: spectrum_residual.unwrap_or(f64::NAN),
        tol: 1e-10,
    });

    // drive periodicity
    let periodicity = (|| -> Result<f64> {
        let model = EngineModel::new(&engine_cfg)?;
        let p = model.protocol();
        let tau = p.period();
        Ok((0..1000)
            .map(|i| {
                let t = tau * i as f64 / 1000.0;
                (p.value(t + tau) - p.value(t)).abs()
            })
            .fold(0.0, f64::max))
    })();
    checks.push(Check {
        name: "drive periodicity",
        residual: periodicity.unwrap_or(f64::NAN),
        tol: 1e-12,
    });

    // symplectic defect of the cycle propagator at the configured step count
    let defect = (|| -> Result<f64> {
        let model = EngineModel::new(&engine_cfg)?;
        match cycle_propagator(&model, engine_cfg.n_steps_on) {
            Ok(cyc) => Ok(cyc.symplecticity_defect()),
            Err(Error::SymplecticityLost { defect }) => Ok(defect),
            Err(e) => Err(e),
        }
    })();
    checks.push(Check {
        name: "cycle propagator symplectic defect",
        residual: defect.unwrap_or(f64::NAN),
        tol: DEFECT_TOL,
    });

    // stationarity without drive
    let stationarity = (|| -> Result<f64> {
        let cfg0 = EngineConfig {
            lambda: 0.0,
            n_cycles: 2,
            ..engine_cfg.clone()
        };
        let model = EngineModel::new(&cfg0)?;
        let cyc = cycle_propagator(&model, cfg0.n_steps_on)?;
        let s0 = model.initial_state()?;
        let r0 = entropy_report(&s0, &model, 0.0)?;
        let mut s = s0;
        let mut worst = 0.0f64;
        for k in 1..=2 {
            s = evolve(&s, cyc.propagator())?;
            let r = entropy_report(&s, &model, k as f64)?;
            worst = worst
                .max((r.s_sys_c - r0.s_sys_c).abs())
                .max((r.s_sys_h - r0.s_sys_h).abs())
                .max((r.resource - r0.resource).abs())
                .max((r.s_total - r0.s_total).abs());
        }
        Ok(worst)
    })();
    checks.push(Check {
        name: "undriven stationarity",
        residual: stationarity.unwrap_or(f64::NAN),
        tol: 1e-8,
    });

    // structural identities on a short run
    match simulate(&engine_cfg) {
        Ok(sim) => {
            let max_of = |f: &dyn Fn(&crate::sim::CycleRecord) -> f64| {
                sim.records.iter().map(f).fold(0.0, f64::max)
            };
            checks.push(Check {
                name: "first law residual (max relative)",
                residual: max_of(&|r| r.first_law_residual),
                tol: 1e-6,
            });
            checks.push(Check {
                name: "second law residual (max)",
                residual: max_of(&|r| {
                    r.second_law_residual / (1.0f64.max(r.d_production.abs()))
                }),
                tol: 1e-6,
            });
            checks.push(Check {
                name: "entropy conservation identity (max)",
                residual: max_of(&|r| r.entropy_drift.abs()),
                tol: 1e-7,
            });
            checks.push(Check {
                name: "work integral cross-check (max rel)",
                residual: max_of(&|r| r.work_residual),
                tol: 1e-6,
            });
            checks.push(Check {
                name: "ratio identity residual (max)",
                residual: max_of(&|r| r.ratio_identity_residual.unwrap_or(0.0)),
                tol: 1e-6,
            });
            checks.push(Check {
                name: "entropy production nonnegative",
                residual: sim
                    .records
                    .iter()
                    .map(|r| (-r.report.production).max(0.0))
                    .fold(0.0, f64::max),
                tol: 1e-9,
            });
        }
        Err(e) => {
            // short run unavailable (e.g. symplecticity lost above): mark the
            // downstream checks as failed rather than hiding them
            let names = [
                "first law residual (max relative)",
                "second law residual (max)",
                "entropy conservation identity (max)",
                "work integral cross-check (max rel)",
                "ratio identity residual (max)",
                "entropy production nonnegative",
            ];
            eprintln!("validation run failed: {e}");
            for name in names {
                checks.push(Check {
                    name,
                    residual: f64::NAN,
                    tol: 1e-6,
                });
            }
        }
    }

    ValidationReport { checks }
}

/// Fraction of athermal cycles among engine points of a sweep CSV; used by
/// the regime-map checks.
pub fn athermal_engine_fraction(csv: &str) -> Option<f64> {
    let mut engine = 0usize;
    let mut athermal = 0usize;
    for line in csv.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 8 {
            continue;
        }
        match fields[7] {
            "thermal" => engine += 1,
            "athermal" => {
                engine += 1;
                athermal += 1;
            }
            _ => {}
        }
    }
    (engine > 0).then(|| athermal as f64 / engine as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn empty_config_gives_defaults() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg.engine, EngineConfig::default());
        assert_eq!(cfg.workers, 1);
        assert_eq!(cfg.sweep_t_h.len(), 10);
        assert_relative_eq!(cfg.sweep_t_h[0], 1.7);
        assert_relative_eq!(cfg.sweep_t_h[9], 8.0);
        assert_relative_eq!(cfg.sweep_lambda_b[0], 0.08 / 15.0);
        assert_relative_eq!(cfg.sweep_lambda_b[9], 0.04);
    }

    #[test]
    fn athermal_corner_config() {
        let cfg = parse_config("T_h = 1.7\nlambda_c = 0.005333\nlambda_h = 0.005333").unwrap();
        assert_relative_eq!(cfg.engine.t_h, 1.7);
        assert_relative_eq!(cfg.engine.lambda_c, 0.005333);
        assert_relative_eq!(cfg.engine.lambda_h, 0.005333);
        // untouched keys keep their defaults
        assert_relative_eq!(cfg.engine.t_c, 0.8);
        assert_eq!(cfg.engine.n_bath, 300);
    }

    #[test]
    fn negative_temperature_is_invariant_violation() {
        assert!(matches!(
            parse_config("T_h = -1"),
            Err(Error::InvariantViolation(_))
        ));
    }

    #[test]
    fn unknown_key_is_rejected_with_line() {
        match parse_config("omega_c = 1\nbogus = 3") {
            Err(Error::UnknownKey { line, key }) => {
                assert_eq!(line, 2);
                assert_eq!(key, "bogus");
            }
            other => panic!("expected UnknownKey, got {other:?}"),
        }
    }

    #[test]
    fn parse_error_carries_line_number() {
        match parse_config("omega_c = fast") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected Parse, got {other:?}"),
        }
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let cfg = parse_config("# full comment\n\nT_h = 4.0 # trailing\n").unwrap();
        assert_relative_eq!(cfg.engine.t_h, 4.0);
    }

    #[test]
    fn list_syntax_variants() {
        let cfg = parse_config("sweep_T_h = 1.7, 2.0, 8\nsweep_lambda_b = 0.01:0.04:4").unwrap();
        assert_eq!(cfg.sweep_t_h, vec![1.7, 2.0, 8.0]);
        assert_eq!(cfg.sweep_lambda_b.len(), 4);
        assert_relative_eq!(cfg.sweep_lambda_b[0], 0.01);
        assert_relative_eq!(cfg.sweep_lambda_b[3], 0.04);
    }

    #[test]
    fn float_formatting_is_full_precision() {
        let x = 0.1234567890123456789;
        let s = fmt(x);
        assert_eq!(s.parse::<f64>().unwrap(), x);
        assert!(s.contains('e'));
    }

    fn tiny_run_config() -> RunConfig {
        let mut cfg = parse_config("n_bath = 4\nn_cycles = 2\n").unwrap();
        cfg.engine.n_steps_on = 2000;
        cfg
    }

    #[test]
    fn timeseries_csv_shape_and_determinism() {
        let cfg = tiny_run_config();
        let a = run_timeseries(&cfg).unwrap();
        let b = run_timeseries(&cfg).unwrap();
        assert_eq!(a, b, "identical configs must produce identical bytes");
        let mut lines = a.lines();
        assert_eq!(lines.next().unwrap(), TIMESERIES_HEADER);
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 2);
        for row in rows {
            assert_eq!(row.split(',').count(), TIMESERIES_HEADER.split(',').count());
        }
    }

    #[test]
    fn undriven_timeseries_is_not_an_engine() {
        let mut cfg = tiny_run_config();
        cfg.engine.lambda = 0.0;
        let csv = run_timeseries(&cfg).unwrap();
        for row in csv.lines().skip(1) {
            let fields: Vec<&str> = row.split(',').collect();
            let w: f64 = fields[2].parse().unwrap();
            assert!(w.abs() < 1e-8, "W_cycle should vanish, got {w}");
            assert_eq!(fields[31], "not_engine");
        }
    }

    #[test]
    fn sweep_rows_cover_grid_in_order_and_workers_do_not_matter() {
        let mut cfg = tiny_run_config();
        cfg.sweep_t_h = vec![4.0, 8.0];
        cfg.sweep_lambda_b = vec![0.02, 0.04];
        cfg.workers = 1;
        let a = run_sweep(&cfg).unwrap();
        cfg.workers = 3;
        let b = run_sweep(&cfg).unwrap();
        assert_eq!(a, b, "worker count must not change sweep bytes");
        let rows: Vec<&str> = a.lines().skip(1).collect();
        assert_eq!(rows.len(), 4);
        let first: Vec<&str> = rows[0].split(',').collect();
        assert_eq!(first[0].parse::<f64>().unwrap(), 4.0);
        assert_eq!(first[1].parse::<f64>().unwrap(), 0.02);
    }

    #[test]
    fn sweep_records_per_point_failures() {
        let mut cfg = tiny_run_config();
        // overstrong coupling makes the ring indefinite at this point only
        cfg.sweep_t_h = vec![8.0];
        cfg.sweep_lambda_b = vec![0.02, 0.9];
        let csv = run_sweep(&cfg).unwrap();
        let rows: Vec<&str> = csv.lines().skip(1).collect();
        assert_eq!(rows.len(), 2);
        assert!(rows[0].ends_with(','), "healthy row has empty error column");
        let bad: Vec<&str> = rows[1].split(',').collect();
        assert!(!bad[9].is_empty(), "failed row must carry an error message");
    }

    #[test]
    fn bound_surface_csv_columns() {
        let mut cfg = tiny_run_config();
        cfg.surface_gamma = vec![0.5, 1.0];
        cfg.surface_eta_th = vec![0.9, 1.0];
        let csv = run_bound_surface(&cfg).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), SURFACE_HEADER);
        let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
        assert_eq!(rows.len(), 4);
        // γ = 1, η_th = 1 sits at zero and inside the guarantee region
        let last = &rows[3];
        assert_eq!(last[3], "true");
        assert_relative_eq!(last[2].parse::<f64>().unwrap(), 0.0, epsilon = 1e-15);
        // γ η_th = 0.45 lies outside
        assert_eq!(rows[0][3], "false");
    }

    #[test]
    fn validation_suite_passes_and_detects_coarse_integration() {
        let mut cfg = tiny_run_config();
        cfg.engine.n_cycles = 3;
        let report = run_validate(&cfg);
        assert!(report.all_passed(), "\n{}", report.render());
        cfg.engine.n_steps_on = 50;
        let report = run_validate(&cfg);
        assert!(!report.all_passed());
        let defect = report
            .checks
            .iter()
            .find(|c| c.name.contains("symplectic"))
            .unwrap();
        assert!(defect.residual > DEFECT_TOL);
    }
}
