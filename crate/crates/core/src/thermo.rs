//! Per-cycle energetic and entropic bookkeeping: heats, internal and
//! interaction energy changes, entropy functionals, generalized efficiency
//! and the thermal/athermal regime classification.

use nalgebra::DMatrix;

use crate::engine::EngineModel;
use crate::error::{Error, Result};
use crate::gaussian::GaussianState;

/// Engine-detection floor: work magnitudes below 1e-9 of the boundary
/// energy scale are treated as zero, so integrator truncation on an
/// undriven network never classifies as an engine.
const W_FLOOR_REL: f64 = 1e-9;

/// Energy balance of one cycle, evaluated at the boundaries where the
/// drive vanishes: W_tot = Q_c + Q_h + ΔU_S + ΔU_int holds identically.
#[derive(Clone, Debug)]
pub struct CycleLedger {
    pub cycle_index: usize,
    /// Heat absorbed by each bath, ⟨H_j⟩(t+τ) - ⟨H_j⟩(t).
    pub heat_c: f64,
    pub heat_h: f64,
    /// Internal-energy change of each working oscillator.
    pub du_sys_c: f64,
    pub du_sys_h: f64,
    /// Interaction-energy change of each system-bath coupling.
    pub du_int_c: f64,
    pub du_int_h: f64,
    /// Total work, ⟨H_tot⟩(t+τ) - ⟨H_tot⟩(t).
    pub w_tot: f64,
    /// max(|⟨H_tot⟩(t)|, |⟨H_tot⟩(t+τ)|); sets the roundoff scale of the
    /// differences above.
    pub energy_scale: f64,
}

impl CycleLedger {
    pub fn heat_total(&self) -> f64 {
        self.heat_c + self.heat_h
    }

    pub fn du_sys_total(&self) -> f64 {
        self.du_sys_c + self.du_sys_h
    }

    pub fn du_int_total(&self) -> f64 {
        self.du_int_c + self.du_int_h
    }

    /// |W_tot - (ΣQ_j + ΔU_S + ΔU_int)|.
    pub fn first_law_residual(&self) -> f64 {
        (self.w_tot - self.heat_total() - self.du_sys_total() - self.du_int_total()).abs()
    }

    /// First-law residual relative to the largest participating term.
    pub fn first_law_residual_relative(&self) -> f64 {
        let scale = [
            self.w_tot,
            self.heat_c,
            self.heat_h,
            self.du_sys_c,
            self.du_sys_h,
            self.du_int_c,
            self.du_int_h,
        ]
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
        self.first_law_residual() / scale.max(1e-12)
    }

    /// True when the work output is negative beyond the roundoff floor.
    pub fn is_engine(&self) -> bool {
        self.w_tot < -W_FLOOR_REL * self.energy_scale.max(1.0)
    }
}

/// Heats and energy changes across one cycle from its boundary states.
pub fn cycle_ledger(
    start: &GaussianState,
    end: &GaussianState,
    model: &EngineModel,
    cycle_index: usize,
) -> Result<CycleLedger> {
    let total = model.total_form();
    let e_start = start.mean_energy(&total)?;
    let e_end = end.mean_energy(&total)?;
    Ok(CycleLedger {
        cycle_index,
        heat_c: end.mean_energy(&model.bath_c_form())? - start.mean_energy(&model.bath_c_form())?,
        heat_h: end.mean_energy(&model.bath_h_form())? - start.mean_energy(&model.bath_h_form())?,
        du_sys_c: end.mean_energy(&model.sys_c_form())? - start.mean_energy(&model.sys_c_form())?,
        du_sys_h: end.mean_energy(&model.sys_h_form())? - start.mean_energy(&model.sys_h_form())?,
        du_int_c: end.mean_energy(&model.int_c_form())? - start.mean_energy(&model.int_c_form())?,
        du_int_h: end.mean_energy(&model.int_h_form())? - start.mean_energy(&model.int_h_form())?,
        w_tot: e_end - e_start,
        energy_scale: e_start.abs().max(e_end.abs()),
    })
}

/// Entropies, correlation measures and thermal displacements of a boundary
/// state. `production` is Σ = I(S,R) + C(S) + C(R) + Σ_j D_j ≥ 0;
/// `resource` is σ = Σ + Σ_i D_i.
#[derive(Clone, Debug)]
pub struct EntropyReport {
    pub t: f64,
    pub s_sys_c: f64,
    pub s_sys_h: f64,
    pub s_bath_c: f64,
    pub s_bath_h: f64,
    pub s_sys: f64,
    pub s_res: f64,
    pub s_total: f64,
    pub mutual_info: f64,
    pub corr_sys: f64,
    pub corr_res: f64,
    pub d_bath_c: f64,
    pub d_bath_h: f64,
    pub d_sys_c: f64,
    pub d_sys_h: f64,
    pub production: f64,
    pub resource: f64,
}

/// Evaluates every entropic functional of a boundary state. Bath reference
/// temperatures are the configured T_j; subsystem references sit at T_min.
pub fn entropy_report(s: &GaussianState, model: &EngineModel, t: f64) -> Result<EntropyReport> {
    let cfg = model.config();
    let t_min = cfg.t_min();

    let s_total = s.von_neumann_entropy()?;
    let s_res = s.reduce(&model.bath_modes())?.von_neumann_entropy()?;
    let s_sys = s.reduce(&[0, 1])?.von_neumann_entropy()?;
    let s_sys_c = s.reduce(&[0])?.von_neumann_entropy()?;
    let s_sys_h = s.reduce(&[1])?.von_neumann_entropy()?;
    let s_bath_c = s.reduce(&model.bath_c_modes())?.von_neumann_entropy()?;
    let s_bath_h = s.reduce(&model.bath_h_modes())?.von_neumann_entropy()?;

    // D(ρ‖ρ_th) = -S(ρ) + ⟨H_ref⟩/T_ref + ln Z_ref, reusing the entropies
    // computed above; the ring partition functions come from the closed-form
    // circulant spectrum.
    let d_bath_c = -s_bath_c + s.mean_energy(&model.bath_c_form())? / cfg.t_c + model.ln_z_bath_c();
    let d_bath_h = -s_bath_h + s.mean_energy(&model.bath_h_form())? / cfg.t_h + model.ln_z_bath_h();
    let d_sys_c = -s_sys_c + s.mean_energy(&model.sys_c_form())? / t_min + model.ln_z_sys_c();
    let d_sys_h = -s_sys_h + s.mean_energy(&model.sys_h_form())? / t_min + model.ln_z_sys_h();

    let mutual_info = s_sys + s_res - s_total;
    let corr_sys = s_sys_c + s_sys_h - s_sys;
    let corr_res = s_bath_c + s_bath_h - s_res;
    let production = mutual_info + corr_sys + corr_res + d_bath_c + d_bath_h;
    let resource = production + d_sys_c + d_sys_h;

    Ok(EntropyReport {
        t,
        s_sys_c,
        s_sys_h,
        s_bath_c,
        s_bath_h,
        s_sys,
        s_res,
        s_total,
        mutual_info,
        corr_sys,
        corr_res,
        d_bath_c,
        d_bath_h,
        d_sys_c,
        d_sys_h,
        production,
        resource,
    })
}

/// |Σ_i ΔS_i + Σ_j Q_j/T_j - ΔΣ| across one cycle.
pub fn second_law_residual(
    start: &EntropyReport,
    end: &EntropyReport,
    ledger: &CycleLedger,
    t_c: f64,
    t_h: f64,
) -> f64 {
    let ds_sys = (end.s_sys_c - start.s_sys_c) + (end.s_sys_h - start.s_sys_h);
    let clausius = ledger.heat_c / t_c + ledger.heat_h / t_h;
    let d_production = end.production - start.production;
    (ds_sys + clausius - d_production).abs()
}

/// |W_tot - Σ_j η_j Q_j - ΔU_int - T_min Δσ| across one cycle.
pub fn work_decomposition_residual(
    ledger: &CycleLedger,
    start: &EntropyReport,
    end: &EntropyReport,
    t_c: f64,
    t_h: f64,
) -> f64 {
    let t_min = t_c.min(t_h);
    let eta_c = 1.0 - t_min / t_c;
    let eta_h = 1.0 - t_min / t_h;
    let d_resource = end.resource - start.resource;
    (ledger.w_tot
        - eta_c * ledger.heat_c
        - eta_h * ledger.heat_h
        - ledger.du_int_total()
        - t_min * d_resource)
        .abs()
}

/// Engine operating regime over one cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// Work is produced mostly by converting heat: η/(γ η_th) ≤ 2.
    Thermal,
    /// Work is extracted mostly from entropic resources: η/(γ η_th) > 2.
    Athermal,
    /// No net work output (W_tot ≥ 0).
    NotEngine,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Regime::Thermal => write!(f, "thermal"),
            Regime::Athermal => write!(f, "athermal"),
            Regime::NotEngine => write!(f, "not_engine"),
        }
    }
}

/// Performance figures of one cycle. Quantities whose defining denominator
/// vanishes are reported as absent.
#[derive(Clone, Debug)]
pub struct EfficiencyReport {
    /// Heat flowing out of the baths, Σ_j (|Q_j| - Q_j)/2.
    pub q_in: f64,
    pub du_sys_in: f64,
    pub du_int_in: f64,
    /// Generalized efficiency -W_tot / (Q_in + ΔU_S_in + ΔU_int_in).
    pub eta: Option<f64>,
    /// Fraction of input drawn as heat; zero when Q_in = 0.
    pub gamma: f64,
    /// -Σ_j η_j Q_j / Q_in.
    pub eta_th: Option<f64>,
    /// Local Carnot factors 1 - T_min/T_j.
    pub eta_bath_c: f64,
    pub eta_bath_h: f64,
    pub eta_carnot: f64,
    pub eta_otto: f64,
    pub t_min: f64,
    /// Δσ across the cycle.
    pub d_resource: f64,
    /// η / (γ η_th).
    pub ratio: Option<f64>,
    pub regime: Regime,
}

/// Evaluates the generalized efficiency and regime of one cycle.
/// `d_resource` is Δσ between the cycle boundaries.
pub fn efficiency_report(
    ledger: &CycleLedger,
    d_resource: f64,
    model: &EngineModel,
) -> EfficiencyReport {
    let cfg = model.config();
    let t_min = cfg.t_min();
    let intake = |dv: f64| 0.5 * (dv.abs() - dv);
    let q_in = intake(ledger.heat_c) + intake(ledger.heat_h);
    let du_sys_in = intake(ledger.du_sys_c) + intake(ledger.du_sys_h);
    let du_int_in = intake(ledger.du_int_c) + intake(ledger.du_int_h);
    let denom = q_in + du_sys_in + du_int_in;
    let eta = (denom > 0.0).then(|| -ledger.w_tot / denom);
    let gamma = if q_in > 0.0 {
        1.0 / (1.0 + (du_sys_in + du_int_in) / q_in)
    } else {
        0.0
    };
    let eta_bath_c = 1.0 - t_min / cfg.t_c;
    let eta_bath_h = 1.0 - t_min / cfg.t_h;
    let eta_th = (q_in > 0.0)
        .then(|| -(eta_bath_c * ledger.heat_c + eta_bath_h * ledger.heat_h) / q_in);
    let ratio = match (eta, eta_th) {
        (Some(e), Some(th)) if gamma * th != 0.0 => Some(e / (gamma * th)),
        _ => None,
    };
    let regime = if !ledger.is_engine() {
        Regime::NotEngine
    } else {
        match ratio {
            Some(r) if r <= 2.0 => Regime::Thermal,
            // an engine with no defined ratio runs on non-heat input alone
            _ => Regime::Athermal,
        }
    };
    EfficiencyReport {
        q_in,
        du_sys_in,
        du_int_in,
        eta,
        gamma,
        eta_th,
        eta_bath_c,
        eta_bath_h,
        eta_carnot: 1.0 - t_min / cfg.t_max(),
        eta_otto: 1.0 - cfg.omega_c.min(cfg.omega_h) / cfg.omega_c.max(cfg.omega_h),
        t_min,
        d_resource,
        ratio,
        regime,
    }
}

/// Residual of the regime-ratio identity
/// (T_min Δσ + ΔU_int)/Σ_j η_j Q_j = η/(γ η_th) - 1, when both sides are
/// defined.
pub fn ratio_identity_residual(
    ledger: &CycleLedger,
    report: &EfficiencyReport,
) -> Option<f64> {
    let ratio = report.ratio?;
    let heat_term =
        report.eta_bath_c * ledger.heat_c + report.eta_bath_h * ledger.heat_h;
    if heat_term == 0.0 {
        return None;
    }
    let lhs = (report.t_min * report.d_resource + ledger.du_int_total()) / heat_term;
    Some((lhs - (ratio - 1.0)).abs())
}

/// Efficiency bounds (η_th + T_min σ/Q_in, η_C + T_min σ/Q_in) from the
/// entropic resource σ at the start of the cycle.
pub fn efficiency_bound(report: &EfficiencyReport, sigma_start: f64) -> Result<(f64, f64)> {
    if report.q_in <= 0.0 {
        return Err(Error::NoHeatInput);
    }
    let shift = report.t_min * sigma_start / report.q_in;
    let eta_th = report.eta_th.ok_or(Error::NoHeatInput)?;
    Ok((eta_th + shift, report.eta_carnot + shift))
}

/// Device-independent upper-bound surface 1/(γ η_th) - 1 with the
/// guaranteed-thermal mask γ η_th > ½.
#[derive(Clone, Debug)]
pub struct BoundSurface {
    pub gammas: Vec<f64>,
    pub eta_ths: Vec<f64>,
    /// values[(i, j)] corresponds to (gammas[i], eta_ths[j]).
    pub values: DMatrix<f64>,
    pub guaranteed: Vec<Vec<bool>>,
}

pub fn bound_surface(gammas: &[f64], eta_ths: &[f64]) -> Result<BoundSurface> {
    for &g in gammas.iter().chain(eta_ths) {
        if !(g > 0.0 && g <= 1.0) {
            return Err(Error::InvariantViolation(format!(
                "bound-surface grids must lie in (0, 1], got {g}"
            )));
        }
    }
    let values = DMatrix::from_fn(gammas.len(), eta_ths.len(), |i, j| {
        1.0 / (gammas[i] * eta_ths[j]) - 1.0
    });
    let guaranteed = gammas
        .iter()
        .map(|&g| eta_ths.iter().map(|&e| g * e > 0.5).collect())
        .collect();
    Ok(BoundSurface {
        gammas: gammas.to_vec(),
        eta_ths: eta_ths.to_vec(),
        values,
        guaranteed,
    })
}
