//! The two-oscillator engine: mode layout, potential matrices, drive
//! protocol, reference Hamiltonian blocks and the product initial state.
//!
//! Two working oscillators (cold and hot) each couple to the first site of
//! their own ring of bath oscillators. The inter-oscillator coupling
//! λ f(t) x_c x_h is switched by the drive protocol; every other term is
//! static.

use nalgebra::{DMatrix, DVector};

use crate::dynamics::DriveProtocol;
use crate::error::{Error, Result};
use crate::gaussian::{thermal_nu, EnergyForm, GaussianState, QuadraticHamiltonian};
use crate::layout::ModeLayout;
use crate::linalg;

/// Simulation parameters. Defaults are the reference operating point:
/// ω_c = 1, ω_h = 2, λ = 0.08, λ_c = λ_h = λ/2, T_c = 0.8, T_h = 8,
/// 300 bath modes per side.
#[derive(Clone, Debug, PartialEq)]
pub struct EngineConfig {
    pub omega_c: f64,
    pub omega_h: f64,
    /// Drive amplitude of the inter-oscillator coupling.
    pub lambda: f64,
    /// System-bath coupling, cold side (also the cold ring bandwidth).
    pub lambda_c: f64,
    /// System-bath coupling, hot side.
    pub lambda_h: f64,
    /// Bath temperatures.
    pub t_c: f64,
    pub t_h: f64,
    /// Ring oscillators per bath.
    pub n_bath: usize,
    pub n_cycles: usize,
    /// RK4 steps across the driven phase of one cycle.
    pub n_steps_on: usize,
    /// Switching time as a fraction of t_on.
    pub delta_frac: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            omega_c: 1.0,
            omega_h: 2.0,
            lambda: 0.08,
            lambda_c: 0.04,
            lambda_h: 0.04,
            t_c: 0.8,
            t_h: 8.0,
            n_bath: 300,
            n_cycles: 50,
            n_steps_on: 2000,
            delta_frac: 0.45,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("omega_c", self.omega_c),
            ("omega_h", self.omega_h),
            ("T_c", self.t_c),
            ("T_h", self.t_h),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvariantViolation(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        for (name, v) in [
            ("lambda", self.lambda),
            ("lambda_c", self.lambda_c),
            ("lambda_h", self.lambda_h),
            ("delta_frac", self.delta_frac),
        ] {
            if !v.is_finite() {
                return Err(Error::InvariantViolation(format!("{name} must be finite")));
            }
        }
        if self.omega_c == self.omega_h {
            return Err(Error::InvariantViolation(
                "omega_c and omega_h must differ (the cycle times scale with 1/|omega_h - omega_c|)"
                    .into(),
            ));
        }
        if !(self.delta_frac > 0.0 && self.delta_frac <= 0.5) {
            return Err(Error::InvariantViolation(format!(
                "delta_frac must lie in (0, 0.5], got {}",
                self.delta_frac
            )));
        }
        if self.n_bath < 3 {
            return Err(Error::InvariantViolation(format!(
                "n_bath must be at least 3, got {}",
                self.n_bath
            )));
        }
        if self.n_cycles == 0 {
            return Err(Error::InvariantViolation("n_cycles must be at least 1".into()));
        }
        if self.n_steps_on < 2 {
            return Err(Error::InvariantViolation(format!(
                "n_steps_on must be at least 2, got {}",
                self.n_steps_on
            )));
        }
        Ok(())
    }

    /// Smaller of the two bath temperatures.
    pub fn t_min(&self) -> f64 {
        self.t_c.min(self.t_h)
    }

    pub fn t_max(&self) -> f64 {
        self.t_c.max(self.t_h)
    }
}

/// Frequencies of a ring of `n` oscillators with diagonal ω² and
/// nearest-neighbour coupling λ: ω_k = √(ω² + 2λ cos(2πk/n)), ascending.
pub fn ring_frequencies(omega: f64, lambda: f64, n: usize) -> Result<Vec<f64>> {
    let mut freqs = Vec::with_capacity(n);
    for k in 0..n {
        let w2 = omega * omega
            + 2.0 * lambda * (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos();
        if w2 <= 0.0 {
            return Err(Error::NotPositiveDefinite { min_eig: w2 });
        }
        freqs.push(w2.sqrt());
    }
    freqs.sort_by(f64::total_cmp);
    Ok(freqs)
}

/// ln Z of a bath ring from the closed-form circulant spectrum.
pub fn ring_log_partition(omega: f64, lambda: f64, n: usize, temperature: f64) -> Result<f64> {
    if temperature <= 0.0 {
        return Err(Error::InvalidTemperature { t: temperature });
    }
    Ok(ring_frequencies(omega, lambda, n)?
        .iter()
        .map(|&w| -crate::gaussian::ln_two_sinh(w / (2.0 * temperature)))
        .sum())
}

/// Thermal mean energy of a bath ring from the circulant spectrum.
pub fn ring_thermal_energy(omega: f64, lambda: f64, n: usize, temperature: f64) -> Result<f64> {
    if temperature < 0.0 {
        return Err(Error::InvalidTemperature { t: temperature });
    }
    Ok(ring_frequencies(omega, lambda, n)?
        .iter()
        .map(|&w| w * thermal_nu(w, temperature))
        .sum())
}

/// Immutable engine description shared by the dynamics and the ledgers.
#[derive(Clone, Debug)]
pub struct EngineModel {
    cfg: EngineConfig,
    layout: ModeLayout,
    v_base: DMatrix<f64>,
    protocol: DriveProtocol,
    /// Row-compressed nonzeros of V_base for the RK4 right-hand side.
    v_rows: Vec<Vec<(usize, f64)>>,
    /// Cached reference quantities (cycle independent).
    ln_z_bath_c: f64,
    ln_z_bath_h: f64,
    ln_z_sys_c: f64,
    ln_z_sys_h: f64,
    thermal_energy_bath_c: f64,
    thermal_energy_bath_h: f64,
}

impl EngineModel {
    pub fn new(cfg: &EngineConfig) -> Result<Self> {
        cfg.validate()?;
        let n_bath = cfg.n_bath;
        let n = 2 + 2 * n_bath;

        let mut labels = vec!["sys_c".to_string(), "sys_h".to_string()];
        labels.extend((1..=n_bath).map(|a| format!("bath_c[{a}]")));
        labels.extend((1..=n_bath).map(|a| format!("bath_h[{a}]")));
        let layout = ModeLayout::new(labels)?;

        let mut v = DMatrix::<f64>::zeros(n, n);
        v[(0, 0)] = cfg.omega_c * cfg.omega_c;
        v[(1, 1)] = cfg.omega_h * cfg.omega_h;
        let cold0 = 2;
        let hot0 = 2 + n_bath;
        let ring_mult: f64 = std::env::var("RING_MULT").ok().and_then(|s| s.parse().ok()).unwrap_or(1.0);
        let xq_mult: f64 = std::env::var("XQ_MULT").ok().and_then(|s| s.parse().ok()).unwrap_or(1.0);
        for (start, omega, lambda) in [
            (cold0, cfg.omega_c, cfg.lambda_c),
            (hot0, cfg.omega_h, cfg.lambda_h),
        ] {
            for a in 0..n_bath {
                let i = start + a;
                v[(i, i)] = omega * omega;
                let j = start + (a + 1) % n_bath;
                v[(i, j)] += lambda * ring_mult;
                v[(j, i)] += lambda * ring_mult;
            }
        }
        v[(0, cold0)] = cfg.lambda_c * xq_mult;
        v[(cold0, 0)] = cfg.lambda_c * xq_mult;
        v[(1, hot0)] = cfg.lambda_h * xq_mult;
        v[(hot0, 1)] = cfg.lambda_h * xq_mult;

        let dw = (cfg.omega_h - cfg.omega_c).abs();
        let base = 2.0 * std::f64::consts::PI / dw + 1.0;
        let t_on = 41.0 * base / 40.0;
        let t_off = 5.0 * base;
        let protocol = DriveProtocol::new(t_on, t_off, cfg.delta_frac * t_on, cfg.lambda)?;

        // positive definiteness of every potential the run will touch
        ensure_pd(&v)?;
        let mut v_on = v.clone();
        v_on[(0, 1)] += cfg.lambda;
        v_on[(1, 0)] += cfg.lambda;
        ensure_pd(&v_on)?;
        let side_c: Vec<usize> = std::iter::once(0).chain(cold0..cold0 + n_bath).collect();
        let side_h: Vec<usize> = std::iter::once(1).chain(hot0..hot0 + n_bath).collect();
        ensure_pd(&submatrix(&v, &side_c))?;
        ensure_pd(&submatrix(&v, &side_h))?;
        ring_frequencies(cfg.omega_c, cfg.lambda_c, n_bath)?;
        ring_frequencies(cfg.omega_h, cfg.lambda_h, n_bath)?;

        let v_rows = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| v[(i, j)] != 0.0)
                    .map(|j| (j, v[(i, j)]))
                    .collect()
            })
            .collect();

        let t_min = cfg.t_min();
        Ok(Self {
            ln_z_bath_c: ring_log_partition(cfg.omega_c, cfg.lambda_c, n_bath, cfg.t_c)?,
            ln_z_bath_h: ring_log_partition(cfg.omega_h, cfg.lambda_h, n_bath, cfg.t_h)?,
            ln_z_sys_c: -crate::gaussian::ln_two_sinh(cfg.omega_c / (2.0 * t_min)),
            ln_z_sys_h: -crate::gaussian::ln_two_sinh(cfg.omega_h / (2.0 * t_min)),
            thermal_energy_bath_c: ring_thermal_energy(cfg.omega_c, cfg.lambda_c, n_bath, cfg.t_c)?,
            thermal_energy_bath_h: ring_thermal_energy(cfg.omega_h, cfg.lambda_h, n_bath, cfg.t_h)?,
            cfg: cfg.clone(),
            layout,
            v_base: v,
            protocol,
            v_rows,
        })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.cfg
    }

    pub fn layout(&self) -> &ModeLayout {
        &self.layout
    }

    pub fn n_modes(&self) -> usize {
        self.layout.n_modes()
    }

    pub fn protocol(&self) -> &DriveProtocol {
        &self.protocol
    }

    pub fn v_base(&self) -> &DMatrix<f64> {
        &self.v_base
    }

    pub fn sys_c_index(&self) -> usize {
        0
    }

    pub fn sys_h_index(&self) -> usize {
        1
    }

    pub fn bath_c_modes(&self) -> Vec<usize> {
        (2..2 + self.cfg.n_bath).collect()
    }

    pub fn bath_h_modes(&self) -> Vec<usize> {
        (2 + self.cfg.n_bath..2 + 2 * self.cfg.n_bath).collect()
    }

    pub fn bath_modes(&self) -> Vec<usize> {
        (2..self.n_modes()).collect()
    }

    /// V(t) = V_base + λ f(t) V_drive, with V_drive coupling x_c to x_h.
    pub fn potential_at(&self, t: f64) -> DMatrix<f64> {
        let mut v = self.v_base.clone();
        let g = self.cfg.lambda * self.protocol.value(t);
        v[(0, 1)] += g;
        v[(1, 0)] += g;
        v
    }

    /// Hamiltonian of the undriven network (the drive is zero at cycle
    /// boundaries and throughout the off phase).
    pub fn base_hamiltonian(&self) -> QuadraticHamiltonian {
        QuadraticHamiltonian::new(self.layout.clone(), self.v_base.clone())
            .expect("base potential was validated at build")
    }

    pub fn sys_c_hamiltonian(&self) -> QuadraticHamiltonian {
        let layout = self.layout.select(&[0]).expect("mode 0 exists");
        QuadraticHamiltonian::new(
            layout,
            DMatrix::from_element(1, 1, self.cfg.omega_c * self.cfg.omega_c),
        )
        .expect("1x1 potential")
    }

    pub fn sys_h_hamiltonian(&self) -> QuadraticHamiltonian {
        let layout = self.layout.select(&[1]).expect("mode 1 exists");
        QuadraticHamiltonian::new(
            layout,
            DMatrix::from_element(1, 1, self.cfg.omega_h * self.cfg.omega_h),
        )
        .expect("1x1 potential")
    }

    pub fn bath_c_hamiltonian(&self) -> QuadraticHamiltonian {
        let modes = self.bath_c_modes();
        let layout = self.layout.select(&modes).expect("bath modes exist");
        QuadraticHamiltonian::new(layout, submatrix(&self.v_base, &modes))
            .expect("ring block is symmetric")
    }

    pub fn bath_h_hamiltonian(&self) -> QuadraticHamiltonian {
        let modes = self.bath_h_modes();
        let layout = self.layout.select(&modes).expect("bath modes exist");
        QuadraticHamiltonian::new(layout, submatrix(&self.v_base, &modes))
            .expect("ring block is symmetric")
    }

    fn side_modes(&self, cold: bool) -> Vec<usize> {
        let n_bath = self.cfg.n_bath;
        if cold {
            std::iter::once(0).chain(2..2 + n_bath).collect()
        } else {
            std::iter::once(1).chain(2 + n_bath..2 + 2 * n_bath).collect()
        }
    }

    /// Oscillator + chain + coupling block of one side, used for the
    /// initial Gibbs states.
    pub fn side_hamiltonian(&self, cold: bool) -> QuadraticHamiltonian {
        let modes = self.side_modes(cold);
        let layout = self.layout.select(&modes).expect("side modes exist");
        QuadraticHamiltonian::new(layout, submatrix(&self.v_base, &modes))
            .expect("side block is symmetric")
    }

    pub fn sys_c_form(&self) -> EnergyForm {
        EnergyForm::oscillator(0, self.cfg.omega_c)
    }

    pub fn sys_h_form(&self) -> EnergyForm {
        EnergyForm::oscillator(1, self.cfg.omega_h)
    }

    pub fn bath_c_form(&self) -> EnergyForm {
        let modes = self.bath_c_modes();
        let v = submatrix(&self.v_base, &modes);
        EnergyForm::block(modes, v).expect("ring block is symmetric")
    }

    pub fn bath_h_form(&self) -> EnergyForm {
        let modes = self.bath_h_modes();
        let v = submatrix(&self.v_base, &modes);
        EnergyForm::block(modes, v).expect("ring block is symmetric")
    }

    pub fn int_c_form(&self) -> EnergyForm {
        EnergyForm::coupling(0, 2, self.cfg.lambda_c)
    }

    pub fn int_h_form(&self) -> EnergyForm {
        EnergyForm::coupling(1, 2 + self.cfg.n_bath, self.cfg.lambda_h)
    }

    /// Full-network energy form at a cycle boundary (drive at zero).
    pub fn total_form(&self) -> EnergyForm {
        EnergyForm::block((0..self.n_modes()).collect(), self.v_base.clone())
            .expect("base potential is symmetric")
    }

    /// ρ(0) = ρ_c ⊗ ρ_h: each side is the Gibbs state of oscillator +
    /// chain + coupling at its own temperature; the two sides are
    /// uncorrelated by construction.
    pub fn initial_state(&self) -> Result<GaussianState> {
        let n = self.n_modes();
        let mut cov = DMatrix::<f64>::zeros(2 * n, 2 * n);
        for (cold, temperature) in [(true, self.cfg.t_c), (false, self.cfg.t_h)] {
            let modes = self.side_modes(cold);
            let side = self.side_hamiltonian(cold).thermal_state(temperature)?;
            embed_cov(&mut cov, side.cov(), &modes, n);
        }
        GaussianState::new(self.layout.clone(), DVector::zeros(2 * n), cov)
    }

    /// Mean-energy mismatch ⟨H_j⟩_ρ(0) - ⟨H_j⟩_thermal per bath. The bath
    /// temperature is assigned by the mean-energy convention; the coupling
    /// inside each side's Gibbs state shifts the bath energy, and this
    /// diagnostic reports that shift instead of refitting T_j.
    pub fn bath_temperature_diagnostic(&self, s0: &GaussianState) -> Result<(f64, f64)> {
        let d_c = s0.mean_energy(&self.bath_c_form())? - self.thermal_energy_bath_c;
        let d_h = s0.mean_energy(&self.bath_h_form())? - self.thermal_energy_bath_h;
        Ok((d_c, d_h))
    }

    pub fn ln_z_bath_c(&self) -> f64 {
        self.ln_z_bath_c
    }

    pub fn ln_z_bath_h(&self) -> f64 {
        self.ln_z_bath_h
    }

    /// ln Z of the bare subsystem oscillators at T_min (the reference for
    /// the subsystem relative entropies).
    pub fn ln_z_sys_c(&self) -> f64 {
        self.ln_z_sys_c
    }

    pub fn ln_z_sys_h(&self) -> f64 {
        self.ln_z_sys_h
    }

    /// Out[..] = Ω M(t) X with M(t) = blockdiag(V(t), I): the top rows copy
    /// the momentum rows, the bottom rows apply -V(t) to the position rows.
    pub(crate) fn apply_flow(&self, drive: f64, x: &DMatrix<f64>, out: &mut DMatrix<f64>) {
        let n = self.n_modes();
        let dim = 2 * n;
        let ncols = x.ncols();
        let g = self.cfg.lambda * drive;
        let xs = x.as_slice();
        let os = out.as_mut_slice();
        for j in 0..ncols {
            let xcol = &xs[j * dim..(j + 1) * dim];
            let ocol = &mut os[j * dim..(j + 1) * dim];
            ocol[..n].copy_from_slice(&xcol[n..]);
            for (i, row) in self.v_rows.iter().enumerate() {
                let mut acc = 0.0;
                for &(c, w) in row {
                    acc += w * xcol[c];
                }
                ocol[n + i] = -acc;
            }
            if g != 0.0 {
                ocol[n] -= g * xcol[1];
                ocol[n + 1] -= g * xcol[0];
            }
        }
    }
}

fn submatrix(m: &DMatrix<f64>, modes: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(modes.len(), modes.len(), |i, j| m[(modes[i], modes[j])])
}

/// Writes a sub-state covariance (x.., p.. ordering over `modes`) into the
/// matching rows and columns of a full covariance.
fn embed_cov(full: &mut DMatrix<f64>, sub: &DMatrix<f64>, modes: &[usize], n_total: usize) {
    let m = modes.len();
    let phase_index = |i: usize| if i < m { modes[i] } else { n_total + modes[i - m] };
    for a in 0..2 * m {
        let ga = phase_index(a);
        for b in 0..2 * m {
            full[(ga, phase_index(b))] = sub[(a, b)];
        }
    }
}

fn ensure_pd(v: &DMatrix<f64>) -> Result<()> {
    let eigs = linalg::symmetric_eigenvalues(v);
    let min_eig = eigs[0];
    if min_eig <= 0.0 {
        return Err(Error::NotPositiveDefinite { min_eig });
    }
    Ok(())
}
