//! Time evolution of Gaussian moments: exact spectral propagators for the
//! undriven phases and fixed-step RK4 for the driven phase.

use nalgebra::{DMatrix, DVector};

use crate::engine::EngineModel;
use crate::error::{Error, Result};
use crate::gaussian::{GaussianState, QuadraticHamiltonian};
use crate::linalg;

/// Symplecticity gate for cycle propagators.
pub const DEFECT_TOL: f64 = 1e-8;

/// Periodic on/off drive profile: smooth switch-on over `delta`, flat top,
/// smooth switch-off, then zero for `t_off`. Period is t_on + t_off.
#[derive(Clone, Debug)]
pub struct DriveProtocol {
    pub t_on: f64,
    pub t_off: f64,
    pub delta: f64,
    pub lambda: f64,
}

impl DriveProtocol {
    pub fn new(t_on: f64, t_off: f64, delta: f64, lambda: f64) -> Result<Self> {
        if !(delta > 0.0 && 2.0 * delta <= t_on) {
            return Err(Error::InvariantViolation(format!(
                "switching time must satisfy 0 < 2*delta <= t_on (delta = {delta}, t_on = {t_on})"
            )));
        }
        if t_off < 0.0 {
            return Err(Error::InvariantViolation(format!("t_off must be >= 0, got {t_off}")));
        }
        Ok(Self { t_on, t_off, delta, lambda })
    }

    pub fn period(&self) -> f64 {
        self.t_on + self.t_off
    }

    /// Drive profile f(t) in [0, 1], extended periodically.
    pub fn value(&self, t: f64) -> f64 {
        let u = t.rem_euclid(self.period());
        if u <= self.delta {
            let x = std::f64::consts::PI * u / self.delta;
            0.5 * (1.0 - cot(x).tanh())
        } else if u < self.t_on - self.delta {
            1.0
        } else if u <= self.t_on {
            let x = std::f64::consts::PI * (u - self.t_on) / self.delta;
            if x == 0.0 {
                // left limit at the end of the switch-off ramp
                return 0.0;
            }
            0.5 * (1.0 + cot(x).tanh())
        } else {
            0.0
        }
    }

    /// Analytic derivative df/dt. The cot/tanh composition is evaluated
    /// directly rather than by finite differences; sech² underflows to zero
    /// near the ramp edges, where the profile is exponentially flat.
    pub fn rate(&self, t: f64) -> f64 {
        let u = t.rem_euclid(self.period());
        let scale = std::f64::consts::PI / (2.0 * self.delta);
        if u <= self.delta {
            let x = std::f64::consts::PI * u / self.delta;
            scale * ramp_rate(x)
        } else if u < self.t_on - self.delta {
            0.0
        } else if u <= self.t_on {
            let x = std::f64::consts::PI * (u - self.t_on) / self.delta;
            -scale * ramp_rate(x)
        } else {
            0.0
        }
    }
}

fn cot(x: f64) -> f64 {
    x.cos() / x.sin()
}

/// sech²(cot x)·csc²(x), the ramp factor of df/dt; zero at the edges.
fn ramp_rate(x: f64) -> f64 {
    let s = x.sin();
    if s == 0.0 {
        return 0.0;
    }
    let sech = 1.0 / cot(x).cosh();
    sech * sech / (s * s)
}

/// Linear phase-space map over a time interval.
#[derive(Clone, Debug)]
pub struct Propagator {
    matrix: DMatrix<f64>,
    t_start: f64,
    t_end: f64,
}

impl Propagator {
    pub fn new(matrix: DMatrix<f64>, t_start: f64, t_end: f64) -> Self {
        Self { matrix, t_start, t_end }
    }

    pub fn identity(n_modes: usize) -> Self {
        Self {
            matrix: DMatrix::identity(2 * n_modes, 2 * n_modes),
            t_start: 0.0,
            t_end: 0.0,
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.t_start, self.t_end)
    }

    /// ‖SᵀΩS - Ω‖_F / ‖Ω‖_F.
    pub fn symplecticity_defect(&self) -> f64 {
        symplecticity_defect(&self.matrix)
    }

    /// `later` applied after `self`.
    pub fn then(&self, later: &Propagator) -> Propagator {
        Propagator {
            matrix: later.matrix() * self.matrix(),
            t_start: self.t_start,
            t_end: later.t_end,
        }
    }
}

/// Relative symplecticity defect of a candidate symplectic matrix.
pub fn symplecticity_defect(s: &DMatrix<f64>) -> f64 {
    let dim = s.nrows();
    let omega_s = linalg::apply_symplectic_form(s);
    let mut lhs = s.transpose() * omega_s;
    let n = dim / 2;
    for i in 0..n {
        lhs[(i, n + i)] -= 1.0;
        lhs[(n + i, i)] += 1.0;
    }
    lhs.norm() / (dim as f64).sqrt()
}

/// Exact propagator exp(ΩM dt) of a time-independent Hamiltonian in
/// spectral form: with V = O D² Oᵀ the blocks are
/// [x←x] = O cos(D dt) Oᵀ, [x←p] = O D⁻¹ sin(D dt) Oᵀ,
/// [p←x] = -O D sin(D dt) Oᵀ, [p←p] = O cos(D dt) Oᵀ.
pub fn constant_propagator(h: &QuadraticHamiltonian, dt: f64) -> Result<Propagator> {
    let nm = h.normal_modes()?;
    let n = h.n_modes();
    let w = nm.frequencies();
    let cos_d = DVector::from_fn(n, |k, _| (w[k] * dt).cos());
    let sin_over = DVector::from_fn(n, |k, _| (w[k] * dt).sin() / w[k]);
    let sin_times = DVector::from_fn(n, |k, _| -(w[k] * dt).sin() * w[k]);
    let xx = nm.congruence(&cos_d);
    let xp = nm.congruence(&sin_over);
    let px = nm.congruence(&sin_times);
    let mut s = DMatrix::zeros(2 * n, 2 * n);
    s.view_mut((0, 0), (n, n)).copy_from(&xx);
    s.view_mut((0, n), (n, n)).copy_from(&xp);
    s.view_mut((n, 0), (n, n)).copy_from(&px);
    s.view_mut((n, n), (n, n)).copy_from(&xx);
    Ok(Propagator::new(s, 0.0, dt))
}

/// mean' = S mean, cov' = S cov Sᵀ.
pub fn evolve(state: &GaussianState, p: &Propagator) -> Result<GaussianState> {
    let dim = state.layout().dim();
    if p.matrix().nrows() != dim {
        return Err(Error::LayoutMismatch(format!(
            "propagator is {}x{}, state dimension is {}",
            p.matrix().nrows(),
            p.matrix().ncols(),
            dim
        )));
    }
    let mean = p.matrix() * state.mean();
    let mut cov = p.matrix() * state.cov() * p.matrix().transpose();
    linalg::symmetrize(&mut cov);
    GaussianState::new(state.layout().clone(), mean, cov)
}

/// RK4 integration of Ṡ = Ω M(t) S over [t_start, t_end] with a fixed step,
/// invoking `on_node` at every grid node (including both endpoints).
pub(crate) fn driven_propagator_with<F>(
    model: &EngineModel,
    t_start: f64,
    t_end: f64,
    n_steps: usize,
    mut on_node: F,
) -> Propagator
where
    F: FnMut(usize, f64, &DMatrix<f64>),
{
    let dim = 2 * model.n_modes();
    let h = (t_end - t_start) / n_steps as f64;
    let protocol = model.protocol();
    let mut s = DMatrix::<f64>::identity(dim, dim);
    let mut k1 = DMatrix::<f64>::zeros(dim, dim);
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut tmp = k1.clone();
    for step in 0..n_steps {
        let t = t_start + step as f64 * h;
        on_node(step, t, &s);
        model.apply_flow(protocol.value(t), &s, &mut k1);
        lincomb(&mut tmp, &s, 0.5 * h, &k1);
        model.apply_flow(protocol.value(t + 0.5 * h), &tmp, &mut k2);
        lincomb(&mut tmp, &s, 0.5 * h, &k2);
        model.apply_flow(protocol.value(t + 0.5 * h), &tmp, &mut k3);
        lincomb(&mut tmp, &s, h, &k3);
        model.apply_flow(protocol.value(t + h), &tmp, &mut k4);
        rk4_update(&mut s, h / 6.0, &k1, &k2, &k3, &k4);
    }
    on_node(n_steps, t_end, &s);
    Propagator::new(s, t_start, t_end)
}

/// General RK4 propagator of the driven model over an arbitrary window.
pub fn driven_propagator(
    model: &EngineModel,
    t_start: f64,
    t_end: f64,
    n_steps: usize,
) -> Propagator {
    driven_propagator_with(model, t_start, t_end, n_steps, |_, _, _| {})
}

fn lincomb(out: &mut DMatrix<f64>, base: &DMatrix<f64>, c: f64, k: &DMatrix<f64>) {
    for ((o, b), kk) in out
        .as_mut_slice()
        .iter_mut()
        .zip(base.as_slice())
        .zip(k.as_slice())
    {
        *o = b + c * kk;
    }
}

fn rk4_update(
    s: &mut DMatrix<f64>,
    c: f64,
    k1: &DMatrix<f64>,
    k2: &DMatrix<f64>,
    k3: &DMatrix<f64>,
    k4: &DMatrix<f64>,
) {
    let (s, k1, k2, k3, k4) = (
        s.as_mut_slice(),
        k1.as_slice(),
        k2.as_slice(),
        k3.as_slice(),
        k4.as_slice(),
    );
    for i in 0..s.len() {
        s[i] += c * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

/// Composite Simpson weights on n_intervals uniform intervals of width h;
/// an odd interval count ends with a 3/8 block.
fn simpson_weights(n_intervals: usize, h: f64) -> Vec<f64> {
    let n = n_intervals;
    let mut w = vec![0.0; n + 1];
    if n == 0 {
        return w;
    }
    if n == 1 {
        w[0] = 0.5 * h;
        w[1] = 0.5 * h;
        return w;
    }
    let even_part = if n % 2 == 0 { n } else { n - 3 };
    if even_part >= 2 {
        w[0] += h / 3.0;
        w[even_part] += h / 3.0;
        for (k, wk) in w.iter_mut().enumerate().take(even_part).skip(1) {
            *wk += if k % 2 == 1 { 4.0 * h / 3.0 } else { 2.0 * h / 3.0 };
        }
    }
    if n % 2 == 1 {
        w[even_part] += 3.0 * h / 8.0;
        w[even_part + 1] += 9.0 * h / 8.0;
        w[even_part + 2] += 9.0 * h / 8.0;
        w[even_part + 3] += 3.0 * h / 8.0;
    }
    w
}

/// One-period propagator of the driven engine together with the quadrature
/// kernel for the work integral.
///
/// The full-cycle map is the exact off-phase propagator composed after the
/// RK4-integrated on-phase map. Since the drive is periodic, the same map
/// advances every cycle. The work kernel G accumulates the Simpson-weighted
/// rank-one terms λ ḟ(t_k) · rowₓc(S_k) ⊗ rowₓh(S_k), so the per-cycle work
/// integral ∫ λ ḟ ⟨x_c x_h⟩ dt reduces to ⟨σ, G⟩ + mᵀ G m at the cycle start.
pub struct CyclePropagator {
    full: Propagator,
    on_phase: Propagator,
    off_phase: Propagator,
    work_kernel: DMatrix<f64>,
    defect: f64,
}

impl CyclePropagator {
    pub fn propagator(&self) -> &Propagator {
        &self.full
    }

    pub fn on_phase(&self) -> &Propagator {
        &self.on_phase
    }

    pub fn off_phase(&self) -> &Propagator {
        &self.off_phase
    }

    pub fn symplecticity_defect(&self) -> f64 {
        self.defect
    }

    /// Simpson-quadrature value of ∫ ⟨∂_t H⟩ dt over one cycle starting
    /// from `start`.
    pub fn work_integral(&self, start: &GaussianState) -> f64 {
        let cov_dot: f64 = start
            .cov()
            .as_slice()
            .iter()
            .zip(self.work_kernel.as_slice())
            .map(|(a, b)| a * b)
            .sum();
        let m = start.mean();
        let mean_dot = (m.transpose() * &self.work_kernel * m)[(0, 0)];
        cov_dot + mean_dot
    }
}

/// Builds the one-cycle propagator with `n_steps_on` RK4 steps across the
/// driven phase. Fails with `SymplecticityLost` when the integration is too
/// coarse for the 1e-8 defect gate.
pub fn cycle_propagator(model: &EngineModel, n_steps_on: usize) -> Result<CyclePropagator> {
    let protocol = model.protocol().clone();
    let dim = 2 * model.n_modes();
    let (sys_c, sys_h) = (model.sys_c_index(), model.sys_h_index());
    let h = protocol.t_on / n_steps_on as f64;
    let weights = simpson_weights(n_steps_on, h);
    let mut kernel = DMatrix::<f64>::zeros(dim, dim);
    let mut row_c = vec![0.0; dim];
    let mut row_h = vec![0.0; dim];
    let on_phase = driven_propagator_with(model, 0.0, protocol.t_on, n_steps_on, |k, t, s| {
        let c = weights[k] * protocol.lambda * protocol.rate(t);
        if c == 0.0 {
            return;
        }
        for a in 0..dim {
            row_c[a] = s[(sys_c, a)];
            row_h[a] = s[(sys_h, a)];
        }
        let g = kernel.as_mut_slice();
        for b in 0..dim {
            let cb = c * row_h[b];
            let col = &mut g[b * dim..(b + 1) * dim];
            for (ga, &ua) in col.iter_mut().zip(&row_c) {
                *ga += cb * ua;
            }
        }
    });
    let off_exact = constant_propagator(&model.base_hamiltonian(), protocol.t_off)?;
    let off_phase = Propagator::new(
        off_exact.matrix().clone(),
        protocol.t_on,
        protocol.period(),
    );
    let full = on_phase.then(&off_phase);
    let defect = full.symplecticity_defect();
    if defect > DEFECT_TOL {
        return Err(Error::SymplecticityLost { defect });
    }
    Ok(CyclePropagator {
        full,
        on_phase,
        off_phase,
        work_kernel: kernel,
        defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::EngineConfig;
    use crate::layout::ModeLayout;
    use approx::assert_relative_eq;

    fn protocol() -> DriveProtocol {
        let base = 2.0 * std::f64::consts::PI + 1.0;
        DriveProtocol::new(41.0 * base / 40.0, 5.0 * base, 0.45 * 41.0 * base / 40.0, 0.08)
            .unwrap()
    }

    fn tiny_config() -> EngineConfig {
        EngineConfig {
            n_bath: 3,
            n_cycles: 1,
            n_steps_on: 400,
            ..EngineConfig::default()
        }
    }

    fn single_mode(omega: f64) -> QuadraticHamiltonian {
        let layout = ModeLayout::new(vec!["m0"]).unwrap();
        QuadraticHamiltonian::new(layout, DMatrix::from_element(1, 1, omega * omega)).unwrap()
    }

    #[test]
    fn bump_endpoint_values() {
        let p = protocol();
        assert_eq!(p.value(0.0), 0.0);
        assert_relative_eq!(p.value(p.delta / 2.0), 0.5, epsilon = 1e-12);
        assert_eq!(p.value(p.t_on / 2.0), 1.0);
        assert_eq!(p.value(p.t_on), 0.0);
        assert_eq!(p.value(p.t_on + 0.5 * p.t_off), 0.0);
    }

    #[test]
    fn bump_is_periodic_and_continuous() {
        let p = protocol();
        let tau = p.period();
        for i in 0..500 {
            let t = tau * i as f64 / 500.0;
            assert_relative_eq!(p.value(t + tau), p.value(t), epsilon = 1e-12);
            assert_relative_eq!(p.value(t + 3.0 * tau), p.value(t), epsilon = 1e-12);
        }
        // no jumps across branch seams
        for seam in [0.0, p.delta, p.t_on - p.delta, p.t_on] {
            for eps in [1e-7, 1e-9] {
                let lo = p.value((seam - eps).rem_euclid(tau));
                let hi = p.value(seam + eps);
                assert!((hi - lo).abs() < 1e-4, "jump at {seam}: {lo} vs {hi}");
            }
        }
    }

    #[test]
    fn bump_range_is_unit_interval() {
        let p = protocol();
        for i in 0..=2000 {
            let t = p.period() * i as f64 / 2000.0;
            let v = p.value(t);
            assert!((0.0..=1.0).contains(&v), "f({t}) = {v}");
        }
    }

    #[test]
    fn rate_matches_finite_differences() {
        let p = protocol();
        let dt = 1e-6;
        for i in 1..200 {
            let t = p.t_on * i as f64 / 200.0;
            let fd = (p.value(t + dt) - p.value(t - dt)) / (2.0 * dt);
            let an = p.rate(t);
            assert!(
                (fd - an).abs() < 1e-5 * an.abs().max(1.0),
                "t = {t}: fd {fd} vs analytic {an}"
            );
        }
    }

    #[test]
    fn rate_vanishes_on_flat_branches() {
        let p = protocol();
        assert_eq!(p.rate(0.0), 0.0);
        assert_eq!(p.rate(p.t_on / 2.0), 0.0);
        assert_eq!(p.rate(p.t_on + 1.0), 0.0);
        assert_eq!(p.rate(p.t_on), 0.0);
    }

    #[test]
    fn protocol_rejects_wide_switching() {
        assert!(DriveProtocol::new(1.0, 1.0, 0.6, 0.1).is_err());
        assert!(DriveProtocol::new(1.0, -0.1, 0.4, 0.1).is_err());
    }

    #[test]
    fn constant_propagator_zero_time_is_identity() {
        let p = constant_propagator(&single_mode(1.7), 0.0).unwrap();
        assert_relative_eq!(
            (p.matrix() - DMatrix::<f64>::identity(2, 2)).norm(),
            0.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn constant_propagator_full_period_is_identity() {
        let p = constant_propagator(&single_mode(1.0), 2.0 * std::f64::consts::PI).unwrap();
        assert!((p.matrix() - DMatrix::<f64>::identity(2, 2)).norm() < 1e-10);
    }

    #[test]
    fn constant_propagator_quarter_period_rotation() {
        let p = constant_propagator(&single_mode(1.0), std::f64::consts::FRAC_PI_2).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert!((p.matrix() - expect).norm() < 1e-12);
    }

    #[test]
    fn evolve_by_identity_is_noop() {
        let s = GaussianState::vacuum(ModeLayout::new(vec!["a", "b"]).unwrap());
        let out = evolve(&s, &Propagator::identity(2)).unwrap();
        assert_eq!(out.cov(), s.cov());
    }

    #[test]
    fn thermal_state_is_stationary() {
        let h = single_mode(1.3);
        let s = h.thermal_state(0.7).unwrap();
        let p = constant_propagator(&h, 2.31).unwrap();
        let out = evolve(&s, &p).unwrap();
        assert!((out.cov() - s.cov()).norm() < 1e-10);
    }

    #[test]
    fn evolve_preserves_symplectic_spectrum() {
        let h = single_mode(0.9);
        let s = h.thermal_state(1.1).unwrap();
        let p = constant_propagator(&h, 0.77).unwrap();
        let before = s.symplectic_eigenvalues().unwrap();
        let after = evolve(&s, &p).unwrap().symplectic_eigenvalues().unwrap();
        for (b, a) in before.iter().zip(after) {
            assert_relative_eq!(*b, a, epsilon = 1e-8);
        }
    }

    #[test]
    fn defect_of_identity_is_zero() {
        assert_eq!(Propagator::identity(4).symplecticity_defect(), 0.0);
    }

    #[test]
    fn defect_of_exact_propagator_is_tiny() {
        let p = constant_propagator(&single_mode(1.0), 1.234).unwrap();
        assert!(p.symplecticity_defect() <= 1e-12);
    }

    #[test]
    fn defect_detects_scaling() {
        let p = constant_propagator(&single_mode(1.0), 1.234).unwrap();
        let scaled = Propagator::new(p.matrix() * 1.01, 0.0, 1.234);
        assert!(scaled.symplecticity_defect() > 1e-3);
    }

    #[test]
    fn simpson_weights_integrate_cubics_exactly() {
        for n in [2usize, 4, 5, 7, 2000] {
            let h = 1.0 / n as f64;
            let w = simpson_weights(n, h);
            let integral: f64 = w
                .iter()
                .enumerate()
                .map(|(k, wk)| {
                    let x = k as f64 * h;
                    wk * (x * x * x - 2.0 * x + 1.0)
                })
                .sum();
            assert_relative_eq!(integral, 0.25 - 1.0 + 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn undriven_cycle_equals_constant_propagator() {
        let cfg = EngineConfig {
            lambda: 0.0,
            ..tiny_config()
        };
        let model = EngineModel::new(&cfg).unwrap();
        let cyc = cycle_propagator(&model, 2000).unwrap();
        let exact =
            constant_propagator(&model.base_hamiltonian(), model.protocol().period()).unwrap();
        let diff = (cyc.propagator().matrix() - exact.matrix()).norm() / exact.matrix().norm();
        assert!(diff < 1e-8, "relative difference {diff}");
        // and the work kernel vanishes without drive
        let s0 = model.initial_state().unwrap();
        assert_eq!(cyc.work_integral(&s0), 0.0);
    }

    #[test]
    fn rk4_is_fourth_order() {
        let model = EngineModel::new(&tiny_config()).unwrap();
        let t_on = model.protocol().t_on;
        let coarse = driven_propagator(&model, 0.0, t_on, 100);
        let medium = driven_propagator(&model, 0.0, t_on, 200);
        let fine = driven_propagator(&model, 0.0, t_on, 400);
        let d1 = (coarse.matrix() - medium.matrix()).norm();
        let d2 = (medium.matrix() - fine.matrix()).norm();
        let order = (d1 / d2).log2();
        assert!(
            (3.5..=4.5).contains(&order),
            "observed convergence order {order} (d1 = {d1:.3e}, d2 = {d2:.3e})"
        );
    }

    #[test]
    fn cycle_propagator_is_symplectic_at_default_steps() {
        let model = EngineModel::new(&tiny_config()).unwrap();
        let cyc = cycle_propagator(&model, 2000).unwrap();
        assert!(cyc.symplecticity_defect() <= 1e-8);
    }

    #[test]
    fn coarse_integration_loses_symplecticity() {
        let model = EngineModel::new(&tiny_config()).unwrap();
        match cycle_propagator(&model, 50) {
            Err(Error::SymplecticityLost { defect }) => assert!(defect > 1e-8),
            other => panic!("expected SymplecticityLost, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn composition_matches_continuous_integration() {
        // propagate two full cycles purely with RK4 (off phase included) and
        // compare against the square of the cached one-cycle map
        let cfg = tiny_config();
        let model = EngineModel::new(&cfg).unwrap();
        let tau = model.protocol().period();
        let n_steps = 4000;
        let p1 = driven_propagator(&model, 0.0, tau, n_steps);
        let p2 = driven_propagator(&model, tau, 2.0 * tau, n_steps);
        let continuous = p1.then(&p2);
        let cyc = cycle_propagator(&model, 2000).unwrap();
        let squared = cyc.propagator().then(cyc.propagator());
        let diff =
            (continuous.matrix() - squared.matrix()).norm() / squared.matrix().norm();
        assert!(diff < 2e-6, "two-cycle composition differs by {diff}");
    }

    #[test]
    fn cycle_composition_of_phases() {
        let model = EngineModel::new(&tiny_config()).unwrap();
        let cyc = cycle_propagator(&model, 500).unwrap();
        let composed = cyc.on_phase().then(cyc.off_phase());
        assert_eq!(composed.matrix(), cyc.propagator().matrix());
    }
}
