//! Gaussian states of quadratic Hamiltonians: thermal construction,
//! reduction, symplectic spectra, entropies and correlation measures.
//!
//! Conventions: ħ = k = 1, unit masses. A Hamiltonian is H = ½ zᵀ M z with
//! M = blockdiag(V, I), so V carries units of frequency squared. Covariances
//! are symmetrized second moments, σ_ab = ½⟨{Δz_a, Δz_b}⟩; the vacuum
//! symplectic eigenvalue is ½.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::layout::ModeLayout;
use crate::linalg;

/// Symmetry tolerance for potential matrices (relative Frobenius).
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Physicality slack: symplectic eigenvalues may undershoot ½ by this much.
pub const PHYS_EPS: f64 = 1e-8;
/// Relative tolerance for ±iν pairing of the Ω·σ spectrum.
pub const PAIRING_TOL: f64 = 1e-8;

/// Thermal symplectic eigenvalue coth(ω/2T)/2 of a mode at frequency
/// `omega`; T = 0 gives the vacuum value ½.
pub fn thermal_nu(omega: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        0.5
    } else {
        0.5 / (omega / (2.0 * temperature)).tanh()
    }
}

/// ln(2 sinh x) evaluated stably for large x.
pub fn ln_two_sinh(x: f64) -> f64 {
    x + (-(-2.0 * x).exp()).ln_1p()
}

/// Quadratic Hamiltonian H = ½ (pᵀp + xᵀ V x) over a mode layout.
#[derive(Clone, Debug)]
pub struct QuadraticHamiltonian {
    layout: ModeLayout,
    v: DMatrix<f64>,
}

impl QuadraticHamiltonian {
    /// Validates the dimensions, symmetrizes V when its asymmetry defect is
    /// below tolerance and rejects it otherwise.
    pub fn new(layout: ModeLayout, v: DMatrix<f64>) -> Result<Self> {
        let n = layout.n_modes();
        if v.nrows() != n || v.ncols() != n {
            return Err(Error::LayoutMismatch(format!(
                "potential is {}x{}, layout has {} modes",
                v.nrows(),
                v.ncols(),
                n
            )));
        }
        let defect = linalg::symmetry_defect(&v);
        if defect > SYMMETRY_TOL {
            return Err(Error::NonSymmetric { defect });
        }
        let mut v = v;
        linalg::symmetrize(&mut v);
        Ok(Self { layout, v })
    }

    pub fn layout(&self) -> &ModeLayout {
        &self.layout
    }

    pub fn n_modes(&self) -> usize {
        self.layout.n_modes()
    }

    pub fn potential(&self) -> &DMatrix<f64> {
        &self.v
    }

    /// Spectral decomposition V = O diag(ω_k²) Oᵀ with ω_k > 0.
    pub fn normal_modes(&self) -> Result<NormalModes> {
        let (vals, vecs) = linalg::sorted_symmetric_eigen(&self.v);
        let min = vals[0];
        if min <= 0.0 {
            return Err(Error::NotPositiveDefinite { min_eig: min });
        }
        let freqs = vals.map(f64::sqrt);
        Ok(NormalModes { basis: vecs, freqs })
    }

    /// Gibbs state at temperature T ≥ 0 (T = 0 is the ground state).
    pub fn thermal_state(&self, temperature: f64) -> Result<GaussianState> {
        if temperature < 0.0 {
            return Err(Error::InvalidTemperature { t: temperature });
        }
        let nm = self.normal_modes()?;
        let n = self.n_modes();
        let nu: Vec<f64> = nm.freqs.iter().map(|&w| thermal_nu(w, temperature)).collect();
        // ⟨xxᵀ⟩ = O diag(ν/ω) Oᵀ, ⟨ppᵀ⟩ = O diag(νω) Oᵀ, no x-p correlations.
        let xx = nm.congruence(&DVector::from_fn(n, |k, _| nu[k] / nm.freqs[k]));
        let pp = nm.congruence(&DVector::from_fn(n, |k, _| nu[k] * nm.freqs[k]));
        let mut cov = DMatrix::zeros(2 * n, 2 * n);
        cov.view_mut((0, 0), (n, n)).copy_from(&xx);
        cov.view_mut((n, n), (n, n)).copy_from(&pp);
        GaussianState::new(self.layout.clone(), DVector::zeros(2 * n), cov)
    }

    /// ln Z = -Σ_k ln(2 sinh(ω_k / 2T)) at temperature T > 0.
    pub fn log_partition(&self, temperature: f64) -> Result<f64> {
        if temperature <= 0.0 {
            return Err(Error::InvalidTemperature { t: temperature });
        }
        let nm = self.normal_modes()?;
        Ok(nm
            .freqs
            .iter()
            .map(|&w| -ln_two_sinh(w / (2.0 * temperature)))
            .sum())
    }

    /// Thermal mean energy Σ_k ω_k ν(ω_k, T).
    pub fn thermal_energy(&self, temperature: f64) -> Result<f64> {
        if temperature < 0.0 {
            return Err(Error::InvalidTemperature { t: temperature });
        }
        let nm = self.normal_modes()?;
        Ok(nm.freqs.iter().map(|&w| w * thermal_nu(w, temperature)).sum())
    }
}

/// Orthogonal normal-mode decomposition of a positive definite potential.
#[derive(Clone, Debug)]
pub struct NormalModes {
    basis: DMatrix<f64>,
    freqs: DVector<f64>,
}

impl NormalModes {
    /// Orthogonal matrix whose columns are the normal-mode vectors.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Mode frequencies ω_k, ascending.
    pub fn frequencies(&self) -> &DVector<f64> {
        &self.freqs
    }

    /// O diag(d) Oᵀ.
    pub fn congruence(&self, d: &DVector<f64>) -> DMatrix<f64> {
        let mut scaled = self.basis.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= d[k];
        }
        &scaled * self.basis.transpose()
    }
}

/// Gaussian state: first moments and symmetrized covariance matrix in
/// (x.., p..) ordering.
#[derive(Clone, Debug)]
pub struct GaussianState {
    layout: ModeLayout,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianState {
    pub fn new(layout: ModeLayout, mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let dim = layout.dim();
        if mean.len() != dim || cov.nrows() != dim || cov.ncols() != dim {
            return Err(Error::LayoutMismatch(format!(
                "state dimensions ({}, {}x{}) do not match layout dim {}",
                mean.len(),
                cov.nrows(),
                cov.ncols(),
                dim
            )));
        }
        let defect = linalg::symmetry_defect(&cov);
        if defect > 1e-9 {
            return Err(Error::NonSymmetric { defect });
        }
        let mut cov = cov;
        linalg::symmetrize(&mut cov);
        Ok(Self { layout, mean, cov })
    }

    pub fn vacuum(layout: ModeLayout) -> Self {
        let dim = layout.dim();
        Self {
            layout,
            mean: DVector::zeros(dim),
            cov: DMatrix::identity(dim, dim) * 0.5,
        }
    }

    pub fn layout(&self) -> &ModeLayout {
        &self.layout
    }

    pub fn n_modes(&self) -> usize {
        self.layout.n_modes()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Marginal state over the given modes (partial trace of the rest).
    pub fn reduce(&self, modes: &[usize]) -> Result<GaussianState> {
        let sub_layout = self.layout.select(modes)?;
        let n = self.n_modes();
        let m = modes.len();
        // phase-space indices of the kept modes, x block then p block
        let idx: Vec<usize> = modes
            .iter()
            .map(|&k| k)
            .chain(modes.iter().map(|&k| n + k))
            .collect();
        let mean = DVector::from_fn(2 * m, |i, _| self.mean[idx[i]]);
        let cov = DMatrix::from_fn(2 * m, 2 * m, |i, j| self.cov[(idx[i], idx[j])]);
        GaussianState::new(sub_layout, mean, cov)
    }

    /// Symplectic spectrum of the covariance matrix, descending.
    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        symplectic_eigenvalues(&self.cov)
    }

    /// S(ρ) = Σ_k [(ν_k+½)ln(ν_k+½) - (ν_k-½)ln(ν_k-½)].
    pub fn von_neumann_entropy(&self) -> Result<f64> {
        Ok(entropy_from_nu(&self.symplectic_eigenvalues()?))
    }

    /// ½ tr(M σ) + ½ ⟨z⟩ᵀ M ⟨z⟩ for the quadratic form described by `form`.
    pub fn mean_energy(&self, form: &EnergyForm) -> Result<f64> {
        let n = self.n_modes();
        for &m in &form.modes {
            if m >= n {
                return Err(Error::LayoutMismatch(format!(
                    "energy form touches mode {m}, state has {n} modes"
                )));
            }
        }
        let k = form.modes.len();
        let mut e = 0.0;
        for a in 0..k {
            let ia = form.modes[a];
            for b in 0..k {
                let vab = form.v[(a, b)];
                if vab != 0.0 {
                    let ib = form.modes[b];
                    e += 0.5 * vab * (self.cov[(ia, ib)] + self.mean[ia] * self.mean[ib]);
                }
            }
            if form.kinetic {
                let pa = n + ia;
                e += 0.5 * (self.cov[(pa, pa)] + self.mean[pa] * self.mean[pa]);
            }
        }
        Ok(e)
    }

    /// Relative entropy D(ρ ‖ ρ_th(H_ref, T_ref)) = -S(ρ) + ⟨H_ref⟩/T + ln Z.
    pub fn relative_entropy_thermal(
        &self,
        h_ref: &QuadraticHamiltonian,
        t_ref: f64,
    ) -> Result<f64> {
        if h_ref.layout() != self.layout() {
            return Err(Error::LayoutMismatch(
                "reference Hamiltonian modes differ from state modes".into(),
            ));
        }
        let energy = self.mean_energy(&EnergyForm::block(
            (0..self.n_modes()).collect(),
            h_ref.potential().clone(),
        )?)?;
        Ok(-self.von_neumann_entropy()? + energy / t_ref + h_ref.log_partition(t_ref)?)
    }

    /// I(A, B) = S(ρ_A) + S(ρ_B) - S(ρ_AB) for a bipartition of all modes.
    pub fn mutual_information(&self, part_a: &[usize], part_b: &[usize]) -> Result<f64> {
        check_partition(self.n_modes(), &[part_a, part_b])?;
        Ok(self.reduce(part_a)?.von_neumann_entropy()?
            + self.reduce(part_b)?.von_neumann_entropy()?
            - self.von_neumann_entropy()?)
    }

    /// C = Σ_parts S(ρ_part) - S(ρ); equals mutual information for two parts.
    pub fn total_correlation(&self, parts: &[&[usize]]) -> Result<f64> {
        check_partition(self.n_modes(), parts)?;
        let mut c = -self.von_neumann_entropy()?;
        for part in parts {
            c += self.reduce(part)?.von_neumann_entropy()?;
        }
        Ok(c)
    }
}

fn check_partition(n_modes: usize, parts: &[&[usize]]) -> Result<()> {
    let mut seen = vec![false; n_modes];
    for part in parts {
        if part.is_empty() {
            return Err(Error::BadPartition("empty part".into()));
        }
        for &m in *part {
            if m >= n_modes {
                return Err(Error::IndexOutOfRange { index: m, n_modes });
            }
            if seen[m] {
                return Err(Error::BadPartition(format!("mode {m} appears twice")));
            }
            seen[m] = true;
        }
    }
    if seen.iter().any(|&s| !s) {
        return Err(Error::BadPartition("parts do not cover all modes".into()));
    }
    Ok(())
}

/// Quadratic energy functional over a subset of a state's modes: a potential
/// block V plus, optionally, the kinetic term ½ Σ p² of the same modes.
/// Pure cross terms (e.g. λ x_a x_b) are forms without kinetic part.
#[derive(Clone, Debug)]
pub struct EnergyForm {
    modes: Vec<usize>,
    v: DMatrix<f64>,
    kinetic: bool,
}

impl EnergyForm {
    pub fn new(modes: Vec<usize>, v: DMatrix<f64>, kinetic: bool) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::EmptySubset);
        }
        if v.nrows() != modes.len() || v.ncols() != modes.len() {
            return Err(Error::LayoutMismatch(format!(
                "potential block is {}x{} for {} modes",
                v.nrows(),
                v.ncols(),
                modes.len()
            )));
        }
        let defect = linalg::symmetry_defect(&v);
        if defect > SYMMETRY_TOL {
            return Err(Error::NonSymmetric { defect });
        }
        let mut v = v;
        linalg::symmetrize(&mut v);
        Ok(Self { modes, v, kinetic })
    }

    /// Full harmonic term ½(p² + ω² x²) of a single mode.
    pub fn oscillator(mode: usize, omega: f64) -> Self {
        Self {
            modes: vec![mode],
            v: DMatrix::from_element(1, 1, omega * omega),
            kinetic: true,
        }
    }

    /// Potential block with kinetic part over the given modes.
    pub fn block(modes: Vec<usize>, v: DMatrix<f64>) -> Result<Self> {
        Self::new(modes, v, true)
    }

    /// Bilinear coupling c·x_a·x_b with no kinetic part.
    pub fn coupling(mode_a: usize, mode_b: usize, strength: f64) -> Self {
        let mut v = DMatrix::zeros(2, 2);
        v[(0, 1)] = strength;
        v[(1, 0)] = strength;
        Self {
            modes: vec![mode_a, mode_b],
            v,
            kinetic: false,
        }
    }

    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    pub fn potential(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn has_kinetic(&self) -> bool {
        self.kinetic
    }
}

/// Symplectic spectrum of a covariance matrix, computed from the eigenvalues
/// ±iν_k of Ω·σ. Returns the n values ν_k in descending order; values within
/// [½ - PHYS_EPS, ½) are clamped to ½, anything lower is unphysical.
pub fn symplectic_eigenvalues(cov: &DMatrix<f64>) -> Result<Vec<f64>> {
    let dim = cov.nrows();
    if dim != cov.ncols() || dim % 2 != 0 || dim == 0 {
        return Err(Error::LayoutMismatch(format!(
            "covariance must be square of even size, got {}x{}",
            dim,
            cov.ncols()
        )));
    }
    let defect = linalg::symmetry_defect(cov);
    if defect > 1e-9 {
        return Err(Error::NonSymmetric { defect });
    }
    let k = linalg::apply_symplectic_form(cov);
    let ev = linalg::complex_eigenvalues(&k)?;
    let mut ims: Vec<f64> = ev.iter().map(|&(_, im)| im.abs()).collect();
    ims.sort_by(|a, b| b.total_cmp(a));
    let n = dim / 2;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let (a, b) = (ims[2 * k], ims[2 * k + 1]);
        let scale = a.max(0.5);
        if (a - b).abs() > PAIRING_TOL * scale {
            return Err(Error::PairingMismatch {
                gap: (a - b).abs() / scale,
            });
        }
        let nu = 0.5 * (a + b);
        if nu < 0.5 - PHYS_EPS {
            return Err(Error::UnphysicalState { nu });
        }
        out.push(nu.max(0.5));
    }
    Ok(out)
}

/// Entropy contribution of each symplectic eigenvalue, summed. The ν = ½
/// term is zero by the x ln x → 0 limit.
pub fn entropy_from_nu(nu: &[f64]) -> f64 {
    nu.iter()
        .map(|&v| {
            let a = v + 0.5;
            let b = v - 0.5;
            let tail = if b > 0.0 { b * b.ln() } else { 0.0 };
            a * a.ln() - tail
        })
        .sum()
}
