//! Exact pure-dephasing spin-boson dynamics.
//!
//! With a `σ_z` coupling the populations are conserved and the coherence
//! decays as `ρ₀₁(t) = ρ₀₁(0) e^{−Γ(t)}`, where
//! `Γ(t) = 4 ∫₀^∞ J(ω) coth(βω/2) (1 − cos ωt) / ω² dω`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::Rule;
use crate::spectral::{
    horizon_for, probe_times, thermal, thermal_rule, InverseTemperature, QuadratureOptions, SpectralDensity,
};
use crate::timeseries::{uniform_grid, Trajectory};

/// 2×2 complex density matrix in the `σ_z` basis `{|0⟩, |1⟩}`.
pub type DensityMatrix = [[Complex64; 2]; 2];

/// `|+⟩⟨+|` with `|+⟩ = (|0⟩ + |1⟩)/√2`.
pub fn plus_state() -> DensityMatrix {
    let h = Complex64::new(0.5, 0.0);
    [[h, h], [h, h]]
}

pub fn validate_density(rho: &DensityMatrix) -> Result<()> {
    let [[a, b], [c, d]] = *rho;
    if [a, b, c, d].iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::Config("density matrix has non-finite entries".into()));
    }
    if a.im.abs() > 1e-12 || d.im.abs() > 1e-12 || (b - c.conj()).norm() > 1e-12 {
        return Err(Error::Config("density matrix is not Hermitian".into()));
    }
    if (a.re + d.re - 1.0).abs() > 1e-12 {
        return Err(Error::Config(format!(
            "density matrix trace is {} (expected 1)",
            a.re + d.re
        )));
    }
    // eigenvalues of a Hermitian 2×2: (tr ± √((a−d)² + 4|b|²))/2
    let disc = ((a.re - d.re).powi(2) + 4.0 * b.norm_sqr()).sqrt();
    let lowest = 0.5 * (a.re + d.re - disc);
    if lowest < -1e-12 {
        return Err(Error::Config(format!(
            "density matrix is not positive semidefinite (eigenvalue {lowest})"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DephasingConfig {
    pub sd: SpectralDensity,
    pub beta: InverseTemperature,
    pub rho0: DensityMatrix,
    pub t_min: f64,
    pub t_max: f64,
    pub n_points: usize,
}

impl DephasingConfig {
    pub fn validate(&self) -> Result<()> {
        validate_density(&self.rho0)?;
        if !(self.t_min.is_finite() && self.t_max.is_finite() && self.t_min < self.t_max) {
            return Err(Error::Config(format!(
                "time window [{}, {}] is empty",
                self.t_min, self.t_max
            )));
        }
        if self.t_min < 0.0 {
            return Err(Error::Config("dephasing window must start at t >= 0".into()));
        }
        if self.n_points < 2 {
            return Err(Error::Config("need at least two sample points".into()));
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        uniform_grid(self.t_min, self.t_max, self.n_points)
    }
}

/// Quadrature rule for Γ(t) valid on `0 ≤ t ≤ horizon`.
#[derive(Debug, Clone)]
pub struct DecoherenceRule {
    omegas: Vec<f64>,
    weights: Vec<f64>,
    horizon: f64,
}

impl DecoherenceRule {
    pub fn build(
        sd: &SpectralDensity,
        beta: InverseTemperature,
        horizon: f64,
        opts: &QuadratureOptions,
    ) -> Result<Self> {
        let times = probe_times(horizon);
        let kernel = |w: f64| 4.0 * thermal(sd, beta, w);
        let probe = |w: f64, out: &mut [f64]| {
            let f = kernel(w);
            for (o, &t) in out.iter_mut().zip(&times[1..]) {
                *o = f * half_angle_factor(w, t);
            }
        };
        let Rule { nodes, weights } =
            thermal_rule(sd, beta, horizon, opts, times.len() - 1, &probe)?;
        let weights = nodes
            .iter()
            .zip(&weights)
            .map(|(&w, &q)| q * kernel(w))
            .collect();
        Ok(Self {
            omegas: nodes,
            weights,
            horizon,
        })
    }

    /// Γ(t) from the stored `4 J(ω) coth(βω/2)` weights.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("decoherence function needs t >= 0, got {t}")));
        }
        if t > self.horizon {
            return Err(Error::Domain(format!(
                "time {t} beyond the rule horizon {}",
                self.horizon
            )));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        Ok(self
            .omegas
            .iter()
            .zip(&self.weights)
            .map(|(&w, &q)| q * half_angle_factor(w, t))
            .sum())
    }
}

/// `(1 − cos ωt)/ω² = 2 (sin(ωt/2)/ω)²`, kept bounded as ω → 0.
#[inline]
fn half_angle_factor(w: f64, t: f64) -> f64 {
    if w > 0.0 {
        let h = (0.5 * w * t).sin() / w;
        2.0 * h * h
    } else {
        0.5 * t * t
    }
}

/// Decoherence function Γ(t) for `t ≥ 0`.
pub fn decoherence_function(
    sd: &SpectralDensity,
    beta: InverseTemperature,
    t: f64,
) -> Result<f64> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("decoherence function needs t >= 0, got {t}")));
    }
    DecoherenceRule::build(sd, beta, horizon_for(t), &QuadratureOptions::default())?.eval(t)
}

/// Γ on a whole grid with a single rule.
pub fn decoherence_on_grid(
    sd: &SpectralDensity,
    beta: InverseTemperature,
    times: &[f64],
) -> Result<Vec<f64>> {
    let t_max = times.iter().fold(0.0f64, |m, &t| m.max(t));
    let rule = DecoherenceRule::build(sd, beta, horizon_for(t_max), &QuadratureOptions::default())?;
    times.iter().map(|&t| rule.eval(t)).collect()
}

fn apply_decoherence(rho0: &DensityMatrix, gamma: f64) -> DensityMatrix {
    let damp = (-gamma).exp();
    let c = rho0[0][1] * damp;
    [[rho0[0][0], c], [c.conj(), rho0[1][1]]]
}

/// Reduced density matrix at time `t` (interaction picture).
pub fn evolve_density(config: &DephasingConfig, t: f64) -> Result<DensityMatrix> {
    config.validate()?;
    if !(t >= config.t_min && t <= config.t_max) {
        return Err(Error::Domain(format!(
            "t = {t} outside [{}, {}]",
            config.t_min, config.t_max
        )));
    }
    let gamma = decoherence_function(&config.sd, config.beta, t)?;
    Ok(apply_decoherence(&config.rho0, gamma))
}

/// `⟨σ_x(t)⟩ = 2 Re(ρ₀₁(0) e^{−Γ(t)})` given precomputed Γ values.
pub fn sigma_x_from_gamma(rho0: &DensityMatrix, gamma: &[f64]) -> Vec<f64> {
    gamma
        .iter()
        .map(|&g| 2.0 * rho0[0][1].re * (-g).exp())
        .collect()
}

/// `⟨σ_x(t)⟩` on the configured uniform grid.
pub fn sigma_x_trajectory(config: &DephasingConfig) -> Result<Trajectory> {
    config.validate()?;
    let times = config.times();
    let gamma = decoherence_on_grid(&config.sd, config.beta, &times)?;
    let values = sigma_x_from_gamma(&config.rho0, &gamma);
    Ok(Trajectory { times, values })
}
