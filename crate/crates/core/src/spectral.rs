//! Spectral densities with exponential cutoff and the bath correlation
//! kernels ν(t) (noise) and μ(t) (dissipation).
//!
//! Kernels are evaluated with a composite Gauss–Legendre rule over
//! `ω ∈ [0, 50 ω_c]`. The rule is refined once per spectral density and
//! time horizon against a set of probe frequencies and then reused for every
//! requested time, so a single evaluation and a tabulation over the same
//! horizon use identical nodes.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{refine_into, Identity, PowerMap, RefineSettings, Rule};

/// Cutoff function `f(ω, ω_c)` multiplying the power law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Cutoff {
    #[default]
    Exponential,
}

/// `J(ω) = η ω_c^{1−s} ω^s f(ω, ω_c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralDensity {
    eta: f64,
    omega_c: f64,
    s: f64,
    cutoff: Cutoff,
}

impl SpectralDensity {
    /// Exponential-cutoff density. `eta = 0` is accepted and describes a
    /// decoupled system.
    pub fn new(eta: f64, omega_c: f64, s: f64) -> Result<Self> {
        if !(eta.is_finite() && eta >= 0.0) {
            return Err(Error::Domain(format!("coupling eta must be >= 0, got {eta}")));
        }
        if !(omega_c.is_finite() && omega_c > 0.0) {
            return Err(Error::Domain(format!("cutoff omega_c must be > 0, got {omega_c}")));
        }
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::Domain(format!("Ohmicity s must be > 0, got {s}")));
        }
        Ok(Self {
            eta,
            omega_c,
            s,
            cutoff: Cutoff::Exponential,
        })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn cutoff(&self) -> Cutoff {
        self.cutoff
    }

    pub fn evaluate(&self, omega: f64) -> Result<f64> {
        if !(omega >= 0.0) {
            return Err(Error::Domain(format!(
                "spectral density needs omega >= 0, got {omega}"
            )));
        }
        Ok(self.value(omega))
    }

    /// Unchecked evaluation for `omega >= 0`.
    #[inline]
    pub(crate) fn value(&self, omega: f64) -> f64 {
        if omega == 0.0 {
            return 0.0;
        }
        let x = omega / self.omega_c;
        match self.cutoff {
            Cutoff::Exponential => self.eta * self.omega_c * x.powf(self.s) * (-x).exp(),
        }
    }
}

/// Inverse temperature β = 1/T; `Infinite` is the zero-temperature bath.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InverseTemperature {
    Finite(f64),
    Infinite,
}

impl InverseTemperature {
    pub fn finite(beta: f64) -> Result<Self> {
        if beta.is_infinite() && beta > 0.0 {
            return Ok(Self::Infinite);
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::Domain(format!("beta must be > 0, got {beta}")));
        }
        Ok(Self::Finite(beta))
    }

    pub fn value(&self) -> f64 {
        match *self {
            Self::Finite(b) => b,
            Self::Infinite => f64::INFINITY,
        }
    }

    /// `coth(βω/2)`, with the small-argument series below `βω/2 < 1e-4`.
    #[inline]
    pub fn coth_half(&self, omega: f64) -> f64 {
        match *self {
            Self::Infinite => 1.0,
            Self::Finite(beta) => {
                let u = 0.5 * beta * omega;
                if u < 1e-4 {
                    let u2 = u * u;
                    1.0 / u + u / 3.0 - u * u2 / 45.0
                } else {
                    1.0 / u.tanh()
                }
            }
        }
    }
}

/// Quadrature controls shared by the kernel and decoherence-function rules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    /// Absolute tolerance for every probe integral.
    pub tol: f64,
    pub max_depth: u32,
    /// Extra uniform bisections of every accepted panel (convergence checks).
    pub extra_levels: u32,
    /// Upper integration limit in units of ω_c.
    pub upper_x: f64,
    /// Width of the dedicated low-frequency panel in units of ω_c.
    pub small_panel_x: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_depth: 48,
            extra_levels: 0,
            upper_x: 50.0,
            small_panel_x: 0.01,
        }
    }
}

/// Smallest horizon the rules are refined for.
pub const BASE_HORIZON: f64 = 10.0;

/// Horizon used for a rule that has to be accurate up to `|t|`: the
/// smallest `BASE_HORIZON · 2^k ≥ |t|`.
pub fn horizon_for(t_abs: f64) -> f64 {
    let mut h = BASE_HORIZON;
    while h < t_abs {
        h *= 2.0;
    }
    h
}

pub(crate) const PROBES: usize = 8;

pub(crate) fn probe_times(horizon: f64) -> [f64; PROBES + 1] {
    std::array::from_fn(|k| horizon * k as f64 / PROBES as f64)
}

/// Builds a rule for integrands on `[0, upper_x·ω_c]` whose small-ω
/// behaviour matches `J(ω) coth(βω/2)`, i.e. `ω^{s−1}` at finite β and
/// `ω^s` at zero temperature.
pub(crate) fn thermal_rule(
    sd: &SpectralDensity,
    beta: InverseTemperature,
    horizon: f64,
    opts: &QuadratureOptions,
    n_probes: usize,
    probe: &dyn Fn(f64, &mut [f64]),
) -> Result<Rule> {
    let wc = sd.omega_c();
    let a = opts.small_panel_x * wc;
    let b = opts.upper_x * wc;
    let lambda = match beta {
        InverseTemperature::Finite(_) => sd.s() - 1.0,
        InverseTemperature::Infinite => sd.s(),
    };
    // x = a·u^p turns x^λ dx into u^{p(λ+1)−1} = u for p = 2/(λ+1).
    let power = if lambda < 1.0 { 2.0 / (lambda + 1.0) } else { 1.0 };
    let mut rule = Rule::default();
    let settings = RefineSettings {
        tol: 0.5 * opts.tol,
        max_depth: opts.max_depth,
        initial_panels: 1,
        extra_levels: opts.extra_levels,
    };
    refine_into(
        &mut rule,
        0.0,
        1.0,
        &PowerMap { scale: a, power },
        n_probes,
        probe,
        settings,
    )?;
    // Roughly 40 rad of the fastest probe phase per starting panel.
    let phase = (b - a) * horizon;
    let initial = ((phase / 40.0).ceil() as usize).max(4);
    refine_into(
        &mut rule,
        a,
        b,
        &Identity,
        n_probes,
        probe,
        RefineSettings {
            initial_panels: initial,
            ..settings
        },
    )?;
    Ok(rule)
}

/// `J(ω) coth(βω/2)`, evaluated without forming the divergent `coth`
/// separately near ω = 0. Returns 0 at ω = 0, where nodes land only by
/// underflow.
#[inline]
pub(crate) fn thermal(sd: &SpectralDensity, beta: InverseTemperature, w: f64) -> f64 {
    if !(w > 0.0) {
        return 0.0;
    }
    match beta {
        InverseTemperature::Infinite => sd.value(w),
        InverseTemperature::Finite(b) => {
            let u = 0.5 * b * w;
            if u < 1e-4 {
                // J/u + J (u/3 − u³/45) with J/u = (2η/β) x^{s−1} e^{−x}
                let x = w / sd.omega_c();
                let e = (-x).exp();
                let lead = 2.0 * sd.eta() / b * x.powf(sd.s() - 1.0) * e;
                lead + sd.value(w) * (u / 3.0 - u * u * u / 45.0)
            } else {
                sd.value(w) / u.tanh()
            }
        }
    }
}

/// Precomputed nodes and weights for ν and μ, valid for `|t| ≤ horizon`.
#[derive(Debug, Clone)]
pub struct KernelRule {
    omegas: Vec<f64>,
    nu_weights: Vec<f64>,
    mu_weights: Vec<f64>,
    horizon: f64,
}

impl KernelRule {
    pub fn build(
        sd: &SpectralDensity,
        beta: InverseTemperature,
        horizon: f64,
        opts: &QuadratureOptions,
    ) -> Result<Self> {
        let times = probe_times(horizon);
        let probe = |w: f64, out: &mut [f64]| {
            let j = sd.value(w);
            let jc = thermal(sd, beta, w);
            for (k, &t) in times.iter().enumerate() {
                let (sn, cs) = (w * t).sin_cos();
                out[2 * k] = jc * cs;
                out[2 * k + 1] = j * sn;
            }
        };
        let rule = thermal_rule(sd, beta, horizon, opts, 2 * times.len(), &probe)?;
        let mut nu_weights = Vec::with_capacity(rule.len());
        let mut mu_weights = Vec::with_capacity(rule.len());
        for (&w, &q) in rule.nodes.iter().zip(&rule.weights) {
            nu_weights.push(q * thermal(sd, beta, w));
            mu_weights.push(q * sd.value(w));
        }
        Ok(Self {
            omegas: rule.nodes,
            nu_weights,
            mu_weights,
            horizon,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    fn check(&self, t: f64) -> Result<()> {
        if !t.is_finite() {
            return Err(Error::Domain(format!("kernel time must be finite, got {t}")));
        }
        if t.abs() > self.horizon {
            return Err(Error::Domain(format!(
                "time {t} beyond the rule horizon {}",
                self.horizon
            )));
        }
        Ok(())
    }

    pub fn noise(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self
            .omegas
            .iter()
            .zip(&self.nu_weights)
            .map(|(&w, &q)| q * (w * t).cos())
            .sum())
    }

    pub fn dissipation(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(-self
            .omegas
            .iter()
            .zip(&self.mu_weights)
            .map(|(&w, &q)| q * (w * t).sin())
            .sum::<f64>())
    }

    /// Both kernels at once; one `sin_cos` per node.
    pub fn both(&self, t: f64) -> Result<(f64, f64)> {
        self.check(t)?;
        let mut nu = 0.0;
        let mut mu = 0.0;
        for ((&w, &qn), &qm) in self.omegas.iter().zip(&self.nu_weights).zip(&self.mu_weights) {
            let (sn, cs) = (w * t).sin_cos();
            nu += qn * cs;
            mu += qm * sn;
        }
        Ok((nu, -mu))
    }
}

/// ν(tᵢ), μ(tᵢ) on an ascending time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelGrid {
    pub times: Vec<f64>,
    pub nu: Vec<f64>,
    pub mu: Vec<f64>,
}

/// `μ(t) = −∫₀^∞ J(ω) sin(ωt) dω`; independent of temperature.
pub fn dissipation_kernel(sd: &SpectralDensity, t: f64) -> Result<f64> {
    dissipation_kernel_with(sd, t, &QuadratureOptions::default())
}

pub fn dissipation_kernel_with(sd: &SpectralDensity, t: f64, opts: &QuadratureOptions) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::Domain(format!("kernel time must be finite, got {t}")));
    }
    // μ does not see β; the zero-temperature rule has the milder endpoint.
    KernelRule::build(sd, InverseTemperature::Infinite, horizon_for(t.abs()), opts)?.dissipation(t)
}

/// `ν(t) = ∫₀^∞ J(ω) coth(βω/2) cos(ωt) dω`.
pub fn noise_kernel(sd: &SpectralDensity, beta: InverseTemperature, t: f64) -> Result<f64> {
    noise_kernel_with(sd, beta, t, &QuadratureOptions::default())
}

pub fn noise_kernel_with(
    sd: &SpectralDensity,
    beta: InverseTemperature,
    t: f64,
    opts: &QuadratureOptions,
) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::Domain(format!("kernel time must be finite, got {t}")));
    }
    KernelRule::build(sd, beta, horizon_for(t.abs()), opts)?.noise(t)
}

/// `α_β(t) = ν(t) + i μ(t)`.
pub fn correlation_function(
    sd: &SpectralDensity,
    beta: InverseTemperature,
    t: f64,
) -> Result<Complex64> {
    if !t.is_finite() {
        return Err(Error::Domain(format!("kernel time must be finite, got {t}")));
    }
    let rule = KernelRule::build(sd, beta, horizon_for(t.abs()), &QuadratureOptions::default())?;
    let (nu, mu) = rule.both(t)?;
    Ok(Complex64::new(nu, mu))
}

/// Evaluates both kernels on a strictly increasing grid with a single rule.
pub fn tabulate_kernels(
    sd: &SpectralDensity,
    beta: InverseTemperature,
    times: &[f64],
) -> Result<KernelGrid> {
    tabulate_kernels_with(sd, beta, times, &QuadratureOptions::default())
}

pub fn tabulate_kernels_with(
    sd: &SpectralDensity,
    beta: InverseTemperature,
    times: &[f64],
    opts: &QuadratureOptions,
) -> Result<KernelGrid> {
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::Domain("kernel times must be finite".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("kernel times must be strictly increasing".into()));
    }
    let t_abs = times.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let rule = KernelRule::build(sd, beta, horizon_for(t_abs), opts)?;
    let mut nu = Vec::with_capacity(times.len());
    let mut mu = Vec::with_capacity(times.len());
    for &t in times {
        let (n, m) = rule.both(t)?;
        nu.push(n);
        mu.push(m);
    }
    Ok(KernelGrid {
        times: times.to_vec(),
        nu,
        mu,
    })
}
