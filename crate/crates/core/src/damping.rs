//! Second-order time-convolutionless amplitude-damping dynamics.
//!
//! The Bloch vector obeys `d⟨σ⟩/dt = A(t)⟨σ⟩ + b(t)` with
//!
//! ```text
//!        ⎡ 0            −ω₀      0    ⎤            ⎡ 0      ⎤
//! A(t) = ⎢ ω₀ + a_yx(t)  a_zz(t)  0    ⎥,   b(t) = ⎢ 0      ⎥
//!        ⎣ 0             0        a_zz(t)⎦          ⎣ b_z(t) ⎦
//! ```
//!
//! where `a_yx = ∫₀ᵗ ν sin ω₀s`, `a_zz = −∫₀ᵗ ν cos ω₀s`, `b_z = ∫₀ᵗ μ sin ω₀s`.
//! The σ_y decay coefficient `a_yy` is the same integral as `a_zz`, so only
//! `a_zz` is stored.
//!
//! Coefficients are tabulated on a fine grid of step `h/2` and the ODE is
//! advanced with fixed-step RK4 of step `h`, so every stage reads a tabulated
//! value exactly.

use crate::error::{Error, Result};
use crate::spectral::{tabulate_kernels, InverseTemperature, KernelGrid, SpectralDensity};
use crate::timeseries::{uniform_grid, Trajectory};

pub type BlochVector = [f64; 3];

/// Default number of fine-grid points on `[0, t_max]`.
pub const DEFAULT_FINE_POINTS: usize = 8001;

/// Allowed excursion of ⟨σ_x⟩ beyond [−1, 1] before a trajectory is
/// declared unphysical.
pub const BOUND_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct DampingConfig {
    pub sd: SpectralDensity,
    pub beta: InverseTemperature,
    pub omega0: f64,
    pub bloch0: BlochVector,
    pub t_min: f64,
    pub t_max: f64,
    pub n_points: usize,
    /// Points of the coefficient grid on `[0, t_max]`, endpoints included.
    pub fine_points: usize,
}

impl DampingConfig {
    pub fn validate(&self) -> Result<()> {
        let norm = self.bloch0.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm <= 1.0 + 1e-12) {
            return Err(Error::Config(format!("initial Bloch vector has length {norm} > 1")));
        }
        if !self.omega0.is_finite() {
            return Err(Error::Config("omega0 must be finite".into()));
        }
        if !(self.t_min >= 0.0 && self.t_min < self.t_max && self.t_max.is_finite()) {
            return Err(Error::Config(format!(
                "time window [{}, {}] must satisfy 0 <= t_min < t_max",
                self.t_min, self.t_max
            )));
        }
        if self.n_points < 2 {
            return Err(Error::Config("need at least two sample points".into()));
        }
        if self.fine_points < 3 || !(self.fine_points - 1).is_multiple_of(2) {
            return Err(Error::Config(format!(
                "fine grid needs an odd number of points >= 3, got {}",
                self.fine_points
            )));
        }
        Ok(())
    }

    pub fn fine_grid(&self) -> Vec<f64> {
        closed_grid(self.t_max, self.fine_points)
    }

    pub fn times(&self) -> Vec<f64> {
        uniform_grid(self.t_min, self.t_max, self.n_points)
    }
}

/// `n` points on `[0, t_max]`, both ends included.
pub fn closed_grid(t_max: f64, n: usize) -> Vec<f64> {
    let intervals = (n - 1) as f64;
    (0..n).map(|k| t_max * k as f64 / intervals).collect()
}

/// Running integrals `a_yx`, `a_zz`, `b_z` on a uniform grid from 0.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    pub times: Vec<f64>,
    pub a_yx: Vec<f64>,
    pub a_zz: Vec<f64>,
    pub b_z: Vec<f64>,
}

impl CoefficientTable {
    pub fn step(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    /// Every `stride`-th entry, i.e. the same functions on a coarser grid.
    pub fn subsample(&self, stride: usize) -> Result<Self> {
        if stride == 0 || !(self.times.len() - 1).is_multiple_of(stride) {
            return Err(Error::Config(format!(
                "stride {stride} does not divide {} intervals",
                self.times.len() - 1
            )));
        }
        let pick = |v: &[f64]| v.iter().step_by(stride).copied().collect::<Vec<_>>();
        Ok(Self {
            times: pick(&self.times),
            a_yx: pick(&self.a_yx),
            a_zz: pick(&self.a_zz),
            b_z: pick(&self.b_z),
        })
    }

    /// Cumulative trapezoidal integrals of tabulated kernels.
    pub fn from_kernels(kernels: &KernelGrid, omega0: f64) -> Result<Self> {
        validate_fine_grid(&kernels.times)?;
        let n = kernels.times.len();
        let h = kernels.times[1] - kernels.times[0];
        let mut a_yx = vec![0.0; n];
        let mut a_zz = vec![0.0; n];
        let mut b_z = vec![0.0; n];
        let integrands = |k: usize| {
            let (sn, cs) = (omega0 * kernels.times[k]).sin_cos();
            (kernels.nu[k] * sn, kernels.nu[k] * cs, kernels.mu[k] * sn)
        };
        let mut prev = integrands(0);
        for k in 1..n {
            let cur = integrands(k);
            a_yx[k] = a_yx[k - 1] + 0.5 * h * (prev.0 + cur.0);
            a_zz[k] = a_zz[k - 1] - 0.5 * h * (prev.1 + cur.1);
            b_z[k] = b_z[k - 1] + 0.5 * h * (prev.2 + cur.2);
            prev = cur;
        }
        Ok(Self {
            times: kernels.times.clone(),
            a_yx,
            a_zz,
            b_z,
        })
    }
}

fn validate_fine_grid(times: &[f64]) -> Result<()> {
    if times.len() < 2 {
        return Err(Error::Config("coefficient grid needs at least two points".into()));
    }
    if times[0] != 0.0 {
        return Err(Error::Config(format!(
            "coefficient grid must start at 0, starts at {}",
            times[0]
        )));
    }
    let h = times[1] - times[0];
    if !(h > 0.0) {
        return Err(Error::Config("coefficient grid must be increasing".into()));
    }
    let tol = 1e-9 * h;
    for (k, &t) in times.iter().enumerate() {
        if (t - h * k as f64).abs() > tol * (k.max(1) as f64) {
            return Err(Error::Config(format!("coefficient grid is not uniform at index {k}")));
        }
    }
    Ok(())
}

/// Tabulates ν, μ on `fine_grid` and integrates the three coefficients.
pub fn coefficient_table(
    sd: &SpectralDensity,
    beta: InverseTemperature,
    omega0: f64,
    fine_grid: &[f64],
) -> Result<CoefficientTable> {
    validate_fine_grid(fine_grid)?;
    let kernels = tabulate_kernels(sd, beta, fine_grid)?;
    CoefficientTable::from_kernels(&kernels, omega0)
}

/// Bloch vector on the RK4 step grid `t_k = k h`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochSeries {
    pub times: Vec<f64>,
    pub states: Vec<BlochVector>,
}

impl BlochSeries {
    pub fn component(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[i]).collect()
    }
}

#[inline]
fn rhs(omega0: f64, table: &CoefficientTable, k: usize, v: &BlochVector) -> BlochVector {
    let a_yx = table.a_yx[k];
    let a_zz = table.a_zz[k];
    [
        -omega0 * v[1],
        (omega0 + a_yx) * v[0] + a_zz * v[1],
        a_zz * v[2] + table.b_z[k],
    ]
}

#[inline]
fn axpy(v: &BlochVector, h: f64, d: &BlochVector) -> BlochVector {
    [v[0] + h * d[0], v[1] + h * d[1], v[2] + h * d[2]]
}

/// Classical RK4 with step `2 × table.step()` up to `t_end`.
pub fn integrate_bloch(
    omega0: f64,
    bloch0: BlochVector,
    table: &CoefficientTable,
    t_end: f64,
) -> Result<BlochSeries> {
    let n_fine = table.times.len() - 1;
    let hf = table.step();
    let covered = table.times[n_fine];
    if t_end > covered + 1e-9 * hf {
        return Err(Error::Coverage(format!(
            "table ends at {covered}, integration needs {t_end}"
        )));
    }
    let steps = ((t_end / (2.0 * hf)) + 1e-9).floor() as usize;
    if 2 * steps > n_fine {
        return Err(Error::Coverage(format!(
            "{steps} RK4 steps need {} fine intervals, table has {n_fine}",
            2 * steps
        )));
    }
    let h = 2.0 * hf;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut v = bloch0;
    times.push(table.times[0]);
    states.push(v);
    for k in 0..steps {
        let i = 2 * k;
        let k1 = rhs(omega0, table, i, &v);
        let k2 = rhs(omega0, table, i + 1, &axpy(&v, 0.5 * h, &k1));
        let k3 = rhs(omega0, table, i + 1, &axpy(&v, 0.5 * h, &k2));
        let k4 = rhs(omega0, table, i + 2, &axpy(&v, h, &k3));
        for c in 0..3 {
            v[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
        times.push(table.times[i + 2]);
        states.push(v);
    }
    Ok(BlochSeries { times, states })
}

/// Builds the coefficient table for `config` and integrates to `t_max`.
pub fn evolve_bloch(config: &DampingConfig) -> Result<BlochSeries> {
    config.validate()?;
    let table = coefficient_table(&config.sd, config.beta, config.omega0, &config.fine_grid())?;
    integrate_bloch(config.omega0, config.bloch0, &table, config.t_max)
}

/// Picks the RK4 states at the output grid of `config`.
pub fn sample_series(config: &DampingConfig, series: &BlochSeries, component: usize) -> Result<Trajectory> {
    let h = series.times[1] - series.times[0];
    let times = config.times();
    let mut values = Vec::with_capacity(times.len());
    for &t in &times {
        let k = (t / h).round();
        if (k * h - t).abs() > 1e-9 * h.max(t) || k as usize >= series.states.len() {
            return Err(Error::Coverage(format!(
                "sample time {t} is not on the RK4 step grid (h = {h})"
            )));
        }
        values.push(series.states[k as usize][component]);
    }
    Ok(Trajectory { times, values })
}

/// `⟨σ_x(t)⟩` on the configured output grid.
pub fn sigma_x_trajectory_damping(config: &DampingConfig) -> Result<Trajectory> {
    let series = evolve_bloch(config)?;
    sample_series(config, &series, 0)
}

/// Rejects trajectories leaving `[−1 − BOUND_SLACK, 1 + BOUND_SLACK]`.
pub fn check_bounds(values: &[f64]) -> Result<()> {
    if let Some((i, v)) = values
        .iter()
        .enumerate()
        .find(|(_, v)| !(v.abs() <= 1.0 + BOUND_SLACK))
    {
        return Err(Error::Unphysical(format!(
            "sample {i} has <sigma_x> = {v}, outside [-1, 1] by more than {BOUND_SLACK}"
        )));
    }
    Ok(())
}
