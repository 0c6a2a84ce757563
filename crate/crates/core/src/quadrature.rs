//! Composite Gauss–Legendre rules built by adaptive panel bisection.
//!
//! A [`Rule`] is a flat list of nodes and weights. It is built once for a
//! family of integrands (the "probes") and can then be applied to any member
//! of that family, which is how the bath kernels get evaluated on thousands
//! of time points without re-running the refinement.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Nodes per panel.
pub const GL_ORDER: usize = 16;

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static TABLE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    TABLE.get_or_init(|| gauss_legendre(GL_ORDER))
}

/// Flat quadrature rule: `∫ g ≈ Σ weights[i] · g(nodes[i])`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Change of variables `x = map(u)` applied on a parameter interval.
pub trait PanelMap {
    /// Returns `(x, dx/du)`.
    fn apply(&self, u: f64) -> (f64, f64);
}

pub struct Identity;

impl PanelMap for Identity {
    fn apply(&self, u: f64) -> (f64, f64) {
        (u, 1.0)
    }
}

/// `x = scale · u^power` on `u ∈ [0, 1]`; absorbs an integrable `x^λ`
/// endpoint singularity when `power = 1/(λ + 1)`.
pub struct PowerMap {
    pub scale: f64,
    pub power: f64,
}

impl PanelMap for PowerMap {
    fn apply(&self, u: f64) -> (f64, f64) {
        if self.power == 1.0 {
            return (self.scale * u, self.scale);
        }
        let up = u.powf(self.power - 1.0);
        (self.scale * up * u, self.scale * self.power * up)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RefineSettings {
    /// Absolute tolerance shared across the whole interval in proportion to
    /// panel width.
    pub tol: f64,
    pub max_depth: u32,
    pub initial_panels: usize,
    /// Extra uniform bisections applied to every accepted panel.
    pub extra_levels: u32,
}

/// Adaptive bisection on `[a, b]` in parameter space.
///
/// `probe(x, out)` writes the values of every probe integrand at `x`.
/// A panel is accepted when, for every probe, the one-panel and two-half
/// estimates differ by at most `tol · width / (b − a)`; the nodes of the two
/// halves are then appended to `rule`.
pub fn refine_into<M: PanelMap>(
    rule: &mut Rule,
    a: f64,
    b: f64,
    map: &M,
    n_probes: usize,
    probe: &dyn Fn(f64, &mut [f64]),
    settings: RefineSettings,
) -> Result<()> {
    let total = b - a;
    if total <= 0.0 {
        return Ok(());
    }
    let n0 = settings.initial_panels.max(1);
    let mut stack: Vec<(f64, f64, u32)> = (0..n0)
        .rev()
        .map(|k| {
            let lo = a + total * k as f64 / n0 as f64;
            let hi = if k + 1 == n0 {
                b
            } else {
                a + total * (k + 1) as f64 / n0 as f64
            };
            (lo, hi, 0)
        })
        .collect();

    let mut whole = vec![0.0; n_probes];
    let mut left = vec![0.0; n_probes];
    let mut right = vec![0.0; n_probes];
    let mut scratch = vec![0.0; n_probes];

    while let Some((lo, hi, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        panel_estimate(lo, hi, map, probe, &mut scratch, &mut whole);
        panel_estimate(lo, mid, map, probe, &mut scratch, &mut left);
        panel_estimate(mid, hi, map, probe, &mut scratch, &mut right);
        let allowed = settings.tol * (hi - lo) / total;
        let mut err = 0.0f64;
        let mut scale = 0.0f64;
        let mut finite = true;
        for (w, (l, r)) in whole.iter().zip(left.iter().zip(&right)) {
            let d = (w - (l + r)).abs();
            finite &= d.is_finite();
            err = err.max(d);
            scale = scale.max(l.abs() + r.abs());
        }
        // below this the two estimates differ by rounding only
        let floor = 64.0 * f64::EPSILON * scale;
        if !finite {
            return Err(Error::Quadrature(format!(
                "non-finite integrand on panel [{lo:e}, {hi:e}]"
            )));
        }
        if err <= allowed.max(floor) {
            let pieces = 2usize << settings.extra_levels;
            let width = (hi - lo) / pieces as f64;
            for k in 0..pieces {
                let plo = lo + width * k as f64;
                let phi = if k + 1 == pieces { hi } else { plo + width };
                push_panel(rule, plo, phi, map);
            }
        } else if depth >= settings.max_depth {
            return Err(Error::Quadrature(format!(
                "panel [{lo:e}, {hi:e}] still off by {err:e} (allowed {allowed:e}) after {depth} bisections"
            )));
        } else {
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    Ok(())
}

fn panel_estimate<M: PanelMap>(
    lo: f64,
    hi: f64,
    map: &M,
    probe: &dyn Fn(f64, &mut [f64]),
    scratch: &mut [f64],
    out: &mut [f64],
) {
    let (xs, ws) = gl16();
    let half = 0.5 * (hi - lo);
    let centre = 0.5 * (hi + lo);
    out.iter_mut().for_each(|v| *v = 0.0);
    for (&xi, &wi) in xs.iter().zip(ws) {
        let (x, jac) = map.apply(centre + half * xi);
        probe(x, scratch);
        let w = wi * half * jac;
        for (o, s) in out.iter_mut().zip(scratch.iter()) {
            *o += w * s;
        }
    }
}

fn push_panel<M: PanelMap>(rule: &mut Rule, lo: f64, hi: f64, map: &M) {
    let (xs, ws) = gl16();
    let half = 0.5 * (hi - lo);
    let centre = 0.5 * (hi + lo);
    for (&xi, &wi) in xs.iter().zip(ws) {
        let (x, jac) = map.apply(centre + half * xi);
        rule.nodes.push(x);
        rule.weights.push(wi * half * jac);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_nodes_integrate_polynomials_exactly() {
        let (x, w) = gauss_legendre(GL_ORDER);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        // degree 30 monomial: ∫_{-1}^{1} x^30 = 2/31
        let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(30)).sum();
        assert!((q - 2.0 / 31.0).abs() < 1e-14);
        let odd: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(31)).sum();
        assert!(odd.abs() < 1e-15);
    }

    #[test]
    fn adaptive_rule_handles_oscillation() {
        let mut rule = Rule::default();
        let settings = RefineSettings {
            tol: 1e-12,
            max_depth: 40,
            initial_panels: 1,
            extra_levels: 0,
        };
        refine_into(
            &mut rule,
            0.0,
            20.0,
            &Identity,
            1,
            &|x, out| out[0] = (7.0 * x).cos() * (-x).exp(),
            settings,
        )
        .unwrap();
        // ∫_0^20 e^{-x} cos 7x dx = (1 - e^{-20}(cos 140 - 7 sin 140)) / 50
        let e = (-20.0f64).exp();
        let exact = (1.0 - e * ((140.0f64).cos() - 7.0 * (140.0f64).sin())) / 50.0;
        let got = rule.integrate(|x| (7.0 * x).cos() * (-x).exp());
        assert!((got - exact).abs() < 1e-12, "{got} vs {exact}");
    }

    #[test]
    fn power_map_removes_endpoint_singularity() {
        // ∫_0^1 x^{-0.7} dx = 1/0.3
        let mut rule = Rule::default();
        let map = PowerMap {
            scale: 1.0,
            power: 1.0 / 0.3,
        };
        refine_into(
            &mut rule,
            0.0,
            1.0,
            &map,
            1,
            &|x, out| out[0] = x.powf(-0.7),
            RefineSettings {
                tol: 1e-12,
                max_depth: 40,
                initial_panels: 1,
                extra_levels: 0,
            },
        )
        .unwrap();
        let got = rule.integrate(|x| x.powf(-0.7));
        assert!((got - 1.0 / 0.3).abs() < 1e-11, "{got}");
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let mut rule = Rule::default();
        let res = refine_into(
            &mut rule,
            0.0,
            1.0,
            &Identity,
            1,
            &|_, out| out[0] = f64::NAN,
            RefineSettings {
                tol: 1e-10,
                max_depth: 5,
                initial_panels: 1,
                extra_levels: 0,
            },
        );
        assert!(matches!(res, Err(Error::Quadrature(_))));
    }
}
