/// Left-closed uniform grid `t_n = t_min + n (t_max − t_min) / n_points`,
/// `n = 0..n_points`; `t_max` itself is not included.
pub fn uniform_grid(t_min: f64, t_max: f64, n_points: usize) -> Vec<f64> {
    let span = t_max - t_min;
    (0..n_points)
        .map(|n| t_min + span * n as f64 / n_points as f64)
        .collect()
}

/// Uniformly sampled expectation value of an observable.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_left_closed() {
        let g = uniform_grid(0.0, 10.0, 400);
        assert_eq!(g.len(), 400);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[1], 0.025);
        assert!(g[399] < 10.0);
        assert_eq!(g[200], 5.0);
    }
}
