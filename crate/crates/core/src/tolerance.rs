/// Numerical thresholds shared by the algebraic routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Singular values below `rank * max(sigma_max, 1)` count as zero.
    pub rank: f64,
    /// Residual bound for identities (antisymmetry, Jacobi, Leibniz) on unit-scale inputs.
    pub zero: f64,
    /// Absolute threshold on real parts separating g+ / g0 / g-. `None` selects
    /// `1e-8 * max(spectral radius, 1)`.
    pub spectral: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank: 1e-10,
            zero: 1e-9,
            spectral: None,
        }
    }
}

impl Tolerances {
    pub fn with_spectral(mut self, tau: f64) -> Self {
        self.spectral = Some(tau);
        self
    }

    pub fn spectral_for(&self, spectral_radius: f64) -> f64 {
        self.spectral
            .unwrap_or_else(|| 1e-8 * spectral_radius.max(1.0))
    }
}
