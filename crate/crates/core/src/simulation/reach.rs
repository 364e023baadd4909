//! Monte Carlo sampling of reachable sets `A_T(g) = { phi_{T,u}(g) }`.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::control::ControlFunction;
use super::model::{integrate_endpoint, Model};
use crate::error::{Error, Result};
use crate::parallel::{map_indexed, Execution};
use crate::system::ControlRange;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReachConfig {
    /// Horizon `T >= 0`.
    pub horizon: f64,
    /// Piecewise-constant segments per control.
    pub segments: usize,
    pub samples: usize,
    pub seed: u64,
    /// Maximal integration step.
    pub step: f64,
}

impl Default for ReachConfig {
    fn default() -> Self {
        Self {
            horizon: 1.0,
            segments: 4,
            samples: 100,
            seed: 0,
            step: 1e-2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReachSample {
    /// Endpoint of sample `i` at index `i`.
    pub endpoints: Vec<DVector<f64>>,
    pub config: Option<ReachConfig>,
}

impl ReachSample {
    /// Smallest and largest value of coordinate `k` over all endpoints.
    pub fn extent(&self, k: usize) -> (f64, f64) {
        self.endpoints
            .iter()
            .map(|e| e[k])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
    }
}

/// The control drawn for sample `index`: `segments` values i.i.d. uniform in
/// the box, on equal pieces of `[0, horizon]`. Each sample uses its own
/// ChaCha stream so draws do not depend on scheduling.
pub fn random_control(range: &ControlRange, config: &ReachConfig, index: usize) -> Result<ControlFunction> {
    let ControlRange::Bounded { bounds } = range else {
        return Err(Error::InvalidInput("reachable-set sampling needs a bounded control range".into()));
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index as u64);
    let values = (0..config.segments)
        .map(|_| DVector::from_iterator(bounds.len(), bounds.iter().map(|[lo, hi]| rng.random_range(*lo..=*hi))))
        .collect();
    let duration = if config.horizon > 0.0 { config.horizon } else { 1.0 };
    ControlFunction::uniform(values, 0.0, duration)
}

fn check_config(config: &ReachConfig) -> Result<()> {
    if config.samples == 0 || config.segments == 0 {
        return Err(Error::InvalidInput("sample and segment counts must be at least 1".into()));
    }
    if !(config.horizon.is_finite() && config.horizon >= 0.0) {
        return Err(Error::InvalidHorizon(format!("horizon must be finite and >= 0, got {}", config.horizon)));
    }
    Ok(())
}

/// Endpoints `phi_{T,u_i}(start)` for `N` independently drawn controls.
pub fn sample_reachable(
    model: &Model,
    start: &DVector<f64>,
    config: &ReachConfig,
    exec: Execution,
) -> Result<ReachSample> {
    check_config(config)?;
    let range = model.range();
    let mut sample = sample_with(model, start, config.samples, config.horizon, config.step, exec, |i| {
        random_control(range, config, i)
    })?;
    sample.config = Some(*config);
    Ok(sample)
}

/// Endpoints for controls supplied by `control_for(i)`, each defined on `[0, horizon]`.
pub fn sample_with<F>(
    model: &Model,
    start: &DVector<f64>,
    samples: usize,
    horizon: f64,
    step: f64,
    exec: Execution,
    control_for: F,
) -> Result<ReachSample>
where
    F: Fn(usize) -> Result<ControlFunction> + Sync + Send,
{
    let endpoints = map_indexed(samples, exec, |i| {
        let u = control_for(i)?;
        integrate_endpoint(model, &u, start, 0.0, horizon, step)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(ReachSample {
        endpoints,
        config: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulation::model::{CoordinateKind, CoordinateModel};

    fn affine() -> Model {
        let cm = CoordinateModel::new(CoordinateKind::Affine, vec![DVector::from_column_slice(&[1.0, 1.0])]).unwrap();
        Model::from_coordinate_model(cm, ControlRange::unit_box(1)).unwrap()
    }

    #[test]
    fn deterministic_and_mode_independent() {
        let m = affine();
        let cfg = ReachConfig {
            horizon: 1.0,
            segments: 4,
            samples: 50,
            seed: 9,
            step: 0.01,
        };
        let start = m.identity();
        let a = sample_reachable(&m, &start, &cfg, Execution::Sequential).unwrap();
        let b = sample_reachable(&m, &start, &cfg, Execution::Parallel).unwrap();
        assert_eq!(a.endpoints, b.endpoints);
        let c = sample_reachable(&m, &start, &ReachConfig { seed: 10, ..cfg }, Execution::Parallel).unwrap();
        assert_ne!(a.endpoints, c.endpoints);
    }

    #[test]
    fn zero_control_stays_at_identity() {
        let m = affine();
        let e = m.identity();
        let s = sample_with(&m, &e, 1, 2.0, 0.01, Execution::Sequential, |_| ControlFunction::zero(1, 0.0, 2.0)).unwrap();
        assert!((&s.endpoints[0] - &e).amax() < 1e-12);
    }

    #[test]
    fn drawn_controls_respect_range() {
        let range = ControlRange::bounded(vec![[-0.5, 2.0], [-3.0, 0.1]]).unwrap();
        let cfg = ReachConfig { segments: 16, ..Default::default() };
        for i in 0..20 {
            let u = random_control(&range, &cfg, i).unwrap();
            assert!(u.check_range(&range).is_ok());
            assert_eq!(u.values().len(), 16);
        }
        assert!(random_control(&ControlRange::Unbounded, &cfg, 0).is_err());
    }

    #[test]
    fn affine_upper_half_is_forward_invariant() {
        let m = affine();
        let cfg = ReachConfig {
            horizon: 2.0,
            segments: 8,
            samples: 200,
            seed: 42,
            step: 0.01,
        };
        let s = sample_reachable(&m, &DVector::from_column_slice(&[1.0, 1.5]), &cfg, Execution::Parallel).unwrap();
        assert!(s.extent(1).0 > 1.5);
    }
}
