//! Piecewise-constant admissible controls.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::system::ControlRange;

/// Control taking `values[k]` on `[breakpoints[k], breakpoints[k + 1])`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlFunction {
    breakpoints: Vec<f64>,
    values: Vec<DVector<f64>>,
}

impl ControlFunction {
    pub fn new(breakpoints: Vec<f64>, values: Vec<DVector<f64>>) -> Result<Self> {
        if values.is_empty() || breakpoints.len() != values.len() + 1 {
            return Err(Error::InvalidInput(format!(
                "{} breakpoints cannot delimit {} control values",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints.iter().any(|t| !t.is_finite()) || breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("breakpoints must be finite and strictly increasing".into()));
        }
        let m = values[0].len();
        if let Some(bad) = values.iter().find(|v| v.len() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: bad.len(),
            });
        }
        Ok(Self { breakpoints, values })
    }

    pub fn constant(u: DVector<f64>, t0: f64, t1: f64) -> Result<Self> {
        Self::new(vec![t0, t1], vec![u])
    }

    pub fn zero(channels: usize, t0: f64, t1: f64) -> Result<Self> {
        Self::constant(DVector::zeros(channels), t0, t1)
    }

    /// `K` segments of equal length on `[t0, t0 + duration]`.
    pub fn uniform(values: Vec<DVector<f64>>, t0: f64, duration: f64) -> Result<Self> {
        let k = values.len().max(1);
        let breakpoints = (0..=k).map(|i| t0 + duration * i as f64 / k as f64).collect();
        Self::new(breakpoints, values)
    }

    pub fn channels(&self) -> usize {
        self.values[0].len()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[DVector<f64>] {
        &self.values
    }

    pub fn start(&self) -> f64 {
        self.breakpoints[0]
    }

    pub fn end(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    /// Value at `t`; the last segment is closed on the right.
    pub fn at(&self, t: f64) -> Option<&DVector<f64>> {
        if t < self.start() || t > self.end() {
            return None;
        }
        let k = self.breakpoints.partition_point(|&b| b <= t);
        Some(&self.values[k.saturating_sub(1).min(self.values.len() - 1)])
    }

    /// `Theta_s u = u(. + s)`.
    pub fn shift(&self, s: f64) -> Self {
        Self {
            breakpoints: self.breakpoints.iter().map(|t| t - s).collect(),
            values: self.values.clone(),
        }
    }

    /// `self` followed by `other`, with `other` moved to start where `self` ends.
    pub fn concat(&self, other: &ControlFunction) -> Result<Self> {
        if other.channels() != self.channels() {
            return Err(Error::DimensionMismatch {
                expected: self.channels(),
                found: other.channels(),
            });
        }
        let offset = self.end() - other.start();
        let mut breakpoints = self.breakpoints.clone();
        breakpoints.extend(other.breakpoints[1..].iter().map(|t| t + offset));
        let mut values = self.values.clone();
        values.extend(other.values.iter().cloned());
        Self::new(breakpoints, values)
    }

    /// Restriction to `[a, b]`, which must lie within the domain.
    pub fn restrict(&self, a: f64, b: f64) -> Result<Self> {
        if a.is_nan() || b.is_nan() || a >= b || a < self.start() || b > self.end() {
            return Err(Error::ControlUndefined { from: a, to: b });
        }
        let mut breakpoints = vec![a];
        let mut values = Vec::new();
        for k in 0..self.values.len() {
            let (lo, hi) = (self.breakpoints[k], self.breakpoints[k + 1]);
            if hi <= a || lo >= b {
                continue;
            }
            values.push(self.values[k].clone());
            breakpoints.push(hi.min(b));
        }
        Self::new(breakpoints, values)
    }

    /// Checks every value against `range`.
    pub fn check_range(&self, range: &ControlRange) -> Result<()> {
        if let ControlRange::Bounded { bounds } = range {
            if bounds.len() != self.channels() {
                return Err(Error::DimensionMismatch {
                    expected: bounds.len(),
                    found: self.channels(),
                });
            }
        }
        for (segment, v) in self.values.iter().enumerate() {
            range
                .contains(v.as_slice())
                .map_err(|(channel, value)| Error::ControlOutOfRange {
                    segment,
                    channel,
                    value,
                })?;
        }
        Ok(())
    }

    /// Segments `(t_start, t_end, value)` covering `[a, b]` in order.
    pub(crate) fn pieces(&self, a: f64, b: f64) -> Result<Vec<(f64, f64, &DVector<f64>)>> {
        const SLACK: f64 = 1e-12;
        let scale = a.abs().max(b.abs()).max(1.0);
        if a < self.start() - SLACK * scale || b > self.end() + SLACK * scale {
            return Err(Error::ControlUndefined { from: a, to: b });
        }
        let mut out = Vec::new();
        for k in 0..self.values.len() {
            let lo = self.breakpoints[k].max(a);
            let hi = self.breakpoints[k + 1].min(b);
            if hi > lo {
                out.push((lo, hi, &self.values[k]));
            }
        }
        if let Some(first) = out.first_mut() {
            first.0 = a;
        }
        if let Some(last) = out.last_mut() {
            last.1 = b;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(x: f64) -> DVector<f64> {
        DVector::from_element(1, x)
    }

    #[test]
    fn evaluation_and_shift() {
        let c = ControlFunction::new(vec![0.0, 1.0, 3.0], vec![u(0.5), u(-1.0)]).unwrap();
        assert_eq!(c.at(0.0), Some(&u(0.5)));
        assert_eq!(c.at(0.999), Some(&u(0.5)));
        assert_eq!(c.at(1.0), Some(&u(-1.0)));
        assert_eq!(c.at(3.0), Some(&u(-1.0)));
        assert_eq!(c.at(3.1), None);
        let s = c.shift(1.0);
        assert_eq!(s.breakpoints(), &[-1.0, 0.0, 2.0]);
        assert_eq!(s.at(0.5), Some(&u(-1.0)));
    }

    #[test]
    fn concatenation() {
        let a = ControlFunction::constant(u(1.0), 0.0, 2.0).unwrap();
        let b = ControlFunction::constant(u(-1.0), 0.0, 1.0).unwrap();
        let c = a.concat(&b).unwrap();
        assert_eq!(c.breakpoints(), &[0.0, 2.0, 3.0]);
        assert_eq!(c.at(2.5), Some(&u(-1.0)));
        assert_eq!(c.restrict(1.0, 2.5).unwrap().breakpoints(), &[1.0, 2.0, 2.5]);
    }

    #[test]
    fn invalid_controls() {
        assert!(ControlFunction::new(vec![0.0, 0.0], vec![u(1.0)]).is_err());
        assert!(ControlFunction::new(vec![0.0], vec![u(1.0)]).is_err());
        let c = ControlFunction::constant(u(1.5), 0.0, 1.0).unwrap();
        assert!(matches!(
            c.check_range(&ControlRange::unit_box(1)),
            Err(Error::ControlOutOfRange { segment: 0, channel: 0, .. })
        ));
        assert!(c.pieces(0.0, 2.0).is_err());
    }
}
