use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rule used to integrate the input over a time interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Quadrature {
    /// Closed-form antiderivatives where available, otherwise `Gauss2`.
    #[default]
    Exact,
    /// Two-point Gauss-Legendre on each kink-free piece.
    Gauss2,
}

/// Scalar input signal `u(t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InputSignal {
    /// `amplitude * sin(2π frequency t)` for `t < cutoff`, zero afterwards.
    SineBurst {
        amplitude: f64,
        frequency: f64,
        cutoff: f64,
    },
    /// `amplitude * exp(-(t - center)² / (2 width²))`.
    Gaussian {
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// Piecewise linear interpolation, held constant outside the table.
    Table { times: Vec<f64>, values: Vec<f64> },
    Zero,
}

/// Interval moments `(∫u, ∫u²)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub first: f64,
    pub second: f64,
}

impl std::ops::Add for Moments {
    type Output = Moments;

    fn add(self, o: Moments) -> Moments {
        Moments {
            first: self.first + o.first,
            second: self.second + o.second,
        }
    }
}

const ZERO_MOMENTS: Moments = Moments {
    first: 0.0,
    second: 0.0,
};

impl InputSignal {
    pub fn validate(&self) -> Result<()> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match self {
            InputSignal::SineBurst {
                amplitude,
                frequency,
                cutoff,
            } => {
                if !finite(&[*amplitude, *frequency, *cutoff]) {
                    return Err(Error::InvalidInput("non-finite sine burst parameter".into()));
                }
                if *frequency <= 0.0 {
                    return Err(Error::InvalidInput("frequency must be positive".into()));
                }
            }
            InputSignal::Gaussian {
                amplitude,
                center,
                width,
            } => {
                if !finite(&[*amplitude, *center, *width]) || *width <= 0.0 {
                    return Err(Error::InvalidInput("gaussian needs finite parameters and width > 0".into()));
                }
            }
            InputSignal::Table { times, values } => {
                if times.is_empty() || times.len() != values.len() {
                    return Err(Error::InvalidInput("table needs equally many times and values".into()));
                }
                if !finite(times) || !finite(values) {
                    return Err(Error::InvalidInput("non-finite table entry".into()));
                }
                if times.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidInput("table times must be strictly increasing".into()));
                }
            }
            InputSignal::Zero => {}
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            InputSignal::SineBurst {
                amplitude,
                frequency,
                cutoff,
            } => {
                if t < *cutoff {
                    amplitude * (2.0 * PI * frequency * t).sin()
                } else {
                    0.0
                }
            }
            InputSignal::Gaussian {
                amplitude,
                center,
                width,
            } => {
                let d = (t - center) / width;
                amplitude * (-0.5 * d * d).exp()
            }
            InputSignal::Table { times, values } => table_eval(times, values, t),
            InputSignal::Zero => 0.0,
        }
    }

    /// Every signal shipped here has closed-form interval moments.
    pub fn has_antiderivative(&self) -> bool {
        true
    }

    /// Points where `u` or its derivative jumps.
    pub fn kinks(&self) -> Vec<f64> {
        match self {
            InputSignal::SineBurst { cutoff, .. } => vec![*cutoff],
            InputSignal::Table { times, .. } => times.clone(),
            _ => Vec::new(),
        }
    }

    /// `(∫_a^b u, ∫_a^b u²)` under the given rule.
    pub fn moments(&self, a: f64, b: f64, rule: Quadrature) -> Moments {
        if b <= a {
            return ZERO_MOMENTS;
        }
        match rule {
            Quadrature::Exact if self.has_antiderivative() => self.exact_moments(a, b),
            _ => self.gauss2_moments(a, b),
        }
    }

    fn gauss2_moments(&self, a: f64, b: f64) -> Moments {
        let mut pts = vec![a];
        pts.extend(self.kinks().into_iter().filter(|&c| c > a && c < b));
        pts.push(b);
        let off = 1.0 / 3f64.sqrt();
        pts.windows(2)
            .map(|w| {
                let (c, h) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
                let u1 = self.eval(c - h * off);
                let u2 = self.eval(c + h * off);
                Moments {
                    first: h * (u1 + u2),
                    second: h * (u1 * u1 + u2 * u2),
                }
            })
            .fold(ZERO_MOMENTS, |s, m| s + m)
    }

    fn exact_moments(&self, a: f64, b: f64) -> Moments {
        match self {
            InputSignal::SineBurst {
                amplitude,
                frequency,
                cutoff,
            } => {
                let b = b.min(*cutoff);
                if b <= a {
                    return ZERO_MOMENTS;
                }
                let w = 2.0 * PI * frequency;
                let (c, h) = (0.5 * (a + b), b - a);
                Moments {
                    first: amplitude * 2.0 / w * (w * c).sin() * (0.5 * w * h).sin(),
                    second: amplitude * amplitude * (0.5 * h - (2.0 * w * c).cos() * (w * h).sin() / (2.0 * w)),
                }
            }
            InputSignal::Gaussian {
                amplitude,
                center,
                width,
            } => {
                let s1 = width * SQRT_2;
                let first = amplitude * width * (PI / 2.0).sqrt() * erf_diff((a - center) / s1, (b - center) / s1);
                let second =
                    amplitude * amplitude * width * PI.sqrt() / 2.0 * erf_diff((a - center) / width, (b - center) / width);
                Moments { first, second }
            }
            InputSignal::Table { times, values } => {
                let mut pts = vec![a];
                pts.extend(times.iter().copied().filter(|&c| c > a && c < b));
                pts.push(b);
                pts.windows(2)
                    .map(|w| {
                        let (ua, ub, h) = (table_eval(times, values, w[0]), table_eval(times, values, w[1]), w[1] - w[0]);
                        Moments {
                            first: 0.5 * h * (ua + ub),
                            second: h * (ua * ua + ua * ub + ub * ub) / 3.0,
                        }
                    })
                    .fold(ZERO_MOMENTS, |s, m| s + m)
            }
            InputSignal::Zero => ZERO_MOMENTS,
        }
    }
}

/// `erf(y) - erf(x)` without cancellation in the tails.
fn erf_diff(x: f64, y: f64) -> f64 {
    if x >= 0.0 {
        libm::erfc(x) - libm::erfc(y)
    } else if y <= 0.0 {
        libm::erfc(-y) - libm::erfc(-x)
    } else {
        libm::erf(y) - libm::erf(x)
    }
}

fn table_eval(times: &[f64], values: &[f64], t: f64) -> f64 {
    let n = times.len();
    if t <= times[0] {
        return values[0];
    }
    if t >= times[n - 1] {
        return values[n - 1];
    }
    let j = times.partition_point(|&s| s <= t);
    let (t0, t1, v0, v1) = (times[j - 1], times[j], values[j - 1], values[j]);
    v0 + (v1 - v0) * (t - t0) / (t1 - t0)
}
