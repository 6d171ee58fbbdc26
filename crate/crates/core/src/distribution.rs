//! Closed-form lifetime and censoring distributions for known-truth studies.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum DistributionSpec {
    Uniform { lo: f64, hi: f64 },
    /// CDF `1 - exp(-(x/scale)^shape)`.
    Weibull { scale: f64, shape: f64 },
    /// Parameterised by its mean.
    Exponential { mean: f64 },
    /// All mass at `+∞`; stands in for "no censoring".
    Never,
}

impl DistributionSpec {
    pub fn uniform(lo: f64, hi: f64) -> Self {
        Self::Uniform { lo, hi }
    }

    pub fn weibull(scale: f64, shape: f64) -> Self {
        Self::Weibull { scale, shape }
    }

    pub fn exponential(mean: f64) -> Self {
        Self::Exponential { mean }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Uniform { lo, hi } => lo >= 0.0 && hi > lo && hi.is_finite(),
            Self::Weibull { scale, shape } => scale > 0.0 && shape > 0.0 && scale.is_finite() && shape.is_finite(),
            Self::Exponential { mean } => mean > 0.0 && mean.is_finite(),
            Self::Never => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid distribution {self:?}")))
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        1.0 - self.sf(x)
    }

    /// Survival function `P(X > x)`, accurate in the upper tail.
    pub fn sf(&self, x: f64) -> f64 {
        match *self {
            Self::Uniform { lo, hi } => {
                if x <= lo {
                    1.0
                } else if x >= hi {
                    0.0
                } else {
                    (hi - x) / (hi - lo)
                }
            }
            Self::Weibull { scale, shape } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-(x / scale).powf(shape)).exp()
                }
            }
            Self::Exponential { mean } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-x / mean).exp()
                }
            }
            Self::Never => 1.0,
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            Self::Uniform { lo, hi } => {
                if x > lo && x < hi {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            Self::Weibull { scale, shape } => {
                if x <= 0.0 {
                    return 0.0;
                }
                let z = x / scale;
                let zk = z.powf(shape);
                if zk > 745.0 {
                    return 0.0;
                }
                shape / scale * zk / z * (-zk).exp()
            }
            Self::Exponential { mean } => {
                if x < 0.0 {
                    0.0
                } else {
                    (-x / mean).exp() / mean
                }
            }
            Self::Never => 0.0,
        }
    }

    /// `F^{-1}(u)` for `u` in `[0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        match *self {
            Self::Uniform { lo, hi } => lo + u * (hi - lo),
            Self::Weibull { scale, shape } => scale * (-(-u).ln_1p()).powf(1.0 / shape),
            Self::Exponential { mean } => -mean * (-u).ln_1p(),
            Self::Never => f64::INFINITY,
        }
    }

    /// Inverse survival function: the `x` with `P(X > x) = p`.
    pub fn isf(&self, p: f64) -> f64 {
        match *self {
            Self::Uniform { lo, hi } => hi - p * (hi - lo),
            Self::Weibull { scale, shape } => scale * (-p.ln()).powf(1.0 / shape),
            Self::Exponential { mean } => -mean * p.ln(),
            Self::Never => f64::INFINITY,
        }
    }

    /// `sup{x : F(x) < 1}`.
    pub fn support_upper(&self) -> f64 {
        match *self {
            Self::Uniform { hi, .. } => hi,
            _ => f64::INFINITY,
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Uniform { lo, hi } => 0.5 * (lo + hi),
            Self::Weibull { scale, shape } => scale * statrs::function::gamma::gamma(1.0 + 1.0 / shape),
            Self::Exponential { mean } => mean,
            Self::Never => f64::INFINITY,
        }
    }

    /// Draws by inversion from `u` uniform on `(0, 1)`.
    pub fn sample_from_uniform(&self, u: f64) -> f64 {
        self.quantile(u)
    }

    pub fn label(&self) -> String {
        match *self {
            Self::Uniform { lo, hi } => format!("Uniform({lo},{hi})"),
            Self::Weibull { scale, shape } => format!("Weibull({scale},{shape})"),
            Self::Exponential { mean } => format!("Exp({mean})"),
            Self::Never => "None".into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_inverts_cdf() {
        let dists = [
            DistributionSpec::uniform(0.0, 2.5),
            DistributionSpec::weibull(1.0, 10.0),
            DistributionSpec::exponential(4.3),
        ];
        for d in dists {
            for k in 1..100 {
                let u = k as f64 / 100.0;
                assert!((d.cdf(d.quantile(u)) - u).abs() < 1e-10, "{d:?} {u}");
                assert!((d.sf(d.isf(u)) - u).abs() < 1e-10, "{d:?} {u}");
            }
        }
    }

    #[test]
    fn weibull_mean_is_gamma() {
        let d = DistributionSpec::weibull(1.0, 10.0);
        assert!((d.mean() - 0.951_350_769_866_873_2).abs() < 1e-12);
    }

    #[test]
    fn support_bounds() {
        assert_eq!(DistributionSpec::uniform(0.0, 1.0).support_upper(), 1.0);
        assert!(DistributionSpec::exponential(1.0).support_upper().is_infinite());
        assert!(DistributionSpec::weibull(1.0, 2.0).support_upper().is_infinite());
    }

    #[test]
    fn pdf_integrates_to_cdf() {
        let q = crate::quadrature::Quadrature::default();
        let d = DistributionSpec::weibull(1.0, 10.0);
        let e = q.integrate(|x| d.pdf(x), 0.0, 0.9).unwrap();
        assert!((e.value - d.cdf(0.9)).abs() < 1e-10);
    }

    #[test]
    fn json_roundtrip() {
        let d: DistributionSpec = serde_json::from_str(r#"{"family":"weibull","scale":1,"shape":10}"#).unwrap();
        assert_eq!(d, DistributionSpec::weibull(1.0, 10.0));
        assert!(DistributionSpec::uniform(1.0, 0.5).validate().is_err());
    }
}
