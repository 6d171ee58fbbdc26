//! Score functions `g(x, θ)` defining a functional through `E g(Y, θ) = 0`,
//! and plug-in point estimation against the Kaplan-Meier estimator.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::km::KmFit;
use crate::roots::bisect_secant;
use crate::sample::CensoredSample;

/// How `g` depends on `θ`; determines the estimation route.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// `g(x, θ) = a(x) - θ b(x)`.
    LinearInTheta,
    /// `θ ↦ ∫ g(s, θ) dF_n(s)` is continuous and strictly monotone.
    SmoothMonotone,
    /// `g(x, θ) = I[x <= θ] - p`.
    IndicatorQuantile,
}

/// The built-in functionals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Builtin {
    /// `θ = P(Y > y)`.
    Survival { y: f64 },
    /// `θ = E Y^k`.
    Moment { k: f64 },
    /// `θ = E(Y - t0 | Y >= t0)`.
    MeanResidualLife { t0: f64 },
    LengthBiasedSurvival { y: f64 },
    LengthBiasedMean,
    LengthBiasedResidualMean,
    /// `θ = F^{-1}(p)`.
    Quantile { p: f64 },
}

type Unary = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type Binary = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Score {
    Builtin(Builtin),
    Linear { a: Unary, b: Unary },
    Custom(Binary),
}

/// A functional `θ` defined by its score `g(x, θ)`.
#[derive(Clone)]
pub struct FunctionalSpec {
    score: Score,
    domain: (f64, f64),
    label: String,
}

impl fmt::Debug for FunctionalSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionalSpec")
            .field("label", &self.label)
            .field("kind", &self.kind())
            .field("domain", &self.domain)
            .finish()
    }
}

impl FunctionalSpec {
    pub fn builtin(b: Builtin) -> Result<Self> {
        let invalid = |m: &str| Err(Error::InvalidParameter(m.into()));
        match b {
            Builtin::Survival { y } | Builtin::LengthBiasedSurvival { y } if !y.is_finite() => {
                return invalid("y must be finite")
            }
            Builtin::Moment { k } if !(k >= 1.0 && k.is_finite()) => {
                return invalid("moment order k must be >= 1")
            }
            Builtin::MeanResidualLife { t0 } if !(t0 >= 0.0 && t0.is_finite()) => {
                return invalid("t0 must be >= 0")
            }
            Builtin::Quantile { p } if !(p > 0.0 && p < 1.0) => {
                return invalid("p must lie in (0, 1)")
            }
            _ => {}
        }
        let domain = match b {
            Builtin::Survival { .. } | Builtin::LengthBiasedSurvival { .. } => (0.0, 1.0),
            Builtin::Quantile { .. } => (0.0, f64::INFINITY),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        };
        Ok(Self {
            score: Score::Builtin(b),
            domain,
            label: descriptor(&b),
        })
    }

    pub fn mean() -> Self {
        Self::builtin(Builtin::Moment { k: 1.0 }).expect("valid")
    }

    /// `g(x, θ) = a(x) - θ b(x)` for caller-supplied `a`, `b`.
    pub fn linear(
        label: impl Into<String>,
        a: impl Fn(f64) -> f64 + Send + Sync + 'static,
        b: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            score: Score::Linear {
                a: Arc::new(a),
                b: Arc::new(b),
            },
            domain: (f64::NEG_INFINITY, f64::INFINITY),
            label: label.into(),
        }
    }

    /// A general score whose plug-in estimating equation is monotone in `θ` on `domain`.
    pub fn custom(
        label: impl Into<String>,
        g: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        domain: (f64, f64),
    ) -> Result<Self> {
        if !(domain.0 < domain.1) {
            return Err(Error::InvalidParameter("empty theta domain".into()));
        }
        Ok(Self {
            score: Score::Custom(Arc::new(g)),
            domain,
            label: label.into(),
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn as_builtin(&self) -> Option<Builtin> {
        match self.score {
            Score::Builtin(b) => Some(b),
            _ => None,
        }
    }

    pub fn kind(&self) -> Kind {
        match &self.score {
            Score::Builtin(Builtin::Quantile { .. }) => Kind::IndicatorQuantile,
            Score::Builtin(_) | Score::Linear { .. } => Kind::LinearInTheta,
            Score::Custom(_) => Kind::SmoothMonotone,
        }
    }

    /// Intervals for this functional lack a calibration guarantee.
    pub fn is_experimental(&self) -> bool {
        self.kind() == Kind::IndicatorQuantile
    }

    /// Named constants of a built-in (`y`, `k`, `t0`, `p`).
    pub fn fixed_params(&self) -> Vec<(&'static str, f64)> {
        match self.as_builtin() {
            Some(Builtin::Survival { y }) | Some(Builtin::LengthBiasedSurvival { y }) => {
                vec![("y", y)]
            }
            Some(Builtin::Moment { k }) => vec![("k", k)],
            Some(Builtin::MeanResidualLife { t0 }) => vec![("t0", t0)],
            Some(Builtin::Quantile { p }) => vec![("p", p)],
            _ => vec![],
        }
    }

    /// Points in `x` where `g(·, θ)` may jump, independent of `θ`.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self.as_builtin() {
            Some(Builtin::Survival { y }) | Some(Builtin::LengthBiasedSurvival { y }) => vec![y],
            Some(Builtin::MeanResidualLife { t0 }) => vec![t0],
            _ => vec![],
        }
    }

    /// `(a(x), b(x))` for linear kinds.
    pub fn linear_parts(&self, x: f64) -> Option<(f64, f64)> {
        let ind = |c: bool| if c { 1.0 } else { 0.0 };
        match &self.score {
            Score::Linear { a, b } => Some((a(x), b(x))),
            Score::Custom(_) => None,
            Score::Builtin(b) => match *b {
                Builtin::Survival { y } => Some((ind(x > y), 1.0)),
                Builtin::Moment { k } => Some((power(x, k), 1.0)),
                Builtin::MeanResidualLife { t0 } => {
                    let i = ind(x >= t0);
                    Some(((x - t0) * i, i))
                }
                Builtin::LengthBiasedSurvival { y } => Some((x * ind(x > y), x)),
                Builtin::LengthBiasedMean => Some((x * x, x)),
                Builtin::LengthBiasedResidualMean => Some((x * x, 2.0 * x)),
                Builtin::Quantile { .. } => None,
            },
        }
    }

    pub fn g(&self, x: f64, theta: f64) -> f64 {
        match &self.score {
            Score::Custom(g) => g(x, theta),
            Score::Builtin(Builtin::Quantile { p }) => (if x <= theta { 1.0 } else { 0.0 }) - p,
            _ => {
                let (a, b) = self.linear_parts(x).expect("linear kind");
                a - theta * b
            }
        }
    }

    /// `ξ(x) = g(x, θ)` at a fixed `θ`.
    pub fn xi(&self, theta: f64) -> impl Fn(f64) -> f64 + '_ {
        move |x| self.g(x, theta)
    }
}

fn power(x: f64, k: f64) -> f64 {
    if k == k.trunc() && k.abs() < 64.0 {
        x.powi(k as i32)
    } else {
        x.powf(k)
    }
}

fn descriptor(b: &Builtin) -> String {
    match *b {
        Builtin::Survival { y } => format!("survival:y={y}"),
        Builtin::Moment { k } if k == 1.0 => "mean".into(),
        Builtin::Moment { k } => format!("moment:k={k}"),
        Builtin::MeanResidualLife { t0 } => format!("mrl:t0={t0}"),
        Builtin::LengthBiasedSurvival { y } => format!("lb-survival:y={y}"),
        Builtin::LengthBiasedMean => "lb-mean".into(),
        Builtin::LengthBiasedResidualMean => "lb-residual-mean".into(),
        Builtin::Quantile { p } => format!("quantile:p={p}"),
    }
}

impl FromStr for FunctionalSpec {
    type Err = Error;

    /// Parses CLI descriptors such as `mean`, `survival:y=0.5` or `mrl:t0=0.9`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut params = Vec::new();
        for kv in rest.split(',').filter(|kv| !kv.trim().is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::InvalidParameter(format!("expected key=value, got `{kv}`")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad number `{v}`")))?;
            params.push((k.trim().to_string(), v));
        }
        let take = |key: &str| -> Result<f64> {
            params
                .iter()
                .find(|(k, _)| k == key)
                .map(|&(_, v)| v)
                .ok_or_else(|| Error::InvalidParameter(format!("`{name}` needs `{key}=`")))
        };
        let expect_keys = |keys: &[&str]| -> Result<()> {
            match params.iter().find(|(k, _)| !keys.contains(&k.as_str())) {
                Some((k, _)) => Err(Error::InvalidParameter(format!(
                    "unexpected parameter `{k}` for `{name}`"
                ))),
                None => Ok(()),
            }
        };
        let b = match name {
            "survival" => {
                expect_keys(&["y"])?;
                Builtin::Survival { y: take("y")? }
            }
            "mean" => {
                expect_keys(&[])?;
                Builtin::Moment { k: 1.0 }
            }
            "moment" => {
                expect_keys(&["k"])?;
                Builtin::Moment { k: take("k")? }
            }
            "mrl" => {
                expect_keys(&["t0"])?;
                Builtin::MeanResidualLife { t0: take("t0")? }
            }
            "lb-survival" => {
                expect_keys(&["y"])?;
                Builtin::LengthBiasedSurvival { y: take("y")? }
            }
            "lb-mean" => {
                expect_keys(&[])?;
                Builtin::LengthBiasedMean
            }
            "lb-residual-mean" => {
                expect_keys(&[])?;
                Builtin::LengthBiasedResidualMean
            }
            "quantile" => {
                expect_keys(&["p"])?;
                Builtin::Quantile { p: take("p")? }
            }
            other => return Err(Error::UnknownFunctional(other.to_string())),
        };
        Self::builtin(b)
    }
}

/// Tolerance on `F_n(x) >= p` in the generalized inverse, absorbing product rounding.
const QUANTILE_SLACK: f64 = 1e-12;

/// Solves `∫ g(s, θ) dF_n(s) = 0`.
pub fn point_estimate(sample: &CensoredSample, f: &FunctionalSpec) -> Result<f64> {
    point_estimate_fit(&KmFit::new(sample), f)
}

pub fn point_estimate_fit(fit: &KmFit, f: &FunctionalSpec) -> Result<f64> {
    match f.kind() {
        Kind::LinearInTheta => {
            let (mut num, mut den) = (0.0, 0.0);
            for (&t, &m) in fit.times().iter().zip(fit.event_mass()) {
                if m != 0.0 {
                    let (a, b) = f.linear_parts(t).expect("linear kind");
                    num += a * m;
                    den += b * m;
                }
            }
            if den == 0.0 {
                return Err(Error::ZeroDenominator);
            }
            Ok(num / den)
        }
        Kind::IndicatorQuantile => {
            let p = f.fixed_params()[0].1;
            let mut cum = 0.0;
            for (&t, &m) in fit.times().iter().zip(fit.event_mass()) {
                cum += m;
                if m != 0.0 && cum >= p - QUANTILE_SLACK {
                    return Ok(t);
                }
            }
            Err(Error::NoSignChange {
                lo: fit.times()[0],
                hi: fit.times()[fit.len() - 1],
            })
        }
        Kind::SmoothMonotone => {
            let score = |theta: f64| fit.integrate(f.xi(theta));
            let (lo, hi) = bracket_domain(&score, f.domain(), fit)?;
            let ftol = 1e-10 / fit.len() as f64;
            bisect_secant(score, lo, hi, ftol, 0.0, 200)
        }
    }
}

/// Finite sub-bracket of the domain with a sign change, expanding infinite ends.
fn bracket_domain(
    score: &impl Fn(f64) -> f64,
    (lo, hi): (f64, f64),
    fit: &KmFit,
) -> Result<(f64, f64)> {
    let scale = fit.times()[fit.len() - 1].max(1.0);
    let mut a = if lo.is_finite() { lo } else { -scale };
    let mut b = if hi.is_finite() { hi } else { scale };
    if a >= b {
        a = b - scale;
    }
    for _ in 0..64 {
        let (fa, fb) = (score(a), score(b));
        if fa.signum() != fb.signum() || fa == 0.0 || fb == 0.0 {
            return Ok((a, b));
        }
        let w = b - a;
        let mut moved = false;
        if !lo.is_finite() {
            a -= w;
            moved = true;
        }
        if !hi.is_finite() {
            b += w;
            moved = true;
        }
        if !moved {
            break;
        }
    }
    Err(Error::NoSignChange { lo, hi })
}
