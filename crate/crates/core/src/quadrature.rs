//! Globally adaptive Gauss-Kronrod (7-15) quadrature.
//!
//! Used only by the known-truth oracles: censoring proportions, the true
//! influence function and the asymptotic variance formulas. Endpoints are
//! never evaluated, so integrands may blow up at the ends of the range.

#![allow(clippy::excessive_precision)]

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the odd Kronrod nodes 1, 3, 5 and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// Tolerance settings; the target is `max(abs_tol, rel_tol * |I|)`.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_intervals: 2000,
        }
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * h;
    let error = ((kronrod - gauss) * h).abs();
    (value, error)
}

impl Quadrature {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    /// `∫_a^b f` over a finite range.
    pub fn integrate(&self, f: impl Fn(f64) -> f64, a: f64, b: f64) -> Result<Estimate> {
        self.integrate_with_breaks(f, &[a, b])
    }

    /// `∫ f` over `[points[0], points.last()]`, splitting at every interior point
    /// so discontinuities there cost nothing.
    pub fn integrate_with_breaks(&self, f: impl Fn(f64) -> f64, points: &[f64]) -> Result<Estimate> {
        let mut heap = BinaryHeap::new();
        let mut total = 0.0;
        let mut err = 0.0;
        let mut evaluations = 0;
        for w in points.windows(2) {
            let (a, b) = (w[0], w[1]);
            if !(b > a) {
                continue;
            }
            let (value, error) = gk15(&f, a, b);
            evaluations += 15;
            total += value;
            err += error;
            heap.push(Panel { a, b, value, error });
        }
        while heap.len() < self.max_intervals {
            if !total.is_finite() {
                return Err(Error::DivergentIntegral);
            }
            if err <= self.abs_tol.max(self.rel_tol * total.abs()) {
                return Ok(Estimate {
                    value: total,
                    error: err,
                    evaluations,
                });
            }
            let worst = heap.pop().expect("nonempty");
            let mid = 0.5 * (worst.a + worst.b);
            if !(mid > worst.a && mid < worst.b) {
                // Panel cannot be split in floating point; accept it as is.
                heap.push(Panel { error: 0.0, ..worst });
                err -= worst.error;
                continue;
            }
            let (v1, e1) = gk15(&f, worst.a, mid);
            let (v2, e2) = gk15(&f, mid, worst.b);
            evaluations += 30;
            total += v1 + v2 - worst.value;
            err += e1 + e2 - worst.error;
            heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
            heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
        }
        // Recompute sums from panels to shed accumulated cancellation.
        let total: f64 = heap.iter().map(|p| p.value).sum();
        let err: f64 = heap.iter().map(|p| p.error).sum();
        if !total.is_finite() {
            return Err(Error::DivergentIntegral);
        }
        if err <= self.abs_tol.max(self.rel_tol * total.abs()) {
            Ok(Estimate { value: total, error: err, evaluations })
        } else {
            Err(Error::QuadratureFailure { estimate: total, error: err })
        }
    }

    /// `∫_a^∞ f` through the map `x = a + t / (1 - t)`.
    pub fn integrate_to_infinity(&self, f: impl Fn(f64) -> f64, a: f64) -> Result<Estimate> {
        let g = |t: f64| {
            let s = 1.0 - t;
            let x = a + t / s;
            if !x.is_finite() {
                return 0.0;
            }
            let v = f(x);
            if v == 0.0 {
                0.0
            } else {
                v / (s * s)
            }
        };
        self.integrate(g, 0.0, 1.0)
    }

    /// `∫_a^b f` where `b` may be `+∞`; interior `breaks` are honoured.
    pub fn integrate_range(&self, f: impl Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64]) -> Result<Estimate> {
        let mut points = vec![a];
        points.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
        points.sort_by(f64::total_cmp);
        if b.is_finite() {
            points.push(b);
            return self.integrate_with_breaks(f, &points);
        }
        let last = *points.last().unwrap();
        let head = if points.len() > 1 {
            self.integrate_with_breaks(&f, &points)?
        } else {
            Estimate { value: 0.0, error: 0.0, evaluations: 0 }
        };
        let tail = self.integrate_to_infinity(&f, last)?;
        Ok(Estimate {
            value: head.value + tail.value,
            error: head.error + tail.error,
            evaluations: head.evaluations + tail.evaluations,
        })
    }
}
