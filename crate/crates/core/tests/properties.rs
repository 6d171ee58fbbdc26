//! Property tests for the structural invariants of every module.

mod common;

use elci::el::{el_statistic, Method};
use elci::km::km_integral_weighted;
use elci::sample::{read_csv, write_csv};
use elci::scaled::scaled_interval;
use elci::{
    confidence_interval, empirical_subdistributions, km_event, km_censor, km_integral, point_estimate, score_vector,
    solve_lambda, w_hat, Builtin, CensoredObservation, CensoredSample, CsvConfig, DistributionSpec, FunctionalSpec, KmFit,
};
use proptest::prelude::*;

/// Samples on a grid of 0.01, so ties are common.
fn tied_sample() -> impl Strategy<Value = CensoredSample> {
    prop::collection::vec((1u32..500, any::<bool>()), 5..60).prop_filter_map("needs an event", |v| {
        CensoredSample::new(v.into_iter().map(|(k, e)| CensoredObservation::new(k as f64 / 100.0, e)).collect()).ok()
    })
}

fn distinct_sample() -> impl Strategy<Value = CensoredSample> {
    (5usize..120, any::<u64>()).prop_map(|(n, seed)| common::random_sample(&mut common::rng(seed), n))
}

/// Samples rich enough for interval inversion: several events and a spread of times.
fn interval_sample() -> impl Strategy<Value = CensoredSample> {
    (15usize..80, any::<u64>()).prop_filter_map("needs events", |(n, seed)| {
        let s = common::random_sample(&mut common::rng(seed), n);
        (s.event_count() >= 5).then_some(s)
    })
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn sorted_by_time_then_events_first(s in tied_sample()) {
        for w in s.observations().windows(2) {
            prop_assert!(w[0].time < w[1].time || (w[0].time == w[1].time && w[0].event >= w[1].event));
        }
    }

    #[test]
    fn step_jumps_are_eval_minus_left_limit(s in tied_sample(), x in 0.0f64..6.0) {
        for f in [km_event(&s), km_censor(&s), empirical_subdistributions(&s).h] {
            prop_assert_eq!(f.eval(x) - f.eval_left(x), f.jump_at(x));
            for &k in f.knots() {
                prop_assert_eq!(f.eval(k) - f.eval_left(k), f.jump_at(k));
            }
            prop_assert!(f.is_nondecreasing());
        }
    }

    #[test]
    fn csv_roundtrip_is_idempotent(s in tied_sample()) {
        let mut buf = Vec::new();
        write_csv(&s, &mut buf).unwrap();
        let back = read_csv(buf.as_slice(), &CsvConfig::default()).unwrap();
        prop_assert_eq!(back.observations(), s.observations());
    }

    #[test]
    fn subdistributions_add_up(s in tied_sample(), x in 0.0f64..6.0) {
        let h = empirical_subdistributions(&s);
        prop_assert!((h.h.eval(x) - h.h0.eval(x) - h.h1.eval(x)).abs() < 1e-12);
        prop_assert_eq!(h.h.terminal(), 1.0);
    }

    #[test]
    fn terminal_mass_follows_last_observation(s in tied_sample()) {
        let last = s.observations().last().unwrap();
        let f = km_event(&s);
        if last.event {
            prop_assert!((f.terminal() - 1.0).abs() < 1e-12);
        } else {
            prop_assert!(f.terminal() < 1.0);
        }
    }

    #[test]
    fn two_forms_of_km_integral_agree(s in distinct_sample(), c in prop::collection::vec(-2.0f64..2.0, 1..4)) {
        let xi = |x: f64| common::poly(&c, x);
        prop_assert!(close(km_integral(&s, xi), km_integral_weighted(&s, xi), 1e-12));
    }

    #[test]
    fn no_common_jumps_for_distinct_times(s in distinct_sample()) {
        let (f, g) = (km_event(&s), km_censor(&s));
        for &k in f.knots() {
            prop_assert!(f.jump_at(k) == 0.0 || g.jump_at(k) == 0.0);
        }
    }

    #[test]
    fn influence_average_identity(s in distinct_sample(), c in prop::collection::vec(-2.0f64..2.0, 1..4)) {
        let fit = KmFit::new(&s);
        let xi: Vec<f64> = fit.times().iter().map(|&t| common::poly(&c, t)).collect();
        let w = elci::influence::influence_values(&fit, &xi).unwrap();
        prop_assert_eq!(w.len(), s.len());
        prop_assert!(w.iter().all(|v| v.is_finite()));
        let mean = w.iter().sum::<f64>() / w.len() as f64;
        prop_assert!((mean - fit.integrate_values(&xi)).abs() < 1e-12);
    }

    #[test]
    fn complete_data_influence_is_the_score(times in prop::collection::vec(0.01f64..5.0, 3..40), theta in 0.0f64..3.0) {
        let s = CensoredSample::from_pairs(&times, &vec![true; times.len()]).unwrap();
        let w = w_hat(&s, &FunctionalSpec::mean(), theta).unwrap().w;
        for (o, wi) in s.observations().iter().zip(&w) {
            prop_assert!((wi - (o.time - theta)).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_estimate_zeroes_the_mean_score(s in tied_sample(), t0 in 0.0f64..2.0) {
        for f in [
            FunctionalSpec::mean(),
            FunctionalSpec::builtin(Builtin::Survival { y: t0 }).unwrap(),
            FunctionalSpec::builtin(Builtin::Moment { k: 2.0 }).unwrap(),
        ] {
            let th = point_estimate(&s, &f).unwrap();
            prop_assert!(km_integral(&s, f.xi(th)).abs() < 1e-12 * (1.0 + th.abs()));
            let v = score_vector(&s, &f, th).unwrap().v_hat;
            for (o, vi) in s.observations().iter().zip(&v) {
                if !o.event {
                    prop_assert_eq!(*vi, 0.0);
                }
            }
        }
    }

    #[test]
    fn mean_is_scale_equivariant(s in tied_sample(), c in 0.1f64..10.0) {
        let th = point_estimate(&s, &FunctionalSpec::mean()).unwrap();
        let scaled = s.map_times(|t| c * t).unwrap();
        let th_c = point_estimate(&scaled, &FunctionalSpec::mean()).unwrap();
        prop_assert!(close(th_c, c * th, 1e-14));
    }

    #[test]
    fn lambda_weights_satisfy_constraints(w in prop::collection::vec(-5.0f64..5.0, 2..60)) {
        prop_assume!(w.iter().any(|&x| x > 1e-3) && w.iter().any(|&x| x < -1e-3));
        let d = solve_lambda(&w).unwrap();
        let (lo, hi) = d.bracket;
        prop_assert!(lo < d.lambda && d.lambda < hi);
        prop_assert!(w.iter().all(|&x| 1.0 + d.lambda * x > 0.0));
        let p = d.weights(&w);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12 * (1.0 + d.lambda.abs()));
        prop_assert!(p.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>().abs() < 1e-10);

        let h = |l: f64| w.iter().map(|&x| x / (1.0 + l * x)).sum::<f64>();
        let pts: Vec<f64> = (1..=10).map(|k| lo + (hi - lo) * k as f64 / 11.0).collect();
        for pair in pts.windows(2) {
            prop_assert!(h(pair[0]) > h(pair[1]));
        }
    }

    #[test]
    fn statistic_vanishes_only_at_zero_mean(w in prop::collection::vec(-5.0f64..5.0, 3..40)) {
        prop_assume!(w.iter().any(|&x| x > 1e-3) && w.iter().any(|&x| x < -1e-3));
        let m = w.iter().sum::<f64>() / w.len() as f64;
        let centred: Vec<f64> = w.iter().map(|x| x - m).collect();
        prop_assert!(el_statistic(&centred).unwrap() < 1e-20);
        if m.abs() > 1e-6 {
            prop_assert!(el_statistic(&w).unwrap() > 0.0);
        }
    }

    #[test]
    fn quantile_inverts_cdf(u in 1e-6f64..0.999999, a in 0.2f64..5.0, k in 0.5f64..12.0) {
        for d in [DistributionSpec::uniform(0.0, a), DistributionSpec::weibull(a, k), DistributionSpec::exponential(a)] {
            prop_assert!((d.cdf(d.quantile(u)) - u).abs() < 1e-10);
        }
        prop_assert_eq!(DistributionSpec::uniform(0.0, a).support_upper(), a);
        prop_assert!(DistributionSpec::weibull(a, k).support_upper().is_infinite());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn intervals_contain_the_estimate(s in interval_sample(), alpha in 0.01f64..0.5) {
        let f = FunctionalSpec::mean();
        let ci = confidence_interval(&s, &f, alpha).unwrap();
        prop_assert!(ci.lower <= ci.theta_hat && ci.theta_hat <= ci.upper);
        // The statistic crosses the critical value within the bisection tolerance in θ.
        let tol = 2e-8 * (1.0 + ci.theta_hat.abs());
        let l = |x: f64| elci::log_el_ratio(&s, &f, x).unwrap();
        if !ci.lower_diag.truncated_at_hull && !ci.lower_diag.unbounded {
            prop_assert!(l(ci.lower - tol) >= ci.critical && l(ci.lower + tol) <= ci.critical);
        }
        if !ci.upper_diag.truncated_at_hull && !ci.upper_diag.unbounded {
            prop_assert!(l(ci.upper + tol) >= ci.critical && l(ci.upper - tol) <= ci.critical);
        }
        if let Ok(ci2) = scaled_interval(&s, &f, alpha) {
            prop_assert_eq!(ci2.method, Method::ScaledEl);
            prop_assert!(ci2.lower <= ci2.theta_hat && ci2.theta_hat <= ci2.upper);
        }
    }

    #[test]
    fn mean_interval_is_location_equivariant(s in interval_sample(), c in 0.0f64..5.0) {
        let f = FunctionalSpec::mean();
        let a = confidence_interval(&s, &f, 0.05).unwrap();
        let b = confidence_interval(&s.map_times(|t| t + c).unwrap(), &f, 0.05).unwrap();
        let tol = 1e-7 * (1.0 + a.theta_hat.abs() + c);
        prop_assert!((b.theta_hat - a.theta_hat - c).abs() < tol);
        prop_assert!((b.lower - a.lower - c).abs() < tol, "{} {} {}", a.lower, b.lower, c);
        prop_assert!((b.upper - a.upper - c).abs() < tol, "{} {} {}", a.upper, b.upper, c);
    }

    #[test]
    fn alpha_outside_half_open_range_is_rejected(s in interval_sample(), bad in prop_oneof![-1.0f64..=0.0, 0.5001f64..2.0]) {
        prop_assert!(confidence_interval(&s, &FunctionalSpec::mean(), bad).is_err());
    }
}

#[test]
fn score_variance_dominates_influence_variance() {
    let mut rng = common::rng(17);
    use rand::Rng;
    for _ in 0..6 {
        let (a, k) = (rng.random_range(0.5..2.0), rng.random_range(1.5..8.0));
        let life = DistributionSpec::weibull(a, k);
        let cens = DistributionSpec::exponential(rng.random_range(1.5..6.0) * a);
        let v = elci::asymptotic_variance(&FunctionalSpec::mean(), life.mean(), life, cens)
            .unwrap_or_else(|e| panic!("{life:?} {cens:?}: {e}"));
        assert!(v.sigma2_influence > 0.0);
        assert!(v.sigma2_score >= v.sigma2_influence, "{v:?}");
    }
}
