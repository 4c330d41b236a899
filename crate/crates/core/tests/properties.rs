use std::f64::consts::PI;

use proptest::prelude::*;

use heatflux::analysis::{find_extrema, fit_max_params, flux_max_model};
use heatflux::greens::{gf_electric_vacuum, trace_ee_vacuum, trace_hh_vacuum};
use heatflux::materials::{
    derived_material, permittivity, planck_factor, polarizability_freq, DrudeLorentz, Particle,
};
use heatflux::stationary::{log_grid, stationary_flux_spectrum, PairConfig};
use heatflux::transient::{damped_sine_integrals, transfer_spectrum, udot_spectrum};

fn material() -> impl Strategy<Value = DrudeLorentz> {
    (2.0f64..12.0, 13.0f64..15.0, 13.0f64..15.0, 11.0f64..13.0).prop_filter_map(
        "outside the oscillator model",
        |(e, w0, wp, g)| DrudeLorentz::new(e, 10f64.powf(w0), 10f64.powf(wp), 10f64.powf(g)).ok(),
    )
}

fn log_range(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.log10()..hi.log10()).prop_map(|x| 10f64.powf(x))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn permittivity_is_hermitian(m in material(), w in log_range(1e10, 1e16)) {
        let a = permittivity(&m, w);
        let b = permittivity(&m, -w);
        prop_assert!((a.re - b.re).abs() <= 1e-12 * a.norm());
        prop_assert!((a.im + b.im).abs() <= 1e-12 * a.norm());
        prop_assert!(a.im > 0.0);
    }

    #[test]
    fn polarizability_forms_agree(m in material(), r in log_range(1e-9, 1e-7), w in log_range(1e10, 1e16)) {
        let p = Particle::new(m, r).unwrap();
        let dm = derived_material(&p).unwrap();
        let a = polarizability_freq(&p, w);
        let (re, im) = dm.alpha_parts(w);
        prop_assert!(im > 0.0);
        prop_assert!((a.im - im).abs() <= 1e-9 * a.norm());
        prop_assert!((a.re - dm.alpha_inf - re).abs() <= 1e-9 * a.norm());
    }

    #[test]
    fn traces_positive_and_ordered(d in log_range(1e-9, 1.0), w in log_range(1e10, 1e17)) {
        let e = trace_ee_vacuum(d, w);
        let h = trace_hh_vacuum(d, w);
        prop_assert!(e > 0.0 && h > 0.0);
        // Far-field floor of the electric trace.
        prop_assert!(e >= 1.0 / (8.0 * PI * PI * d * d) * (1.0 - 1e-12));
        let g = gf_electric_vacuum([d, 0.0, 0.0], [0.0; 3], w).unwrap();
        prop_assert!((g.trace_with_adjoint() - e).abs() <= 1e-10 * e);
    }

    #[test]
    fn planck_factor_decreasing(w in log_range(1e8, 1e15), t in 1.0f64..2000.0) {
        let wt = t * 1.380_649e-23 / 1.054_571_817e-34;
        let a = planck_factor(w, wt);
        let b = planck_factor(1.01 * w, wt);
        prop_assert!(a > 0.0 && b < a);
    }

    #[test]
    fn stationary_spectrum_nonnegative_and_symmetric(
        m1 in material(), m2 in material(),
        d in log_range(1e-8, 1e-1), t in 10.0f64..1000.0, w in log_range(1e10, 1e16),
    ) {
        let p1 = Particle::new(m1, 5e-9).unwrap();
        let p2 = Particle::new(m2, 8e-9).unwrap();
        let cfg = PairConfig::new(p1, p2, d, t).unwrap();
        let a = stationary_flux_spectrum(&cfg, w);
        let b = stationary_flux_spectrum(&cfg.swapped(), w);
        prop_assert!(a >= 0.0);
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(f64::MIN_POSITIVE));
    }

    #[test]
    fn spectra_vanish_before_arrival(
        d in log_range(1e-8, 1e-2), w in log_range(1e10, 1e16), tau in log_range(1e-18, 1e-9),
    ) {
        let cfg = PairConfig::sic(10e-9, d, 300.0).unwrap();
        prop_assert_eq!(udot_spectrum(&cfg, w, -tau), 0.0);
        prop_assert_eq!(transfer_spectrum(&cfg, w, -tau), 0.0);
        prop_assert!(transfer_spectrum(&cfg, w, tau).is_finite());
    }

    #[test]
    fn damped_integrals_parity(
        b in log_range(1e12, 1e15), rw in log_range(1e-3, 1e2), rg in log_range(1e-3, 1.0), gt in log_range(1e-3, 50.0),
    ) {
        let (w, g) = (b * rw, b * rg);
        let tau = gt / g;
        let (s, c) = damped_sine_integrals(w, tau, b, g);
        let (sm, cm) = damped_sine_integrals(-w, tau, b, g);
        // Bounded by the integral of the envelope, which also sets the rounding scale.
        let bound = 2.0 / g * (-(-0.5 * g * tau).exp_m1());
        prop_assert!((s + sm).abs() <= 1e-10 * bound);
        prop_assert!((c - cm).abs() <= 1e-10 * bound);
        prop_assert!(s.abs() <= bound * (1.0 + 1e-12) && c.abs() <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn extrema_alternate(freq in 1.0f64..5.0, phase in 0.0f64..std::f64::consts::TAU, offset in -3.0f64..3.0) {
        let n = 4000;
        let taus: Vec<f64> = (0..n).map(|i| 10.0 * i as f64 / n as f64).collect();
        let v: Vec<f64> = taus.iter().map(|t| offset + (freq * t + phase).sin()).collect();
        let e = find_extrema(&taus, &v, Some(2.0 * PI / freq)).unwrap();
        for p in e.maxima.iter().chain(&e.minima) {
            prop_assert!(p.value <= offset + 1.0 + 1e-9 && p.value >= offset - 1.0 - 1e-9);
        }
        for a in &e.averages {
            prop_assert!((a.value - offset).abs() < 1e-5);
        }
        prop_assert!((e.maxima.len() as i64 - e.minima.len() as i64).abs() <= 1);
    }

    #[test]
    fn envelope_fit_round_trip(a in -5.0f64..5.0, b in 0.5f64..5.0, g in 0.5f64..2.0) {
        // Synthetic envelope with known (a, b); locate its peak, refit.
        let h = 1.0;
        let probe = heatflux::analysis::FitParams { a, b, h_st: h, gamma: g, tau_max: 0.0, phi_max: 0.0 };
        let f = |t: f64| flux_max_model(&probe, t);
        let n = 20_000;
        let grid: Vec<f64> = (1..=n).map(|i| 8.0 / g * i as f64 / n as f64).collect();
        let (mut best_i, mut best) = (0, f64::NEG_INFINITY);
        for (i, &t) in grid.iter().enumerate() {
            if f(t) > best { best = f(t); best_i = i; }
        }
        prop_assume!(best_i > 0 && best_i + 1 < grid.len());
        // Golden-section refinement of the maximum.
        let (mut lo, mut hi) = (grid[best_i - 1], grid[best_i + 1]);
        let r = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..200 {
            let x1 = hi - r * (hi - lo);
            let x2 = lo + r * (hi - lo);
            if f(x1) < f(x2) { lo = x1 } else { hi = x2 }
        }
        let tm = 0.5 * (lo + hi);
        prop_assume!((g * tm - 1.5).abs() > 1e-2);
        let fp = fit_max_params(tm, f(tm), h, g).unwrap();
        prop_assert!((fp.a - a).abs() <= 1e-5 * (1.0 + a.abs()), "a {} vs {}", fp.a, a);
        prop_assert!((fp.b - b).abs() <= 1e-5 * (1.0 + b.abs()), "b {} vs {}", fp.b, b);
    }

    #[test]
    fn log_grid_monotone(lo in log_range(1e-9, 1e-3), decades in 0.1f64..5.0, per in 1usize..40) {
        let hi = lo * 10f64.powf(decades);
        let g = log_grid(lo, hi, per).unwrap();
        prop_assert_eq!(g[0], lo);
        prop_assert_eq!(*g.last().unwrap(), hi);
        prop_assert!(g.windows(2).all(|w| w[1] > w[0]));
    }
}
