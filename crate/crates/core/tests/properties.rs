use num_complex::Complex64;
use proptest::prelude::*;
use zeno_core::analysis::{default_tau_grid, find_transition, log_grid, sweep_rate_curve, ModelRatio};
use zeno_core::oracle::{evolve_amplitudes, integrate_amplitudes, AmplitudeState};
use zeno_core::rate::{decay_rate, kernel_f, rate_decomposition};
use zeno_core::spectra::{eval_modified_spectrum, eval_spectrum, presets};
use zeno_core::{
    discretize_bath, Approach, AtomBathModel, DiscretizedBath, HydrogenParams, OhmicParams, Spectrum,
};

fn spectrum_strategy() -> impl Strategy<Value = Spectrum> {
    prop_oneof![
        (1e-10f64..1e-7, 50.0f64..2000.0)
            .prop_map(|(eta, wc)| Spectrum::hydrogen_2p1s(HydrogenParams::new(eta, wc).unwrap())),
        (1e-10f64..1e-7, 50.0f64..2000.0)
            .prop_map(|(eta, wc)| Spectrum::hydrogen_3p1s(HydrogenParams::new(eta, wc).unwrap())),
        (1e-10f64..1e-7, 0.01f64..3.0, 50.0f64..2000.0)
            .prop_map(|(a, s, wc)| Spectrum::ohmic(OhmicParams::new(a, s, wc).unwrap())),
    ]
}

/// ∫F dω in x = (ω − c)τ/2 by Simpson on [−L, L] plus the analytic sinc² tail.
fn kernel_mass(center: f64, tau: f64) -> f64 {
    let l = 2000.0 * std::f64::consts::PI;
    let n = 2 * 32_000;
    let h = 2.0 * l / n as f64;
    let f = |x: f64| kernel_f(center + 2.0 * x / tau, center, tau) * 2.0 / tau;
    let mut s = f(-l) + f(l);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(-l + i as f64 * h);
    }
    s * h / 3.0 + (1.0 / l - (2.0 * l).sin() / (2.0 * l * l)) / std::f64::consts::PI
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn modified_spectrum_carries_the_f_factor(spec in spectrum_strategy(), w in 1e-3f64..1e4) {
        let model = AtomBathModel::reduced(spec.clone());
        let g = eval_spectrum(&spec, w).unwrap();
        prop_assume!(g > 1e-300);
        let wp = model.omega_prime().unwrap();
        let f = ((2.0 + w - wp) / (w + 1.0)).powi(2);
        let got = eval_modified_spectrum(&spec, w, &model).unwrap() / g;
        prop_assert!((got / f - 1.0).abs() < 1e-12, "{} vs {}", got, f);
    }

    #[test]
    fn kernel_has_unit_mass(center in -50.0f64..3000.0, log_tau in -4.0f64..2.0) {
        let m = kernel_mass(center, 10f64.powf(log_tau));
        prop_assert!((m - 1.0).abs() < 1e-6, "{}", m);
    }

    #[test]
    fn decomposition_sums_to_approach_two(spec in spectrum_strategy(), log_tau_wc in -2.0f64..3.0) {
        let tau = 10f64.powf(log_tau_wc) / spec.cutoff();
        let model = AtomBathModel::reduced(spec);
        let (r1, r2, r3) = rate_decomposition(&model, tau).unwrap();
        let r = decay_rate(&model, tau, Approach::ApproachII).unwrap().rate;
        prop_assert!(((r1 + r2 + r3) / r - 1.0).abs() < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    /// As A → 0 the three approaches agree, with relative differences linear in A.
    #[test]
    fn approaches_converge_linearly_in_amplitude(s in 0.2f64..2.5, log_tau_wc in -1.0f64..2.0) {
        let wc = 500.0;
        let tau = 10f64.powf(log_tau_wc) / wc;
        let diffs = |a: f64| {
            let m = AtomBathModel::reduced(Spectrum::ohmic(OhmicParams::new(a, s, wc).unwrap()));
            let rwa = decay_rate(&m, tau, Approach::Rwa).unwrap().rate;
            let i = decay_rate(&m, tau, Approach::ApproachI).unwrap().rate;
            let ii = decay_rate(&m, tau, Approach::ApproachII).unwrap().rate;
            ((i / rwa - 1.0).abs(), (ii / rwa - 1.0).abs())
        };
        let (i1, ii1) = diffs(1e-6);
        let (i2, ii2) = diffs(1e-7);
        prop_assert!(i1 < 1e-2 && ii1 < 1e-2);
        prop_assert!((i1 / i2 / 10.0 - 1.0).abs() < 0.05, "{} {}", i1, i2);
        prop_assert!((ii1 / ii2 / 10.0 - 1.0).abs() < 0.05, "{} {}", ii1, ii2);
    }

    #[test]
    fn oracle_norm_is_conserved(s in 0.3f64..2.0, log_tau_wc in -1.0f64..1.0, approach in 0usize..3) {
        let spec = Spectrum::ohmic(OhmicParams::new(1e-6, s, 50.0).unwrap());
        let bath = discretize_bath(&spec, 300, 40.0 * 50.0).unwrap();
        let approach = [Approach::Rwa, Approach::ApproachI, Approach::ApproachII][approach];
        let (center, g) = bath.frame(approach);
        let mut worst = 0.0f64;
        integrate_amplitudes(
            &bath,
            center,
            &g,
            AmplitudeState::excited(bath.len()),
            10f64.powf(log_tau_wc) / 50.0,
            zeno_core::oracle::default_dt(&bath, center),
            &mut |p| worst = worst.max((p.norm - 1.0).abs()),
        )
        .unwrap();
        prop_assert!(worst < 1e-9, "{}", worst);
    }

    /// β_k from the dynamics against g(e^{−i(Ω₁−ω)t} − 1)/(Ω₁−ω), relative
    /// error O(Σg² t²).
    #[test]
    fn weak_coupling_matches_first_order(scale in 1e-5f64..1e-3, t in 0.5f64..6.0) {
        let omegas = vec![0.3, 0.7, 1.4, 2.2];
        let couplings: Vec<f64> = [1.0, 1.7, 0.6, 1.2].iter().map(|c| c * scale).collect();
        let sum_g2: f64 = couplings.iter().map(|g| g * g).sum();
        let bath = DiscretizedBath::from_modes(1.0, omegas, couplings).unwrap();
        let center = bath.omega1();
        let state = evolve_amplitudes(&bath, center, None, t, 0.005).unwrap();
        for k in 0..bath.len() {
            let (w, g) = (bath.omegas()[k], bath.couplings()[k]);
            let d = center - w;
            let closed = g * (Complex64::from_polar(1.0, -d * t) - 1.0) / d;
            let err = (state.beta[k] - closed).norm() / closed.norm();
            prop_assert!(err < 2.0 * sum_g2 * t * t + 1e-9, "mode {}: {}", k, err);
        }
    }
}

/// |R/R₀ − 1| falls monotonically, roughly as 1/τ, over a decade of large τ.
#[test]
fn large_tau_deviation_decays_like_one_over_tau() {
    for spec in [presets::hydrogen_2p1s(), presets::hydrogen_3p1s(), presets::ohmic_family(1.0)] {
        let model = AtomBathModel::reduced(spec.clone());
        let taus = log_grid(1e4 / spec.cutoff(), 1e5 / spec.cutoff(), 4).unwrap();
        let dev: Vec<f64> = taus
            .iter()
            .map(|&t| (decay_rate(&model, t, Approach::ApproachI).unwrap().ratio - 1.0).abs())
            .collect();
        assert!(dev.windows(2).all(|w| w[1] < w[0]), "{dev:?}");
        let c: Vec<f64> = dev.iter().zip(&taus).map(|(d, t)| d * t).collect();
        assert!(c[3] / c[0] > 0.5 && c[3] / c[0] < 2.0, "{c:?}");
    }
}

fn preset_curves() -> Vec<(&'static str, AtomBathModel)> {
    vec![
        ("2p1s", AtomBathModel::reduced(presets::hydrogen_2p1s())),
        ("3p1s", AtomBathModel::reduced(presets::hydrogen_3p1s())),
        ("sub-ohmic-matched", AtomBathModel::reduced(presets::sub_ohmic_matched())),
    ]
}

#[test]
fn crossing_lies_in_coarse_bracket() {
    for (name, model) in preset_curves().into_iter().take(2) {
        let grid = default_tau_grid(model.spectrum().cutoff());
        let curve = sweep_rate_curve(&model, Approach::ApproachI, &grid).unwrap();
        let source = ModelRatio {
            model: &model,
            approach: Approach::ApproachI,
        };
        let report = find_transition(&curve, &source).unwrap();
        let tau_star = report.tau_star.expect("crossing");
        let ratios = curve.ratios();
        let i = ratios.windows(2).position(|w| (w[0] - 1.0) * (w[1] - 1.0) <= 0.0).unwrap();
        assert!(grid[i] <= tau_star && tau_star <= grid[i + 1], "{name}");
    }
}

#[test]
fn regime_report_is_stable_under_refinement() {
    for (name, model) in preset_curves() {
        let wc = model.spectrum().cutoff();
        let source = ModelRatio {
            model: &model,
            approach: Approach::ApproachI,
        };
        let coarse = default_tau_grid(wc);
        let fine = log_grid(coarse[0], *coarse.last().unwrap(), 2 * coarse.len()).unwrap();
        let a = find_transition(&sweep_rate_curve(&model, Approach::ApproachI, &coarse).unwrap(), &source).unwrap();
        let b = find_transition(&sweep_rate_curve(&model, Approach::ApproachI, &fine).unwrap(), &source).unwrap();
        assert_eq!(a.qaze_present, b.qaze_present, "{name}");
        if a.qaze_present {
            assert!((a.tau_peak / b.tau_peak - 1.0).abs() < 0.01, "{name}: {} {}", a.tau_peak, b.tau_peak);
        }
    }
}

/// Large-τ endpoint of each preset curve on the default grid.
#[test]
fn preset_curve_endpoints_approach_golden_rule() {
    let mut misses = Vec::new();
    for (name, model) in preset_curves() {
        let grid = default_tau_grid(model.spectrum().cutoff());
        let tau = *grid.last().unwrap();
        let ratio = decay_rate(&model, tau, Approach::ApproachI).unwrap().ratio;
        if (ratio - 1.0).abs() >= 0.02 {
            misses.push(format!("{name}: R/R₀ = {ratio:.4} at τω_c = 1e3"));
        }
    }
    assert!(misses.is_empty(), "{misses:?}");
}
