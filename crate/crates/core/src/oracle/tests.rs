use super::*;
use crate::rate::decay_rate;
use crate::renorm::AtomBathModel;
use crate::spectra::{presets, TabulatedSpectrum};
use crate::SpectrumKind;

const WC: f64 = presets::HYDROGEN_2P1S_CUTOFF;

fn hydrogen_bath(n: usize) -> DiscretizedBath {
    discretize_bath(&presets::hydrogen_2p1s(), n, DEFAULT_CUTOFF_MULTIPLE * WC).unwrap()
}

#[test]
fn zero_coupling_keeps_excited_state() {
    let bath = DiscretizedBath::from_modes(1.0, vec![0.5, 1.5], vec![0.0, 0.0]).unwrap();
    let s = evolve_amplitudes(&bath, 1.0, None, 3.0, 0.01).unwrap();
    assert_eq!(s.alpha, Complex64::new(1.0, 0.0));
    let p = MeasurementProtocol::new(1.0, 1).unwrap();
    assert_eq!(survival_after_measurements(&bath, Approach::ApproachI, &p).unwrap(), 1.0);
    let x = second_approach_amplitude(&bath, 1.0).unwrap();
    assert_eq!(x, Complex64::new(1.0, 0.0));
}

#[test]
fn resonant_single_mode_rabi_oscillates() {
    let g = 0.3;
    let bath = DiscretizedBath::from_modes(1.0, vec![1.0], vec![g]).unwrap();
    let mut worst = 0.0f64;
    for t in [0.5, 1.7, 4.0, 9.0] {
        let s = evolve_amplitudes(&bath, 1.0, None, t, 0.02).unwrap();
        worst = worst.max((s.alpha.norm_sqr() - (g * t).cos().powi(2)).abs());
    }
    assert!(worst < 1e-9, "{worst}");
}

#[test]
fn step_must_resolve_fastest_phase() {
    let bath = hydrogen_bath(200);
    assert!(evolve_amplitudes(&bath, 1.0, None, 0.01, 1e-3).is_err());
}

#[test]
fn discretization_sums() {
    let spec = presets::hydrogen_2p1s();
    let bath = hydrogen_bath(DEFAULT_MODES);
    let model = AtomBathModel::reduced(spec);
    let exact = model.omega1().unwrap() - 1.0;
    let discrete = bath.omega1() - 1.0;
    assert!((discrete / exact - 1.0).abs() < 1e-3, "{discrete} vs {exact}");
    let exact_p = 1.0 - model.omega_prime().unwrap();
    let discrete_p = 1.0 - bath.omega_prime();
    // Δω = 2.75 is coarse against the 1/(ω+Ω)² weight near ω ~ Ω
    assert!((discrete_p / exact_p - 1.0).abs() < 3e-2, "{discrete_p} vs {exact_p}");

    // midpoint rule: error falls by ~4 when N doubles
    let total = |n: usize| hydrogen_bath(n).couplings().iter().map(|g| g * g).sum::<f64>();
    let reference = spectrum_total_weight(&presets::hydrogen_2p1s()).unwrap();
    let e1 = (total(500) - reference).abs();
    let e2 = (total(1000) - reference).abs();
    assert!(e2 < e1 / 3.0, "{e1} {e2}");
}

#[test]
fn flat_spectrum_gives_equal_couplings() {
    let spec = Spectrum::new(SpectrumKind::Tabulated(
        TabulatedSpectrum::new(vec![0.0, 15.0, 30.0, 30.000001], vec![1.0, 1.0, 1.0, 0.0]).unwrap(),
    ));
    let bath = discretize_bath(&spec, 2, 30.000001).unwrap();
    assert_eq!(bath.couplings()[0], bath.couplings()[1]);
}

#[test]
fn insufficient_cutoff_is_a_coverage_error() {
    let r = discretize_bath(&presets::hydrogen_2p1s(), 100, 2.0 * WC);
    assert!(matches!(r, Err(ZenoError::Coverage { .. })));
    assert!(discretize_bath(&presets::hydrogen_2p1s(), 1, 20.0 * WC).is_err());
}

#[test]
fn approach_one_matches_rate_formula() {
    let bath = hydrogen_bath(DEFAULT_MODES);
    let model = AtomBathModel::reduced(presets::hydrogen_2p1s());
    let tau = 1.0 / WC;
    let p = MeasurementProtocol::new(tau, 10).unwrap();
    let (oracle, drift) = oracle_rate(&bath, Approach::ApproachI, &p).unwrap();
    let formula = decay_rate(&model, tau, Approach::ApproachI).unwrap().rate;
    assert!((oracle / formula - 1.0).abs() < 0.05, "{oracle} vs {formula}");
    assert!(drift < 1e-9, "{drift}");
    let p_formula = crate::rate::survival_probability(formula, &p);
    let p_oracle = survival_after_measurements(&bath, Approach::ApproachI, &p).unwrap();
    assert!((p_oracle.ln() / p_formula.ln() - 1.0).abs() < 0.05);
}

#[test]
fn measurement_products() {
    let bath = hydrogen_bath(400);
    for ap in [Approach::ApproachI, Approach::ApproachII] {
        let p1 = survival_after_measurements(&bath, ap, &MeasurementProtocol::new(0.002, 1).unwrap()).unwrap();
        let p2 = survival_after_measurements(&bath, ap, &MeasurementProtocol::new(0.002, 2).unwrap()).unwrap();
        assert!((p2 - p1 * p1).abs() < 1e-15);
    }
}

#[test]
fn second_approach_initial_value() {
    let bath = hydrogen_bath(400);
    let terms = second_approach_terms(&bath, 0.0).unwrap();
    let sum_a2: f64 = bath.a_coefficients().iter().map(|a| a * a).sum();
    let x = terms.amplitude();
    assert!((x.re - (terms.c1 + sum_a2)).abs() < 1e-15);
    assert!((x.re - 1.0).abs() < 10.0 * sum_a2 * sum_a2 + 1e-15);
    assert_eq!(x.im, 0.0);
}

#[test]
fn second_approach_matches_perturbative_integrals() {
    let bath = hydrogen_bath(DEFAULT_MODES);
    let tau = 1.0 / WC;
    let x = second_approach_amplitude(&bath, tau).unwrap();
    let loss = 1.0 - x.norm_sqr();
    let pert = perturbative_loss(&bath, tau);
    assert!((loss / pert - 1.0).abs() < 0.05, "{loss} vs {pert}");
}

#[test]
fn diagonal_term_matches_per_mode_integration() {
    // Strong couplings on a handful of modes so every term is visible.
    let omegas = vec![0.3, 0.8, 1.1, 1.9, 2.6, 3.4];
    let couplings = vec![0.05, 0.08, 0.11, 0.07, 0.06, 0.04];
    let bath = DiscretizedBath::from_modes(1.0, omegas.clone(), couplings).unwrap();
    let t = 7.0;
    let terms = second_approach_terms(&bath, t).unwrap();

    let (center, g) = bath.frame(Approach::ApproachII);
    let a = bath.a_coefficients();
    let dt = default_dt(&bath, center);
    let mut direct = Complex64::new(0.0, 0.0);
    for k in 0..bath.len() {
        let mut beta = vec![Complex64::new(0.0, 0.0); bath.len()];
        beta[k] = Complex64::new(1.0, 0.0);
        let init = AmplitudeState {
            alpha: Complex64::new(0.0, 0.0),
            beta,
            t: 0.0,
        };
        let ev = integrate_amplitudes(&bath, center, &g, init, t, dt, &mut |_| {}).unwrap();
        let back = Complex64::from_polar(1.0, (center - omegas[k]) * t);
        direct += a[k] * a[k] * ev.state.beta[k] * back;
    }
    assert!((terms.diagonal - direct).norm() < 1e-8 * direct.norm(), "{} vs {}", terms.diagonal, direct);

    // The emission and absorption pieces agree by symmetry of the single-excitation block.
    assert!((terms.emission - terms.absorption).norm() < 1e-8 * terms.emission.norm());
}

#[test]
fn norm_is_conserved_along_trajectory() {
    let bath = hydrogen_bath(DEFAULT_MODES);
    let center = bath.omega1();
    let mut worst = 0.0f64;
    let ev = integrate_amplitudes(
        &bath,
        center,
        &bath.couplings().to_vec(),
        AmplitudeState::excited(bath.len()),
        3.0 / WC,
        default_dt(&bath, center),
        &mut |p| worst = worst.max((p.norm - 1.0).abs()),
    )
    .unwrap();
    assert!(worst < 1e-9 && ev.max_drift < 1e-9, "{worst}");
}

#[test]
fn discretization_converges() {
    let tau = 1.0 / WC;
    let p = MeasurementProtocol::new(tau, 1).unwrap();
    let r1 = oracle_rate(&hydrogen_bath(DEFAULT_MODES), Approach::ApproachI, &p).unwrap().0;
    let r2 = oracle_rate(&hydrogen_bath(2 * DEFAULT_MODES), Approach::ApproachI, &p).unwrap().0;
    assert!((r2 / r1 - 1.0).abs() < 0.01, "{r1} {r2}");
}

#[test]
fn short_time_loss_is_quadratic() {
    let bath = hydrogen_bath(1000);
    let center = bath.omega1();
    let dt = default_dt(&bath, center);
    let ts = [1e-7, 1e-6, 1e-5];
    let losses: Vec<f64> = ts
        .iter()
        .map(|&t| {
            let s = evolve_amplitudes(&bath, center, None, t, dt.min(t / 4.0)).unwrap();
            // the emitted population, which is 1 − |α|² without the cancellation
            s.beta.iter().map(|b| b.norm_sqr()).sum::<f64>()
        })
        .collect();
    let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = losses.iter().map(|l| l.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 3.0, ys.iter().sum::<f64>() / 3.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!((slope - 2.0).abs() < 0.05, "{slope}");
}

#[test]
fn weak_coupling_field_amplitudes_match_first_order() {
    let bath = DiscretizedBath::from_modes(1.0, vec![0.4, 0.9, 1.6], vec![1e-4, 2e-4, 1.5e-4]).unwrap();
    let center = bath.omega1();
    let t = 5.0;
    let s = evolve_amplitudes(&bath, center, None, t, 0.01).unwrap();
    for k in 0..3 {
        let (w, g) = (bath.omegas()[k], bath.couplings()[k]);
        let d = center - w;
        let closed = g * (Complex64::from_polar(1.0, -d * t) - 1.0) / d;
        assert!((s.beta[k] - closed).norm() < 1e-3 * closed.norm(), "mode {k}");
    }
}
