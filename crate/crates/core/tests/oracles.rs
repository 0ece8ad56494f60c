//! Cross-module checks against closed-form Gaussian dynamics.

use magnon_squeeze::dynamics::{collapse_terms_with_occupations, evolve_master, LindbladGenerator};
use magnon_squeeze::experiments::config::ParamsConfig;
use magnon_squeeze::experiments::{run_scenario, InitialState, ModelKind, ScenarioConfig};
use magnon_squeeze::model::ParametricModel;
use magnon_squeeze::observables::{covariance_matrix, min_variance, optimal_angle};
use magnon_squeeze::operators::{fock_ket, ComplexMatrix, HilbertLayout};

/// Damped static two-magnon drive: the squeezed quadrature obeys
/// `V' = −(κ + 4χ)V + κ(n̄ + ½)`, so `V(t) = V∞ + (½ − V∞)e^{−(κ+4χ)t}`.
/// With κ > 4χ the anti-squeezed quadrature also settles, so truncation stays harmless.
#[test]
fn damped_parametric_variance_matches_linear_solution() {
    let n = 30;
    let layout = HilbertLayout::magnon_only(n).unwrap();
    let chi = 1.0e6;
    let kappa = 6.0e6;
    let nbar = 0.2;
    let p = ParamsConfig { kappa: kappa / (2.0 * std::f64::consts::PI * 1e6), ..ParamsConfig::baseline() }.to_system();
    let h = ParametricModel { chi, phase_rate: 0.0 }.hamiltonian(&layout).unwrap();
    let gen = LindbladGenerator::new(h, collapse_terms_with_occupations(&p, nbar, 0.0, &layout).unwrap()).unwrap();
    let times: Vec<f64> = (0..11).map(|k| k as f64 * 50e-9).collect();
    let rec = evolve_master(&gen, &ComplexMatrix::outer(&fock_ket(n, 0).unwrap()), &times).unwrap();
    let rate = kappa + 4.0 * chi;
    let v_inf = kappa * (nbar + 0.5) / rate;
    for (t, rho) in times.iter().zip(&rec.states) {
        let cm = covariance_matrix(rho).unwrap();
        let expected = v_inf + (0.5 - v_inf) * (-rate * t).exp();
        assert!((min_variance(&cm) - expected).abs() < 1e-6, "t = {t}: {} vs {expected}", min_variance(&cm));
        if *t > 0.0 {
            // χ(m² + m†²) couples X₁ and X₂ symmetrically, so the ellipse sits on a diagonal.
            assert!((optimal_angle(&cm).theta.abs() - std::f64::consts::FRAC_PI_4).abs() < 1e-6);
        }
    }
}

/// The two qubit branches see opposite parametric strengths, and the excited
/// branch squeezes the magnon from the start.
#[test]
fn qubit_branches_have_opposite_chi() {
    let g = ParamsConfig::baseline().coupling_mhz();
    let base = ScenarioConfig {
        params: ParamsConfig { drive1: 10.0 * g, drive2: 3.0 * g, magnon_trunc: 25, ..ParamsConfig::baseline() },
        model: ModelKind::EffectiveEq9,
        dissipation: false,
        t_final: 100.0,
        n_samples: 11,
        initial_state: InitialState::QubitEMagnonVac,
        outputs: vec!["V_min".into()],
    };
    let e = run_scenario(&base).unwrap();
    let d = magnon_squeeze::model::derive_params(&base.params.to_system()).unwrap();
    let excited = ParametricModel::from_derived(&d, magnon_squeeze::model::QubitBranch::Excited).unwrap();
    let ground = ParametricModel::from_derived(&d, magnon_squeeze::model::QubitBranch::Ground).unwrap();
    assert_eq!(excited.chi, -ground.chi);
    assert!(e.rows.iter().skip(1).all(|r| r.v_min < 0.5));
}
