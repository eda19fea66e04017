use asymdynkin_core::dynamics::*;
use asymdynkin_core::game::{Estimate, RandomDevice, Role};
use proptest::prelude::*;

fn expr(s: &str) -> Expr {
    Expr::parse(s).unwrap()
}

fn model(mu0: &str, mu1: &str, sigma: &str, x0: f64, pi: f64) -> DiffusionModel {
    DiffusionModel::new(expr(mu0), expr(mu1), expr(sigma), x0, pi, 1.0, [-2.0, 2.0]).unwrap()
}

fn tanh_payoffs() -> StoppingPayoffs {
    StoppingPayoffs { f: expr("tanh(x) + 0.1"), g: expr("tanh(x) - 0.1"), h: expr("tanh(x)") }
}

/// Same drift in both regimes: the belief never moves.
fn degenerate() -> DiffusionModel {
    model("0.2 - 2*x", "0.2 - 2*x", "0.4", 0.0, 0.5)
}

fn generic() -> DiffusionModel {
    model("0.2 - 2*x", "0.8 - 2*x", "0.4", 0.0, 0.5)
}

fn solve(m: &DiffusionModel, p: &StoppingPayoffs, size: &str) -> PdeSurfaces {
    let grid = PdeGrid::for_model(size.parse().unwrap(), m).unwrap();
    pde_solve_system(m, p, &grid, &PdeOptions::default()).unwrap()
}

struct Poly {
    /// Coefficients of `1, x, p, x^2, p^2, p x`.
    c: [f64; 6],
}

impl TestFunction for Poly {
    fn value(&self, p: f64, x: f64) -> f64 {
        let c = &self.c;
        c[0] + c[1] * x + c[2] * p + c[3] * x * x + c[4] * p * p + c[5] * p * x
    }
    fn derivatives(&self, p: f64, x: f64) -> Derivatives {
        let c = &self.c;
        Derivatives {
            x: c[1] + 2.0 * c[3] * x + c[5] * p,
            xx: 2.0 * c[3],
            p: c[2] + 2.0 * c[4] * p + c[5] * x,
            pp: 2.0 * c[4],
            xp: c[5],
        }
    }
}

#[test]
fn filter_without_signal_keeps_the_prior() {
    let m = model("1 - x", "1 - x", "0.5", 0.3, 0.35);
    let b = simulate_filter_paths(&m, 200, 1e-2, Recording::Full, RandomDevice::new(1, 0)).unwrap();
    assert!(b.psi.iter().all(|&p| p == 0.35));
    let certain = model("-x", "1 - x", "0.5", 0.0, 1.0);
    let b = simulate_filter_paths(&certain, 200, 1e-2, Recording::Full, RandomDevice::new(1, 0)).unwrap();
    assert!(b.psi.iter().all(|&p| p == 1.0));
}

#[test]
fn posterior_is_a_martingale() {
    let m = generic();
    let b = simulate_filter_paths(&m, 100_000, 1e-3, Recording::Terminal, RandomDevice::new(5, 0)).unwrap();
    let est = Estimate::from_samples(&b.terminal_psi());
    assert!((est.mean - m.pi).abs() <= 4.0 * est.stderr, "{est:?}");
    assert!(b.psi.iter().all(|p| (0.0..=1.0).contains(p)));
    // the clamp only absorbs Euler overshoot of order dt
    assert!(b.clamp.max_excursion <= 10.0 * 1e-3, "{:?}", b.clamp);
}

#[test]
fn regime_draws_follow_the_prior() {
    let m = model("-x", "1 - x", "0.5", 0.0, 0.3);
    let n = 50_000;
    let b = simulate_regime_paths(&m, n, 1e-2, Recording::Terminal, RandomDevice::new(2, 0)).unwrap();
    let freq = b.regime.as_ref().unwrap().iter().filter(|&&j| j == 1).count() as f64 / n as f64;
    assert!((freq - 0.3).abs() <= 4.0 * (0.3 * 0.7 / n as f64).sqrt(), "{freq}");

    let flat = model("-x", "-x", "0.5", 0.0, 0.3);
    let b = simulate_regime_paths(&flat, 100, 1e-2, Recording::Full, RandomDevice::new(2, 0)).unwrap();
    assert!(b.psi.iter().all(|&p| (p - 0.3).abs() < 1e-15));
}

/// Root mean square of the terminal gap between the two posterior computations.
fn posterior_rms(m: &DiffusionModel, dt: f64) -> f64 {
    let b = simulate_regime_paths(m, 20_000, dt, Recording::Terminal, RandomDevice::new(8, 0)).unwrap();
    let filter = b.psi_filter.as_ref().unwrap();
    let sq: f64 = b.psi.iter().zip(filter).map(|(a, b)| (a - b).powi(2)).sum();
    (sq / b.psi.len() as f64).sqrt()
}

#[test]
fn filter_and_likelihood_posteriors_converge() {
    let m = generic();
    let rms: Vec<f64> = [4e-3, 2e-3, 1e-3].iter().map(|&dt| posterior_rms(&m, dt)).collect();
    for w in rms.windows(2) {
        assert!(w[0] / w[1] >= 1.2, "{rms:?}");
    }
}

#[test]
fn generator_reductions() {
    let lin = Poly { c: [0.0, 1.0, 0.0, 0.0, 0.0, 0.0] };
    let flat = model("0.3 - x", "0.3 - x", "0.5", 0.2, 0.5);
    let drift = 0.3 - 0.2;
    for mode in [GeneratorMode::Observation, GeneratorMode::Regime(1)] {
        let c = generator_check(&flat, &lin, mode, (0.4, 0.2), 100_000, 1e-3, RandomDevice::new(4, 0)).unwrap();
        assert!((c.analytic - drift).abs() < 1e-15);
        assert!((c.mc.mean - drift).abs() <= 4.0 * c.mc.stderr, "{c:?}");
    }

    // at p = 0 in regime 0 only the one-dimensional generator survives
    let m = generic();
    let quad = Poly { c: [0.0, 0.5, 0.0, 1.5, 0.0, 0.0] };
    let x = 0.3;
    let (mu0, s) = (0.2 - 2.0 * x, 0.4);
    let one_dim = mu0 * (0.5 + 3.0 * x) + 0.5 * s * s * 3.0;
    let c = generator_check(&m, &quad, GeneratorMode::Regime(0), (0.0, x), 200_000, 1e-3, RandomDevice::new(6, 0)).unwrap();
    assert!((c.analytic - one_dim).abs() < 1e-14);
    assert!(c.z_score() <= 4.0, "{c:?}");
}

#[test]
fn generator_cross_term() {
    let m = generic();
    let px = Poly { c: [0.0, 0.0, 0.0, 0.0, 0.0, 1.0] };
    for mode in [GeneratorMode::Observation, GeneratorMode::Regime(0), GeneratorMode::Regime(1)] {
        let c = generator_check(&m, &px, mode, (0.4, 0.1), 400_000, 1e-4, RandomDevice::new(7, 0)).unwrap();
        assert!(c.z_score() <= 4.0, "{mode:?}: {c:?}");
    }
}

/// `E[1{J = 1} F] = E[psi_T F]`: the regime indicator and its posterior
/// agree on every functional of the observed path.
fn measure_gap(m: &DiffusionModel, seed: u64, functional: impl Fn(f64) -> f64) -> Estimate {
    let b = simulate_regime_paths(m, 20_000, 1e-2, Recording::Terminal, RandomDevice::new(seed, 0)).unwrap();
    let j = b.regime.as_ref().unwrap();
    let d: Vec<f64> = (0..b.n)
        .map(|i| {
            let x = *b.x_path(i).last().unwrap();
            let psi = *b.psi_path(i).last().unwrap();
            (f64::from(j[i]) - psi) * functional(x) / m.pi
        })
        .collect();
    Estimate::from_samples(&d)
}

#[test]
fn terminal_slice_and_degenerate_symmetry() {
    let m = degenerate();
    let p = tanh_payoffs();
    let s = solve(&m, &p, "41x11x41");
    let g = s.grid;
    let last = g.size.nt - 1;
    for j in 0..g.size.npi {
        for mm in 0..g.size.nx {
            let h = p.h.eval(g.t(last), g.x(mm));
            let at = g.index(last, j, mm);
            assert_eq!((s.v[at], s.u[0][at], s.u[1][at]), (h, h, h));
        }
    }
    let mut spread: f64 = 0.0;
    for k in 0..g.size.nt {
        for mm in 0..g.size.nx {
            for j in 1..g.size.npi {
                spread = spread.max((s.v[g.index(k, j, mm)] - s.v[g.index(k, 0, mm)]).abs());
            }
        }
    }
    assert!(spread <= 1e-8, "{spread}");
    let r = reference_dynkin_1d(&m, 0, &p, &g).unwrap();
    let mut dist: f64 = 0.0;
    for k in 0..g.size.nt {
        for j in 0..g.size.npi {
            for mm in 0..g.size.nx {
                dist = dist.max((s.v[g.index(k, j, mm)] - r[k * g.size.nx + mm]).abs());
            }
        }
    }
    assert!(dist <= 5e-2, "{dist}");
}

#[test]
fn surfaces_respect_their_obstacles() {
    let s = solve(&generic(), &tanh_payoffs(), "41x11x41");
    let g = s.grid;
    for k in 0..g.size.nt {
        for j in 0..g.size.npi {
            for mm in 0..g.size.nx {
                assert!(s.informed_gap(0, k, j, mm) >= -1e-12 && s.informed_gap(1, k, j, mm) >= -1e-12);
                assert!(s.uninformed_gap(k, j, mm) >= -1e-12);
            }
        }
    }
}

#[test]
fn refinement_deltas_shrink() {
    let m = generic();
    let p = tanh_payoffs();
    // points of the joint continuation region
    let probes = [(0.0, 0.5, 0.0), (0.25, 0.5, 0.25), (0.5, 0.5, 0.0), (0.75, 0.5, 0.0)];
    let values: Vec<Vec<f64>> = ["21x5x21", "41x9x41", "81x17x81", "161x33x161"]
        .iter()
        .map(|size| {
            let s = solve(&m, &p, size);
            probes.iter().map(|&(t, pi, x)| s.v_at(t, pi, x)).collect()
        })
        .collect();
    for (q, _) in probes.iter().enumerate() {
        let deltas: Vec<f64> = values.windows(2).map(|w| (w[1][q] - w[0][q]).abs()).collect();
        assert!(deltas.windows(2).all(|d| d[1] < d[0]), "probe {q}: {deltas:?}");
    }
}

#[test]
fn starting_inside_the_stopping_set_stops_at_once() {
    // g peaks at the start, so the maximiser cannot do better than stopping
    let m = model("-x", "1 - x", "0.5", 0.0, 0.5);
    let p = StoppingPayoffs { f: expr("2"), g: expr("1 - x*x"), h: expr("1 - x*x") };
    let s = solve(&m, &p, "41x11x41");
    let map = extract_strategies(&s, 1e-2);
    let b = simulate_filter_paths(&m, 20, 1e-2, Recording::Full, RandomDevice::new(3, 0)).unwrap();
    for i in 0..b.n {
        assert_eq!(map.evaluate(b.x_path(i), b.psi_path(i)).zeta[0], 1.0);
    }
}

#[test]
fn symmetric_model_gives_identical_incarnations() {
    let m = degenerate();
    let s = solve(&m, &tanh_payoffs(), "101x11x101");
    let map = extract_strategies(&s, 1e-2);
    let b = simulate_filter_paths(&m, 200, 1e-2, Recording::Full, RandomDevice::new(4, 0)).unwrap();
    let mut stopped = 0;
    for i in 0..b.n {
        let path = map.evaluate(b.x_path(i), b.psi_path(i));
        assert_eq!(path.xi[0], path.xi[1]);
        stopped += usize::from(path.xi[0][path.xi[0].len() - 2] > 0.0);
    }
    assert!(stopped > 0, "no path ever stopped");
}

#[test]
fn extracted_mass_stays_on_the_stopping_sets() {
    let m = generic();
    let s = solve(&m, &tanh_payoffs(), "101x21x101");
    let map = extract_strategies(&s, 1e-2);
    let b = simulate_filter_paths(&m, 500, 1e-2, Recording::Full, RandomDevice::new(9, 0)).unwrap();
    let mut pushed = 0.0;
    for i in 0..b.n {
        let path = map.evaluate(b.x_path(i), b.psi_path(i));
        assert!(path.off_set_mass.iter().all(|&w| w <= 1e-6), "path {i}: {:?}", path.off_set_mass);
        pushed += path.xi[0][path.xi[0].len() - 2] + path.xi[1][path.xi[1].len() - 2];
    }
    assert!(pushed > 0.0);
}

fn verify(m: &DiffusionModel, s: &PdeSurfaces, map: &StrategyMap, n: usize, seed: u64) -> SufficiencyReport {
    let opts = VerifyOptions { n, dt: map.dt, ..VerifyOptions::default() };
    mc_verify_sufficiency(m, &tanh_payoffs(), s, map, &opts, RandomDevice::new(seed, 0)).unwrap()
}

#[test]
fn degenerate_model_passes_every_condition() {
    let m = degenerate();
    let s = solve(&m, &tanh_payoffs(), "201x21x201");
    let map = extract_strategies(&s, 1e-3);
    let r = verify(&m, &s, &map, 100_000, 1);
    assert_eq!(r.conditions.len(), 5);
    assert!(r.all_passed(), "{r:#?}");
}

#[test]
fn scaled_value_surface_fails_the_identity() {
    let m = generic();
    let mut s = solve(&m, &tanh_payoffs(), "101x21x101");
    assert!(s.v_at(0.0, m.pi, m.x0).abs() > 1e-3);
    s.scale_v(1.1);
    let map = extract_strategies(&s, 1e-3);
    let r = verify(&m, &s, &map, 200, 2);
    assert!(!r.condition("v").unwrap().passed, "{r:#?}");
}

#[test]
fn never_stopping_uninformed_player_fails_condition_ii() {
    let m = generic();
    let s = solve(&m, &tanh_payoffs(), "201x21x201");
    let map = extract_strategies(&s, 1e-3);
    let honest = verify(&m, &s, &map, 20_000, 3);
    assert!(honest.all_passed(), "{honest:#?}");
    let never = map.with_uninformed_rule(UninformedRule::Never);
    let r = verify(&m, &s, &never, 20_000, 3);
    assert!(!r.condition("ii").unwrap().passed, "{r:#?}");
}

#[test]
fn verification_needs_matching_steps() {
    let m = generic();
    let s = solve(&m, &tanh_payoffs(), "21x5x21");
    let map = extract_strategies(&s, 1e-2);
    let opts = VerifyOptions { n: 100, dt: 1e-3, ..VerifyOptions::default() };
    assert!(mc_verify_sufficiency(&m, &tanh_payoffs(), &s, &map, &opts, RandomDevice::new(0, 0)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn posterior_stays_in_the_unit_interval(seed in any::<u64>(), slope in 0.0..3.0_f64, pi in 0.0..=1.0_f64) {
        let m = model("-x", &format!("{slope} - x"), "0.3", 0.0, pi);
        let b = simulate_filter_paths(&m, 50, 1e-2, Recording::Full, RandomDevice::new(seed, 0)).unwrap();
        prop_assert!(b.psi.iter().all(|p| (0.0..=1.0).contains(p)));
        let r = simulate_regime_paths(&m, 50, 1e-2, Recording::Full, RandomDevice::new(seed, 1)).unwrap();
        prop_assert!(r.psi.iter().chain(r.psi_filter.as_ref().unwrap()).all(|p| (0.0..=1.0).contains(p)));
    }

    #[test]
    fn posterior_reconstructs_the_regime_law(seed in any::<u64>(), a in -2.0..2.0_f64, b in -1.0..1.0_f64) {
        let m = model("0.2 - x", "0.9 - x", "0.5", 0.0, 0.4);
        let functionals: [Box<dyn Fn(f64) -> f64>; 10] = [
            Box::new(|_| 1.0),
            Box::new(move |x| (a * x + b).tanh()),
            Box::new(move |x| (a * x).cos()),
            Box::new(move |x| (b * x).sin()),
            Box::new(|x| x.clamp(-1.0, 1.0)),
            Box::new(|x| f64::from(x > 0.0)),
            Box::new(move |x| f64::from(x > b)),
            Box::new(|x| (-x * x).exp()),
            Box::new(|x| 1.0 / (1.0 + x * x)),
            Box::new(move |x| (x - a).abs().min(1.0)),
        ];
        for (k, f) in functionals.iter().enumerate() {
            let est = measure_gap(&m, seed, f);
            prop_assert!(est.mean.abs() <= 4.0 * est.stderr + 1e-12, "functional {}: {:?}", k, est);
        }
    }

    #[test]
    fn beliefs_reflect_off_the_informed_stopping_sets(seed in any::<u64>()) {
        let m = generic();
        let s = solve(&m, &tanh_payoffs(), "41x11x41");
        let map = extract_strategies(&s, 1e-2);
        let h = s.grid.dpi();
        let b = simulate_filter_paths(&m, 20, 1e-2, Recording::Full, RandomDevice::new(seed, 0)).unwrap();
        for i in 0..b.n {
            let (x, path) = (b.x_path(i), map.evaluate(b.x_path(i), b.psi_path(i)));
            for k in 0..x.len() - 1 {
                let (t, p) = (k as f64 * map.dt, path.belief_after[k]);
                for inc in 0..2 {
                    if path.xi[inc][k] >= 1.0 {
                        continue;
                    }
                    let near = [p - h, p, p + h].iter().any(|&q| map.informed_gap(inc, t, q.clamp(0.0, 1.0), x[k]) > map.tol);
                    prop_assert!(near, "path {}, step {}, incarnation {}: belief {}", i, k, inc, p);
                }
            }
        }
    }
}

#[test]
fn devices_split_by_role() {
    let d = RandomDevice::new(1, 0);
    assert_ne!(d.role(Role::Path).uniform(0), d.role(Role::Regime).uniform(0));
}
