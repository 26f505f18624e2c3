use hybrid_rom::estimate::true_step_error;
use hybrid_rom::greedy::{
    param_error_estimate, pod_greedy, validate_rom, GreedyConfig, GreedyResult, HifiSolver, ParametricFamily,
};
use hybrid_rom::rom::Rom;
use nalgebra::DMatrix;

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

/// Largest one-step output error along the ROM trajectory, each step taken
/// by the full model from the current ROM state.
fn max_one_step_error(fam: &ParametricFamily, phi: &DMatrix<f64>, mu: f64) -> f64 {
    let prob = fam.problem(mu).unwrap();
    let handle = prob.system.factorize(false).unwrap();
    let rom = Rom::from_basis(&prob.system, phi, None).unwrap();
    let mut x_r = rom.project(&prob.x0).unwrap();
    let mut worst: f64 = 0.0;
    for k in 0..prob.n_t {
        let u = (prob.input)(prob.time(k));
        let lifted = rom.lift(&x_r).unwrap();
        worst = worst.max(true_step_error(&prob.system, &handle, &rom, &lifted, &u).unwrap());
        x_r = rom.step(&prob.system, &x_r, &u).unwrap();
    }
    worst
}

fn family() -> ParametricFamily {
    ParametricFamily::heat(5, vec![0.01, 0.05, 0.2])
}

fn truncated(fam: &ParametricFamily, iters: usize) -> GreedyResult {
    let cfg = GreedyConfig {
        max_iter: Some(iters),
        ..GreedyConfig::new(1e-12, HifiSolver::Fom)
    };
    pod_greedy(fam, &cfg).unwrap()
}

#[test]
fn greedy_pick_tracks_true_worst_parameter() {
    let fam = family();
    let mut hits = 0;
    let mut seen = Vec::new();
    for iters in 1..=3 {
        let res = truncated(&fam, iters);
        assert_eq!(res.iterations(), iters);
        let picked = res.log.last().unwrap().mu_star;
        let errors: Vec<f64> = fam
            .theta
            .iter()
            .map(|&mu| validate_rom(&fam, &res.phi, None, mu).unwrap().max_error)
            .collect();
        let worst = fam.theta[argmax(&errors)];
        seen.push((picked, worst));
        if picked == worst {
            hits += 1;
        }
    }
    assert!(hits >= 2, "greedy picks vs exhaustive argmax: {seen:?}");
}

#[test]
fn logged_estimate_matches_recomputation() {
    let fam = family();
    let res = truncated(&fam, 2);
    let last = res.log.last().unwrap();
    let est: Vec<f64> = fam
        .theta
        .iter()
        .map(|&mu| param_error_estimate(&fam, &res.phi, None, mu).unwrap().total())
        .collect();
    let i = argmax(&est);
    assert_eq!(fam.theta[i], last.mu_star);
    assert!((est[i] - last.delta_bar).abs() <= 1e-12 * est[i].max(1e-300));
}

#[test]
fn greedy_pick_tracks_worst_one_step_error() {
    let fam = family();
    let mut hits = 0;
    let mut seen = Vec::new();
    for iters in 1..=3 {
        let res = truncated(&fam, iters);
        let picked = res.log.last().unwrap().mu_star;
        let errors: Vec<f64> = fam.theta.iter().map(|&mu| max_one_step_error(&fam, &res.phi, mu)).collect();
        let worst = fam.theta[argmax(&errors)];
        seen.push((picked, worst));
        if picked == worst {
            hits += 1;
        }
    }
    assert!(hits >= 2, "greedy picks vs one-step argmax: {seen:?}");
}

#[test]
fn estimate_bounds_one_step_error() {
    let fam = family();
    for iters in 1..=3 {
        let res = truncated(&fam, iters);
        for &mu in &fam.theta {
            let est = param_error_estimate(&fam, &res.phi, None, mu).unwrap().total();
            let err = max_one_step_error(&fam, &res.phi, mu);
            // linear family and an exact dual: a strict bound
            assert!(est >= err * (1.0 - 1e-10), "mu {mu}: estimate {est:e}, one-step error {err:e}");
        }
    }
}

#[test]
fn basis_grows_until_the_cap() {
    let fam = family();
    let res = truncated(&fam, 4);
    assert!(res.pod_dim() >= 1 && res.pod_dim() <= 4);
    assert!(!res.converged);
    assert!(res.hifi_runs() <= 4);
    let dims: Vec<usize> = res.log.iter().map(|e| e.pod_dim).collect();
    assert!(dims.windows(2).all(|w| w[1] >= w[0]), "{dims:?}");
}

