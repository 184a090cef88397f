//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any failed. Numeric arguments select criteria:
//! `cargo test --test acceptance -- 3 7`.

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use antivoter::dual::{agreement_probability, couple_and_verify, project, simulate_dual_native};
use antivoter::dynamics::{Configuration, InitialLaw, Params, Task};
use antivoter::engine::{
    estimate_hitting_times, influence_set, replicate_rng, run, Budget, Estimate, GillespieEngine, GraphicalEngine,
    ObservableAccumulator, Simulator,
};
use antivoter::exact::{b_of, build_birth_death, stationary, u1_bar, verify_monotone, BirthDeathChain};
use antivoter::graph::{find_bipartition, Graph};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn params(c1: f64, c2: f64, eps: f64) -> Params {
    Params::new(c1, c2, eps).unwrap()
}

fn criterion_1() -> Outcome {
    let n = 1000;
    let g = Graph::complete(n).unwrap();
    let mut ok = true;
    let mut lines = Vec::new();
    for (i, eps) in [0.02, 0.1, 0.3, 0.7, 1.0].into_iter().enumerate() {
        let p = params(1.0, 2.0, eps);
        let target = if eps == 1.0 { p.v1_bar() } else { u1_bar(b_of(eps, n).unwrap(), 1.0, 2.0).unwrap() };
        let mut phis = Vec::new();
        for r in 0..3 {
            let c = Configuration::uniform(n, Task::One);
            let mut e = GillespieEngine::new(&g, p, c.clone(), replicate_rng(1, (i as u64) << 32 | r)).unwrap();
            let s = run(&mut e, Budget::Updates(1_000_000), &mut ObservableAccumulator::new(&c));
            ok &= (s.phi - target).abs() <= 0.01;
            phis.push(format!("{:.4}", s.phi));
        }
        lines.push(format!("eps={eps} target={target:.4} phi=[{}]", phis.join(", ")));
    }
    outcome(ok, lines.join("; "))
}

fn generator_mean(chain: &BirthDeathChain) -> f64 {
    let m = chain.n + 1;
    let mut q = DMatrix::<f64>::zeros(m, m);
    for j in 0..m {
        if j + 1 < m {
            q[(j, j + 1)] = chain.birth[j];
        }
        if j > 0 {
            q[(j, j - 1)] = chain.death[j];
        }
        q[(j, j)] = -(chain.birth[j] + chain.death[j]);
    }
    let mut a = q.transpose();
    for k in 0..m {
        a[(m - 1, k)] = 1.0;
    }
    let mut rhs = DVector::zeros(m);
    rhs[m - 1] = 1.0;
    let pi = a.lu().solve(&rhs).unwrap();
    (0..m).map(|j| j as f64 * pi[j]).sum::<f64>() / chain.n as f64
}

fn criterion_2() -> Outcome {
    let mut worst_solve = 0.0f64;
    for n in 2..=8 {
        for eps in [0.1, 0.5, 1.0] {
            for ratio in [1.0, 0.5, 0.1] {
                let chain = build_birth_death(n, &params(ratio, 1.0, eps)).unwrap();
                let diff = (stationary(&chain).unwrap().mean_fraction - generator_mean(&chain)).abs();
                worst_solve = worst_solve.max(diff);
            }
        }
    }
    let mut worst_balance = 0.0f64;
    let mut worst_mass = 0.0f64;
    let mut compared = 0usize;
    for n in [2, 10, 100, 1000, 10_000] {
        for eps in [0.01, 0.1, 0.5, 1.0] {
            for (c1, c2) in [(1.0, 2.0), (0.1, 1.0), (1.0, 1.0)] {
                let chain = build_birth_death(n, &params(c1, c2, eps)).unwrap();
                let pi = stationary(&chain).unwrap().probabilities;
                worst_mass = worst_mass.max((pi.iter().sum::<f64>() - 1.0).abs());
                for j in 0..n {
                    let lhs = pi[j] * chain.birth[j];
                    let rhs = pi[j + 1] * chain.death[j + 1];
                    let scale = lhs.max(rhs);
                    // below this both sides have left the normal range
                    if scale < 1e-280 {
                        continue;
                    }
                    compared += 1;
                    worst_balance = worst_balance.max((lhs - rhs).abs() / scale);
                }
            }
        }
    }
    let ok = worst_solve <= 1e-10 && worst_balance <= 1e-12 && worst_mass <= 1e-12;
    outcome(
        ok,
        format!(
            "max |mean - solve| = {worst_solve:.2e}; max relative balance error = {worst_balance:.2e} over {compared} pairs; max |sum - 1| = {worst_mass:.2e}"
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut ok = true;
    let mut worst = 0.0f64;
    for (c1, c2) in [(1.0, 2.0), (0.3, 7.0), (2.0, 2.5)] {
        let at_one = u1_bar(1.0, c1, c2).unwrap();
        let at_two = u1_bar(2.0, c1, c2).unwrap();
        let e1 = (at_one - c2.sqrt() / (c1.sqrt() + c2.sqrt())).abs();
        let e2 = (at_two - 0.5).abs();
        worst = worst.max(e1).max(e2);
    }
    ok &= worst <= 1e-12;
    let grid: Vec<f64> = (1..=1000).map(|k| 2.0 * k as f64 / 1001.0).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut failures = 0;
    for _ in 0..100 {
        let c1 = rng.random_range(0.05..5.0);
        let c2 = c1 + rng.random_range(0.01..5.0);
        let report = verify_monotone(c1, c2, &grid).unwrap();
        if !(report.strictly_decreasing && report.ordering_holds) {
            failures += 1;
        }
    }
    ok &= failures == 0;
    outcome(ok, format!("special values max error {worst:.2e}; {failures}/100 cost pairs not strictly decreasing"))
}

fn criterion_4() -> Outcome {
    let n = 100;
    let g = Graph::cycle(n).unwrap();
    let b = find_bipartition(&g).unwrap();
    let plus = Configuration::checkerboard(&b, Task::One);
    let minus = Configuration::checkerboard(&b, Task::Two);
    let p = params(1.0, 2.0, 1e-3);
    let mut ok = true;
    let mut parts = Vec::new();
    for seed in 0..3 {
        let mut e = GillespieEngine::new(&g, p, plus.clone(), replicate_rng(40 + seed, 0)).unwrap();
        let mut acc = ObservableAccumulator::new(&plus).with_targets(vec![plus.clone(), minus.clone()]);
        let s = run(&mut e, Budget::Updates(1_000_000), &mut acc);
        let residence = s.residence[0] + s.residence[1];
        ok &= residence >= 0.9 && (0.45..=0.55).contains(&s.phi);
        parts.push(format!("seed {seed}: residence={residence:.3} phi={:.4} time={:.0}", s.phi, s.sim_time));
    }

    // without defection: absorption from outside the checkerboards
    let p0 = params(1.0, 2.0, 0.0);
    let mut absorbed_ok = true;
    for g in [Graph::cycle(100).unwrap(), Graph::grid(2, 2).unwrap(), Graph::grid(4, 3).unwrap()] {
        let b = find_bipartition(&g).unwrap();
        let (n1, n2) = b.sizes();
        let xi = [Configuration::checkerboard(&b, Task::One), Configuration::checkerboard(&b, Task::Two)];
        for r in 0..10 {
            let mut rng = replicate_rng(44, r);
            let mut start = InitialLaw::Bernoulli(0.5).sample(g.vertex_count(), &mut rng).unwrap();
            while xi.contains(&start) {
                start = InitialLaw::Bernoulli(0.5).sample(g.vertex_count(), &mut rng).unwrap();
            }
            let mut e = GillespieEngine::new(&g, p0, start.clone(), rng.clone()).unwrap();
            let s = run(&mut e, Budget::Time(f64::INFINITY), &mut ObservableAccumulator::new(&start));
            let t_abs = s.absorbed_at.unwrap_or(f64::NAN);
            let x = s.final_config.count_task_one();
            absorbed_ok &= s.absorbed && xi.contains(&s.final_config) && (x == n1 || x == n2);
            // replay with the burn-in at the absorption time and a longer horizon
            let mut e = GillespieEngine::new(&g, p0, start.clone(), rng).unwrap();
            let mut acc = ObservableAccumulator::new(&start).with_burnin(t_abs);
            let s = run(&mut e, Budget::Time(t_abs + 50.0), &mut acc);
            let post = s.phi_post_burnin.unwrap_or(f64::NAN);
            let expected = x as f64 / g.vertex_count() as f64;
            absorbed_ok &= (post - expected).abs() <= 1e-12;
        }
    }
    ok &= absorbed_ok;
    parts.push(format!("epsilon=0 absorption into checkerboards: {}", if absorbed_ok { "ok" } else { "failed" }));
    outcome(ok, parts.join("; "))
}

fn criterion_5() -> Outcome {
    let g = Graph::cycle(50).unwrap();
    let p = params(1.0, 2.0, 0.01);
    let r = estimate_hitting_times(&g, &p, &InitialLaw::Bernoulli(0.5), 1000, 5).unwrap();
    let plus = r.t_out_plus.as_ref().unwrap();
    let predicted = 1.0 / r.exit_rate_plus;
    let ok = (plus.mean - predicted).abs() <= 3.0 * plus.std_error && plus.mean >= r.t_out_lower_bound;
    outcome(
        ok,
        format!(
            "mean T_out = {:.4} +- {:.4}, 1/exit rate = {predicted:.4}, lower bound = {:.4}; mean T_in = {:.1}",
            plus.mean, plus.std_error, r.t_out_lower_bound, r.t_in.mean
        ),
    )
}

fn criterion_6() -> Outcome {
    let p = params(1.0, 2.0, 0.05);
    let mut ok = true;
    let mut events = 0;
    let mut births = 0;
    for seed in 0..10 {
        let r = couple_and_verify(50, &p, &InitialLaw::Bernoulli(0.5), Budget::Updates(100_000), seed).unwrap();
        if let Some(m) = &r.first_mismatch {
            return outcome(false, format!("seed {seed}: mismatch at event {}: {m:?}", m.event_index));
        }
        ok &= r.events == 100_000;
        events += r.events;
        births += r.births;
    }
    outcome(ok, format!("{events} events over 10 seeds, {births} births, zero mismatches"))
}

fn criterion_7() -> Outcome {
    let n = 100;
    let g = Graph::cycle(n).unwrap();
    let p = params(1.0, 2.0, 0.0);
    let mut ok = true;
    let mut longest = 0.0f64;
    for r in 0..100 {
        let mut rng = replicate_rng(7, r);
        let c = InitialLaw::Bernoulli(0.5).sample(n, &mut rng).unwrap();
        let traj =
            simulate_dual_native(&p, project(&g, &c).unwrap(), c.get(0), Budget::Time(f64::INFINITY), rng).unwrap();
        let mut prev = traj.initial_particles;
        for ev in &traj.events {
            ok &= ev.particles % 2 == 0 && ev.particles <= prev;
            prev = ev.particles;
        }
        ok &= traj.final_particles() == 0 && traj.absorbed_at.is_some();
        longest = longest.max(traj.time);
    }
    outcome(ok, format!("100 replicates extinct, longest extinction time {longest:.0}"))
}

fn criterion_8() -> Outcome {
    let p = params(1.0, 2.0, 1e-3);
    let mut ok = true;
    let mut parts = Vec::new();
    for seed in 0..3 {
        let est = agreement_probability(1000, &p, 0.5, 4000.0, None, 1, 80 + seed).unwrap();
        let (phi, density) = (est.phi.mean, est.density.mean);
        ok &= (0.475..=0.525).contains(&phi) && density <= 0.05;
        parts.push(format!("seed {seed}: phi={phi:.4} density={density:.4}"));
    }
    outcome(ok, parts.join("; "))
}

fn criterion_9() -> Outcome {
    let n = 400;
    let g = Graph::cycle(n).unwrap();
    let p = params(1.0, 2.0, 0.05);
    let mut ok = true;
    let mut parts = Vec::new();
    for (k, c2t) in [8.0f64, 16.0].into_iter().enumerate() {
        let depth = c2t / p.c2();
        let threshold = 2 * c2t.ceil() as usize + 2;
        let bound = (-c2t / 8.0).exp();
        let c = Configuration::uniform(n, Task::One);
        let mut e = GraphicalEngine::new(&g, p, c, replicate_rng(9, k as u64)).unwrap();
        e.enable_log(1 << 16);
        let (mut windows, mut exceed) = (0usize, 0usize);
        let mut t = depth;
        while windows < 10_000 {
            while e.next_event_time().is_some_and(|s| s <= t) {
                e.apply_next();
            }
            e.next_event_time();
            for x in (0..n).step_by(40) {
                let set = influence_set(&g, e.log().unwrap(), x, t, depth).unwrap();
                windows += 1;
                exceed += usize::from(set.width_at_depth() > threshold);
            }
            t += depth;
        }
        let freq = exceed as f64 / windows as f64;
        ok &= freq <= bound;
        parts.push(format!("c2T={c2t}: {exceed}/{windows} widths > {threshold} (freq {freq:.4}, bound {bound:.4})"));
    }
    outcome(ok, parts.join("; "))
}

fn criterion_10() -> Outcome {
    let n = 50;
    let g = Graph::complete(n).unwrap();
    let p = params(1.0, 2.0, 0.1);
    let horizon = 200.0;
    let phis = |graphical: bool| -> Estimate {
        let samples = (0..200)
            .map(|r| {
                let mut rng = replicate_rng(if graphical { 11 } else { 10 }, r);
                let c = InitialLaw::Bernoulli(0.5).sample(n, &mut rng).unwrap();
                let mut acc = ObservableAccumulator::new(&c);
                if graphical {
                    let mut e = GraphicalEngine::new(&g, p, c.clone(), rng).unwrap();
                    run(&mut e, Budget::Time(horizon), &mut acc).phi
                } else {
                    let mut e = GillespieEngine::new(&g, p, c.clone(), rng).unwrap();
                    run(&mut e, Budget::Time(horizon), &mut acc).phi
                }
            })
            .collect();
        Estimate::from_samples(samples)
    };
    let (a, b) = (phis(false), phis(true));
    let pooled = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
    let diff = (a.mean - b.mean).abs();
    outcome(
        diff <= 3.0 * pooled,
        format!("gillespie {:.5}, graphical {:.5}, |diff| = {diff:.5}, pooled SE = {pooled:.5}", a.mean, b.mean),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("complete graph matches the fixed point", criterion_1),
        ("exact chain against dense solve and detailed balance", criterion_2),
        ("fixed point special values and monotonicity", criterion_3),
        ("cycle residence near the checkerboards", criterion_4),
        ("exit time from the checkerboard", criterion_5),
        ("vertex process and edge dual coupling", criterion_6),
        ("annihilating walks go extinct", criterion_7),
        ("ring agreement density and balance", criterion_8),
        ("influence set width tail", criterion_9),
        ("Gillespie and graphical engines agree", criterion_10),
    ];
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let selected: Vec<usize> = args.iter().filter_map(|a| a.parse().ok()).collect();
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let k = i + 1;
        if !selected.is_empty() && !selected.contains(&k) {
            continue;
        }
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let verdict = if result.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!result.pass);
        println!("criterion {k:>2} {verdict} ({name}, {:.1}s): {}", start.elapsed().as_secs_f64(), result.detail);
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
