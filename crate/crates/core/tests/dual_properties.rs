use proptest::prelude::*;

use antivoter::dual::{agreement_probability, project, simulate_dual_native, DualKind, DualState};
use antivoter::dynamics::{Configuration, InitialLaw, Params};
use antivoter::engine::{replicate_rng, Budget, GillespieEngine, Simulator};
use antivoter::graph::Graph;

#[test]
fn symmetric_jumps_without_defection() {
    let n = 200;
    let g = Graph::cycle(n).unwrap();
    let p = Params::new(1.0, 2.0, 0.0).unwrap();
    let (mut left, mut right) = (0usize, 0usize);
    for r in 0..20 {
        let mut rng = replicate_rng(31, r);
        let c = InitialLaw::Bernoulli(0.5).sample(n, &mut rng).unwrap();
        let traj =
            simulate_dual_native(&p, project(&g, &c).unwrap(), c.get(0), Budget::Time(f64::INFINITY), rng).unwrap();
        assert_eq!(traj.count(DualKind::BirthPair), 0);
        left += traj.count(DualKind::JumpLeft);
        right += traj.count(DualKind::JumpRight);
    }
    let total = (left + right) as f64;
    assert!(total >= 1e4, "{total}");
    assert!((left as f64 - right as f64).abs() <= 3.0 * (total / 4.0).sqrt(), "{left} vs {right}");
}

#[test]
fn native_dual_reproduces_gillespie_on_several_rings() {
    for (n, eps, seed) in [(10, 0.3, 1), (64, 0.01, 2), (100, 0.0, 3)] {
        let g = Graph::cycle(n).unwrap();
        let p = Params::new(1.0, 2.5, eps).unwrap();
        let c = InitialLaw::Bernoulli(0.5).sample(n, &mut replicate_rng(seed, 9)).unwrap();
        let traj = simulate_dual_native(
            &p,
            project(&g, &c).unwrap(),
            c.get(0),
            Budget::Updates(20_000),
            replicate_rng(seed, 0),
        )
        .unwrap();
        let mut e = GillespieEngine::new(&g, p, c, replicate_rng(seed, 0)).unwrap();
        for ev in &traj.events {
            let v = e.apply_next().unwrap();
            assert_eq!((v.vertex, v.time), (ev.vertex, ev.time));
        }
        assert_eq!(project(&g, e.configuration()).unwrap(), traj.final_edges);
        assert_eq!(e.configuration().get(0), traj.final_reference);
    }
}

#[test]
fn agreement_density_decreases_with_epsilon() {
    let estimates: Vec<_> = [1e-3, 1e-2, 1e-1]
        .iter()
        .map(|&eps| {
            let p = Params::new(1.0, 2.0, eps).unwrap();
            agreement_probability(400, &p, 0.5, 2000.0, None, 4, 5).unwrap().density
        })
        .collect();
    for w in estimates.windows(2) {
        assert!(
            w[1].mean - w[0].mean > 2.0 * (w[0].std_error.powi(2) + w[1].std_error.powi(2)).sqrt(),
            "{estimates:?}"
        );
    }
}

proptest! {
    #[test]
    fn dual_tracks_random_flips(
        labels in prop::collection::vec(1u8..=2, 3..40).prop_filter("even ring", |v| v.len() % 2 == 0),
        flips in prop::collection::vec(0usize..1000, 0..200),
    ) {
        let n = labels.len();
        let g = Graph::cycle(n).unwrap();
        let mut c = Configuration::from_labels(&labels).unwrap();
        let mut d = DualState::from_configuration(&g, &c).unwrap();
        for f in flips {
            let x = f % n;
            let before = d.particle_count() as i64;
            let kind = d.flip_vertex(x);
            c.toggle(x);
            prop_assert_eq!(d.particle_count() as i64 - before, kind.particle_change());
            prop_assert_eq!(d.particle_count() % 2, 0);
            prop_assert_eq!(d.edges(), &project(&g, &c).unwrap());
            prop_assert_eq!(d.task(x), c.get(x));
            prop_assert_eq!(d.reference(), c.get(0));
        }
        prop_assert_eq!(d.tasks(), c);
    }
}
