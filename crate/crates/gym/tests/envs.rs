use proptest::prelude::*;
use qmon_gym::envs::taxi::PICK_UP;
use qmon_gym::envs::{build_env, CliffWalking, EnvName, FrozenLake, LabelledMdp, Taxi};
use qmon_gym::grid::{manhattan, GridMap};

fn all_envs() -> Vec<Box<dyn LabelledMdp>> {
    EnvName::ALL.iter().map(|&e| build_env(e, 3, 100)).collect()
}

/// Play `actions` (taken modulo the action count), restarting after each
/// episode end, and hand every label vector to `check`.
fn play(env: &mut dyn LabelledMdp, actions: &[usize], mut check: impl FnMut(&[f64], &[f64])) {
    let n = env.atoms().len();
    let (mut c, mut q) = (vec![f64::NAN; n], vec![f64::NAN; n]);
    env.reset();
    env.labels(&mut c, &mut q);
    check(&c, &q);
    for &a in actions {
        let t = env.step(a % env.num_actions());
        assert!(t.state < env.num_states());
        env.labels(&mut c, &mut q);
        check(&c, &q);
        if t.done() {
            let tc = env.task_completion().unwrap();
            assert!((0.0..=1.0).contains(&tc));
            env.reset();
        }
    }
}

proptest! {
    #[test]
    fn labels_cover_atoms_and_stay_in_range(actions in prop::collection::vec(0usize..6, 0..300)) {
        for mut env in all_envs() {
            play(env.as_mut(), &actions, |c, q| {
                assert!(c.iter().all(|&v| v == 0.0 || v == 1.0), "{c:?}");
                assert!(q.iter().all(|v| (0.0..=1.0).contains(v)), "{q:?}");
            });
        }
    }

    #[test]
    fn same_seed_same_episodes(seed in any::<u64>(), actions in prop::collection::vec(0usize..6, 0..200)) {
        let mut a = Taxi::new(seed, 100);
        let mut b = Taxi::new(seed, 100);
        let (mut la, mut lb) = (Vec::new(), Vec::new());
        play(&mut a, &actions, |c, _| la.push(c.to_vec()));
        play(&mut b, &actions, |c, _| lb.push(c.to_vec()));
        prop_assert_eq!(la, lb);
    }

    #[test]
    fn bfs_symmetric_and_above_manhattan(a in 0usize..48, b in 0usize..48) {
        let m = GridMap::parse(include_str!("../maps/cliff_walking.txt")).unwrap();
        let (p, q) = (m.cell(a), m.cell(b));
        prop_assume!(m.get(p) != 'C' && m.get(q) != 'C');
        let open = |c| m.get(c) != 'C';
        let ab = m.bfs_distance(p, q, open).unwrap();
        let ba = m.bfs_distance(q, p, open).unwrap();
        prop_assert_eq!(ab, ba);
        if let Some(d) = ab {
            prop_assert!(d >= manhattan(p, q));
        }
    }
}

#[test]
fn frozen_lake_completion_grows_toward_goal() {
    let env = FrozenLake::new(100);
    let m = env.map().clone();
    let goal = m.find('G').unwrap();
    let field = m.bfs_field(goal, |c| m.get(c) != 'H').unwrap();
    for p in m.cells().filter(|&p| m.get(p) != 'H') {
        for q in m.cells().filter(|&q| m.get(q) != 'H') {
            let (dp, dq) = (field[m.index(p)].unwrap(), field[m.index(q)].unwrap());
            if dp < dq {
                assert!(env.completion_at(p) > env.completion_at(q));
            }
        }
    }
    assert_eq!(env.max_distance(), 6);
}

#[test]
fn cliff_walking_reward_constants() {
    assert_eq!(build_env(EnvName::CliffWalking, 0, 100).num_states(), 48);
    let mut env = CliffWalking::new(100);
    env.reset();
    assert_eq!(env.step(0).reward, -1.0);
    assert_eq!(env.step(2).reward, -1.0);
    assert_eq!(env.step(1).reward, -100.0);
}

/// Floyd-Warshall over the taxi map's movement graph, read straight from
/// the ASCII asset.
fn taxi_all_pairs() -> Vec<Vec<usize>> {
    let rows: Vec<Vec<char>> = include_str!("../maps/taxi.txt")
        .split("---\n")
        .nth(1)
        .unwrap()
        .lines()
        .map(|l| l.chars().collect())
        .collect();
    let n = 25;
    let inf = usize::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for r in 0..5 {
        for c in 0..5 {
            let i = r * 5 + c;
            d[i][i] = 0;
            if r + 1 < 5 {
                d[i][i + 5] = 1;
                d[i + 5][i] = 1;
            }
            if c + 1 < 5 && rows[r + 1][2 * c + 2] == ':' {
                d[i][i + 1] = 1;
                d[i + 1][i] = 1;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                d[i][j] = d[i][j].min(d[i][k] + d[k][j]);
            }
        }
    }
    d
}

/// Freeze the taxi in place with an illegal pick-up on a one-step horizon
/// and read the completion.
fn completion_after_noop(taxi: (usize, usize), passenger: usize, destination: usize) -> f64 {
    let mut env = Taxi::new(0, 1);
    env.reset();
    env.set_state(taxi, passenger, destination);
    let t = env.step(PICK_UP);
    assert!(t.truncated && !t.terminated);
    env.task_completion().unwrap()
}

#[test]
fn taxi_completion_two_halves() {
    let d = taxi_all_pairs();
    let max = d.iter().flatten().copied().max().unwrap();
    assert_eq!(Taxi::new(0, 100).max_distance(), max);
    let m = max as f64;
    // Passenger aboard, heading for G at (0, 4).
    for (i, row) in d.iter().enumerate() {
        let got = completion_after_noop((i / 5, i % 5), 4, 1);
        let want = 0.5 + 0.5 * (1.0 - row[4] as f64 / m);
        assert!((got - want).abs() < 1e-12, "cell {i}");
    }
    // Passenger waiting at Y (4, 0); the taxi is elsewhere so pick-up fails.
    for i in (0..25).filter(|&i| i != 20) {
        let got = completion_after_noop((i / 5, i % 5), 2, 1);
        let want = 0.5 * (1.0 - d[i][20] as f64 / m);
        assert!((got - want).abs() < 1e-12, "cell {i}");
    }
}
