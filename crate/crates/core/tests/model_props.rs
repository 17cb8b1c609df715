use proptest::prelude::*;
use trendfair::model::{
    dictator_utility, loss_branch, relative_motivation, trend_gain_loss, upper_branch, AgentParams, EconomyState,
};

fn agent_strategy() -> impl Strategy<Value = AgentParams> {
    (0.01f64..10.0, 0.0f64..5.0, 0.0f64..0.99).prop_map(|(a, b, eta)| AgentParams::new(a, b, eta).unwrap())
}

fn econ_strategy() -> impl Strategy<Value = EconomyState> {
    (1.0f64..30.0, 1.0f64..30.0, -1.0f64..1.0, -1.0f64..1.0, 1.0f64..20.0).prop_map(|(w_i, w_j, fi, fj, t)| {
        EconomyState::new(w_i, w_j, fi * w_i, fj * w_j, t).unwrap()
    })
}

fn total(agent: &AgentParams, econ: &EconomyState, s: f64) -> f64 {
    dictator_utility(agent, econ, s).unwrap().total
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn branches_meet_at_the_kink(agent in agent_strategy(), econ in econ_strategy(), kink in 0.0f64..=1.0) {
        // Place the dictator's trend so that the kink falls inside [0, 1].
        let econ = econ.with_trends(-kink * econ.t_pot(), econ.d_j());
        let kink = econ.kink_share();
        let up = upper_branch(&agent, &econ, kink);
        let down = loss_branch(&agent, &econ, kink);
        let scale = up.abs().max(down.abs()).max(1.0);
        prop_assert!((up - down).abs() <= 1e-12 * scale, "upper {up} loss {down}");
        let u = total(&agent, &econ, kink.clamp(0.0, 1.0));
        prop_assert!((u - up).abs() <= 1e-12 * scale);
    }

    #[test]
    fn utility_is_concave_in_the_share(agent in agent_strategy(), econ in econ_strategy(), n in 10usize..400) {
        let h = 1.0 / n as f64;
        let u: Vec<f64> = (0..=n).map(|k| total(&agent, &econ, (k as f64 * h).min(1.0))).collect();
        for w in u.windows(3) {
            prop_assert!(w[0] - 2.0 * w[1] + w[2] <= 1e-9, "second difference {}", w[0] - 2.0 * w[1] + w[2]);
        }
    }

    #[test]
    fn selfish_utility_increases_in_the_share(eta in 0.0f64..0.99, econ in econ_strategy(), s1 in 0.0f64..1.0, s2 in 0.0f64..1.0) {
        prop_assume!(s1 < s2);
        let agent = AgentParams::selfish(eta).unwrap();
        prop_assert!(total(&agent, &econ, s1) < total(&agent, &econ, s2));
    }

    #[test]
    fn gain_loss_is_nondecreasing(eta in 0.0f64..0.99, t1 in -50.0f64..50.0, t2 in -50.0f64..50.0) {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        prop_assert!(trend_gain_loss(lo, eta).unwrap() <= trend_gain_loss(hi, eta).unwrap());
    }

    #[test]
    fn inequality_penalty_vanishes_only_at_equality(x0 in -50.0f64..50.0, dx in -50.0f64..50.0) {
        prop_assert_eq!(relative_motivation(x0, x0), 0.0);
        if dx != 0.0 {
            prop_assert!(relative_motivation(x0 + dx, x0) > 0.0);
        }
    }

    #[test]
    fn symmetric_economy_has_equal_gaps(agent in agent_strategy(), w in 1.0f64..30.0, f in -1.0f64..1.0, t in 1.0f64..20.0, s in 0.0f64..=1.0) {
        let econ = EconomyState::new(w, w, f * w, f * w, t).unwrap();
        let b = dictator_utility(&agent, &econ, s).unwrap();
        let expected = -agent.b() * (0.5 * (2.0 * s * t - t)).powi(2);
        prop_assert!((b.income_ineq - b.trend_ineq).abs() <= 1e-9);
        prop_assert!((b.income_ineq - expected).abs() <= 1e-9);
    }
}

#[test]
fn no_trends_at_half_share_is_benchmark_form() {
    let agent = AgentParams::new(2.0, 0.5, 0.8).unwrap();
    let econ = EconomyState::new(10.0, 5.0, 0.0, 0.0, 9.0).unwrap();
    let b = dictator_utility(&agent, &econ, 0.5).unwrap();
    assert_eq!(b.trend_loss, 0.0);
    let y_i: f64 = 14.5;
    let y_j: f64 = 9.5;
    let expected = 2.0 * y_i - 0.5 * (0.5 * (y_i - y_j)).powi(2);
    assert!((b.total - expected).abs() < 1e-12);
}

#[test]
fn out_of_range_share_is_rejected() {
    let agent = AgentParams::new(2.0, 0.5, 0.8).unwrap();
    let econ = EconomyState::new(10.0, 5.0, 0.0, 0.0, 9.0).unwrap();
    assert!(dictator_utility(&agent, &econ, -0.01).is_err());
    assert!(dictator_utility(&agent, &econ, 1.01).is_err());
    assert!(dictator_utility(&agent, &econ, f64::NAN).is_err());
}
