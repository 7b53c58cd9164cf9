use proptest::prelude::*;

use elwave::harness::{parse_config, RunConfig, PRESETS};

fn tweaked() -> impl Strategy<Value = RunConfig> {
    (
        prop::sample::select(PRESETS.to_vec()),
        0.001..0.9f64,
        0.001..0.49f64,
        0.05..0.95f64,
        0.0..0.1f64,
        prop::option::of(0.5..50.0f64),
        prop::collection::vec(0.001..0.9f64, 1..4),
        1usize..8,
    )
        .prop_map(|(name, theta, eta, cfl, diss, t_max, thetas, workers)| {
            let mut c = RunConfig::preset(name).unwrap();
            c.data.theta = theta;
            c.data.eta = eta;
            c.evolve.cfl = cfl;
            c.evolve.dissipation = diss;
            c.evolve.t_max = t_max;
            c.sweep.thetas = thetas;
            c.workers = workers;
            c
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn text_form_round_trips(c in tweaked()) {
        let text = c.to_text();
        match c.validate() {
            Ok(()) => prop_assert_eq!(parse_config(&text).unwrap(), c),
            Err(e) => prop_assert!(parse_config(&text).is_err(), "{}", e),
        }
    }

    #[test]
    fn out_of_range_theta_is_named(theta in prop_oneof![-1.0..=0.0f64, 1.0..5.0f64]) {
        let e = parse_config(&format!("data.theta = {theta:?}")).unwrap_err().to_string();
        prop_assert!(e.contains("data.theta"), "{}", e);
    }
}

#[test]
fn hygiene_times_must_increase() {
    let e = parse_config("hygiene.conv_times = [0.2, 0.1]").unwrap_err().to_string();
    assert!(e.contains("hygiene.conv_times"), "{e}");
    assert!(parse_config("hygiene.conv_times = [0.1, 0.9]").is_err());
    assert!(parse_config("hygiene.conv_times = [0.1, 0.5]").is_ok());
}

#[test]
fn comments_and_sections_are_accepted() {
    let text = "# desk run\npreset = \"smoke\"\n\n[sweep]\netas = [0.05, 0.025] # two only\n";
    let c = parse_config(text).unwrap();
    assert_eq!(c.preset, "smoke");
    assert_eq!(c.sweep.etas, vec![0.05, 0.025]);
}
