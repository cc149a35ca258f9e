//! Property test: serializing a valid config and parsing it back is the
//! identity (checked textually, since the TOML layout is canonical).

use proptest::prelude::*;

use qphase_cli::config::{
    parse_config, serialize_config, BackendSetting, Coupling, CutoffSetting, Mode, RunConfig,
};

fn mode_strategy() -> impl Strategy<Value = Mode> {
    prop_oneof![
        Just(Mode::SingleSweep),
        Just(Mode::SinglePoint),
        Just(Mode::Composite),
        Just(Mode::KappaSweep),
        Just(Mode::T0Sweep),
        Just(Mode::Gate),
        Just(Mode::OracleCheck),
    ]
}

fn config_strategy() -> impl Strategy<Value = RunConfig> {
    (
        mode_strategy(),
        0.0_f64..0.5,       // point epsilon
        0.1_f64..10.0,      // point omega
        (0.0_f64..0.3, 0.1_f64..5.0, 0.1_f64..5.0), // kappa, omega_a, omega_b
        0.05_f64..3.0,      // t0
        prop_oneof![Just(Coupling::None), Just(Coupling::Delta)],
        prop_oneof![Just(BackendSetting::Hill), Just(BackendSetting::Series)],
        prop_oneof![(8u32..64).prop_map(CutoffSetting::Fixed), Just(CutoffSetting::Named("auto".into()))],
        0u64..=i64::MAX as u64, // TOML integers are signed 64-bit
    )
        .prop_map(|(mode, eps, omega, (kappa, wa, wb), t0, coupling, backend, cutoff, seed)| {
            let mut cfg = RunConfig::default();
            cfg.mode = mode;
            cfg.point.epsilon = eps;
            cfg.point.omega = omega;
            cfg.composite.kappa = kappa;
            cfg.composite.omega_a = wa;
            cfg.composite.omega_b = wb;
            cfg.composite.t0 = t0;
            cfg.composite.coupling = coupling;
            cfg.numerics.backend = backend;
            cfg.numerics.cutoff = cutoff;
            cfg.seed = seed;
            cfg
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn serialize_then_parse_is_identity(cfg in config_strategy()) {
        let text = serialize_config(&cfg);
        let parsed = parse_config(&text).expect("serialized config must parse");
        prop_assert_eq!(serialize_config(&parsed), text);
    }
}
