use patchwind::config::{FieldMode, InitialShape, SimConfig};
use proptest::prelude::*;

fn shape() -> impl Strategy<Value = InitialShape> {
    prop_oneof![
        (0.1f64..5.0).prop_map(|radius| InitialShape::Disk { radius }),
        (0.1f64..5.0, 0.1f64..5.0).prop_map(|(a, b)| InitialShape::Ellipse { a, b }),
        (2u32..12, -0.49f64..0.49).prop_map(|(mode, amplitude)| InitialShape::Perturbed { mode, amplitude }),
    ]
}

fn config() -> impl Strategy<Value = SimConfig> {
    (
        shape(),
        8usize..100_000,
        1usize..100_000,
        1e-6f64..1.0,
        0.0f64..1e3,
        any::<u64>(),
        prop::bool::ANY,
        prop::option::of(0.0f64..0.99),
        "[a-z][a-z0-9_/]{0,20}",
        (prop::option::of(1e-5f64..1e-2), 1e-12f64..1e-6, 1usize..5000),
    )
        .prop_map(|(shape, nodes, tracers, dt, t_end, seed, exact, eps, dir, (h_min, rho_min, probes))| SimConfig {
            initial_shape: shape,
            nodes,
            tracers,
            dt,
            t_end,
            seed,
            field_mode: if exact { FieldMode::ExactDisk } else { FieldMode::Contour },
            epsilon_override: eps,
            output_dir: dir.into(),
            h_min,
            h_max: h_min.map(|h| 3.0 * h),
            rho_min,
            probes,
            ..SimConfig::default()
        })
}

proptest! {
    #[test]
    fn serialize_parse_round_trip(cfg in config()) {
        let text = cfg.to_text();
        let back = SimConfig::parse(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.to_text(), text);
    }
}

#[test]
fn shipped_configs_parse() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "cfg") {
            SimConfig::from_file(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 3);
}
