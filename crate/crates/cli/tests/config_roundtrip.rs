use std::path::Path;

use proptest::prelude::*;
use thermovisc::config::{to_toml, CouplingKind, LinearKind, ThermalKind, YieldShape};
use thermovisc::parse_str;

const BASE: &str = r#"
[material]
mu = 1.0
lambda = 1.0

[mesh]
extent = [1.0, 1.0, 1.0]
resolution = [2, 2, 2]
"#;

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn serialized_config_parses_back_equal(
        mu in 0.1f64..10.0,
        lambda in 0.0f64..10.0,
        r in 1.1f64..4.0,
        k in prop_oneof![Just(f64::INFINITY), 0.5f64..100.0],
        alpha in 0.51f64..0.83,
        d in 0.1f64..5.0,
        constant_yield in any::<bool>(),
        zero_f in any::<bool>(),
        res in prop::array::uniform3(1usize..6),
        dt in 0.01f64..0.5,
        fixed_point in any::<bool>(),
        direct in any::<bool>(),
        stride in 1usize..5,
        amp in -3.0f64..3.0,
        lifting in any::<bool>(),
    ) {
        let mut cfg = parse_str(BASE, Path::new(".")).unwrap();
        cfg.material.mu = mu;
        cfg.material.lambda = lambda;
        cfg.material.r_exp = r;
        cfg.material.k = k;
        cfg.material.thermal_stress.alpha = alpha;
        cfg.material.thermal_stress.kind = if zero_f { ThermalKind::Zero } else { ThermalKind::Power };
        cfg.material.yield_fn.d = d;
        cfg.material.yield_fn.kind = if constant_yield { YieldShape::Constant } else { YieldShape::SmoothClamp };
        cfg.mesh.resolution = Some(res);
        cfg.solver.dt = dt;
        cfg.solver.outer_coupling = if fixed_point { CouplingKind::FixedPoint } else { CouplingKind::Staggered };
        cfg.solver.linear_solver = if direct { LinearKind::Direct } else { LinearKind::ConjugateGradient };
        cfg.output.snapshot_stride = stride;
        cfg.data.g_d = Some([format!("{amp}*t*x2"), "0".into(), "sin(pi*x1)*t^2".into()]);
        cfg.data.theta0 = Some(format!("{amp}*x1*x3"));
        cfg.data.lifting = lifting;
        cfg.diagnostics.audit_level = Some(d + 1.0);
        cfg.validate().unwrap();
        let back = parse_str(&to_toml(&cfg), Path::new(".")).unwrap();
        prop_assert_eq!(back, cfg);
    }
}
