mod common;

use common::*;
use hdfa_core::{simulate, PairingModel, SpectralTable, SpectrumUnit};
use proptest::prelude::*;

fn table(values: &[f64]) -> SpectralTable {
    let wavelengths = (0..values.len())
        .map(|i| (1700.0 + 10.0 * i as f64) * NM)
        .collect();
    SpectralTable::new(SpectrumUnit::DbPerMeter, wavelengths, values.to_vec()).unwrap()
}

proptest! {
    #[test]
    fn interpolation_stays_between_neighbours(
        values in prop::collection::vec(0.0f64..100.0, 2..40),
        t in 0.0f64..1.0,
        pick in any::<prop::sample::Index>(),
    ) {
        let tab = table(&values);
        let i = pick.index(values.len() - 1);
        let w = tab.wavelengths()[i] + t * (tab.wavelengths()[i + 1] - tab.wavelengths()[i]);
        let v = tab.evaluate(w).unwrap();
        let (lo, hi) = (values[i].min(values[i + 1]), values[i].max(values[i + 1]));
        prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
    }

    #[test]
    fn interpolation_is_exact_at_nodes(values in prop::collection::vec(0.0f64..100.0, 2..40)) {
        let tab = table(&values);
        for (w, v) in tab.wavelengths().iter().zip(&values) {
            prop_assert_eq!(tab.evaluate(*w).unwrap(), *v);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn output_decreases_with_pairing(
        k in 0.0f64..0.29,
        dk in 0.005f64..0.05,
        pump_nm in 1800.0f64..1960.0,
        power in 0.3f64..2.5,
    ) {
        let cfg = nrl_config().with_pump(pump_nm * NM, power);
        let at = |k: f64| simulate(&cfg.clone().with_pairing(PairingModel::new(k).unwrap())).unwrap().signal_output();
        prop_assert!(at(k + dk) < at(k));
    }

    #[test]
    fn output_grows_with_pump_power(
        power in 0.0f64..2.4,
        dp in 0.01f64..0.1,
        k in 0.0f64..0.3,
    ) {
        let cfg = nrl_config().with_pairing(PairingModel::new(k).unwrap());
        let at = |p: f64| simulate(&cfg.clone().with_pump(1860.0 * NM, p)).unwrap().signal_output();
        prop_assert!(at(power + dp) >= at(power));
    }
}
