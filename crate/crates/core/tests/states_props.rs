mod common;

use proptest::prelude::*;

use common::dims;
use sepcheck_core::states::{
    isotropic, max_mixed, random_rational_separable, validate, werner, RandomSeparableSpec,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generators_produce_valid_states(
        seed: u64,
        p in 0.0f64..=1.0,
        n in 2usize..4,
        m in 2usize..4,
        count in 1usize..5,
        max_den in 1u64..5,
    ) {
        let outputs = [
            isotropic(p, n).unwrap(),
            werner(p, n).unwrap(),
            max_mixed(dims(n, m)),
            random_rational_separable(&RandomSeparableSpec {
                seed,
                count,
                dims: dims(n, m),
                max_denominator: max_den,
            })
            .unwrap(),
        ];
        for s in outputs {
            prop_assert!(validate(s.matrix(), s.dims()).is_ok());
        }
    }

    #[test]
    fn isotropic_is_linear_in_p(p in 0.0f64..=1.0, n in 2usize..4) {
        let lo = isotropic(0.0, n).unwrap();
        let hi = isotropic(1.0, n).unwrap();
        let want = &lo.matrix().scale(1.0 - p) + &hi.matrix().scale(p);
        prop_assert!(isotropic(p, n).unwrap().matrix().approx_eq(&want, 1e-14));
    }
}
