use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use proptest::prelude::*;
use thetanull::census::{moduli_betti, nerve_e1, poincare_polynomial, supported_degrees, Degeneration, NerveInput};
use thetanull::charalg::{direct_sum, enumerate, split, Characteristic, Parity};
use thetanull::siegel::{act, block_sum, random_word, sample_generic, PeriodMatrix, SymplecticMatrix};
use thetanull::thetanum::{eval_theta, eval_theta_at_radius, eval_thetanull, heat_residual, product_bound, ThetaConfig};

fn characteristic(genus: usize) -> impl Strategy<Value = Characteristic> {
    (prop::collection::vec(any::<bool>(), genus), prop::collection::vec(any::<bool>(), genus))
        .prop_map(|(t, b)| Characteristic::from_bits(&t, &b).unwrap())
}

fn any_characteristic() -> impl Strategy<Value = Characteristic> {
    (1usize..=3).prop_flat_map(characteristic)
}

fn z_vector(genus: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-0.5f64..0.5, -0.5f64..0.5), genus)
        .prop_map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
}

fn max_entry_diff(a: &PeriodMatrix, b: &PeriodMatrix) -> f64 {
    (a.entries() - b.entries()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #[test]
    fn parity_of_direct_sum_is_xor(a in any_characteristic(), b in any_characteristic()) {
        let sum = direct_sum(&[a, b]).unwrap();
        prop_assert_eq!(sum.parity(), a.parity() ^ b.parity());
        prop_assert_eq!(split(&sum, &[a.genus(), b.genus()]).unwrap(), vec![a, b]);
    }

    #[test]
    fn text_and_json_forms_round_trip(d in any_characteristic()) {
        let text = d.to_string();
        prop_assert_eq!(text.parse::<Characteristic>().unwrap(), d);
        let json = serde_json::to_string(&d).unwrap();
        prop_assert_eq!(serde_json::from_str::<Characteristic>(&json).unwrap(), d);
    }

    #[test]
    fn period_matrix_json_round_trips(g in 1usize..=4, seed in any::<u64>()) {
        let omega = sample_generic(g, seed);
        let json = serde_json::to_string(&omega).unwrap();
        prop_assert_eq!(serde_json::from_str::<PeriodMatrix>(&json).unwrap(), omega);
    }

    #[test]
    fn betti_number_closed_form(g in 2u32..=8) {
        let closed = i64::from(g * (2 * g + 1)) - 1;
        prop_assert_eq!(moduli_betti(g).unwrap(), BigInt::from(closed));
        // P(1) = ∏_{j=2}^{2g} (j + 1) = (2g + 1)! / 2
        let at_one: BigInt = poincare_polynomial(g).unwrap().iter().sum();
        let want: BigInt = (3..=(2 * g + 1)).map(BigInt::from).product();
        prop_assert_eq!(at_one, want);
    }

    #[test]
    fn nerve_entries_come_from_cells(
        levels in prop::collection::vec(prop::collection::vec(0usize..12, 0..4), 0..4)
    ) {
        let input = NerveInput { ambient_dim: 12, levels: levels.clone() };
        let table = nerve_e1(&input);
        for (s, t) in table.positions() {
            prop_assert!(levels[s].contains(&t));
        }
        for (s, dims) in levels.iter().enumerate() {
            for &t in dims {
                prop_assert!(table.positions().contains(&(s, t)));
            }
        }
        let support = supported_degrees(&table);
        let degrees: BTreeSet<usize> = table.positions().iter().map(|(s, t)| s + t).collect();
        prop_assert_eq!(&support.degrees, &degrees);
        if support.degeneration == Degeneration::Automatic {
            prop_assert_eq!(degrees.len(), table.positions().len());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn odd_thetanulls_vanish(g in 1usize..=3, seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let omega = sample_generic(g, seed);
        let odd = enumerate(g, Some(Parity::Odd)).unwrap();
        let d = odd[pick.index(odd.len())];
        let v = eval_thetanull(&d, &omega, &ThetaConfig::default()).unwrap();
        prop_assert!(v.value.norm() <= v.tail_bound, "{} > {}", v.value.norm(), v.tail_bound);
    }

    #[test]
    fn theta_has_the_parity_of_its_characteristic(
        (d, z) in (1usize..=3).prop_flat_map(|g| (characteristic(g), z_vector(g))),
        seed in any::<u64>(),
    ) {
        let omega = sample_generic(d.genus(), seed);
        let cfg = ThetaConfig::default();
        let plus = eval_theta(&d, &omega, &z, &cfg).unwrap();
        let neg: Vec<Complex64> = z.iter().map(|w| -w).collect();
        let minus = eval_theta(&d, &omega, &neg, &cfg).unwrap();
        let sign = if d.is_even() { 1.0 } else { -1.0 };
        prop_assert!((minus.value - sign * plus.value).norm() <= plus.tail_bound + minus.tail_bound);
    }

    #[test]
    fn block_factorization(
        (d, sizes) in prop_oneof![Just(vec![1usize, 1]), Just(vec![2, 1]), Just(vec![1, 2]), Just(vec![1, 1, 1])]
            .prop_flat_map(|sizes| (characteristic(sizes.iter().sum()), Just(sizes))),
        seed in any::<u64>(),
    ) {
        let cfg = ThetaConfig::default();
        let parts: Vec<PeriodMatrix> = sizes.iter().enumerate()
            .map(|(i, &n)| sample_generic(n, seed.wrapping_add(i as u64)))
            .collect();
        let omega = block_sum(&parts).unwrap();
        let full = eval_thetanull(&d, &omega, &cfg).unwrap();
        let factors: Vec<_> = split(&d, &sizes).unwrap().iter().zip(&parts)
            .map(|(di, p)| eval_thetanull(di, p, &cfg).unwrap())
            .collect();
        let product: Complex64 = factors.iter().map(|v| v.value).product();
        prop_assert!((full.value - product).norm() <= full.tail_bound + product_bound(&factors));
    }

    #[test]
    fn integer_translation_gives_sign(
        (d, z, j) in (1usize..=3).prop_flat_map(|g| (characteristic(g), z_vector(g), 0..g)),
        seed in any::<u64>(),
    ) {
        let omega = sample_generic(d.genus(), seed);
        let cfg = ThetaConfig::default();
        let base = eval_theta(&d, &omega, &z, &cfg).unwrap();
        let mut moved = z.clone();
        moved[j] += 1.0;
        let shifted = eval_theta(&d, &omega, &moved, &cfg).unwrap();
        // exp(2πi δ′_j)
        let sign = if d.top_bit(j) { -1.0 } else { 1.0 };
        prop_assert!((shifted.value - sign * base.value).norm() <= base.tail_bound + shifted.tail_bound);
    }

    #[test]
    fn lattice_translation_gives_automorphy_factor(
        (d, z, j) in (1usize..=3).prop_flat_map(|g| (characteristic(g), z_vector(g), 0..g)),
        seed in any::<u64>(),
    ) {
        let omega = sample_generic(d.genus(), seed);
        let g = d.genus();
        // |ϑ| grows like exp(π Y_jj) after the shift; 1e-10 absolute is below
        // the rounding floor there
        let cfg = ThetaConfig::with_tol(1e-6);
        let base = eval_theta(&d, &omega, &z, &cfg).unwrap();
        let moved: Vec<Complex64> = (0..g).map(|i| z[i] + omega.get(i, j)).collect();
        let shifted = eval_theta(&d, &omega, &moved, &cfg).unwrap();
        let i_pi = Complex64::new(0.0, PI);
        let factor = (-i_pi * (omega.get(j, j) + 2.0 * (z[j] + d.bottom_values()[j]))).exp();
        let err = (shifted.value - factor * base.value).norm();
        prop_assert!(err <= shifted.tail_bound + factor.norm() * base.tail_bound, "err {err:e}");
    }

    #[test]
    fn doubling_radius_stays_within_tail_bound(
        (d, z) in (1usize..=3).prop_flat_map(|g| (characteristic(g), z_vector(g))),
        seed in any::<u64>(),
        tol in prop_oneof![Just(1e-3), Just(1e-6), Just(1e-10)],
    ) {
        let omega = sample_generic(d.genus(), seed);
        let cfg = ThetaConfig::with_tol(tol);
        let v = eval_theta(&d, &omega, &z, &cfg).unwrap();
        prop_assert!(v.tail_bound <= tol);
        let wide = eval_theta_at_radius(&d, &omega, &z, 2.0 * v.radius, &cfg).unwrap();
        prop_assert!((v.value - wide.value).norm() < v.tail_bound);
    }

    #[test]
    fn heat_equation_holds(
        (d, j, k) in (1usize..=2).prop_flat_map(|g| (characteristic(g), 0..g, 0..g)),
        seed in any::<u64>(),
    ) {
        let omega = sample_generic(d.genus(), seed);
        let r = heat_residual(&d, &omega, j, k, &ThetaConfig::default(), 1e-5).unwrap();
        prop_assert!(r.relative() < 1e-4, "relative residual {:e}", r.relative());
    }

    #[test]
    fn action_is_a_left_action(g in 1usize..=3, a in 0usize..5, b in 0usize..5, seed in any::<u64>()) {
        let omega = sample_generic(g, seed);
        let m1 = random_word(g, a, seed ^ 1).unwrap();
        let m2 = random_word(g, b, seed ^ 2).unwrap();
        prop_assert!(m1.is_symplectic().unwrap() && m2.is_symplectic().unwrap());
        let product = m1.checked_mul(&m2).unwrap();
        prop_assert!(product.is_symplectic().unwrap());
        let once = act(&product, &omega).unwrap();
        let twice = act(&m1, &act(&m2, &omega).unwrap()).unwrap();
        let scale = once.entries().iter().map(|z| z.norm()).fold(1.0, f64::max);
        prop_assert!(max_entry_diff(&once, &twice) <= 1e-8 * scale);
        let minus = act(&SymplecticMatrix::identity(g).negated(), &omega).unwrap();
        prop_assert!(max_entry_diff(&minus, &omega) <= 1e-12);
    }
}
