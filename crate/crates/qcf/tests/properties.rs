//! Randomized invariants over the public API. Geometry, couplings, and
//! states are generated by proptest; every property is something the
//! library promises for all valid inputs, not just the tabulated cases.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qcf::chain::{forward_state, lp_norm, negative_norm, ChainConfig, Displacement, DualVector};
use qcf::forces::{self, reference_lennard_jones, LinearizedCoefficients, Potential};
use qcf::operators::{
    conjugate_operator, hessian_qnl, qcf_operator, z_prime_by_direct_solve, z_prime_formula,
};

/// Chain sizes with a valid interface: 1 ≤ K < N.
fn geometry() -> impl Strategy<Value = (usize, usize)> {
    (3usize..14).prop_flat_map(|n| (Just(n), 1usize..n))
}

/// Second-neighbour couplings inside the stability region A_F > 0.
fn couplings() -> impl Strategy<Value = LinearizedCoefficients> {
    (0.5f64..2.0, -0.2f64..0.0).prop_map(|(f, g)| LinearizedCoefficients::new(f, g))
}

fn random_state(c: &ChainConfig, rng: &mut impl Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..c.num_sites()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mean = raw.iter().sum::<f64>() / raw.len() as f64;
    raw.iter().map(|x| x - mean).collect()
}

proptest! {
    /// On a uniformly stretched chain every model integrates the same
    /// per-cell energy, so the three energies coincide exactly.
    #[test]
    fn energies_coincide_on_uniform_states((n, k) in geometry(), f in 0.95f64..1.2) {
        let c = ChainConfig::new(n, k, f).unwrap();
        let pot = reference_lennard_jones();
        let y = forward_state(&c);
        let ea = forces::energy_atomistic(&y, &pot, &c).unwrap();
        let el = forces::energy_qcl(&y, &pot, &c).unwrap();
        let en = forces::energy_qnl(&y, &pot, &c).unwrap();
        let scale = ea.abs().max(1.0);
        prop_assert!((ea - el).abs() <= 1e-12 * scale);
        prop_assert!((ea - en).abs() <= 1e-12 * scale);
    }

    /// Uniform states are critical points of none of the energies in
    /// general, but translation invariance still cancels every site force.
    #[test]
    fn force_fields_vanish_on_uniform_states((n, k) in geometry(), f in 0.95f64..1.2) {
        let c = ChainConfig::new(n, k, f).unwrap();
        let pot = reference_lennard_jones();
        let y = forward_state(&c);
        let scale =
            (pot.dphi(f).abs() + pot.dphi(2.0 * f).abs()) / c.epsilon();
        for field in [
            forces::forces_atomistic(&y, &pot, &c).unwrap(),
            forces::forces_qcl(&y, &pot, &c).unwrap(),
            forces::forces_qnl(&y, &pot, &c).unwrap(),
        ] {
            for v in field.values() {
                prop_assert!(v.abs() <= 1e-10 * scale.max(1.0));
            }
        }
    }

    /// The reflection-symmetric model has a genuine energy Hessian, so its
    /// bilinear form is symmetric in the two arguments.
    #[test]
    fn qnl_bilinear_form_is_symmetric((n, k) in geometry(), coeffs in couplings(), seed in 0u64..500) {
        let c = ChainConfig::new(n, k, 1.0).unwrap();
        let op = hessian_qnl(&coeffs, &c);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_state(&c, &mut rng);
        let v = random_state(&c, &mut rng);
        let uv = op.bilinear(&u, &v, &c);
        let vu = op.bilinear(&v, &u, &c);
        prop_assert!((uv - vu).abs() <= 1e-12 * uv.abs().max(1.0));
    }

    /// The projected force operator annihilates uniform shifts and lands
    /// in the zero-mean subspace, for every geometry and coupling.
    #[test]
    fn projected_operator_kills_constants_and_preserves_zero_mean(
        (n, k) in geometry(), coeffs in couplings(), seed in 0u64..500
    ) {
        let c = ChainConfig::new(n, k, 1.0).unwrap();
        let op = qcf_operator(&coeffs, &c);
        let m = c.num_sites();
        let scale = coeffs.phi_f.abs() / (c.epsilon() * c.epsilon());

        let on_constant = op.apply(&vec![1.0; m]);
        for v in &on_constant {
            prop_assert!(v.abs() <= 1e-12 * scale);
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let image = op.apply(&random_state(&c, &mut rng));
        let mean = image.iter().sum::<f64>() / m as f64;
        prop_assert!(mean.abs() <= 1e-12 * scale);
    }

    /// ⟨L u, v⟩ = ⟨E u', v'⟩: the operator acting on displacements and its
    /// conjugate acting on gradients describe the same bilinear form.
    #[test]
    fn conjugate_operator_reproduces_the_bilinear_form(
        (n, k) in geometry(), coeffs in couplings(), seed in 0u64..500
    ) {
        let c = ChainConfig::new(n, k, 1.0).unwrap();
        let op = qcf_operator(&coeffs, &c);
        let e_op = conjugate_operator(&coeffs, &c).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = Displacement::new(random_state(&c, &mut rng), &c).unwrap();
        let v = Displacement::new(random_state(&c, &mut rng), &c).unwrap();
        let lhs = op.bilinear(u.values(), v.values(), &c);
        let rhs = e_op.bilinear(&u.backward_difference(&c), &v.backward_difference(&c), &c);
        let scale = lhs.abs().max(coeffs.phi_f / c.epsilon());
        prop_assert!((lhs - rhs).abs() <= 1e-10 * scale);
    }

    /// The closed-form preconditioned gradient agrees with solving the
    /// second-difference system directly.
    #[test]
    fn gradient_formula_matches_the_direct_solve(
        (n, k) in geometry(), coeffs in couplings(), seed in 0u64..500
    ) {
        let c = ChainConfig::new(n, k, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = Displacement::new(random_state(&c, &mut rng), &c).unwrap();
        let formula = z_prime_formula(&u, &coeffs, &c).unwrap();
        let direct = z_prime_by_direct_solve(&u, &coeffs, &c).unwrap();
        let scale = direct.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        for (a, b) in formula.iter().zip(&direct) {
            prop_assert!((a - b).abs() <= 1e-10 * scale);
        }
    }

    /// Dropping to the weak norm loses at most a factor of two, in every
    /// ℓ^p flavour.
    #[test]
    fn weak_norm_sandwich_holds((n, k) in geometry(), seed in 0u64..500, p_pick in 0usize..3) {
        let c = ChainConfig::new(n, k, 1.0).unwrap();
        let p = [1.0, 2.0, f64::INFINITY][p_pick];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw = random_state(&c, &mut rng);
        let g = DualVector::new(raw.clone(), &c).unwrap();
        let plain = lp_norm(&raw, p, &c).unwrap();
        let weak = negative_norm(&g, 0, p, &c).unwrap();
        prop_assert!(weak <= plain * (1.0 + 1e-12));
        prop_assert!(plain <= 2.0 * weak * (1.0 + 1e-12));
    }
}
