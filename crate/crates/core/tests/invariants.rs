//! Property-based invariants of the symmetric functions, the quermassintegrals
//! and the conformal change of variables.

use hypflow_core::conformal::{ball_radius, conformal_exponent, hyperbolic_radius};
use hypflow_core::hyperbolic;
use hypflow_core::hypersurface::{
    ball_profile, ball_profile_inverse, generate_shape, geometry_fields, quermassintegrals, recenter, ShapeKind,
};
use hypflow_core::stability::deficit_from_quermass;
use hypflow_core::symfunc::{binomial, esym_all, esym_grad, quotient_slice};
use hypflow_core::{CurvatureSpectrum, SphereGrid};
use proptest::prelude::*;

fn spectrum(max_n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1.0f64..8.0, 2..=max_n)
}

/// `σ_k` by the generating polynomial `∏ (1 + κ_i t)`.
fn sigma_by_expansion(kappa: &[f64]) -> Vec<f64> {
    let mut c = vec![1.0];
    for &k in kappa {
        let mut next = vec![0.0; c.len() + 1];
        for (i, ci) in c.iter().enumerate() {
            next[i] += ci;
            next[i + 1] += ci * k;
        }
        c = next;
    }
    c
}

proptest! {
    #[test]
    fn esym_matches_the_generating_polynomial(kappa in spectrum(6)) {
        let n = kappa.len();
        let mut e = [0.0; 8];
        esym_all(&kappa, &mut e);
        for (k, s) in sigma_by_expansion(&kappa).iter().enumerate() {
            let want = s / binomial(n, k);
            prop_assert!((e[k] - want).abs() <= 1e-12 * want.abs().max(1.0), "E_{}: {} vs {}", k, e[k], want);
        }
    }

    #[test]
    fn euler_identity_for_the_quotient(kappa in spectrum(6), m in 1usize..5) {
        let n = kappa.len();
        prop_assume!(m < n);
        let mut grad = vec![0.0; n];
        let f = quotient_slice(&kappa, m, Some(&mut grad)).unwrap();
        // F is homogeneous of degree one
        let euler: f64 = grad.iter().zip(&kappa).map(|(g, k)| g * k).sum();
        prop_assert!((euler - f).abs() <= 1e-12 * f);
        prop_assert!(grad.iter().all(|g| *g > 0.0));
    }

    #[test]
    fn esym_gradient_matches_finite_differences(kappa in spectrum(5), k in 1usize..5) {
        let n = kappa.len();
        prop_assume!(k <= n);
        let spec = CurvatureSpectrum::new(kappa.clone()).unwrap();
        let grad = esym_grad(k, &spec).unwrap();
        let h = 1e-6;
        let mut e = [0.0; 8];
        for i in 0..n {
            let mut p = kappa.clone();
            p[i] += h;
            esym_all(&p, &mut e);
            let up = e[k];
            p[i] -= 2.0 * h;
            esym_all(&p, &mut e);
            let fd = (up - e[k]) / (2.0 * h);
            prop_assert!((fd - grad[i]).abs() <= 1e-6 * grad[i].abs().max(1.0));
        }
    }

    #[test]
    fn conformal_radius_round_trip(r in 0.0f64..2.0) {
        let s = ball_radius(r);
        prop_assert!(s < 2.0);
        prop_assert!((hyperbolic_radius(s) - r).abs() <= 1e-14 * r.max(1.0));
        // e^φ ds = dr, so φ = log(dr/ds)
        let ds_dr = 1.0 / (0.5 * r).cosh().powi(2);
        prop_assert!((conformal_exponent(s).exp() * ds_dr - 1.0).abs() <= 1e-13);
    }

    #[test]
    fn ball_profiles_invert(n in 2usize..6, k in 0usize..6, r in 0.05f64..3.0) {
        prop_assume!(k <= n);
        let w = ball_profile(n, k, r);
        let back = ball_profile_inverse(n, k, w).unwrap();
        prop_assert!((back - r).abs() <= 1e-10 * r.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Quermassintegrals are invariant under isometries: moving the origin
    /// inside an offset sphere leaves its quermassintegrals unchanged.
    #[test]
    fn quermassintegrals_are_isometry_invariant(r0 in 0.6f64..1.6, frac in 0.0f64..0.4, shift in -0.2f64..0.2) {
        let a = frac * r0;
        let grid = SphereGrid::axisymmetric(3, 96).unwrap();
        let g = generate_shape(&ShapeKind::OffsetSphere { r0, a }, &grid).unwrap();
        let w = quermassintegrals(&g, &geometry_fields(&g).unwrap()).unwrap();
        // move the origin along the symmetry axis by `shift` towards the centre
        let c = hyperbolic::from_polar(shift.abs(), [0.0, 0.0, shift.signum()]);
        let moved = recenter(&g, &c).unwrap();
        let w2 = quermassintegrals(&moved, &geometry_fields(&moved).unwrap()).unwrap();
        for k in 0..=3 {
            let exact = ball_profile(3, k, r0);
            prop_assert!((w[k] - exact).abs() <= 1e-6 * exact, "W{}: {} vs {}", k, w[k], exact);
            prop_assert!((w2[k] - exact).abs() <= 1e-6 * exact, "moved W{}: {} vs {}", k, w2[k], exact);
        }
    }

    #[test]
    fn deficit_is_nonnegative_on_perturbed_spheres(
        r0 in 0.7f64..1.5,
        amp in -0.04f64..0.04,
        l in 2u32..4,
        order in 0u32..4,
        m in 0usize..2,
    ) {
        prop_assume!(order <= l);
        let grid = SphereGrid::full(48).unwrap();
        let Ok(g) = generate_shape(&ShapeKind::PerturbedSphere { r0, eps: amp, l, order }, &grid) else {
            return Err(TestCaseError::reject("not h-convex"));
        };
        let w = quermassintegrals(&g, &geometry_fields(&g).unwrap()).unwrap();
        let d = deficit_from_quermass(&w, m).unwrap();
        prop_assert!(d.raw >= -1e-6 * w[m + 1], "deficit {} for m = {}", d.raw, m);
    }
}
