use nalgebra::DMatrix;
use proptest::prelude::*;

use quadconc_core::bernstein::{check_bernstein, minimal_k, DEFAULT_P_MAX};
use quadconc_core::bounds::{
    bernstein_deviation, bernstein_tail, chernoff_machinery, eta, hanson_wright_tail, inverse_rate,
    lambda_admissible, rate_function, ChernoffRegime,
};
use quadconc_core::linalg::{
    hs_norm, offdiag_gram, op_norm, scaled_norm_stats, strip_diagonal, OP_NORM_TOL,
};
use quadconc_core::{BoundInputs, DistributionSpec, SigmaDiag, SquareMatrix};

fn matrix() -> impl Strategy<Value = SquareMatrix> {
    (1usize..9).prop_flat_map(|n| {
        prop::collection::vec(-5.0f64..5.0, n * n)
            .prop_map(move |e| SquareMatrix::new(n, e).unwrap())
    })
}

fn matrix_with_sigmas() -> impl Strategy<Value = (SquareMatrix, SigmaDiag)> {
    (1usize..9).prop_flat_map(|n| {
        (
            prop::collection::vec(-5.0f64..5.0, n * n),
            prop::collection::vec(0.05f64..2.0, n),
        )
            .prop_map(move |(e, s)| (SquareMatrix::new(n, e).unwrap(), SigmaDiag::new(s).unwrap()))
    })
}

fn inputs() -> impl Strategy<Value = BoundInputs> {
    (matrix_with_sigmas(), 0.2f64..3.0).prop_filter_map("nonzero norms", |((a, s), k)| {
        let norms = scaled_norm_stats(&a, &s, OP_NORM_TOL).ok()?;
        (norms.op > 1e-6 && norms.hs_right_scaled > 1e-6)
            .then(|| BoundInputs::new(norms, k, 1.0).unwrap())
    })
}

fn largest_singular_value(a: &SquareMatrix) -> f64 {
    DMatrix::from_row_slice(a.n(), a.n(), a.entries())
        .singular_values()
        .max()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn op_norm_matches_svd(a in matrix()) {
        let ours = op_norm(&a, OP_NORM_TOL).unwrap();
        let svd = largest_singular_value(&a);
        prop_assert!((ours - svd).abs() <= 1e-7 * svd.max(1e-300), "{ours} vs {svd}");
    }

    #[test]
    fn op_norm_below_hs_norm(a in matrix()) {
        prop_assert!(op_norm(&a, OP_NORM_TOL).unwrap() <= hs_norm(&a) * (1.0 + 1e-12));
    }

    #[test]
    fn stripping_diagonal_at_most_doubles_op_norm(a in matrix()) {
        let op = op_norm(&a, OP_NORM_TOL).unwrap();
        let op0 = op_norm(&strip_diagonal(&a), OP_NORM_TOL).unwrap();
        prop_assert!(op0 <= 2.0 * op * (1.0 + 1e-8));
    }

    #[test]
    fn gram_diagonal_bounded_by_op_norm_squared(a in matrix()) {
        let op = op_norm(&a, OP_NORM_TOL).unwrap();
        let (_, b_diag) = offdiag_gram(&a);
        for (i, b) in b_diag.iter().enumerate() {
            let direct: f64 = (0..a.n()).filter(|&j| j != i).map(|j| a.get(j, i).powi(2)).sum();
            prop_assert!((b - direct).abs() <= 1e-12 * direct.max(1.0));
            prop_assert!(*b >= 0.0 && *b <= op * op * (1.0 + 1e-8));
        }
    }

    #[test]
    fn gram_vector_inequality(a in matrix(), seed in prop::collection::vec(-3.0f64..3.0, 8)) {
        let n = a.n();
        let v = &seed[..n];
        let op = op_norm(&a, OP_NORM_TOL).unwrap();
        let a0 = strip_diagonal(&a);
        let (b, b_diag) = offdiag_gram(&a);
        let b0v = strip_diagonal(&b).matvec(v);
        let a0v = a0.matvec(v);
        let lhs = dot(&b0v, &b0v);
        let weighted: f64 = b_diag.iter().zip(v).map(|(b, x)| b * x * x).sum();
        let rhs = 8.0 * op * op * dot(&a0v, &a0v) + 2.0 * op * op * weighted;
        prop_assert!(lhs <= rhs * (1.0 + 1e-8) + 1e-12, "{lhs} > {rhs}");
    }

    #[test]
    fn hs_splits_over_diagonal((a, s) in matrix_with_sigmas()) {
        let d = a.diag();
        let full = hs_norm(&a).powi(2);
        let split = hs_norm(&strip_diagonal(&a)).powi(2) + d.iter().map(|x| x * x).sum::<f64>();
        prop_assert!((full - split).abs() <= 1e-12 * full.max(1.0));

        let sig = s.as_slice();
        let scaled = hs_norm(&a.scale_columns(sig)).powi(2);
        let scaled_split = hs_norm(&strip_diagonal(&a).scale_columns(sig)).powi(2)
            + d.iter().zip(sig).map(|(x, s)| x * x * s * s).sum::<f64>();
        prop_assert!((scaled - scaled_split).abs() <= 1e-12 * scaled.max(1.0));
        let entrywise: f64 = (0..a.n())
            .flat_map(|i| (0..a.n()).map(move |j| (i, j)))
            .map(|(i, j)| a.get(i, j).powi(2) * sig[j].powi(2))
            .sum();
        prop_assert!((scaled - entrywise).abs() <= 1e-12 * scaled.max(1.0));
    }

    #[test]
    fn matrix_files_round_trip_bit_exactly(a in matrix()) {
        let csv = SquareMatrix::from_csv_str(&a.to_csv_string()).unwrap();
        let json = SquareMatrix::from_json_str(&a.to_json_string()).unwrap();
        for (x, (y, z)) in a.entries().iter().zip(csv.entries().iter().zip(json.entries())) {
            prop_assert_eq!(x.to_bits(), y.to_bits());
            prop_assert_eq!(x.to_bits(), z.to_bits());
        }
    }

    #[test]
    fn tail_bounds_are_monotone_probabilities(inp in inputs(), t1 in 1e-3f64..1e3, f in 1.0f64..10.0) {
        let t2 = t1 * f;
        for tail in [bernstein_tail, hanson_wright_tail] {
            let (p1, p2) = (tail(&inp, t1), tail(&inp, t2));
            prop_assert!(p1 > 0.0 || p2 == 0.0);
            prop_assert!(p1 <= 1.0 && p2 <= p1);
        }
    }

    #[test]
    fn tail_exponent_is_rate_function(inp in inputs(), t in 1e-3f64..1e4) {
        let rate = rate_function(&inp, t).unwrap();
        let tail = bernstein_tail(&inp, t);
        prop_assert!((tail - (-rate).exp()).abs() <= 1e-15);
    }

    #[test]
    fn deviation_has_confidence_exp_minus_x(inp in inputs(), x in 1e-4f64..50.0) {
        let t = bernstein_deviation(&inp, x);
        prop_assert!(bernstein_tail(&inp, t) <= (-x).exp() * (1.0 + 1e-12));
        let inv = inverse_rate(&inp, x).unwrap();
        prop_assert!(inv <= t * (1.0 + 1e-15) && t <= 2.0 * inv * (1.0 + 1e-15));
        let back = rate_function(&inp, inv).unwrap();
        prop_assert!((back - x).abs() <= 1e-12 * x);
    }

    #[test]
    fn t_is_dominated_by_the_deviation_of_its_rate(inp in inputs(), t in 1e-3f64..1e4) {
        let x = rate_function(&inp, t).unwrap();
        let n = inp.norms;
        let rhs = 8.0 * 3f64.sqrt() * inp.k * n.hs_right_scaled * x.sqrt()
            + 256.0 * inp.k * inp.k * n.op * x;
        prop_assert!(t <= rhs * (1.0 + 1e-12));
    }

    #[test]
    fn chernoff_exponent_dominated_by_rate(inp in inputs(), t in 1e-3f64..1e4) {
        let sol = chernoff_machinery(&inp, t).unwrap();
        let rate = rate_function(&inp, t).unwrap();
        prop_assert!(lambda_admissible(inp.norms.op, inp.k, sol.lambda_star * (1.0 - 1e-12)));
        prop_assert!(sol.exponent <= -rate + 1e-12 * rate);
        let linear = t / (256.0 * inp.k * inp.k * inp.norms.op);
        match sol.regime {
            ChernoffRegime::Unconstrained => {
                prop_assert!((sol.exponent + rate).abs() <= 1e-12 * rate);
            }
            ChernoffRegime::Binding => prop_assert!(sol.exponent <= -linear * (1.0 - 1e-12)),
        }
        let e = eta(inp.k, sol.lambda_star);
        let lhs = 512.0 * inp.k.powi(2) * inp.norms.op.powi(2) * e;
        let rhs = (128.0 * inp.norms.op * inp.k.powi(2) * sol.lambda_star).powi(2);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs);
        prop_assert!(lhs <= 1.0 + 1e-12);
    }

    #[test]
    fn bernstein_tail_monotone_in_k_and_sigma(
        (a, s) in matrix_with_sigmas(), k in 0.2f64..3.0, t in 1e-2f64..1e3, bump in 1.01f64..2.0, idx in 0usize..8,
    ) {
        prop_assume!(!a.is_zero());
        let norms = scaled_norm_stats(&a, &s, OP_NORM_TOL).unwrap();
        let base = BoundInputs::new(norms, k, 1.0).unwrap();
        let bigger_k = BoundInputs::new(norms, k * bump, 1.0).unwrap();
        prop_assert!(bernstein_tail(&bigger_k, t) >= bernstein_tail(&base, t));

        let mut sig = s.as_slice().to_vec();
        let i = idx % sig.len();
        sig[i] *= bump;
        let norms2 = scaled_norm_stats(&a, &SigmaDiag::new(sig).unwrap(), OP_NORM_TOL).unwrap();
        let bumped = BoundInputs::new(norms2, k, 1.0).unwrap();
        prop_assert!(bernstein_tail(&bumped, t) >= bernstein_tail(&base, t) * (1.0 - 1e-12));
    }

    #[test]
    fn bernstein_tail_scale_covariant((a, s) in matrix_with_sigmas(), k in 0.2f64..3.0, t in 1e-2f64..1e3, c in 0.1f64..10.0) {
        prop_assume!(!a.is_zero());
        let base = BoundInputs::new(scaled_norm_stats(&a, &s, OP_NORM_TOL).unwrap(), k, 1.0).unwrap();
        let scaled = BoundInputs::new(
            scaled_norm_stats(&a.scaled(c).unwrap(), &s, OP_NORM_TOL).unwrap(), k, 1.0,
        ).unwrap();
        let (p, q) = (bernstein_tail(&base, t), bernstein_tail(&scaled, c * t));
        prop_assert!((p - q).abs() <= 1e-9 * p.max(1e-300) + 1e-300, "{p} vs {q}");
    }

    #[test]
    fn improved_variance_term_below_classical((a, s) in matrix_with_sigmas()) {
        // σ_i ≤ K ⇒ ‖A D_σ‖_HS ≤ K ‖A‖_HS
        let k = s.as_slice().iter().copied().fold(0.0, f64::max);
        let norms = scaled_norm_stats(&a, &s, OP_NORM_TOL).unwrap();
        prop_assert!(norms.hs_right_scaled <= k * norms.hs * (1.0 + 1e-12));
    }

    #[test]
    fn certification_monotone_in_k(sigma in 0.1f64..5.0, k in 0.05f64..20.0, bump in 1.0f64..3.0) {
        for d in [
            DistributionSpec::gaussian(sigma).unwrap(),
            DistributionSpec::uniform_symmetric(sigma).unwrap(),
            DistributionSpec::rademacher(sigma).unwrap(),
        ] {
            if check_bernstein(&d, k, DEFAULT_P_MAX).unwrap().satisfied {
                prop_assert!(check_bernstein(&d, k * bump, DEFAULT_P_MAX).unwrap().satisfied);
            }
        }
    }

    #[test]
    fn minimal_k_scales_linearly(c in 0.05f64..20.0) {
        for (unit, scaled) in [
            (DistributionSpec::gaussian(1.0).unwrap(), DistributionSpec::gaussian(c).unwrap()),
            (DistributionSpec::rademacher(1.0).unwrap(), DistributionSpec::rademacher(c).unwrap()),
        ] {
            let k1 = minimal_k(&unit, DEFAULT_P_MAX).unwrap().k;
            let kc = minimal_k(&scaled, DEFAULT_P_MAX).unwrap().k;
            prop_assert!((kc - c * k1).abs() <= 1e-12 * c * k1);
        }
    }
}

#[test]
fn sigma_never_exceeds_minimal_k() {
    let catalog = [
        DistributionSpec::gaussian(0.4).unwrap(),
        DistributionSpec::uniform_symmetric(3.0).unwrap(),
        DistributionSpec::rademacher(2.0).unwrap(),
        DistributionSpec::finite_discrete(
            vec![-1.0, 0.0, 3.0],
            vec![0.5, 0.25 + 1.0 / 12.0, 1.0 / 6.0],
        )
        .unwrap(),
    ];
    for d in &catalog {
        assert!(
            d.sigma() <= minimal_k(d, DEFAULT_P_MAX).unwrap().k * (1.0 + 1e-12),
            "{d:?}"
        );
    }
}
