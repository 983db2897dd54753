use nalgebra::DMatrix;
use proptest::prelude::*;
use vancal_core::exterior::{comass, comass_oracle, AlternatingTensor, ComassOptions};

fn one_form(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, dim)
}

fn wedge_all(forms: &[Vec<f64>]) -> AlternatingTensor {
    let dim = forms[0].len();
    forms.iter().fold(AlternatingTensor::scalar(dim, 1.0).unwrap(), |acc, f| {
        acc.wedge(&AlternatingTensor::one_form(f).unwrap()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wedge_is_graded_commutative(a in one_form(5), b in one_form(5), c in one_form(5)) {
        let alpha = AlternatingTensor::one_form(&a).unwrap();
        let beta = AlternatingTensor::one_form(&b).unwrap().wedge(&AlternatingTensor::one_form(&c).unwrap()).unwrap();
        let ab = alpha.wedge(&beta).unwrap();
        let ba = beta.wedge(&alpha).unwrap();
        // (-1)^{1 * 2} = 1
        prop_assert!(ab.try_add(&-&ba).unwrap().max_abs() < 1e-12);
        let aa = alpha.wedge(&alpha).unwrap();
        prop_assert!(aa.max_abs() == 0.0);
    }

    #[test]
    fn wedge_is_associative(a in one_form(4), b in one_form(4), c in one_form(4)) {
        let (a, b, c) = (
            AlternatingTensor::one_form(&a).unwrap(),
            AlternatingTensor::one_form(&b).unwrap(),
            AlternatingTensor::one_form(&c).unwrap(),
        );
        let left = a.wedge(&b).unwrap().wedge(&c).unwrap();
        let right = a.wedge(&b.wedge(&c).unwrap()).unwrap();
        prop_assert!(left.try_add(&-&right).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn interior_is_an_antiderivation(a in one_form(4), b in one_form(4), w in one_form(4)) {
        let (a, b) = (AlternatingTensor::one_form(&a).unwrap(), AlternatingTensor::one_form(&b).unwrap());
        let lhs = a.wedge(&b).unwrap().interior(&w).unwrap();
        let aw = a.interior(&w).unwrap().coeffs()[0];
        let bw = b.interior(&w).unwrap().coeffs()[0];
        let rhs = (&b * aw).try_add(&(&a * -bw)).unwrap();
        prop_assert!(lhs.try_add(&-&rhs).unwrap().max_abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// A wedge of 1-forms has comass equal to the volume of their parallelotope.
    #[test]
    fn simple_form_comass_is_the_gram_volume(forms in prop::collection::vec(one_form(5), 2..=3), seed in 0u64..1000) {
        let form = wedge_all(&forms);
        let k = forms.len();
        let m = DMatrix::from_fn(5, k, |i, j| forms[j][i]);
        let volume = (m.transpose() * m).determinant().max(0.0).sqrt();
        prop_assume!(volume > 1e-3);
        let opt = comass(&form, &ComassOptions { seed, ..ComassOptions::default() }).unwrap().value;
        prop_assert!((opt - volume).abs() <= 1e-6 * volume.max(1.0), "{opt} vs {volume}");
        prop_assert!(opt <= form.norm() * (1.0 + 1e-12));
        prop_assert!(comass_oracle(&form, 2_000, seed) <= opt * (1.0 + 1e-9));
    }

    #[test]
    fn comass_is_invariant_under_orthogonal_change_of_frame(c in prop::collection::vec(-1.0f64..1.0, 6), seed in 0u64..1000) {
        // a general 2-form on R^4 and its pullback by a random rotation
        let form = AlternatingTensor::from_coeffs(4, 2, c).unwrap();
        prop_assume!(form.norm() > 1e-2);
        let mut rng = vancal_core::numeric::seeded_rng(seed);
        let q = vancal_core::numeric::random_orthonormal_frame(&mut rng, 4, 4);
        let compound = vancal_core::exterior::compound_matrix(&q, 2);
        let rotated: Vec<f64> = (0..6).map(|a| (0..6).map(|b| compound[a * 6 + b] * form.coeffs()[b]).sum()).collect();
        let rotated = AlternatingTensor::from_coeffs(4, 2, rotated).unwrap();
        let opts = ComassOptions { seed, ..ComassOptions::default() };
        let x = comass(&form, &opts).unwrap().value;
        let y = comass(&rotated, &opts).unwrap().value;
        prop_assert!((x - y).abs() < 1e-8 * x.max(1.0), "{x} vs {y}");
    }
}
