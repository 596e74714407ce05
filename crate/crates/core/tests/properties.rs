use std::collections::BTreeMap;

use num_rational::BigRational;
use proptest::prelude::*;
use vcs_irreps::am::{clebsch_gordan, racah_u};
use vcs_irreps::document::{generate, verify, Document, IrrepRequest};
use vcs_irreps::repcheck::{exact_commutator_failures, exact_hermiticity_failures, su11_spec, u3_spec};
use vcs_irreps::su11::Su11Irrep;
use vcs_irreps::su3::{branching_oracle, RotorIrrep, Su3Label};
use vcs_irreps::u3::{assemble_generators, basis_enumeration, U3HighestWeight};
use vcs_irreps::{Precision, Radical, Spin, SurdSum};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn radical_product_and_quotient(a in 1i64..200, b in 1i64..50, c in 1i64..200, d in 1i64..50, neg: bool) {
        let x = if neg { -Radical::sqrt_ratio(a, b) } else { Radical::sqrt_ratio(a, b) };
        let y = Radical::sqrt_ratio(c, d);
        let p = &x * &y;
        prop_assert!((p.to_f64() - x.to_f64() * y.to_f64()).abs() < 1e-9 * p.to_f64().abs().max(1.0));
        prop_assert_eq!(&p / &y, x.clone());
        let back: Radical = serde_json::from_str(&serde_json::to_string(&x).unwrap()).unwrap();
        prop_assert_eq!(back, x);
    }

    #[test]
    fn cg_exchange_phase(j1 in 0u32..7, j2 in 0u32..7, pick in 0usize..64) {
        // (j1 m1, j2 m2 | J M) = (−1)^{j1+j2−J} (j2 m2, j1 m1 | J M)
        let js: Vec<u32> = (j1.abs_diff(j2)..=j1 + j2).step_by(2).collect();
        let j = js[pick % js.len()];
        let s = Spin::from_twice;
        for m1 in (-(j1 as i32)..=j1 as i32).step_by(2) {
            for m2 in (-(j2 as i32)..=j2 as i32).step_by(2) {
                if (m1 + m2).abs() > j as i32 {
                    continue;
                }
                let a = clebsch_gordan(s(j1), m1, s(j2), m2, s(j), m1 + m2).unwrap();
                let b = clebsch_gordan(s(j2), m2, s(j1), m1, s(j), m1 + m2).unwrap();
                let phase = if ((j1 + j2 - j) / 2).is_multiple_of(2) { b } else { -b };
                prop_assert_eq!(a, phase);
            }
        }
    }

    #[test]
    fn racah_row_normalised(a in 0u32..6, b in 0u32..6, c in 0u32..6, d in 0u32..6, pick in 0usize..16) {
        let s = Spin::from_twice;
        let tri = |x: u32, y: u32, z: u32| z >= x.abs_diff(y) && z <= x + y && (x + y + z).is_multiple_of(2);
        let es: Vec<u32> = (a.abs_diff(b)..=a + b).step_by(2).filter(|&e| tri(e, d, c)).collect();
        prop_assume!(!es.is_empty());
        let e = es[pick % es.len()];
        let mut norm = SurdSum::zero();
        for f in (b.abs_diff(d)..=b + d).step_by(2) {
            let u = racah_u(s(a), s(b), s(c), s(d), s(e), s(f));
            norm += &SurdSum::from(&u * &u);
        }
        prop_assert_eq!(norm, SurdSum::from_integer(1));
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn su11_exact_on_interior(num in 1i64..40, den in 1i64..6, n_max in 1usize..14) {
        let irrep = Su11Irrep::new(BigRational::new(num.into(), den.into()), n_max).unwrap();
        let m: BTreeMap<_, _> = irrep
            .generator_matrices(Precision::Exact)
            .into_iter()
            .map(|(k, v)| (k, v.to_surd().unwrap()))
            .collect();
        prop_assert!(exact_commutator_failures(&su11_spec(), &m, Some(n_max)).unwrap().is_empty());
        prop_assert!(exact_hermiticity_failures(&su11_spec(), &m).unwrap().is_empty());
    }

    #[test]
    fn su11_document_round_trip(num in 1i64..20, den in 1i64..4, n_max in 1usize..10, exact: bool) {
        let request = IrrepRequest::Su11 { lambda: format!("{num}/{den}"), n_max };
        let precision = if exact { Precision::Exact } else { Precision::Float };
        let doc = generate(&request, precision).unwrap();
        let back = Document::from_json(&doc.to_json().unwrap()).unwrap();
        prop_assert_eq!(&back, &doc);
        prop_assert_eq!(verify(&back, 1e-10).unwrap(), verify(&doc, 1e-10).unwrap());
    }
}

proptest! {
    #![proptest_config(config(12))]

    #[test]
    fn u3_exact_algebra(lam in 0i64..4, mu in 0i64..4, shift in -3i64..3) {
        prop_assume!(lam + mu <= 4);
        let w = U3HighestWeight::from_integers(lam + mu + shift, mu + shift, shift).unwrap();
        prop_assert_eq!(basis_enumeration(&w).len(), w.dim());
        let m: BTreeMap<_, _> = assemble_generators(&w, Precision::Exact)
            .unwrap()
            .into_iter()
            .map(|(k, v)| (k, v.to_surd().unwrap()))
            .collect();
        prop_assert!(exact_commutator_failures(&u3_spec(), &m, None).unwrap().is_empty());
        prop_assert!(exact_hermiticity_failures(&u3_spec(), &m).unwrap().is_empty());
    }

    #[test]
    fn su3_branching_agrees(lam in 0u32..5, mu in 0u32..5) {
        prop_assume!(lam + mu <= 5);
        let lm = Su3Label::new(lam, mu);
        let rotor = RotorIrrep::build(lm).unwrap();
        prop_assert_eq!(rotor.basis().len(), lm.dim());
        prop_assert_eq!(rotor.multiplicities(), branching_oracle(lm).unwrap());
    }

    #[test]
    fn su3_documents_verify(lam in 0u32..4, mu in 0u32..4) {
        let doc = generate(&IrrepRequest::Su3So3 { lam, mu }, Precision::Float).unwrap();
        let report = verify(&doc, 1e-10).unwrap();
        prop_assert!(report.iter().all(|r| r.passed), "{:?}", report);
    }
}
