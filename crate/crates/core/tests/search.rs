use charlin::codes::{explicit_n1_code, explicit_n2_code};
use charlin::families::{gen_butterfly, gen_n1_prime, gen_n2_prime};
use charlin::netmodel::verify_solution;
use charlin::solver::{search_scalar, SearchBudget, SearchMode, SearchStatus};
use charlin::PrimeField;

fn fp(p: u64) -> PrimeField {
    PrimeField::new(p).unwrap()
}

/// Search and explicit constructions agree in both directions on q = 2, n = 1.
#[test]
fn search_agrees_with_explicit_codes() {
    for p in [2, 3] {
        let n1 = gen_n1_prime(2, 1).unwrap();
        let out = search_scalar(&n1, &fp(p), &SearchBudget::default()).unwrap();
        let expected = if p == 2 { SearchStatus::Found } else { SearchStatus::ExhaustedNone };
        assert_eq!(out.status, expected, "N1' p={p}");
        if out.status == SearchStatus::ExhaustedNone {
            assert!(!verify_solution(&n1, &explicit_n1_code(2, 1, p).unwrap()));
        }

        let n2 = gen_n2_prime(2, 1).unwrap();
        let out = search_scalar(&n2, &fp(p), &SearchBudget::default()).unwrap();
        let expected = if p == 2 { SearchStatus::ExhaustedNone } else { SearchStatus::Found };
        assert_eq!(out.status, expected, "N2' p={p}");
        match explicit_n2_code(2, 1, p) {
            Ok(code) => assert!(verify_solution(&n2, &code)),
            Err(_) => assert_eq!(out.status, SearchStatus::ExhaustedNone),
        }
        if let Some(w) = &out.witness {
            assert!(verify_solution(&n2, w));
        }
    }
}

#[test]
fn first_witness_is_deterministic() {
    let spec = gen_n1_prime(2, 1).unwrap();
    let seq = SearchBudget { threads: Some(1), ..SearchBudget::default() };
    let par = SearchBudget { threads: Some(4), ..SearchBudget::default() };
    let a = search_scalar(&spec, &fp(2), &seq).unwrap();
    let b = search_scalar(&spec, &fp(2), &par).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.witness.unwrap().to_json(), b.witness.unwrap().to_json());
}

#[test]
fn butterfly_solution_count() {
    for p in [2, 3, 5] {
        let budget = SearchBudget { mode: SearchMode::CountAll, ..SearchBudget::default() };
        let out = search_scalar(&gen_butterfly(), &fp(p), &budget).unwrap();
        assert_eq!(out.solutions, (p - 1) * (p - 1));
    }
}
