use charlin::ineq::{build_eq0, build_thmeq1, eval, sample_slacks, witness_eq0, witness_thmeq1, SubspaceAssignment};
use charlin::{char_divides, PrimeField};

/// The witness violates exactly when built; every conditional term vanishes.
#[test]
fn witnesses_across_parameters() {
    for q in 2..=7u64 {
        for p in [2u64, 3, 5, 7] {
            let f = PrimeField::new(p).unwrap();
            match witness_eq0(q, p) {
                Ok(w) => {
                    assert!(char_divides(f, q));
                    let ev = eval(&build_eq0(q).unwrap(), &w).unwrap();
                    assert_eq!(ev.slack, -1, "eq0 q={q} p={p}");
                    assert!(ev.nonzero_conditionals().is_empty());
                }
                Err(_) => assert!(!char_divides(f, q)),
            }
            match witness_thmeq1(q, p) {
                Ok(w) => {
                    assert!(!char_divides(f, q));
                    let ev = eval(&build_thmeq1(q).unwrap(), &w).unwrap();
                    assert_eq!(ev.slack, -1, "thmeq1 q={q} p={p}");
                    assert!(ev.nonzero_conditionals().is_empty());
                }
                Err(_) => assert!(char_divides(f, q)),
            }
        }
    }
}

#[test]
fn witness_files_evaluate_identically() {
    let w = witness_thmeq1(3, 2).unwrap();
    let back = SubspaceAssignment::from_json(&w.to_json()).unwrap();
    let ineq = build_thmeq1(3).unwrap();
    assert_eq!(eval(&ineq, &w).unwrap(), eval(&ineq, &back).unwrap());
}

#[test]
fn larger_q_validity_spot_check() {
    let r = sample_slacks(&build_eq0(4).unwrap(), &PrimeField::new(3).unwrap(), 2, 300, 11).unwrap();
    assert_eq!(r.violations, 0);
    let r = sample_slacks(&build_thmeq1(4).unwrap(), &PrimeField::new(2).unwrap(), 2, 300, 11).unwrap();
    assert_eq!(r.violations, 0);
}
