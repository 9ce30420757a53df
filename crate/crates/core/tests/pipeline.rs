use fj_core::fjseries::{fj_invert, fj_is_symmetric, fj_tensor, FormalFJSeries};
use fj_core::lattice::{discriminant_form, EvenLattice};
use fj_core::rep::{rep_trivial, verify_representation, weil_rep_genus2};
use fj_core::siegel::{fj_to_siegel, in_span, siegel_to_fj, SolveOptions, SymmetricSolver};
use fj_core::Q64;

const RAW: SolveOptions = SolveOptions { stabilize: false, max_escalations: 0 };

fn basis(solver: &SymmetricSolver, k: i64, m: usize, n: i64) -> Vec<FormalFJSeries> {
    solver.solve(&Q64::from_integer(k), &rep_trivial(), m, n, RAW).unwrap().basis
}

#[test]
fn products_of_solutions_are_solutions() {
    let solver = SymmetricSolver::new();
    let e4 = &basis(&solver, 4, 3, 5)[0];
    let e6 = &basis(&solver, 6, 3, 5)[0];
    let prod = fj_tensor(e4, e6).unwrap();
    assert!(fj_is_symmetric(&prod).unwrap().symmetric);
    assert!(in_span(&basis(&solver, 10, 3, 5), &prod));
}

#[test]
fn series_survive_json_and_siegel_tables() {
    let solver = SymmetricSolver::new();
    for f in basis(&solver, 10, 3, 5) {
        let text = serde_json::to_string(&f).unwrap();
        let back: FormalFJSeries = serde_json::from_str(&text).unwrap();
        assert_eq!(back, f);

        let table = fj_to_siegel(&f).unwrap();
        assert_eq!(table.swap_violation().unwrap(), None);
        assert_eq!(siegel_to_fj(&table), f);
    }
}

#[test]
fn inverse_of_a_solution_multiplies_to_one() {
    let solver = SymmetricSolver::new();
    let e4 = &basis(&solver, 4, 2, 5)[0];
    let inv = fj_invert(e4).unwrap();
    let f = fj_core::fjseries::MeromorphicFJSeries::from_formal(e4);
    assert!(f.mul(&inv).unwrap().is_one());
}

#[test]
fn lattice_to_genus2_representation() {
    let a2 = EvenLattice::parse("2 -1\n-1 2\n").unwrap();
    let d = discriminant_form(&a2).unwrap();
    assert_eq!(d.order(), 3);
    for root in 0u8..8 {
        let rho = weil_rep_genus2(&d, root);
        assert_eq!(rho.dim, 9);
        // delta^2 = zeta_4^root must match the central sign (+1 here)
        let report = verify_representation(&rho);
        assert_eq!(report.passed(), root % 4 == 0, "root {root}: {:?}", report.violations);
    }
}
