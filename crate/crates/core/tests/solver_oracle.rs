use nalgebra::Vector3;
use shull::solver::acoustics::{exact_solution, AcousticsModel};
use shull::solver::dls::{assemble_dls, run_benchmark, DlsOptions};
use shull::solver::study::{convergence_study, dof_to_reach, Kind, StudyConfig};
use shull::solver::{interpolate, l2_error, Family, HullMesh};

#[test]
fn interpolated_exact_solution_error_is_small() {
    let mesh = HullMesh::benchmark(Family::HullQ, 6).unwrap();
    let s = interpolate(&mesh, exact_solution);
    assert!(l2_error(&mesh, &s, exact_solution).unwrap() < 1e-5);
    let zero = interpolate(&mesh, |_| Vector3::zeros());
    assert!(l2_error(&mesh, &zero, exact_solution).unwrap() > 0.5);
}

#[test]
fn benchmark_matrix_is_symmetric_for_every_family() {
    for f in Family::ALL {
        let mesh = HullMesh::benchmark(f, 2).unwrap();
        let sys = assemble_dls(&mesh, &AcousticsModel::default(), &DlsOptions::default()).unwrap();
        assert!(sys.symmetry_error() <= 1e-9);
    }
}

#[test]
fn penalty_choice_does_not_spoil_convergence() {
    let model = AcousticsModel::default();
    for alpha in [0.1, 10.0] {
        let opts = DlsOptions {
            alpha,
            ..Default::default()
        };
        let e2 = run_benchmark(&HullMesh::benchmark(Family::HullQ, 2).unwrap(), &model, &opts, 1e-10).unwrap().1;
        let e4 = run_benchmark(&HullMesh::benchmark(Family::HullQ, 4).unwrap(), &model, &opts, 1e-10).unwrap().1;
        assert!(e4 < 0.05 * e2);
    }
}

#[test]
fn hull_bases_need_fewer_dof_at_moderate_accuracy() {
    let rows = convergence_study(Kind::Dls, &Family::ALL, &[2, 3, 4, 5], &StudyConfig::default()).unwrap();
    let tri = dof_to_reach(&rows, Family::TriLagrange, 1e-3).unwrap();
    let hp = dof_to_reach(&rows, Family::HullP, 1e-2).unwrap();
    assert!(hp < tri);
}
