use approx::assert_relative_eq;
use genfam::{
    a_membership, legendre_transform, run, tts, DynamicsCandidate, MinkowskiSpace, OpticsModel, ParticleModel,
    SolverConfig, Suite, SuiteConfig, TQPoint, TStarQPoint,
};

fn particle() -> ParticleModel {
    ParticleModel::new(MinkowskiSpace::standard(4), 2.0).unwrap()
}

#[test]
fn particle_at_rest() {
    let m = particle();
    let cfg = SolverConfig::default().with_tolerance(1e-8);
    let lag = m.lagrangian();
    let ham = legendre_transform(&lag).unwrap();
    let at_rest = DynamicsCandidate::Single(tts(&[0.0; 4], &[2.0, 0.0, 0.0, 0.0], &[1.0, 0.0, 0.0, 0.0], &[0.0; 4]));
    assert!(a_membership(lag.object(), &at_rest, &[], &cfg).unwrap().member);
    let seeds = m.full_seeds(&[0.0; 4], &[2.0, 0.0, 0.0, 0.0], &[1.0, 0.0, 0.0, 0.0]);
    assert!(a_membership(ham.object(), &at_rest, &seeds, &cfg).unwrap().member);

    let pushed = DynamicsCandidate::Single(tts(&[0.0; 4], &[2.0, 0.0, 0.0, 0.0], &[1.0, 0.0, 0.0, 0.0], &[0.0, 1.0, 0.0, 0.0]));
    assert!(!a_membership(lag.object(), &pushed, &[], &cfg).unwrap().member);
}

#[test]
fn reduced_particle_values() {
    let m = particle();
    let sys = m.systems(&SolverConfig::default()).unwrap();
    let z = [0.0, 0.0, 0.0, 0.0, 3.0, 0.0, 0.0, 0.0, 0.5];
    assert_relative_eq!(sys.hamiltonian_reduced.hamiltonian(&z).unwrap(), 0.5 * (3.0 - 2.0), epsilon = 1e-12);
    let round_trip = m.inverse_round_trip(&SolverConfig::default()).unwrap();
    let y = [1.0, 2.0, 3.0, 4.0, 2.0, 1.0, 0.0, 0.0];
    assert_relative_eq!(round_trip.lagrangian(&y).unwrap(), 2.0 * 3f64.sqrt(), epsilon = 1e-10);
}

#[test]
fn light_cone_graph() {
    let o = OpticsModel::new(MinkowskiSpace::standard(3)).unwrap();
    let cfg = SolverConfig::default().with_tolerance(1e-8);
    let p = TStarQPoint::from_coords(&[0.0, 0.0, 0.0, 1.0, -1.0, 0.0]).unwrap();
    let ray = TQPoint::from_coords(&[0.0, 0.0, 0.0, 2.0, 2.0, 0.0]).unwrap();
    let off = TQPoint::from_coords(&[0.0, 0.0, 0.0, 2.0, 1.0, 0.0]).unwrap();
    assert!(o.lambda2_graph_contains(&p, &ray, &cfg));
    assert!(!o.lambda2_graph_contains(&p, &off, &cfg));
}

#[test]
fn every_suite_passes_on_a_small_sample() {
    for suite in Suite::EACH {
        let report = run(&SuiteConfig { suite, samples: Some(10), seed: 3, ..SuiteConfig::default() }).unwrap();
        assert!(report.summary.total > 0);
        assert!(report.all_passed(), "{suite}: {:?}", report.checks.iter().filter(|c| !c.passed).collect::<Vec<_>>());
    }
}

#[test]
fn report_serializes_to_the_documented_schema() {
    let report = run(&SuiteConfig { suite: Suite::Bundles, samples: Some(3), ..SuiteConfig::default() }).unwrap();
    let json = serde_json::to_value(&report).unwrap();
    for key in ["config", "checks", "summary"] {
        assert!(json.get(key).is_some(), "{key}");
    }
    let check = &json["checks"][0];
    for key in ["id", "anchor", "samples", "max_residual", "tolerance", "passed", "witness"] {
        assert!(check.get(key).is_some(), "{key}");
    }
    assert_eq!(json["summary"]["total"], 5);
}
