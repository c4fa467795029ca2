use attnflow::cluster::{center_offset, cluster_masses, cluster_sweep, detect_clusters, ClusterReport, SweepConfig};
use attnflow::experiments::random_start_flow;
use attnflow::sphere::{project_to_sphere, sample_uniform};
use attnflow::{rng_from_seed, Ensemble, FlowConfig, InteractionMatrix, UnitVector};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use rand::Rng;

fn sweep_flow(seed: u64) -> FlowConfig {
    FlowConfig {
        seed,
        record_every: 1500,
        ..FlowConfig::default()
    }
}

fn check_report(mu: &Ensemble, r: &ClusterReport) {
    assert_eq!(r.centers.len(), r.k);
    assert_eq!(r.assignment.len(), mu.len());
    let mut widest: f64 = 0.0;
    for (p, &a) in mu.points().iter().zip(&r.assignment) {
        let own = p.chord(&r.centers[a]);
        for c in &r.centers {
            assert!(own <= p.chord(c) + 1e-12);
        }
        widest = widest.max(own);
    }
    assert!((widest - r.max_radius).abs() < 1e-12);
}

fn blob(center: &[f64], spread: f64, n: usize, rng: &mut attnflow::Rng) -> Vec<UnitVector> {
    (0..n)
        .map(|_| {
            let v: Vec<f64> = center.iter().map(|c| c + rng.random_range(-spread..spread)).collect();
            project_to_sphere(&v).unwrap()
        })
        .collect()
}

#[test]
fn tight_group_is_one_cluster() {
    let mut rng = rng_from_seed(1);
    let mu = Ensemble::uniform(blob(&[1.0, 0.0, 0.0], 5e-4, 30, &mut rng)).unwrap();
    let r = detect_clusters(&mu, 3, 0.3, 0).unwrap();
    assert_eq!(r.k, 1);
    assert!(r.centers[0].chord(&UnitVector::basis(3, 0)) < 1e-3);
    check_report(&mu, &r);
}

#[test]
fn two_point_support() {
    let mut pts = vec![UnitVector::basis(3, 2); 50];
    pts.extend(vec![UnitVector::basis(3, 2).antipode(); 50]);
    let mu = Ensemble::uniform(pts).unwrap();
    let r = detect_clusters(&mu, 2, 0.1, 0).unwrap();
    assert_eq!(r.k, 2);
    assert!(center_offset(&r, &UnitVector::basis(3, 2)) < 1e-15);
    for m in cluster_masses(&mu, &r) {
        assert!((m - 0.5).abs() < 1e-15);
    }
    check_report(&mu, &r);
}

#[test]
fn flow_clusters_sit_on_top_eigenvector() {
    let d = InteractionMatrix::diagonal(&[1.0, 1.5]).unwrap();
    for seed in 0..4 {
        let traj = random_start_flow(&d, 100, &sweep_flow(seed)).unwrap();
        let r = detect_clusters(traj.last(), 2, 0.3, seed).unwrap();
        assert!(r.k == 1 || r.k == 2);
        assert!(!r.saturated);
        assert!(center_offset(&r, &UnitVector::basis(2, 1)) < 0.05);
        check_report(traj.last(), &r);
    }
}

#[test]
fn same_seed_same_centers() {
    let mut rng = rng_from_seed(9);
    let mut pts = blob(&[0.0, 1.0, 0.0], 0.05, 20, &mut rng);
    pts.extend(blob(&[0.6, -0.8, 0.0], 0.05, 25, &mut rng));
    let mu = Ensemble::uniform(pts).unwrap();
    let a = detect_clusters(&mu, 3, 0.3, 4).unwrap();
    let b = detect_clusters(&mu, 3, 0.3, 4).unwrap();
    assert_eq!(a.k, 2);
    assert_eq!(a.k, b.k);
    for (x, y) in a.centers.iter().zip(&b.centers) {
        assert!(x.chord(y) < 1e-9);
    }
}

#[test]
fn sweep_bookkeeping() {
    let cfg = SweepConfig::new(sweep_flow(3), 1);
    let res = cluster_sweep(&[1.0, 2.0], &cfg).unwrap();
    for row in &res.rows {
        assert_eq!(row.count_single + row.count_two, 1);
    }
    assert_eq!(res.trials.len(), 2);
    assert!(cluster_sweep(&[0.0], &cfg).is_err());
    assert!(cluster_sweep(&[8.5], &cfg).is_err());
    assert!(cluster_sweep(&[1.0], &SweepConfig::new(sweep_flow(3), 0)).is_err());
}

#[test]
fn two_cluster_share_grows_with_second_eigenvalue() {
    let grid: Vec<f64> = (0..=5).map(|i| 1.0 + 0.1 * i as f64).collect();
    let res = cluster_sweep(&grid, &SweepConfig::new(sweep_flow(2024), 24)).unwrap();
    let two: Vec<usize> = res.rows.iter().map(|r| r.count_two).collect();
    let inversions = two.windows(2).filter(|w| w[1] < w[0]).count();
    assert!(inversions <= 1, "{two:?}");
    assert!(two[5] > two[0], "{two:?}");
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 32,
        rng_seed: RngSeed::Fixed(0x5eed),
        ..ProptestConfig::default()
    })]

    #[test]
    fn permutation_does_not_change_clusters(seed in 0u64..10_000, shift in 1usize..40) {
        let mut rng = rng_from_seed(seed);
        let mut pts = blob(&[1.0, 0.0, 0.0], 0.1, 20, &mut rng);
        pts.extend(blob(&[-1.0, 0.0, 0.0], 0.1, 20, &mut rng));
        pts.extend((0..5).map(|_| sample_uniform(3, &mut rng)));
        let mu = Ensemble::uniform(pts.clone()).unwrap();
        pts.rotate_left(shift);
        let nu = Ensemble::uniform(pts).unwrap();
        let (a, b) = (detect_clusters(&mu, 3, 0.3, 7).unwrap(), detect_clusters(&nu, 3, 0.3, 7).unwrap());
        check_report(&mu, &a);
        check_report(&nu, &b);
        prop_assert_eq!(a.k, b.k);
        prop_assert!((a.max_radius - b.max_radius).abs() < 1e-9);
        for (x, y) in a.centers.iter().zip(&b.centers) {
            prop_assert!(x.chord(y) < 1e-9);
        }
    }
}
