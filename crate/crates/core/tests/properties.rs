use ipdsaw_core::ipsaw::{classify, self_touchings};
use ipdsaw_core::model::{beads, from_walk, hamiltonian, patterns, to_walk};
use ipdsaw_core::partition::{brute_force_z, dp_z};
use ipdsaw_core::walk::excursions;
use ipdsaw_core::{Ensemble, LatticePath, ModelParams, StretchConfig};
use proptest::prelude::*;

fn config() -> impl Strategy<Value = StretchConfig> {
    prop::collection::vec(-6i64..=6, 1..12).prop_map(|s| StretchConfig::new(s).unwrap())
}

proptest! {
    #[test]
    fn walk_bijection_round_trips(cfg in config()) {
        let walk = to_walk(&cfg);
        prop_assert_eq!(walk.values().len(), cfg.extension() + 2);
        prop_assert_eq!(from_walk(&walk).unwrap(), cfg);
    }

    #[test]
    fn midpoint_touchings_match_stretch_energy(cfg in config()) {
        let path = LatticePath::from_stretches(&cfg);
        prop_assert_eq!(path.len(), cfg.length());
        prop_assert!(classify(&path).pd);
        prop_assert_eq!(self_touchings(&path).unwrap(), hamiltonian(&cfg));
        prop_assert_eq!(path.to_stretches().unwrap(), cfg);
    }

    #[test]
    fn flip_preserves_energy(cfg in config()) {
        prop_assert_eq!(hamiltonian(&cfg.flipped()), hamiltonian(&cfg));
        prop_assert_eq!(cfg.flipped().length(), cfg.length());
    }

    #[test]
    fn decompositions_cover_the_polymer(cfg in config()) {
        let b = beads(&cfg);
        prop_assert_eq!(b.sizes.iter().sum::<usize>(), cfg.length());
        prop_assert_eq!(*b.boundaries.last().unwrap(), cfg.extension());
        prop_assert!(b.sizes.iter().all(|&s| s <= b.largest_size()));
        let p = patterns(&cfg);
        prop_assert_eq!(p.sizes.iter().sum::<usize>() + p.incomplete.unwrap_or(0), cfg.length());
        let zeros = cfg.stretches().iter().filter(|&&l| l == 0).count();
        prop_assert_eq!(b.count(), excursions(&to_walk(&cfg)).len() + zeros);
    }

    #[test]
    fn dp_matches_enumeration(length in 1usize..=10, beta in 0.0f64..3.0) {
        let dp = dp_z(length, beta).unwrap();
        let brute = brute_force_z(length, beta).unwrap();
        prop_assert!(((dp - brute) / brute).abs() <= 1e-10);
    }
}

#[test]
fn ensembles_round_trip_through_the_file_format() {
    let p = ModelParams::new(1.5).unwrap();
    let ens = Ensemble::exact(40, &p, 200, 9).unwrap();
    assert!(ens.configs.iter().all(|c| c.length() == 40));
    let mut buf = Vec::new();
    ens.write_to(&mut buf).unwrap();
    let back = Ensemble::read_from(buf.as_slice()).unwrap();
    assert_eq!(back, ens);
    assert_eq!(Ensemble::exact(40, &p, 200, 9).unwrap(), ens);
}

#[test]
fn malformed_ensemble_lines_are_rejected() {
    let bad = "# ipdsaw v1 beta=1 L=4 seed=0 kind=exact\n2 1 0\n";
    assert!(Ensemble::read_from(bad.as_bytes()).is_err());
    let miscounted = "# ipdsaw v1 beta=1 L=4 seed=0 kind=exact\n3 1 1\n";
    assert!(Ensemble::read_from(miscounted.as_bytes()).is_err());
    let good = "# ipdsaw v1 beta=1 L=4 seed=0 kind=exact\n# note\n2 1 -1\n";
    assert_eq!(Ensemble::read_from(good.as_bytes()).unwrap().len(), 1);
}
