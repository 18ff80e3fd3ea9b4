mod common;

use chrono::TimeDelta;
use common::{day, photo};
use photocensus::census::{census_csv, census_report, feasibility_search, round_for_display, Estimator};
use photocensus::matching::{cluster_individuals, MatchGraph, Verdict};
use photocensus::sighting::{assign_occasions, Dataset, OccasionRule};
use photocensus::sim::{generate_population, simulate_rally, Region, SamplingProcess};

/// Builds a dataset of `sightings` where each entry is (individual, day), and
/// a graph linking every sighting of an individual to its first one.
fn fixture(species: &str, sightings: &[(usize, i64)]) -> (Dataset, MatchGraph) {
    let mut ds = Dataset::new(1);
    for (i, &(_, d)) in sightings.iter().enumerate() {
        let when = day(d) + TimeDelta::seconds((i % 40_000) as i64);
        ds.insert(photo(&format!("{species}-{i:06}"), species, when, 0, 1)).unwrap();
    }
    let anns = ds.annotations();
    let mut g = MatchGraph::new(&anns);
    let mut first: std::collections::BTreeMap<usize, usize> = Default::default();
    for (i, &(who, _)) in sightings.iter().enumerate() {
        let head = *first.entry(who).or_insert(i);
        if head != i {
            g.apply_decision(&anns[head].annotation_id, &anns[i].annotation_id, Verdict::Same, "r", day(9)).unwrap();
        }
    }
    (ds, g)
}

/// `only_first`, `both`, `only_second` individuals, one sighting per
/// occasion they were present on.
fn presence(only_first: usize, both: usize, only_second: usize) -> Vec<(usize, i64)> {
    let mut s = Vec::new();
    for who in 0..only_first + both {
        s.push((who, 0));
    }
    for who in only_first..only_first + both + only_second {
        s.push((who, 1));
    }
    s
}

#[test]
fn five_four_two_gives_ten() {
    let (ds, g) = fixture("plains_zebra", &presence(3, 2, 2));
    let occ = assign_occasions(&ds, &OccasionRule::calendar_day()).unwrap();
    let partition = cluster_individuals(&g);
    let r = census_report(&ds, &partition, &occ, (0, 1), "plains_zebra", Estimator::LincolnPetersen).unwrap();
    assert_eq!((r.estimate.input.first, r.estimate.input.second, r.estimate.input.recaptured), (5, 4, 2));
    assert_eq!(r.estimate.n_est, 10.0);
    assert_eq!(r.individuals, 7);
    let c = census_report(&ds, &partition, &occ, (0, 1), "plains_zebra", Estimator::Chapman).unwrap();
    assert_eq!(
        census_csv(&[r, c]),
        "species,annotations,individuals,estimator,n,K,k,n_est,var,ci_lo,ci_hi\n\
         plains_zebra,9,7,lincoln-petersen,5,4,2,10.0000,,,\n\
         plains_zebra,9,7,chapman,5,4,2,9.0000,5.0000,4.6173,13.3827\n"
    );
}

// Grevy's zebra row of the published census: 1,942 individuals from 16,866
// annotations, estimate 2,250. The occasion counts come from the search.
#[test]
fn grevys_row_reconstruction() {
    let triples = feasibility_search(1942, 2250.0, 1.0);
    let t = triples.iter().find(|t| (t.n, t.big_k, t.k) == (1762, 830, 650)).expect("triple found");
    let (n, big_k, k) = (t.n as usize, t.big_k as usize, t.k as usize);
    let mut sightings = presence(n - k, k, big_k - k);
    let base = sightings.clone();
    // pad with repeat sightings on the same occasions
    let mut i = 0;
    while sightings.len() < 16_866 {
        sightings.push(base[i % base.len()]);
        i += 1;
    }
    let (ds, g) = fixture("grevys_zebra", &sightings);
    let occ = assign_occasions(&ds, &OccasionRule::calendar_day()).unwrap();
    let partition = cluster_individuals(&g);
    let r = census_report(&ds, &partition, &occ, (0, 1), "grevys_zebra", Estimator::LincolnPetersen).unwrap();
    assert_eq!((r.annotations, r.individuals), (16_866, 1942));
    assert!((r.estimate.n_est - 2249.9385).abs() < 1e-4);
    assert_eq!(round_for_display(r.estimate.n_est), 2250);
    assert_eq!(r.csv_row(), "grevys_zebra,16866,1942,lincoln-petersen,1762,830,650,2249.9385,,,");
}

#[test]
fn other_species_are_excluded_from_a_report() {
    let (mut ds, _) = fixture("plains_zebra", &presence(3, 2, 2));
    ds.insert(photo("giraffe-1", "masai_giraffe", day(0), 0, 1)).unwrap();
    let anns = ds.annotations();
    let g = MatchGraph::new(&anns);
    let occ = assign_occasions(&ds, &OccasionRule::calendar_day()).unwrap();
    let r = census_report(&ds, &cluster_individuals(&g), &occ, (0, 1), "masai_giraffe", Estimator::Chapman).unwrap();
    assert_eq!((r.annotations, r.individuals, r.estimate.input.first), (1, 1, 1));
}

#[test]
fn full_capture_rally_recovers_true_n() {
    let pop = generate_population(80, 16, &Region::default(), 3).unwrap();
    let process = SamplingProcess { capture_prob: 1.0, ..Default::default() };
    let rally = simulate_rally(&pop, &process, 11).unwrap();
    let ds = rally.to_dataset();
    let anns = ds.annotations();
    // oracle matching from the simulator's ground truth
    let mut g = MatchGraph::new(&anns);
    let mut first = std::collections::BTreeMap::new();
    for a in &anns {
        let head: &String = first.entry(rally.truth[&a.annotation_id]).or_insert(a.annotation_id.clone());
        if head != &a.annotation_id {
            let head = head.clone();
            g.apply_decision(&head, &a.annotation_id, Verdict::Same, "oracle", day(9)).unwrap();
        }
    }
    let occ = assign_occasions(&ds, &OccasionRule::calendar_day()).unwrap();
    let partition = cluster_individuals(&g);
    for estimator in [Estimator::LincolnPetersen, Estimator::Chapman] {
        let r = census_report(&ds, &partition, &occ, (0, 1), "grevys_zebra", estimator).unwrap();
        assert_eq!(r.estimate.n_est, 80.0);
        assert_eq!(r.individuals, 80);
        assert_eq!(r.estimate.variance.unwrap_or(0.0), 0.0);
    }
}
