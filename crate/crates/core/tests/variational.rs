//! Per-set domination of measure entropy by the cover count:
//! `H_mu(alpha^F) <= log N(U^F)` for invariant measures on the subshift.

use entrolab::caps::Caps;
use entrolab::group::{FiniteSubset, GroupSpec};
use entrolab::measure::{
    join_partition, joined_entropy, CylinderTable, Distribution, Partition, ShiftMeasure,
};
use entrolab::subshift::{admissible_pattern_count, Subshift};

fn golden_mean_measure(z: GroupSpec) -> ShiftMeasure {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let pi = [phi * phi / (1.0 + phi * phi), 1.0 / (1.0 + phi * phi)];
    let step = |a: usize, b: usize| match (a, b) {
        (0, 0) => 1.0 / phi,
        (0, 1) => 1.0 / (phi * phi),
        (1, 0) => 1.0,
        _ => 0.0,
    };
    let entries = (0..8usize).map(|x| {
        let w = [(x >> 2) & 1, (x >> 1) & 1, x & 1];
        (w.to_vec(), pi[w[0]] * step(w[0], w[1]) * step(w[1], w[2]))
    });
    ShiftMeasure::explicit(
        CylinderTable::from_entries(2, z.interval(0, 2).unwrap(), entries).unwrap(),
    )
}

fn check(s: &Subshift, m: &ShiftMeasure, schedule: &[FiniteSubset]) {
    let caps = Caps::default();
    let alpha = Partition::letters(m).unwrap();
    for f in schedule {
        let h = joined_entropy(m, &alpha, f, &caps).unwrap().entropy;
        let count = admissible_pattern_count(s, f, &caps).unwrap();
        assert!(
            h <= count.log_count + 1e-9,
            "{}: {h} > {}",
            f.label(),
            count.log_count
        );
        if f.len() <= 9 {
            let cells = join_partition(m, &alpha, f).unwrap().len();
            assert!(h <= (cells as f64).ln() + 1e-12);
        }
    }
}

#[test]
fn bernoulli_on_full_shifts() {
    let f2 = GroupSpec::free(2).unwrap();
    let schedule: Vec<_> = (0..3).map(|r| f2.ball(r).unwrap()).collect();
    for base in [
        vec![0.5, 0.5],
        vec![0.9, 0.1],
        vec![0.2, 0.3, 0.5],
        vec![1.0, 0.0],
    ] {
        let k = base.len();
        let m = ShiftMeasure::bernoulli(f2, Distribution::new(base).unwrap());
        check(&Subshift::full_shift(f2, k).unwrap(), &m, &schedule);
    }
}

#[test]
fn parry_measure_on_golden_mean() {
    let z = GroupSpec::lattice(1).unwrap();
    let schedule: Vec<_> = (0..3).map(|n| z.interval(0, n).unwrap()).collect();
    check(
        &Subshift::golden_mean(z).unwrap(),
        &golden_mean_measure(z),
        &schedule,
    );
}
