//! Seeded synthetic pedigrees and instances for tests, benchmarks and the demo.

use rand::Rng;

use crate::instance::{group_coancestry, relationship_matrix, EdpInstance, Pedigree, PedigreeRecord};
use crate::oracle::Combinations;

/// `founders` unrelated individuals followed by offspring of random earlier
/// parents. Roughly one offspring in eight has an unknown dam.
pub fn random_pedigree<R: Rng>(rng: &mut R, m: usize, founders: usize) -> Pedigree {
    let founders = founders.clamp(1, m.max(1));
    let mut records: Vec<PedigreeRecord> = Vec::with_capacity(m);
    for id in 1..=m {
        if id <= founders || id < 3 {
            records.push(PedigreeRecord {
                id,
                sire: 0,
                dam: 0,
                ebv: rng.gen_range(0.0..10.0),
            });
            continue;
        }
        let sire = rng.gen_range(1..id);
        let mut dam = rng.gen_range(1..id - 1);
        if dam >= sire {
            dam += 1;
        }
        if rng.gen_ratio(1, 8) {
            dam = 0;
        }
        let mut ebv = 0.5 * records[sire - 1].ebv + rng.gen_range(-1.0..2.0);
        if dam > 0 {
            ebv += 0.5 * records[dam - 1].ebv;
        } else {
            ebv += 2.5;
        }
        records.push(PedigreeRecord {
            id,
            sire,
            dam,
            ebv,
        });
    }
    Pedigree::new(records).expect("generator emits ordered ids")
}

/// Value at quantile `q` (nearest-rank on the sorted list) of the coancestry
/// over every `n`-subset of the pedigree's candidates.
pub fn coancestry_quantile(inst_a: &crate::linalg::SymMatrix, n: usize, q: f64) -> f64 {
    let mut all: Vec<f64> = Combinations::new(inst_a.dim(), n)
        .map(|s| group_coancestry(inst_a, &s, n))
        .collect();
    all.sort_by(f64::total_cmp);
    let idx = ((all.len() - 1) as f64 * q.clamp(0.0, 1.0)).floor() as usize;
    all[idx]
}

/// Random pedigree instance whose cap 2θ sits at the `q`-quantile of all
/// enumerated coancestries, so the diversity constraint binds.
pub fn binding_instance<R: Rng>(rng: &mut R, m: usize, n: usize, q: f64) -> EdpInstance {
    let founders = rng.gen_range(2..=(m / 2).max(2));
    let ped = random_pedigree(rng, m, founders);
    let a = relationship_matrix(&ped);
    let two_theta = coancestry_quantile(&a, n, q);
    EdpInstance::new(a, ped.ebvs(), n, two_theta).expect("pedigree matrices are positive definite")
}
