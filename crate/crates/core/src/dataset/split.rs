use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::table::LabeledTable;

/// Train:test:validation ratio plus shuffling seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub ratio: [u32; 3],
    pub seed: u64,
    pub stratify: bool,
}

impl SplitSpec {
    pub fn new(ratio: [u32; 3], seed: u64) -> Self {
        SplitSpec {
            ratio,
            seed,
            stratify: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ratio.contains(&0) {
            return Err(Error::InvalidConfig(format!(
                "split ratio parts must be >= 1, got {:?}",
                self.ratio
            )));
        }
        Ok(())
    }
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec::new([4, 1, 1], 0)
    }
}

/// Largest-remainder apportionment of `n` items over `ratio`; remainder ties
/// go to the earlier part.
pub fn apportion(n: usize, ratio: &[u32]) -> Vec<usize> {
    let total: u64 = ratio.iter().map(|&r| r as u64).sum();
    let n = n as u64;
    let mut sizes: Vec<usize> = ratio
        .iter()
        .map(|&r| (n * r as u64 / total) as usize)
        .collect();
    let assigned: usize = sizes.iter().sum();
    let mut order: Vec<usize> = (0..ratio.len()).collect();
    // stable sort keeps lower index first on equal remainders
    order.sort_by_key(|&i| std::cmp::Reverse(n * ratio[i] as u64 % total));
    for &i in order.iter().take(n as usize - assigned) {
        sizes[i] += 1;
    }
    sizes
}

/// Row indices assigned to each part, each list in ascending order.
pub fn split_indices(table: &LabeledTable, spec: &SplitSpec) -> Result<[Vec<usize>; 3]> {
    spec.validate()?;
    let parts: u64 = spec.ratio.iter().map(|&r| r as u64).sum();
    if (table.n_rows() as u64) < parts {
        return Err(Error::TooFewRows {
            rows: table.n_rows(),
            parts: parts as usize,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let pools: Vec<Vec<usize>> = if spec.stratify {
        let (pos, neg): (Vec<usize>, Vec<usize>) =
            (0..table.n_rows()).partition(|&i| table.labels()[i] == 1);
        vec![neg, pos]
    } else {
        vec![(0..table.n_rows()).collect()]
    };
    let mut out: [Vec<usize>; 3] = Default::default();
    for mut pool in pools {
        pool.shuffle(&mut rng);
        let sizes = apportion(pool.len(), &spec.ratio);
        let mut start = 0;
        for (part, size) in out.iter_mut().zip(sizes) {
            part.extend_from_slice(&pool[start..start + size]);
            start += size;
        }
    }
    for part in &mut out {
        part.sort_unstable();
    }
    Ok(out)
}

/// Splits into (train, test, validation), preserving the original row order
/// within each part.
pub fn split(table: &LabeledTable, spec: &SplitSpec) -> Result<(LabeledTable, LabeledTable, LabeledTable)> {
    let [train, test, validation] = split_indices(table, spec)?;
    Ok((
        table.select(&train),
        table.select(&test),
        table.select(&validation),
    ))
}
