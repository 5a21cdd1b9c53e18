use crate::error::{Error, Result};

use super::{Clause, Instance};

/// Bound on n for the exhaustive oracle (2^26 bits = 8 MiB).
pub const MAX_ORACLE_VARS: usize = 26;

/// Packed bitmask over all `2^n` assignments, marking those that satisfy every
/// clause applied so far.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurvivorSet {
    n: usize,
    words: Vec<u64>,
    count: usize,
}

impl SurvivorSet {
    pub fn full(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_ORACLE_VARS {
            return Err(Error::TooLarge { n, limit: MAX_ORACLE_VARS, what: "the survivor-set oracle" });
        }
        let size = 1usize << n;
        let mut words = vec![u64::MAX; size.div_ceil(64)];
        if size < 64 {
            words[0] = (1u64 << size) - 1;
        }
        Ok(Self { n, words, count: size })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    #[inline]
    pub fn contains(&self, x: u64) -> bool {
        let x = x as usize;
        self.words[x / 64] >> (x % 64) & 1 == 1
    }

    #[inline]
    fn clear(&mut self, x: u64) {
        let x = x as usize;
        let word = &mut self.words[x / 64];
        let bit = 1u64 << (x % 64);
        if *word & bit != 0 {
            *word &= !bit;
            self.count -= 1;
        }
    }

    /// Visits the assignments falsifying `clause`: the subcube with the clause's
    /// variables pinned to the falsifying pattern.
    fn for_each_falsifier(&self, clause: &Clause, mut f: impl FnMut(u64)) {
        let (support, falsifier) = clause.masks();
        let free = crate::combinatorics::full_mask(self.n) & !support;
        let mut sub = 0u64;
        loop {
            f(sub | falsifier);
            sub = sub.wrapping_sub(free) & free;
            if sub == 0 {
                break;
            }
        }
    }

    /// Survivor count if `clause` were appended.
    pub fn would_remain(&self, clause: &Clause) -> usize {
        let mut killed = 0usize;
        self.for_each_falsifier(clause, |x| {
            if self.contains(x) {
                killed += 1;
            }
        });
        self.count - killed
    }

    pub fn restrict(&mut self, clause: &Clause) {
        let mut doomed = Vec::new();
        self.for_each_falsifier(clause, |x| doomed.push(x));
        for x in doomed {
            self.clear(x);
        }
    }

    /// Members in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as u64;
                w &= w - 1;
                Some(i as u64 * 64 + b)
            })
        })
    }

    pub fn to_vec(&self) -> Vec<u64> {
        self.iter().collect()
    }
}

/// Exact set of interpretations of `inst`.
pub fn surviving_assignments(inst: &Instance) -> Result<SurvivorSet> {
    let mut set = SurvivorSet::full(inst.n())?;
    for clause in inst.clauses() {
        if set.is_empty() {
            break;
        }
        set.restrict(clause);
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{generate_f, generate_ff};

    #[test]
    fn empty_instance_keeps_everything() {
        let inst = Instance::new(5, 2, vec![], None).unwrap();
        let set = surviving_assignments(&inst).unwrap();
        assert_eq!(set.len(), 32);
        assert_eq!(set.to_vec(), (0..32).collect::<Vec<_>>());
    }

    #[test]
    fn planted_target_survives() {
        for seed in 0..10 {
            let inst = generate_ff(10, 200, 3, seed, None).unwrap();
            let set = surviving_assignments(&inst).unwrap();
            assert!(set.contains(inst.planted().unwrap().bits()));
        }
    }

    #[test]
    fn matches_full_scan() {
        for seed in 0..5 {
            let inst = generate_f(10, 100, 3, seed).unwrap();
            let set = surviving_assignments(&inst).unwrap();
            let brute: Vec<u64> = (0u64..1024).filter(|&x| inst.count_satisfied_bits(x) == inst.m()).collect();
            assert_eq!(set.len(), brute.len());
            assert_eq!(set.to_vec(), brute);
        }
    }

    #[test]
    fn shrinks_monotonically() {
        let inst = generate_f(9, 60, 3, 2).unwrap();
        let mut set = SurvivorSet::full(9).unwrap();
        let mut last = set.len();
        for c in inst.clauses() {
            let predicted = set.would_remain(c);
            set.restrict(c);
            assert_eq!(set.len(), predicted);
            assert!(set.len() <= last);
            last = set.len();
        }
    }

    #[test]
    fn size_bound() {
        assert!(SurvivorSet::full(27).is_err());
        assert_eq!(SurvivorSet::full(3).unwrap().len(), 8);
    }
}
