use rand::seq::index;
use rand::Rng;

use crate::game::{Color, Phase, WorldState};
use crate::hash::{mix, mix64};

/// Order-independent hash of a collection of member hashes: sort, fold with
/// a mixing step, then mix in the count.
pub fn set_hash_of(hashes: &mut [u64]) -> u64 {
    hashes.sort_unstable();
    let mut it = hashes.iter();
    let Some(&first) = it.next() else { return mix(0, 0) };
    let acc = it.fold(first, |acc, &h| mix64(acc) ^ h);
    mix(acc, hashes.len() as u64)
}

/// A bounded set of world states standing in for one information state.
#[derive(Clone, Debug)]
pub struct LimitedStateSet {
    states: Vec<WorldState>,
    hash: u64,
}

impl LimitedStateSet {
    /// Wraps members; they must be non-empty and distinct.
    pub fn new(states: Vec<WorldState>) -> LimitedStateSet {
        assert!(!states.is_empty(), "a limited state set has at least one member");
        let mut hashes: Vec<u64> = states.iter().map(WorldState::zobrist).collect();
        let hash = set_hash_of(&mut hashes);
        LimitedStateSet { states, hash }
    }

    pub fn singleton(state: WorldState) -> LimitedStateSet {
        LimitedStateSet::new(vec![state])
    }

    #[inline]
    pub fn states(&self) -> &[WorldState] {
        &self.states
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.states.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Permutation-invariant key used by the search statistics table.
    #[inline]
    pub fn set_hash(&self) -> u64 {
        self.hash
    }

    /// Side to act; shared by all members.
    pub fn side_to_move(&self) -> Color {
        self.states[0].side_to_move()
    }

    pub fn phase(&self) -> Phase {
        self.states[0].phase()
    }

    pub fn is_terminal(&self) -> bool {
        self.states[0].is_terminal()
    }

    pub fn contains(&self, x: &WorldState) -> bool {
        self.states.iter().any(|y| y.same_identity(x))
    }

    pub fn into_states(self) -> Vec<WorldState> {
        self.states
    }
}

/// Draws `min(limit, n)` of `n` indices uniformly without replacement,
/// always including `must` when given. With `n <= limit` all indices are
/// returned in order.
pub fn sample_indices<R: Rng + ?Sized>(rng: &mut R, n: usize, limit: usize, must: Option<usize>) -> Vec<usize> {
    assert!(limit > 0);
    if n <= limit {
        return (0..n).collect();
    }
    match must {
        None => index::sample(rng, n, limit).into_vec(),
        Some(m) => {
            debug_assert!(m < n);
            let mut out = Vec::with_capacity(limit);
            out.push(m);
            out.extend(index::sample(rng, n - 1, limit - 1).into_iter().map(|i| if i >= m { i + 1 } else { i }));
            out
        }
    }
}

/// Uniform subsample of at most `limit` states from `pool`, containing the
/// state at `must` when given.
pub fn subsample<R: Rng + ?Sized>(
    pool: &[WorldState],
    limit: usize,
    must: Option<usize>,
    rng: &mut R,
) -> LimitedStateSet {
    let idx = sample_indices(rng, pool.len(), limit, must);
    LimitedStateSet::new(idx.into_iter().map(|i| pool[i].clone()).collect())
}
