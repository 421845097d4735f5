use rustc_hash::FxHashMap;

use crate::game::WorldState;

const NIL: u32 = u32::MAX;

/// A duplicate-free collection of world states keyed by Zobrist hash.
///
/// Hash collisions between distinct states are resolved by chaining, so two
/// different states that happen to share a hash are both kept.
#[derive(Clone, Default)]
pub struct PossibleStateSet {
    states: Vec<WorldState>,
    index: FxHashMap<u64, u32>,
    next: Vec<u32>,
}

impl PossibleStateSet {
    pub fn new() -> PossibleStateSet {
        PossibleStateSet::default()
    }

    pub fn with_capacity(n: usize) -> PossibleStateSet {
        PossibleStateSet {
            states: Vec::with_capacity(n),
            index: FxHashMap::with_capacity_and_hasher(n, Default::default()),
            next: Vec::with_capacity(n),
        }
    }

    pub fn singleton(state: WorldState) -> PossibleStateSet {
        let mut s = PossibleStateSet::with_capacity(1);
        s.insert(state);
        s
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.states.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    #[inline]
    pub fn states(&self) -> &[WorldState] {
        &self.states
    }

    #[inline]
    pub fn get(&self, i: usize) -> &WorldState {
        &self.states[i]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, WorldState> {
        self.states.iter()
    }

    /// Index of a state with the same identity, if present.
    pub fn find(&self, state: &WorldState) -> Option<usize> {
        let mut i = *self.index.get(&state.zobrist())?;
        while i != NIL {
            if self.states[i as usize].same_identity(state) {
                return Some(i as usize);
            }
            i = self.next[i as usize];
        }
        None
    }

    #[inline]
    pub fn contains(&self, state: &WorldState) -> bool {
        self.find(state).is_some()
    }

    /// Inserts unless already present. Returns the state's index and whether
    /// it was newly added.
    pub fn insert(&mut self, state: WorldState) -> (usize, bool) {
        let h = state.zobrist();
        let new = self.states.len() as u32;
        match self.index.get(&h) {
            None => {
                self.index.insert(h, new);
            }
            Some(&head) => {
                let mut i = head;
                loop {
                    if self.states[i as usize].same_identity(&state) {
                        return (i as usize, false);
                    }
                    let n = self.next[i as usize];
                    if n == NIL {
                        self.next[i as usize] = new;
                        break;
                    }
                    i = n;
                }
            }
        }
        self.states.push(state);
        self.next.push(NIL);
        (new as usize, true)
    }

    /// Keeps the states whose flag is set, preserving order. Returns the
    /// old-to-new index map (`None` for removed states).
    pub fn retain_flags(&mut self, keep: &[bool]) -> Vec<Option<u32>> {
        debug_assert_eq!(keep.len(), self.states.len());
        let old = std::mem::take(&mut self.states);
        let mut rebuilt = PossibleStateSet::with_capacity(keep.iter().filter(|k| **k).count());
        let map = old.into_iter().zip(keep).map(|(s, &k)| k.then(|| rebuilt.insert(s).0 as u32)).collect();
        *self = rebuilt;
        map
    }
}

impl std::fmt::Debug for PossibleStateSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PossibleStateSet(len = {})", self.len())
    }
}

impl FromIterator<WorldState> for PossibleStateSet {
    fn from_iter<I: IntoIterator<Item = WorldState>>(iter: I) -> PossibleStateSet {
        let mut s = PossibleStateSet::new();
        for x in iter {
            s.insert(x);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{Action, WorldState};

    #[test]
    fn colliding_hashes_keep_distinct_states() {
        let a = WorldState::initial();
        let b = a.apply_unchecked(Action::Sense("e4".parse().unwrap())).state;
        let mut set = PossibleStateSet::new();
        set.insert(a.clone());
        // Force b into a's chain to exercise collision handling.
        let h = a.zobrist();
        set.index.insert(b.zobrist(), 0);
        assert_eq!(set.insert(b.clone()), (1, true));
        assert_eq!(set.find(&b), Some(1));
        assert_eq!(set.insert(b), (1, false));
        assert_eq!(set.index[&h], 0);
    }

    #[test]
    fn retain_compacts() {
        let a = WorldState::initial();
        let b = a.apply_unchecked(Action::Sense("e4".parse().unwrap())).state;
        let mut set: PossibleStateSet = [a.clone(), b.clone()].into_iter().collect();
        let map = set.retain_flags(&[false, true]);
        assert_eq!(map, vec![None, Some(0)]);
        assert_eq!(set.len(), 1);
        assert!(set.contains(&b) && !set.contains(&a));
    }
}
