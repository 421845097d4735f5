use std::sync::atomic::{AtomicU64, Ordering::Relaxed};

use crate::hash::mix;

/// Visit count, value total and smallest backed-up value of one arm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArmStats {
    pub n: f64,
    pub q: f64,
    /// `+inf` until a value is recorded.
    pub min: f64,
}

impl ArmStats {
    pub const EMPTY: ArmStats = ArmStats { n: 0.0, q: 0.0, min: f64::INFINITY };
}

impl Default for ArmStats {
    fn default() -> Self {
        ArmStats::EMPTY
    }
}

struct Slot {
    key: AtomicU64,
    n: AtomicU64,
    q: AtomicU64,
    min: AtomicU64,
}

/// Direct-mapped table of arm statistics keyed by `(set hash, action index)`.
///
/// A write to a slot holding another key overwrites it. Updates are atomic
/// per field but not across fields, so concurrent writers may interleave.
pub struct NodeStats {
    slots: Vec<Slot>,
    mask: usize,
}

fn add_f64(cell: &AtomicU64, delta: f64) {
    let _ = cell.fetch_update(Relaxed, Relaxed, |bits| Some((f64::from_bits(bits) + delta).to_bits()));
}

fn min_f64(cell: &AtomicU64, v: f64) {
    let _ = cell.fetch_update(Relaxed, Relaxed, |bits| (v < f64::from_bits(bits)).then_some(v.to_bits()));
}

pub const DEFAULT_CAPACITY: usize = 1 << 22;

impl NodeStats {
    /// `capacity` is rounded up to a power of two.
    pub fn new(capacity: usize) -> NodeStats {
        let cap = capacity.max(1).next_power_of_two();
        let slots = (0..cap)
            .map(|_| Slot {
                key: AtomicU64::new(0),
                n: AtomicU64::new(0f64.to_bits()),
                q: AtomicU64::new(0f64.to_bits()),
                min: AtomicU64::new(f64::INFINITY.to_bits()),
            })
            .collect();
        NodeStats { slots, mask: cap - 1 }
    }

    pub fn capacity(&self) -> usize {
        self.slots.len()
    }

    pub fn key(set_hash: u64, action: u16) -> u64 {
        // Zero marks an empty slot.
        mix(set_hash, action as u64 + 1) | 1
    }

    fn slot(&self, key: u64) -> &Slot {
        &self.slots[key as usize & self.mask]
    }

    pub fn get(&self, key: u64) -> ArmStats {
        let s = self.slot(key);
        if s.key.load(Relaxed) != key {
            return ArmStats::EMPTY;
        }
        ArmStats {
            n: f64::from_bits(s.n.load(Relaxed)),
            q: f64::from_bits(s.q.load(Relaxed)),
            min: f64::from_bits(s.min.load(Relaxed)),
        }
    }

    /// Slot for `key`, overwriting an older entry.
    fn claim(&self, key: u64) -> &Slot {
        let s = self.slot(key);
        let old = s.key.load(Relaxed);
        if old != key && s.key.compare_exchange(old, key, Relaxed, Relaxed).is_ok() {
            s.n.store(0f64.to_bits(), Relaxed);
            s.q.store(0f64.to_bits(), Relaxed);
            s.min.store(f64::INFINITY.to_bits(), Relaxed);
        }
        s
    }

    /// Adds `dn` visits without a value (virtual loss).
    pub fn add_visits(&self, key: u64, dn: f64) {
        add_f64(&self.claim(key).n, dn);
    }

    /// Backs up `value` with a visit increment of `dn`.
    ///
    /// If the entry was overwritten since its virtual loss was applied the
    /// count restarts from zero, so `dn` is clamped to keep it non-negative.
    pub fn record(&self, key: u64, value: f64, dn: f64) {
        let s = self.slot(key);
        let fresh = s.key.load(Relaxed) != key;
        let s = self.claim(key);
        add_f64(&s.n, if fresh { dn.max(1.0) } else { dn });
        add_f64(&s.q, value);
        min_f64(&s.min, value);
    }

    pub fn clear(&self) {
        for s in &self.slots {
            s.key.store(0, Relaxed);
        }
    }

    /// Sum of visits over every occupied slot.
    pub fn total_visits(&self) -> f64 {
        self.slots.iter().filter(|s| s.key.load(Relaxed) != 0).map(|s| f64::from_bits(s.n.load(Relaxed))).sum()
    }
}

impl Default for NodeStats {
    fn default() -> Self {
        NodeStats::new(DEFAULT_CAPACITY)
    }
}
