use std::cmp::Ordering;
use std::fmt;

/// Largest supported domain. World sets are stored as a single machine word.
pub const MAX_WORLDS: usize = 64;

/// A world of a finite model, identified by its dense index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct World(pub usize);

/// A subset of a finite domain `{0, .., size-1}` as a characteristic bit vector.
///
/// Ordering is by bit-vector value, so `{w0}` < `{w1}` < `{w0,w1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct WorldSet {
    bits: u64,
    size: u8,
}

impl WorldSet {
    fn mask(size: usize) -> u64 {
        if size >= 64 {
            u64::MAX
        } else {
            (1u64 << size) - 1
        }
    }

    pub fn empty(size: usize) -> Self {
        assert!(size <= MAX_WORLDS, "domain too large");
        WorldSet { bits: 0, size: size as u8 }
    }

    pub fn full(size: usize) -> Self {
        assert!(size <= MAX_WORLDS, "domain too large");
        WorldSet { bits: Self::mask(size), size: size as u8 }
    }

    /// Builds a set from raw bits; bits above the domain are dropped.
    pub fn from_bits(size: usize, bits: u64) -> Self {
        assert!(size <= MAX_WORLDS, "domain too large");
        WorldSet { bits: bits & Self::mask(size), size: size as u8 }
    }

    pub fn from_worlds<I: IntoIterator<Item = usize>>(size: usize, worlds: I) -> Self {
        let mut s = Self::empty(size);
        for w in worlds {
            s.insert(World(w));
        }
        s
    }

    pub fn singleton(size: usize, w: World) -> Self {
        Self::from_worlds(size, [w.0])
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    /// Size of the ambient domain.
    pub fn domain_size(&self) -> usize {
        self.size as usize
    }

    /// Number of members.
    pub fn count(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn is_full(&self) -> bool {
        self.bits == Self::mask(self.size as usize)
    }

    pub fn contains(&self, w: World) -> bool {
        w.0 < self.size as usize && self.bits >> w.0 & 1 == 1
    }

    pub fn insert(&mut self, w: World) {
        assert!(w.0 < self.size as usize, "world {} outside domain of size {}", w.0, self.size);
        self.bits |= 1 << w.0;
    }

    pub fn union(&self, other: &WorldSet) -> WorldSet {
        debug_assert_eq!(self.size, other.size);
        WorldSet { bits: self.bits | other.bits, size: self.size }
    }

    pub fn intersection(&self, other: &WorldSet) -> WorldSet {
        debug_assert_eq!(self.size, other.size);
        WorldSet { bits: self.bits & other.bits, size: self.size }
    }

    pub fn complement(&self) -> WorldSet {
        WorldSet { bits: !self.bits & Self::mask(self.size as usize), size: self.size }
    }

    pub fn is_subset(&self, other: &WorldSet) -> bool {
        self.bits & !other.bits == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = World> + '_ {
        (0..self.size as usize).filter(|&i| self.bits >> i & 1 == 1).map(World)
    }

    /// Every subset of a domain of `size` worlds, ascending by bit value.
    pub fn all_subsets(size: usize) -> impl Iterator<Item = WorldSet> {
        assert!(size < 64, "powerset of {size} worlds is not enumerable");
        (0..1u64 << size).map(move |bits| WorldSet { bits, size: size as u8 })
    }

    /// All supersets of `self` within its domain, ascending.
    pub fn supersets(&self) -> impl Iterator<Item = WorldSet> + '_ {
        let free = self.complement().bits;
        // enumerate submasks of `free`, smallest first
        let mut subs: Vec<u64> = Vec::with_capacity(1 << free.count_ones());
        let mut sub = 0u64;
        loop {
            subs.push(sub);
            if sub == free {
                break;
            }
            sub = (sub.wrapping_sub(free)) & free;
        }
        subs.sort_unstable();
        subs.into_iter().map(move |s| WorldSet { bits: self.bits | s, size: self.size })
    }
}

impl PartialOrd for WorldSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for WorldSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bits.cmp(&other.bits).then(self.size.cmp(&other.size))
    }
}

impl fmt::Display for WorldSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, w) in self.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", w.0)?;
        }
        f.write_str("}")
    }
}
