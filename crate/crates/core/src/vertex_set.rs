/// Fixed-capacity set of vertex ids backed by a bit vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VertexSet {
    words: Vec<u64>,
    capacity: usize,
}

impl VertexSet {
    pub fn new(capacity: usize) -> Self {
        Self { words: vec![0; capacity.div_ceil(64)], capacity }
    }

    pub fn from_iter_with_capacity(capacity: usize, ids: impl IntoIterator<Item = usize>) -> Self {
        let mut set = Self::new(capacity);
        for id in ids {
            set.insert(id);
        }
        set
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Returns true if the id was not already present.
    pub fn insert(&mut self, id: usize) -> bool {
        assert!(id < self.capacity, "vertex {id} out of range for set of capacity {}", self.capacity);
        let (w, b) = (id / 64, id % 64);
        let fresh = self.words[w] & (1 << b) == 0;
        self.words[w] |= 1 << b;
        fresh
    }

    pub fn remove(&mut self, id: usize) {
        if id < self.capacity {
            self.words[id / 64] &= !(1 << (id % 64));
        }
    }

    #[inline]
    pub fn contains(&self, id: usize) -> bool {
        id < self.capacity && self.words[id / 64] & (1 << (id % 64)) != 0
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.capacity).filter(|&i| self.contains(i))
    }
}
