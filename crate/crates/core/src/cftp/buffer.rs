/// A time-indexed buffer that grows to the left in amortised O(1) and
/// keeps its contents contiguous, so any time range is a plain slice.
#[derive(Debug, Clone)]
pub(crate) struct LeftVec<T> {
    data: Vec<T>,
    head: usize,
    /// Time of `data[head]`.
    first: i64,
    fill: T,
}

impl<T: Copy> LeftVec<T> {
    pub fn new(first: i64, fill: T) -> Self {
        LeftVec {
            data: Vec::new(),
            head: 0,
            first,
            fill,
        }
    }

    pub fn first(&self) -> i64 {
        self.first
    }

    pub fn len(&self) -> usize {
        self.data.len() - self.head
    }

    pub fn push_back(&mut self, v: T) {
        self.data.push(v);
    }

    pub fn push_front(&mut self, v: T) {
        if self.head == 0 {
            let grow = self.len().max(16);
            let mut data = Vec::with_capacity(self.data.len() + grow);
            data.resize(grow, self.fill);
            data.extend_from_slice(&self.data);
            self.data = data;
            self.head = grow;
        }
        self.head -= 1;
        self.data[self.head] = v;
        self.first -= 1;
    }

    #[inline]
    fn idx(&self, t: i64) -> usize {
        debug_assert!(t >= self.first && ((t - self.first) as usize) < self.len());
        self.head + (t - self.first) as usize
    }

    #[inline]
    pub fn get(&self, t: i64) -> T {
        self.data[self.idx(t)]
    }

    #[inline]
    pub fn set(&mut self, t: i64, v: T) {
        let i = self.idx(t);
        self.data[i] = v;
    }

    /// Times `lo..hi`.
    #[inline]
    pub fn range(&self, lo: i64, hi: i64) -> &[T] {
        if hi <= lo {
            return &[];
        }
        let a = self.idx(lo);
        &self.data[a..a + (hi - lo) as usize]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data[self.head..]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grows_both_ways() {
        let mut b = LeftVec::new(0, 0i64);
        for t in 0..5 {
            b.push_back(t);
        }
        for t in (-40..0).rev() {
            b.push_front(t);
        }
        assert_eq!(b.first(), -40);
        assert_eq!(b.len(), 45);
        assert_eq!(b.as_slice(), (-40..5).collect::<Vec<_>>().as_slice());
        assert_eq!(b.range(-2, 2), &[-2, -1, 0, 1]);
        b.set(-7, 100);
        assert_eq!(b.get(-7), 100);
        assert!(b.range(3, 3).is_empty());
    }
}
