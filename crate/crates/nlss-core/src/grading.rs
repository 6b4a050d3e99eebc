/// ℤ₂-grading of an auxiliary space with `m` bosonic and `n` fermionic
/// indices (0-based: `0..m` even, `m..m+n` odd). The extended form adds one
/// even index `K = m+n` at the end.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Grading {
    pub m: usize,
    pub n: usize,
    pub extended: bool,
}

impl Grading {
    pub const fn new(m: usize, n: usize) -> Self {
        Grading { m, n, extended: false }
    }

    pub const fn extend(self) -> Self {
        Grading { extended: true, ..self }
    }

    pub const fn base(self) -> Self {
        Grading { extended: false, ..self }
    }

    pub const fn k(&self) -> usize {
        self.m + self.n
    }

    pub const fn dim(&self) -> usize {
        self.m + self.n + self.extended as usize
    }

    /// Index of the extra even slot of the extended space.
    pub const fn last(&self) -> usize {
        self.m + self.n
    }

    pub fn parity(&self, i: usize) -> u8 {
        assert!(i < self.dim(), "index {i} outside grading of dim {}", self.dim());
        (i >= self.m && i < self.m + self.n) as u8
    }

    pub fn sign(&self, i: usize) -> i64 {
        if self.parity(i) == 1 {
            -1
        } else {
            1
        }
    }

    pub fn is_odd(&self, i: usize) -> bool {
        self.parity(i) == 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parity_layout() {
        let g = Grading::new(2, 1);
        assert_eq!((0..3).map(|i| g.parity(i)).collect::<alloc::vec::Vec<_>>(), [0, 0, 1]);
        let e = g.extend();
        assert_eq!(e.dim(), 4);
        assert_eq!(e.parity(3), 0);
    }
}
