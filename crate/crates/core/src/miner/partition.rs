// SPDX-License-Identifier: Apache-2.0

/// Disjoint sets of variables known to be equal. The representative of a
/// class is always its lowest header index.
#[derive(Debug, Clone)]
pub struct EqualityPartition {
    parent: Vec<usize>,
}

impl EqualityPartition {
    pub fn new(n: usize) -> Self {
        EqualityPartition {
            parent: (0..n).collect(),
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            // path halving
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the classes of `a` and `b`; returns false if already merged.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }

    pub fn is_representative(&mut self, x: usize) -> bool {
        self.find(x) == x
    }

    pub fn same_class(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }

    /// Classes with at least two members, each sorted, ordered by representative.
    pub fn classes(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); n];
        for x in 0..n {
            let r = self.find(x);
            members[r].push(x);
        }
        members.into_iter().filter(|m| m.len() > 1).collect()
    }
}
