use alloc::vec::Vec;
use core::fmt;

/// A bijection on `{0, …, n−1}`; `map[i] = j` sends label `i` to label `j`.
///
/// Displayed 1-based in cycle notation, e.g. `(1 2)(7 8)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    /// Returns `None` unless `map` is a bijection.
    pub fn from_vec(map: Vec<usize>) -> Option<Self> {
        let n = map.len();
        let mut seen = alloc::vec![false; n];
        for &j in &map {
            if j >= n || seen[j] {
                return None;
            }
            seen[j] = true;
        }
        Some(Permutation(map))
    }

    /// Builds a permutation from 0-based disjoint cycles.
    pub fn from_cycles(n: usize, cycles: &[&[usize]]) -> Option<Self> {
        let mut map: Vec<usize> = (0..n).collect();
        for c in cycles {
            for (k, &i) in c.iter().enumerate() {
                *map.get_mut(i)? = c[(k + 1) % c.len()];
            }
        }
        Self::from_vec(map)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &j)| i == j)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = alloc::vec![0; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j] = i;
        }
        Permutation(inv)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Self {
        Permutation(other.0.iter().map(|&j| self.0[j]).collect())
    }

    /// Non-trivial cycles, each starting at its smallest element, ordered
    /// by that element.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.0.len();
        let mut seen = alloc::vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cyc = Vec::new();
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                cyc.push(i);
                i = self.0[i];
            }
            if cyc.len() > 1 {
                out.push(cyc);
            }
        }
        out
    }

    pub fn longest_cycle(&self) -> usize {
        self.cycles().iter().map(Vec::len).max().unwrap_or(1)
    }

    /// Labels moved by the permutation.
    pub fn support(&self) -> Vec<usize> {
        self.0.iter().enumerate().filter(|(i, j)| i != *j).map(|(i, _)| i).collect()
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return f.write_str("id");
        }
        for c in cycles {
            f.write_str("(")?;
            for (k, i) in c.iter().enumerate() {
                if k > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{}", i + 1)?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}
