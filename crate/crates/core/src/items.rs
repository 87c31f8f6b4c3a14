use std::fmt;

use crate::error::{invalid, Result};

/// A finite ground set `0..n`, optionally with display labels.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundSet {
    n: usize,
    labels: Option<Vec<String>>,
}

impl GroundSet {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("ground set must contain at least one item"));
        }
        Ok(GroundSet { n, labels: None })
    }

    pub fn with_labels(labels: Vec<String>) -> Result<Self> {
        let mut g = GroundSet::new(labels.len())?;
        g.labels = Some(labels);
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn label(&self, item: usize) -> String {
        match &self.labels {
            Some(l) if item < l.len() => l[item].clone(),
            _ => item.to_string(),
        }
    }
}

/// A subset of the ground set, stored as a sorted list of distinct indices.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ItemSet(Vec<usize>);

impl ItemSet {
    pub fn empty() -> Self {
        ItemSet(Vec::new())
    }

    pub fn new(items: impl IntoIterator<Item = usize>) -> Self {
        let mut v: Vec<usize> = items.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        ItemSet(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, item: usize) -> bool {
        self.0.binary_search(&item).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn insert(&mut self, item: usize) -> bool {
        match self.0.binary_search(&item) {
            Ok(_) => false,
            Err(pos) => {
                self.0.insert(pos, item);
                true
            }
        }
    }

    pub fn remove(&mut self, item: usize) -> bool {
        match self.0.binary_search(&item) {
            Ok(pos) => {
                self.0.remove(pos);
                true
            }
            Err(_) => false,
        }
    }

    pub fn with(&self, item: usize) -> ItemSet {
        let mut s = self.clone();
        s.insert(item);
        s
    }

    pub fn union(&self, other: &ItemSet) -> ItemSet {
        ItemSet::new(self.iter().chain(other.iter()))
    }

    pub fn intersects(&self, other: &ItemSet) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }

    /// Indicator vector of length `n`; items `>= n` are ignored.
    pub fn indicator(&self, n: usize) -> Vec<f64> {
        let mut x = vec![0.0; n];
        for i in self.iter().filter(|&i| i < n) {
            x[i] = 1.0;
        }
        x
    }

    pub fn check_range(&self, n: usize) -> Result<()> {
        match self.0.last() {
            Some(&last) if last >= n => Err(invalid(format!(
                "item {last} out of range for ground set of size {n}"
            ))),
            _ => Ok(()),
        }
    }
}

impl FromIterator<usize> for ItemSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        ItemSet::new(iter)
    }
}

impl fmt::Debug for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter()).finish()
    }
}

impl fmt::Display for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for i in &self.0 {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{i}")?;
            first = false;
        }
        Ok(())
    }
}
