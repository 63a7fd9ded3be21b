//! Non-crossing partitions, their refinement order and Möbius function.

use std::collections::HashMap;

use crate::error::{Error, Result};

pub const MAX_N: usize = 10;

/// A non-crossing partition of `{1, …, n}`; blocks are increasing and sorted by minimum.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NCPartition {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    Interior,
    Exterior,
}

impl NCPartition {
    pub fn new(n: usize, mut blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n + 1];
        for block in &blocks {
            if block.is_empty() || block.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Parse(format!("block {block:?} is not strictly increasing")));
            }
            for &i in block {
                if i == 0 || i > n || seen[i] {
                    return Err(Error::Parse(format!("index {i} is out of range or repeated")));
                }
                seen[i] = true;
            }
        }
        if seen.iter().skip(1).any(|&s| !s) {
            return Err(Error::Parse("blocks do not cover the ground set".into()));
        }
        blocks.sort();
        let p = Self { n, blocks };
        if p.has_crossing() {
            return Err(Error::Parse("partition has a crossing".into()));
        }
        Ok(p)
    }

    pub fn one(n: usize) -> Self {
        Self { n, blocks: if n == 0 { vec![] } else { vec![(1..=n).collect()] } }
    }

    pub fn zero(n: usize) -> Self {
        Self { n, blocks: (1..=n).map(|i| vec![i]).collect() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Block index of each element, indexed from 1 (slot 0 unused).
    pub fn labels(&self) -> Vec<usize> {
        let mut labels = vec![usize::MAX; self.n + 1];
        for (b, block) in self.blocks.iter().enumerate() {
            for &i in block {
                labels[i] = b;
            }
        }
        labels
    }

    fn has_crossing(&self) -> bool {
        let labels = self.labels();
        for i in 1..=self.n {
            for j in i + 1..=self.n {
                for k in j + 1..=self.n {
                    for l in k + 1..=self.n {
                        if labels[i] == labels[k] && labels[j] == labels[l] && labels[i] != labels[j] {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }

    /// Blocks lying inside `lo..=hi`, shifted to start at 1.
    pub(crate) fn restrict(&self, lo: usize, hi: usize) -> Self {
        if hi < lo {
            return Self { n: 0, blocks: vec![] };
        }
        let blocks = self
            .blocks
            .iter()
            .filter(|b| b[0] >= lo && b[0] <= hi)
            .map(|b| b.iter().map(|&i| i - lo + 1).collect())
            .collect();
        Self { n: hi - lo + 1, blocks }
    }

    /// Maximal intervals `(start, end)` not cut by any block; `π` is their juxtaposition.
    pub fn components(&self) -> Vec<(usize, usize)> {
        let labels = self.labels();
        let mut out = Vec::new();
        let mut start = 1;
        let mut reach = 0;
        for i in 1..=self.n {
            reach = reach.max(*self.blocks[labels[i]].last().expect("non-empty block"));
            if reach == i {
                out.push((start, i));
                start = i + 1;
            }
        }
        out
    }

    pub fn is_one(&self) -> bool {
        self.blocks.len() == 1
    }
}

fn shifted(blocks: &[Vec<usize>], by: usize) -> impl Iterator<Item = Vec<usize>> + '_ {
    blocks.iter().map(move |b| b.iter().map(|&i| i + by).collect())
}

fn enumerate_raw(n: usize, memo: &mut HashMap<usize, Vec<Vec<Vec<usize>>>>) -> Vec<Vec<Vec<usize>>> {
    if let Some(hit) = memo.get(&n) {
        return hit.clone();
    }
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for mask in 0..(1usize << (n - 1)) {
        let mut first = vec![1];
        first.extend((0..n - 1).filter(|i| mask >> i & 1 == 1).map(|i| i + 2));
        // Segments strictly between block elements, and after the last one.
        let mut segments: Vec<(usize, usize)> = first.windows(2).map(|w| (w[0] + 1, w[1] - w[0] - 1)).collect();
        let last = *first.last().expect("contains 1");
        segments.push((last + 1, n - last));
        let mut partial: Vec<Vec<Vec<usize>>> = vec![vec![first.clone()]];
        for (start, len) in segments {
            if len == 0 {
                continue;
            }
            let fills = enumerate_raw(len, memo);
            let mut next = Vec::with_capacity(partial.len() * fills.len());
            for base in &partial {
                for fill in &fills {
                    let mut p = base.clone();
                    p.extend(shifted(fill, start - 1));
                    next.push(p);
                }
            }
            partial = next;
        }
        out.extend(partial);
    }
    memo.insert(n, out.clone());
    out
}

/// All of `NC(n)`, sorted lexicographically by block lists.
pub fn enumerate_nc(n: usize) -> Result<Vec<NCPartition>> {
    if n > MAX_N {
        return Err(Error::TooLarge { n, max: MAX_N });
    }
    if n == 0 {
        return Err(Error::Parse("NC(n) needs n ≥ 1".into()));
    }
    let mut memo = HashMap::new();
    let mut out: Vec<NCPartition> = enumerate_raw(n, &mut memo)
        .into_iter()
        .map(|mut blocks| {
            blocks.sort();
            NCPartition { n, blocks }
        })
        .collect();
    out.sort();
    Ok(out)
}

fn refines(sigma: &NCPartition, pi_labels: &[usize]) -> bool {
    sigma.blocks.iter().all(|b| b.iter().all(|&i| pi_labels[i] == pi_labels[b[0]]))
}

pub fn leq(sigma: &NCPartition, pi: &NCPartition) -> Result<bool> {
    if sigma.n != pi.n {
        return Err(Error::GroundSetMismatch { left: sigma.n, right: pi.n });
    }
    Ok(refines(sigma, &pi.labels()))
}

/// Möbius function of the interval `[σ, π]` via `Σ_{σ≤τ≤π} moeb(σ, τ) = δ_{σπ}`.
pub fn moebius(sigma: &NCPartition, pi: &NCPartition) -> Result<i64> {
    if !leq(sigma, pi)? {
        return Err(Error::NotComparable);
    }
    let sigma_labels = sigma.labels();
    let pi_labels = pi.labels();
    let mut interval: Vec<NCPartition> = enumerate_nc(sigma.n)?
        .into_iter()
        .filter(|t| refines(sigma, &t.labels()) && refines(t, &pi_labels))
        .collect();
    // Finer partitions first, so every strict lower bound is already known.
    interval.sort_by_key(|t| std::cmp::Reverse(t.blocks.len()));
    let labels: Vec<Vec<usize>> = interval.iter().map(|t| t.labels()).collect();
    let mut memo: HashMap<usize, i64> = HashMap::new();
    for (idx, tau) in interval.iter().enumerate() {
        let value = if refines(tau, &sigma_labels) {
            1
        } else {
            -(0..idx)
                .filter(|&r| refines(&interval[r], &labels[idx]))
                .map(|r| memo[&r])
                .sum::<i64>()
        };
        memo.insert(idx, value);
        if tau == pi {
            return Ok(value);
        }
    }
    unreachable!("π lies in its own interval")
}

/// `moeb(σ, π)` for every `σ ≤ π`, by the dual recursion `Σ_{σ≤τ≤π} moeb(τ, π) = δ_{σπ}`.
pub fn moebius_to(pi: &NCPartition) -> Result<Vec<(NCPartition, i64)>> {
    let pi_labels = pi.labels();
    let mut below: Vec<NCPartition> = enumerate_nc(pi.n)?.into_iter().filter(|s| refines(s, &pi_labels)).collect();
    below.sort_by_key(|s| s.blocks.len());
    let labels: Vec<Vec<usize>> = below.iter().map(|s| s.labels()).collect();
    let mut values: Vec<i64> = Vec::with_capacity(below.len());
    for (idx, sigma) in below.iter().enumerate() {
        let value = if idx == 0 {
            1
        } else {
            -(0..idx)
                .filter(|&r| r != idx && refines(sigma, &labels[r]))
                .map(|r| values[r])
                .sum::<i64>()
        };
        values.push(value);
    }
    Ok(below.into_iter().zip(values).collect())
}

/// Interior iff some other block has elements on both sides of it.
pub fn classify_blocks(pi: &NCPartition) -> Vec<BlockKind> {
    pi.blocks
        .iter()
        .enumerate()
        .map(|(b, block)| {
            let (lo, hi) = (block[0], *block.last().expect("non-empty block"));
            let nested = pi.blocks.iter().enumerate().any(|(c, other)| {
                c != b && other.iter().any(|&i| i < lo) && other.iter().any(|&j| j > hi)
            });
            if nested {
                BlockKind::Interior
            } else {
                BlockKind::Exterior
            }
        })
        .collect()
}
