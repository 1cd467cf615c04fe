//! Finite phase space with counting measure.
//!
//! Cells are the integers `0..N`, each of unit measure. Regions are stored as
//! sorted cell lists so that set operations are linear merges, and the flow
//! is a permutation of cells, which makes every iterate measure-preserving.

use std::fmt;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng;

pub type Cell = u32;

/// A phase space of `cell_count` unit-measure cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PhaseSpace {
    cell_count: usize,
}

impl PhaseSpace {
    pub fn new(cell_count: usize) -> Result<Self> {
        if cell_count == 0 {
            return Err(Error::EmptyPhaseSpace);
        }
        if cell_count > Cell::MAX as usize {
            return Err(Error::Domain(format!(
                "phase space of {cell_count} cells exceeds the supported maximum"
            )));
        }
        Ok(Self { cell_count })
    }

    pub fn cell_count(&self) -> usize {
        self.cell_count
    }

    /// Total measure μ(Ω).
    pub fn measure(&self) -> u64 {
        self.cell_count as u64
    }

    pub fn full(&self) -> RegionSet {
        RegionSet {
            cell_count: self.cell_count,
            cells: (0..self.cell_count as Cell).collect(),
        }
    }

    pub fn empty(&self) -> RegionSet {
        RegionSet {
            cell_count: self.cell_count,
            cells: Vec::new(),
        }
    }

    /// Builds a region from arbitrary cell ids. Duplicates collapse.
    pub fn region<I>(&self, cells: I) -> Result<RegionSet>
    where
        I: IntoIterator<Item = usize>,
    {
        let mut out = Vec::new();
        for cell in cells {
            if cell >= self.cell_count {
                return Err(Error::CellOutOfRange {
                    cell,
                    cell_count: self.cell_count,
                });
            }
            out.push(cell as Cell);
        }
        out.sort_unstable();
        out.dedup();
        Ok(RegionSet {
            cell_count: self.cell_count,
            cells: out,
        })
    }

    /// Cells `start..end`.
    pub fn range(&self, start: usize, end: usize) -> Result<RegionSet> {
        self.region(start..end)
    }
}

/// A set of cells belonging to one phase space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RegionSet {
    cell_count: usize,
    cells: Vec<Cell>,
}

impl RegionSet {
    pub fn space(&self) -> PhaseSpace {
        PhaseSpace {
            cell_count: self.cell_count,
        }
    }

    /// Exact measure (cardinality).
    pub fn measure(&self) -> u64 {
        self.cells.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn contains(&self, cell: Cell) -> bool {
        self.cells.binary_search(&cell).is_ok()
    }

    fn check_space(&self, other: &RegionSet) -> Result<()> {
        if self.cell_count != other.cell_count {
            return Err(Error::IncompatibleSpaces {
                left: self.cell_count,
                right: other.cell_count,
            });
        }
        Ok(())
    }

    pub fn intersect(&self, other: &RegionSet) -> Result<RegionSet> {
        self.check_space(other)?;
        let (a, b) = (&self.cells, &other.cells);
        let mut out = Vec::with_capacity(a.len().min(b.len()));
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        Ok(RegionSet {
            cell_count: self.cell_count,
            cells: out,
        })
    }

    /// μ(self ∩ other) without materialising the intersection.
    pub fn overlap(&self, other: &RegionSet) -> Result<u64> {
        self.check_space(other)?;
        let (a, b) = (&self.cells, &other.cells);
        let (mut i, mut j, mut n) = (0, 0, 0u64);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        Ok(n)
    }

    pub fn union(&self, other: &RegionSet) -> Result<RegionSet> {
        self.check_space(other)?;
        let mut cells = Vec::with_capacity(self.cells.len() + other.cells.len());
        let (a, b) = (&self.cells, &other.cells);
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let next = match (a.get(i), b.get(j)) {
                (Some(&x), Some(&y)) if x == y => {
                    i += 1;
                    j += 1;
                    x
                }
                (Some(&x), Some(&y)) if x < y => {
                    i += 1;
                    x
                }
                (Some(_), Some(&y)) => {
                    j += 1;
                    y
                }
                (Some(&x), None) => {
                    i += 1;
                    x
                }
                (None, Some(&y)) => {
                    j += 1;
                    y
                }
                (None, None) => unreachable!(),
            };
            cells.push(next);
        }
        Ok(RegionSet {
            cell_count: self.cell_count,
            cells,
        })
    }

    pub fn complement(&self) -> RegionSet {
        let mut cells = Vec::with_capacity(self.cell_count - self.cells.len());
        let mut it = self.cells.iter().peekable();
        for c in 0..self.cell_count as Cell {
            if it.peek() == Some(&&c) {
                it.next();
            } else {
                cells.push(c);
            }
        }
        RegionSet {
            cell_count: self.cell_count,
            cells,
        }
    }

    pub fn is_subset(&self, other: &RegionSet) -> Result<bool> {
        Ok(self.overlap(other)? == self.measure())
    }
}

impl fmt::Display for RegionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, c) in self.cells.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "}}")
    }
}

/// Coarse-graining of a phase space into labelled, disjoint, exhaustive
/// macrostates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MacrostatePartition {
    labels: Vec<String>,
    blocks: Vec<RegionSet>,
    block_of: Vec<u32>,
}

impl MacrostatePartition {
    pub fn new(space: PhaseSpace, labels: Vec<String>, blocks: Vec<RegionSet>) -> Result<Self> {
        if labels.len() != blocks.len() {
            return Err(Error::LengthMismatch {
                what: "labels",
                found: labels.len(),
                expected: blocks.len(),
            });
        }
        if blocks.is_empty() {
            return Err(Error::InvalidPartition("no blocks".into()));
        }
        for (i, label) in labels.iter().enumerate() {
            if labels[..i].contains(label) {
                return Err(Error::InvalidPartition(format!(
                    "duplicate label `{label}`"
                )));
            }
        }
        let mut block_of = vec![u32::MAX; space.cell_count()];
        for (b, block) in blocks.iter().enumerate() {
            if block.cell_count != space.cell_count() {
                return Err(Error::IncompatibleSpaces {
                    left: space.cell_count(),
                    right: block.cell_count,
                });
            }
            for &c in &block.cells {
                if block_of[c as usize] != u32::MAX {
                    return Err(Error::InvalidPartition(format!(
                        "cell {c} belongs to both `{}` and `{}`",
                        labels[block_of[c as usize] as usize], labels[b]
                    )));
                }
                block_of[c as usize] = b as u32;
            }
        }
        if let Some(c) = block_of.iter().position(|&b| b == u32::MAX) {
            return Err(Error::InvalidPartition(format!(
                "cell {c} is not covered by any block"
            )));
        }
        Ok(Self {
            labels,
            blocks,
            block_of,
        })
    }

    /// `k` contiguous blocks of equal measure labelled `D1..Dk`.
    pub fn equal_measure(space: PhaseSpace, k: usize) -> Result<Self> {
        let n = space.cell_count();
        if k == 0 || !n.is_multiple_of(k) {
            return Err(Error::InvalidPartition(format!(
                "{n} cells cannot be split into {k} equal blocks"
            )));
        }
        let width = n / k;
        let blocks = (0..k)
            .map(|b| space.range(b * width, (b + 1) * width))
            .collect::<Result<Vec<_>>>()?;
        let labels = (1..=k).map(|b| format!("D{b}")).collect();
        Self::new(space, labels, blocks)
    }

    /// Builds a partition from a per-cell block index.
    pub fn from_assignment(labels: Vec<String>, assignment: &[usize]) -> Result<Self> {
        let space = PhaseSpace::new(assignment.len())?;
        let mut members = vec![Vec::new(); labels.len()];
        for (cell, &b) in assignment.iter().enumerate() {
            members
                .get_mut(b)
                .ok_or_else(|| {
                    Error::InvalidPartition(format!("cell {cell} assigned to missing block {b}"))
                })?
                .push(cell);
        }
        let blocks = members
            .into_iter()
            .map(|m| space.region(m))
            .collect::<Result<Vec<_>>>()?;
        Self::new(space, labels, blocks)
    }

    pub fn space(&self) -> PhaseSpace {
        self.blocks[0].space()
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn blocks(&self) -> &[RegionSet] {
        &self.blocks
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn block(&self, label: &str) -> Result<&RegionSet> {
        Ok(&self.blocks[self.index_of(label)?])
    }

    /// Index of the macrostate containing `cell`.
    pub fn block_of(&self, cell: Cell) -> usize {
        self.block_of[cell as usize] as usize
    }
}

/// Invertible measure-preserving flow given by a permutation of cells.
///
/// The cycle decomposition is computed once so that `φ^t` for any integer `t`
/// costs O(1) per cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationDynamics {
    forward: Vec<Cell>,
    cycle_cells: Vec<Cell>,
    cycle_start: Vec<u32>,
    cycle_len: Vec<u32>,
    cycle_of: Vec<u32>,
    position: Vec<u32>,
}

impl PermutationDynamics {
    /// Wraps `map`, where `map[x]` is the image of cell `x` after one step.
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        PhaseSpace::new(n)?;
        let mut seen = vec![false; n];
        for (x, &y) in map.iter().enumerate() {
            if y >= n {
                return Err(Error::NotBijective(format!(
                    "cell {x} maps to {y}, outside 0..{n}"
                )));
            }
            if std::mem::replace(&mut seen[y], true) {
                return Err(Error::NotBijective(format!(
                    "cell {y} has more than one preimage"
                )));
            }
        }
        Ok(Self::from_valid(
            map.into_iter().map(|y| y as Cell).collect(),
        ))
    }

    fn from_valid(forward: Vec<Cell>) -> Self {
        let n = forward.len();
        let mut cycle_cells = Vec::with_capacity(n);
        let mut cycle_start = Vec::new();
        let mut cycle_len = Vec::new();
        let mut cycle_of = vec![u32::MAX; n];
        let mut position = vec![0u32; n];
        for root in 0..n {
            if cycle_of[root] != u32::MAX {
                continue;
            }
            let id = cycle_start.len() as u32;
            cycle_start.push(cycle_cells.len() as u32);
            let mut x = root;
            let mut k = 0u32;
            loop {
                cycle_of[x] = id;
                position[x] = k;
                cycle_cells.push(x as Cell);
                k += 1;
                x = forward[x] as usize;
                if x == root {
                    break;
                }
            }
            cycle_len.push(k);
        }
        Self {
            forward,
            cycle_cells,
            cycle_start,
            cycle_len,
            cycle_of,
            position,
        }
    }

    pub fn identity(n: usize) -> Result<Self> {
        PhaseSpace::new(n)?;
        Ok(Self::from_valid((0..n as Cell).collect()))
    }

    /// `x ↦ x + offset (mod n)`.
    pub fn cyclic_shift(n: usize, offset: i64) -> Result<Self> {
        PhaseSpace::new(n)?;
        let shift = offset.rem_euclid(n as i64) as usize;
        Ok(Self::from_valid(
            (0..n).map(|x| ((x + shift) % n) as Cell).collect(),
        ))
    }

    /// Uniformly random permutation of `n` cells drawn from a seeded
    /// ChaCha8 generator with a Fisher-Yates shuffle.
    pub fn random(seed: u64, n: usize) -> Result<Self> {
        PhaseSpace::new(n)?;
        let mut map: Vec<Cell> = (0..n as Cell).collect();
        map.shuffle(&mut rng::seeded(seed));
        Ok(Self::from_valid(map))
    }

    pub fn cell_count(&self) -> usize {
        self.forward.len()
    }

    pub fn space(&self) -> PhaseSpace {
        PhaseSpace {
            cell_count: self.forward.len(),
        }
    }

    /// One-step map as a slice: `forward_map()[x]` is the successor of `x`.
    pub fn forward_map(&self) -> &[Cell] {
        &self.forward
    }

    /// Image of a single cell after `steps` steps (negative runs backwards).
    pub fn apply(&self, cell: Cell, steps: i64) -> Cell {
        let c = self.cycle_of[cell as usize] as usize;
        let len = self.cycle_len[c] as i64;
        let pos = (self.position[cell as usize] as i64 + steps.rem_euclid(len)) % len;
        self.cycle_cells[self.cycle_start[c] as usize + pos as usize]
    }

    /// φ^steps(region).
    pub fn evolve(&self, region: &RegionSet, steps: i64) -> Result<RegionSet> {
        if region.cell_count != self.cell_count() {
            return Err(Error::IncompatibleSpaces {
                left: region.cell_count,
                right: self.cell_count(),
            });
        }
        if steps == 0 {
            return Ok(region.clone());
        }
        let mut cells: Vec<Cell> = region.cells.iter().map(|&c| self.apply(c, steps)).collect();
        cells.sort_unstable();
        Ok(RegionSet {
            cell_count: region.cell_count,
            cells,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn six() -> PhaseSpace {
        PhaseSpace::new(6).unwrap()
    }

    #[test]
    fn measure_examples() {
        let space = six();
        assert_eq!(space.empty().measure(), 0);
        assert_eq!(space.full().measure(), 6);
        assert_eq!(space.region([0, 1, 4]).unwrap().measure(), 3);
    }

    #[test]
    fn region_rejects_out_of_range_and_dedups() {
        let space = six();
        assert!(matches!(
            space.region([6]),
            Err(Error::CellOutOfRange {
                cell: 6,
                cell_count: 6
            })
        ));
        assert_eq!(space.region([3, 1, 3]).unwrap().cells(), &[1, 3]);
        assert_eq!(PhaseSpace::new(0), Err(Error::EmptyPhaseSpace));
    }

    #[test]
    fn evolve_examples() {
        let space = six();
        let shift = PermutationDynamics::cyclic_shift(6, 1).unwrap();
        let a = space.region([0, 1]).unwrap();
        let b = space.region([1, 2]).unwrap();
        assert_eq!(shift.evolve(&a, 1).unwrap(), b);
        assert_eq!(shift.evolve(&b, -1).unwrap(), a);
        assert_eq!(shift.evolve(&a, 0).unwrap(), a);
        // wraps around
        let end = space.region([5]).unwrap();
        assert_eq!(shift.evolve(&end, 1).unwrap().cells(), &[0]);
    }

    #[test]
    fn intersect_examples() {
        let space = six();
        let r = |c: &[usize]| space.region(c.iter().copied()).unwrap();
        assert_eq!(r(&[0, 1, 2]).intersect(&r(&[2, 3])).unwrap(), r(&[2]));
        assert_eq!(r(&[0, 3]).intersect(&space.full()).unwrap(), r(&[0, 3]));
        assert!(r(&[0, 1]).intersect(&r(&[2, 3])).unwrap().is_empty());

        let other = PhaseSpace::new(7).unwrap().full();
        let err = r(&[0]).intersect(&other).unwrap_err();
        assert!(err.to_string().contains("incompatible spaces"));
    }

    #[test]
    fn union_and_complement() {
        let space = six();
        let a = space.region([0, 2, 4]).unwrap();
        let b = space.region([1, 2]).unwrap();
        assert_eq!(a.union(&b).unwrap().cells(), &[0, 1, 2, 4]);
        assert_eq!(a.complement().cells(), &[1, 3, 5]);
        assert!(space.region([2]).unwrap().is_subset(&a).unwrap());
        assert!(!b.is_subset(&a).unwrap());
    }

    #[test]
    fn partition_validation() {
        let space = six();
        let p = MacrostatePartition::equal_measure(space, 3).unwrap();
        assert_eq!(p.labels(), &["D1", "D2", "D3"]);
        assert_eq!(p.block("D2").unwrap().cells(), &[2, 3]);
        assert_eq!(p.block_of(5), 2);

        let overlap = MacrostatePartition::new(
            space,
            vec!["a".into(), "b".into()],
            vec![space.range(0, 4).unwrap(), space.range(3, 6).unwrap()],
        );
        assert!(matches!(overlap, Err(Error::InvalidPartition(_))));

        let gap = MacrostatePartition::new(
            space,
            vec!["a".into(), "b".into()],
            vec![space.range(0, 2).unwrap(), space.range(3, 6).unwrap()],
        );
        assert!(matches!(gap, Err(Error::InvalidPartition(_))));

        assert!(MacrostatePartition::equal_measure(space, 4).is_err());
        assert!(matches!(p.index_of("D9"), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn from_assignment_builds_blocks() {
        let p = MacrostatePartition::from_assignment(vec!["x".into(), "y".into()], &[1, 0, 1, 1])
            .unwrap();
        assert_eq!(p.block("x").unwrap().cells(), &[1]);
        assert_eq!(p.block("y").unwrap().cells(), &[0, 2, 3]);
    }

    #[test]
    fn non_bijective_maps_are_rejected() {
        assert!(matches!(
            PermutationDynamics::new(vec![0, 0, 1]),
            Err(Error::NotBijective(_))
        ));
        assert!(matches!(
            PermutationDynamics::new(vec![0, 3, 1]),
            Err(Error::NotBijective(_))
        ));
        assert!(PermutationDynamics::new(vec![2, 0, 1]).is_ok());
    }

    #[test]
    fn random_permutation_contract() {
        let one = PermutationDynamics::random(7, 1).unwrap();
        assert_eq!(one.forward_map(), &[0]);
        let a = PermutationDynamics::random(7, 12).unwrap();
        let b = PermutationDynamics::random(7, 12).unwrap();
        let c = PermutationDynamics::random(8, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.forward_map(), c.forward_map());
        assert!(PermutationDynamics::random(7, 0).is_err());
    }

    #[test]
    fn random_permutation_golden() {
        // Frozen output of the ChaCha8 + Fisher-Yates generator.
        let a = PermutationDynamics::random(7, 12).unwrap();
        let b = PermutationDynamics::random(8, 12).unwrap();
        assert_eq!(a.forward_map(), GOLDEN_SEED_7);
        assert_eq!(b.forward_map(), GOLDEN_SEED_8);
    }

    const GOLDEN_SEED_7: &[Cell] = &[0, 11, 5, 2, 9, 1, 6, 10, 3, 4, 8, 7];
    const GOLDEN_SEED_8: &[Cell] = &[5, 3, 4, 11, 9, 10, 8, 0, 1, 6, 2, 7];

    #[test]
    fn apply_matches_iterated_map() {
        let dyn_ = PermutationDynamics::random(11, 30).unwrap();
        for x in 0..30u32 {
            let mut y = x;
            for t in 0..70i64 {
                assert_eq!(dyn_.apply(x, t), y);
                y = dyn_.forward_map()[y as usize];
            }
        }
    }
}
