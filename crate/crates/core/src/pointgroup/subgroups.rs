use serde::{Deserialize, Serialize};

use super::{GroupElement, GroupError, PointGroup, SNAP};

type Mask = u128;

/// Multiplication table of a group with at most 128 elements.
#[derive(Debug, Clone)]
pub struct GroupTable {
    pub elements: Vec<GroupElement>,
    mul: Vec<usize>,
    inv: Vec<usize>,
}

impl GroupTable {
    pub fn new(group: &PointGroup) -> Result<Self, GroupError> {
        let n = group.order();
        if n > Mask::BITS as usize {
            return Err(GroupError::Unsupported(n));
        }
        let elements = group.elements.clone();
        let find = |g: &GroupElement| elements.iter().position(|e| e.approx_eq(g, SNAP));
        let mut mul = vec![0; n * n];
        for a in 0..n {
            for b in 0..n {
                mul[a * n + b] = find(&elements[a].compose(&elements[b])).ok_or(GroupError::NotAGroup)?;
            }
        }
        let inv = (0..n).map(|a| find(&elements[a].inverse()).ok_or(GroupError::NotAGroup)).collect::<Result<_, _>>()?;
        Ok(GroupTable { elements, mul, inv })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Index of `a ∘ b`.
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.len() + b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    pub fn index_of(&self, g: &GroupElement) -> Option<usize> {
        self.elements.iter().position(|e| e.approx_eq(g, SNAP))
    }

    fn identity(&self) -> usize {
        self.elements.iter().position(GroupElement::is_identity).expect("group has an identity")
    }

    fn members(mask: Mask) -> impl Iterator<Item = usize> {
        (0..Mask::BITS as usize).filter(move |k| mask >> k & 1 == 1)
    }

    fn closure(&self, mask: Mask) -> Mask {
        let mut m = mask | 1 << self.identity();
        loop {
            let mut next = m;
            for a in Self::members(m) {
                for b in Self::members(m) {
                    next |= 1 << self.mul(a, b);
                }
            }
            if next == m {
                return m;
            }
            m = next;
        }
    }

    fn conjugate_mask(&self, h: usize, mask: Mask) -> Mask {
        Self::members(mask).fold(0, |acc, g| acc | 1 << self.mul(self.mul(h, g), self.inv(h)))
    }

    fn subgroup_masks(&self) -> Vec<Mask> {
        let mut found: Vec<Mask> = Vec::new();
        for g in 0..self.len() {
            let c = self.closure(1 << g);
            if !found.contains(&c) {
                found.push(c);
            }
        }
        let mut start = 0;
        loop {
            let before = found.len();
            for a in 0..before {
                for b in start.max(a + 1)..before {
                    let c = self.closure(found[a] | found[b]);
                    if !found.contains(&c) {
                        found.push(c);
                    }
                }
            }
            if found.len() == before {
                break;
            }
            start = before;
        }
        found.sort_by_key(|m| m.count_ones());
        found
    }

    fn group_of(&self, mask: Mask) -> Result<PointGroup, GroupError> {
        PointGroup::from_elements(Self::members(mask).map(|k| self.elements[k]).collect())
    }
}

/// All subgroups, including the trivial group and the group itself, ordered by size.
pub fn subgroups(group: &PointGroup) -> Result<Vec<PointGroup>, GroupError> {
    let table = GroupTable::new(group)?;
    table.subgroup_masks().into_iter().map(|m| table.group_of(m)).collect()
}

/// `G = first · second` with `first ∩ second = {E}`; the reverse order is also a
/// factorization. `first` is the larger factor.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Factorization {
    pub first: PointGroup,
    pub second: PointGroup,
}

impl Factorization {
    pub fn label(&self) -> String {
        format!("{}·{}", self.first.name(), self.second.name())
    }
}

/// Factorizations of `group` into two proper complementary subgroups.
///
/// Each unordered pair is reported once. By default one representative per
/// conjugacy class of pairs is returned; `all_embeddings` lists every pair.
pub fn factorize(group: &PointGroup, all_embeddings: bool) -> Result<Vec<Factorization>, GroupError> {
    let table = GroupTable::new(group)?;
    let n = table.len();
    let masks = table.subgroup_masks();
    let e = table.identity();
    let mut seen: Vec<(Mask, Mask)> = Vec::new();
    let mut out = Vec::new();
    for (ia, &a) in masks.iter().enumerate() {
        for (ib, &b) in masks.iter().enumerate() {
            let (na, nb) = (a.count_ones() as usize, b.count_ones() as usize);
            if na < nb || (na == nb && ia >= ib) || na == n || nb == 1 || na * nb != n {
                continue;
            }
            if a & b != 1 << e {
                continue;
            }
            let mut prod: Mask = 0;
            for x in GroupTable::members(a) {
                for y in GroupTable::members(b) {
                    prod |= 1 << table.mul(x, y);
                }
            }
            if prod.count_ones() as usize != n || seen.contains(&(a, b)) {
                continue;
            }
            if all_embeddings {
                seen.push((a, b));
            } else {
                for h in 0..n {
                    let pair = (table.conjugate_mask(h, a), table.conjugate_mask(h, b));
                    if !seen.contains(&pair) {
                        seen.push(pair);
                    }
                    if na == nb {
                        let swapped = (pair.1, pair.0);
                        if !seen.contains(&swapped) {
                            seen.push(swapped);
                        }
                    }
                }
            }
            out.push(Factorization { first: table.group_of(a)?, second: table.group_of(b)? });
        }
    }
    out.sort_by(|x, y| {
        y.first.order().cmp(&x.first.order()).then_with(|| x.second.name().cmp(&y.second.name()))
    });
    Ok(out)
}

/// Common elements of two groups, identified as a group.
pub fn intersect(a: &PointGroup, b: &PointGroup) -> Result<PointGroup, GroupError> {
    let common: Vec<GroupElement> = a.elements.iter().filter(|g| b.contains(g)).copied().collect();
    PointGroup::from_elements(common)
}
