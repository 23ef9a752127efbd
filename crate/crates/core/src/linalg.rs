//! Exact sparse elimination over F_q.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::gfq::{FieldElem, Gf};
use crate::induction::{InducedElement, Layout};

/// Sparse vector as strictly increasing `(index, nonzero coefficient)` pairs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SparseVec {
    pub entries: Vec<(u64, FieldElem)>,
}

impl SparseVec {
    pub fn new() -> Self {
        SparseVec { entries: Vec::new() }
    }

    pub fn from_map(map: BTreeMap<u64, FieldElem>) -> Self {
        SparseVec { entries: map.into_iter().filter(|(_, c)| !c.is_zero()).collect() }
    }

    pub fn unit(i: u64) -> Self {
        SparseVec { entries: vec![(i, FieldElem::ONE)] }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn leading(&self) -> Option<(u64, FieldElem)> {
        self.entries.first().copied()
    }

    pub fn get(&self, i: u64) -> FieldElem {
        self.entries
            .binary_search_by_key(&i, |e| e.0)
            .map_or(FieldElem::ZERO, |k| self.entries[k].1)
    }

    pub fn scaled(&self, gf: &Gf, c: FieldElem) -> SparseVec {
        if c.is_zero() {
            return SparseVec::new();
        }
        SparseVec { entries: self.entries.iter().map(|&(i, x)| (i, gf.mul(x, c))).collect() }
    }

    /// `self + c·other`.
    pub fn axpy(&self, gf: &Gf, c: FieldElem, other: &SparseVec) -> SparseVec {
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.entries, &other.entries);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                out.push(a[i]);
                i += 1;
            } else if i == a.len() || b[j].0 < a[i].0 {
                let v = gf.mul(c, b[j].1);
                if !v.is_zero() {
                    out.push((b[j].0, v));
                }
                j += 1;
            } else {
                let v = gf.mul_add(a[i].1, c, b[j].1);
                if !v.is_zero() {
                    out.push((a[i].0, v));
                }
                i += 1;
                j += 1;
            }
        }
        SparseVec { entries: out }
    }

    /// Concatenates blocks: entry `i` of `part` lands at `offset + i`.
    pub fn append_shifted(&mut self, offset: u64, part: &SparseVec) {
        debug_assert!(self.entries.last().is_none_or(|l| part.entries.first().is_none_or(|f| l.0 < offset + f.0)));
        self.entries.extend(part.entries.iter().map(|&(i, c)| (offset + i, c)));
    }
}

pub fn to_sparse(x: &InducedElement, layout: &Layout) -> SparseVec {
    let mut map = BTreeMap::new();
    for (v, val) in &x.terms {
        for (i, &c) in val.iter().enumerate() {
            if !c.is_zero() {
                map.insert(layout.index(v, i), c);
            }
        }
    }
    SparseVec::from_map(map)
}

pub fn from_sparse(s: &SparseVec, layout: &Layout) -> InducedElement {
    let mut out = InducedElement::zero();
    for &(idx, c) in &s.entries {
        let (v, b) = layout.locate(idx);
        out.terms.entry(v).or_insert_with(|| vec![FieldElem::ZERO; layout.dim])[b] = c;
    }
    out
}

#[derive(Debug, Clone)]
struct Row {
    vec: SparseVec,
    /// Coefficients of this row in terms of inserted vectors.
    combo: SparseVec,
}

/// Row echelon form keyed by pivot (each row's leading index, coefficient 1).
/// Reduction clears every pivot coordinate, so remainders are canonical
/// representatives modulo the span.
#[derive(Debug, Clone)]
pub struct Echelon {
    gf: Arc<Gf>,
    rows: BTreeMap<u64, Row>,
    inserted: u64,
}

/// Outcome of inserting a vector into a tracking echelon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Insert {
    /// The vector was independent and became a new row.
    Pivot(u64),
    /// The vector was dependent: the combination of inserted vectors (by
    /// insertion number, the new one included) that vanishes.
    Relation(SparseVec),
}

impl Echelon {
    pub fn new(gf: Arc<Gf>) -> Self {
        Echelon { gf, rows: BTreeMap::new(), inserted: 0 }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> impl Iterator<Item = u64> + '_ {
        self.rows.keys().copied()
    }

    fn reduce_inner(&self, x: &SparseVec, combo: Option<SparseVec>) -> (SparseVec, Option<SparseVec>) {
        let gf = &*self.gf;
        let mut acc: BTreeMap<u64, FieldElem> = x.entries.iter().copied().collect();
        let mut combo = combo;
        let mut out = Vec::new();
        while let Some((k, c)) = acc.pop_first() {
            match self.rows.get(&k) {
                Some(row) => {
                    let neg = gf.neg(c);
                    for &(i, v) in &row.vec.entries[1..] {
                        let slot = acc.entry(i).or_insert(FieldElem::ZERO);
                        *slot = gf.mul_add(*slot, neg, v);
                        if slot.is_zero() {
                            acc.remove(&i);
                        }
                    }
                    if let Some(cm) = combo.as_mut() {
                        *cm = cm.axpy(gf, neg, &row.combo);
                    }
                }
                None => out.push((k, c)),
            }
        }
        (SparseVec { entries: out }, combo)
    }

    /// Canonical representative of `x` modulo the row span.
    pub fn reduce(&self, x: &SparseVec) -> SparseVec {
        self.reduce_inner(x, None).0
    }

    pub fn contains(&self, x: &SparseVec) -> bool {
        self.reduce(x).is_zero()
    }

    /// Inserts `x`; returns whether the rank grew.
    pub fn insert(&mut self, x: &SparseVec) -> bool {
        matches!(self.insert_tracked(x), Insert::Pivot(_))
    }

    /// Inserts `x` as vector number `self.inserted`, tracking combinations.
    pub fn insert_tracked(&mut self, x: &SparseVec) -> Insert {
        let id = self.inserted;
        self.inserted += 1;
        let (rem, combo) = self.reduce_inner(x, Some(SparseVec::unit(id)));
        let combo = combo.expect("tracking requested");
        match rem.leading() {
            None => Insert::Relation(combo),
            Some((pivot, lead)) => {
                let inv = self.gf.inv(lead).expect("nonzero leading coefficient");
                self.rows.insert(pivot, Row { vec: rem.scaled(&self.gf, inv), combo: combo.scaled(&self.gf, inv) });
                Insert::Pivot(pivot)
            }
        }
    }
}

/// Rank of dense rows by plain Gaussian elimination; the cross-check for
/// the sparse path.
pub fn dense_rank(gf: &Gf, rows: &[Vec<FieldElem>]) -> usize {
    let mut m: Vec<Vec<FieldElem>> = rows.to_vec();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..cols {
        let Some(piv) = (rank..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(rank, piv);
        let inv = gf.inv(m[rank][col]).expect("nonzero pivot");
        let pivot_row: Vec<FieldElem> = m[rank].iter().map(|&x| gf.mul(x, inv)).collect();
        for (i, row) in m.iter_mut().enumerate() {
            if i != rank && !row[col].is_zero() {
                let c = gf.neg(row[col]);
                for (x, &y) in row.iter_mut().zip(&pivot_row) {
                    *x = gf.mul_add(*x, c, y);
                }
            }
        }
        m[rank] = pivot_row;
        rank += 1;
    }
    rank
}

/// Dense rank of sparse vectors over the given coordinate range.
pub fn dense_rank_sparse(gf: &Gf, vecs: &[SparseVec]) -> usize {
    let mut index: BTreeMap<u64, usize> = BTreeMap::new();
    for v in vecs {
        for &(i, _) in &v.entries {
            let next = index.len();
            index.entry(i).or_insert(next);
        }
    }
    let rows: Vec<Vec<FieldElem>> = vecs
        .iter()
        .map(|v| {
            let mut row = vec![FieldElem::ZERO; index.len()];
            for &(i, c) in &v.entries {
                row[index[&i]] = c;
            }
            row
        })
        .collect();
    dense_rank(gf, &rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(gf: &Gf, e: &[(u64, i64)]) -> SparseVec {
        SparseVec::from_map(e.iter().map(|&(i, c)| (i, gf.from_int(c))).collect())
    }

    #[test]
    fn echelon_tracks_relations() {
        let gf = Arc::new(Gf::new(7, 1).unwrap());
        let mut ech = Echelon::new(gf.clone());
        let a = sv(&gf, &[(0, 1), (3, 2)]);
        let b = sv(&gf, &[(1, 5), (3, 1)]);
        let c = a.axpy(&gf, gf.from_int(3), &b);
        assert!(matches!(ech.insert_tracked(&a), Insert::Pivot(0)));
        assert!(matches!(ech.insert_tracked(&b), Insert::Pivot(1)));
        let Insert::Relation(rel) = ech.insert_tracked(&c) else { panic!("dependent") };
        // c − a − 3b = 0
        assert_eq!(rel, sv(&gf, &[(0, -1), (1, -3), (2, 1)]));
        assert_eq!(ech.rank(), 2);
    }

    #[test]
    fn remainders_are_canonical() {
        let gf = Arc::new(Gf::new(5, 2).unwrap());
        let mut ech = Echelon::new(gf.clone());
        ech.insert(&sv(&gf, &[(2, 1), (4, 3)]));
        ech.insert(&sv(&gf, &[(0, 2), (2, 1), (5, 1)]));
        let x = sv(&gf, &[(0, 1), (4, 4), (6, 2)]);
        let y = x.axpy(&gf, gf.elem(13), &sv(&gf, &[(2, 1), (4, 3)]));
        assert_eq!(ech.reduce(&x), ech.reduce(&y));
        assert!(ech.reduce(&x).entries.iter().all(|(i, _)| *i != 0 && *i != 2));
    }

    #[test]
    fn dense_and_sparse_ranks_agree() {
        let gf = Arc::new(Gf::new(3, 2).unwrap());
        let vs: Vec<SparseVec> = (0..6u64)
            .map(|k| sv(&gf, &[(k % 4, 1), ((k * 5) % 7, 2), (k / 2, 1)]))
            .collect();
        let mut ech = Echelon::new(gf.clone());
        for v in &vs {
            ech.insert(v);
        }
        assert_eq!(ech.rank(), dense_rank_sparse(&gf, &vs));
    }
}
