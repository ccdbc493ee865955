//! Left-looking sparse echelon form over F_p.
//!
//! Columns are inserted one at a time and reduced against the stored basis
//! by their first nonzero row. Multiplication-map columns `μ·g` have
//! pairwise distinct leading rows within a block, so the first block enters
//! the basis without any reduction at all.

use crate::exactring::Modulus;

const NONE: u32 = u32::MAX;

/// Sparse bitset over `0..len` marking possibly-nonzero positions.
struct Marks {
    words: Vec<u64>,
}

impl Marks {
    fn new(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
        }
    }

    #[inline]
    fn set(&mut self, i: usize) {
        self.words[i >> 6] |= 1 << (i & 63);
    }

    #[inline]
    fn clear(&mut self, i: usize) {
        self.words[i >> 6] &= !(1 << (i & 63));
    }

    /// Smallest marked index `>= from`.
    #[inline]
    fn next(&self, from: usize) -> Option<usize> {
        let mut w = from >> 6;
        if w >= self.words.len() {
            return None;
        }
        let mut bits = self.words[w] & (!0u64 << (from & 63));
        loop {
            if bits != 0 {
                return Some((w << 6) | bits.trailing_zeros() as usize);
            }
            w += 1;
            if w >= self.words.len() {
                return None;
            }
            bits = self.words[w];
        }
    }
}

/// Dense scratch vector with marks for fast sparse traversal.
struct Scratch {
    vals: Vec<u64>,
    marks: Marks,
}

impl Scratch {
    fn new(len: usize) -> Self {
        Self {
            vals: vec![0; len],
            marks: Marks::new(len),
        }
    }

    #[inline]
    fn sub_scaled(&mut self, md: &Modulus, scale: u64, entries: &[(u32, u64)]) {
        for &(i, v) in entries {
            let i = i as usize;
            self.vals[i] = md.sub(self.vals[i], md.mul(scale, v));
            self.marks.set(i);
        }
    }

    /// Drains nonzero entries at indices `>= from`, scaled by `scale`.
    fn drain_from(&mut self, md: &Modulus, from: usize, scale: u64) -> Vec<(u32, u64)> {
        let mut out = Vec::new();
        let mut i = from;
        while let Some(j) = self.marks.next(i) {
            self.marks.clear(j);
            let v = std::mem::take(&mut self.vals[j]);
            if v != 0 {
                out.push((j as u32, md.mul(v, scale)));
            }
            i = j + 1;
        }
        out
    }
}

pub enum Insertion {
    Independent,
    /// The column was dependent; carries the kernel relation (column index,
    /// residue) when relation tracking is on.
    Dependent(Option<Vec<(u32, u64)>>),
}

pub struct Echelon {
    md: Modulus,
    pivot_of_row: Vec<u32>,
    /// Basis vectors without their (unit) pivot entry, Montgomery form.
    basis: Vec<Vec<(u32, u64)>>,
    /// Each basis vector as a combination of inserted columns.
    relations: Option<Vec<Vec<(u32, u64)>>>,
    rows: Scratch,
    cols: Option<Scratch>,
    one: u64,
}

impl Echelon {
    /// `ncols` bounds the column indices when relations are tracked.
    pub fn new(modulus: u64, nrows: usize, track_relations: Option<usize>) -> Self {
        let md = Modulus::new(modulus);
        Self {
            md,
            pivot_of_row: vec![NONE; nrows],
            basis: Vec::new(),
            relations: track_relations.map(|_| Vec::new()),
            rows: Scratch::new(nrows),
            cols: track_relations.map(Scratch::new),
            one: md.to_mont(1),
        }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn nrows(&self) -> usize {
        self.pivot_of_row.len()
    }

    /// Inserts column `index` given as sorted `(row, residue)` pairs.
    pub fn insert(&mut self, index: usize, column: &[(u32, u64)]) -> Insertion {
        let md = self.md;
        for &(r, v) in column {
            let r = r as usize;
            self.rows.vals[r] = md.to_mont(v);
            self.rows.marks.set(r);
        }
        if let Some(c) = self.cols.as_mut() {
            c.vals[index] = self.one;
            c.marks.set(index);
        }
        let mut from = 0;
        while let Some(r) = self.rows.marks.next(from) {
            self.rows.marks.clear(r);
            let v = std::mem::take(&mut self.rows.vals[r]);
            from = r + 1;
            if v == 0 {
                continue;
            }
            let b = self.pivot_of_row[r];
            if b != NONE {
                self.rows.sub_scaled(&md, v, &self.basis[b as usize]);
                if let (Some(c), Some(rel)) = (self.cols.as_mut(), self.relations.as_ref()) {
                    c.sub_scaled(&md, v, &rel[b as usize]);
                }
                continue;
            }
            let inv = md.inv(v);
            let entries = self.rows.drain_from(&md, r + 1, inv);
            self.pivot_of_row[r] = self.basis.len() as u32;
            self.basis.push(entries);
            if let (Some(c), Some(rel)) = (self.cols.as_mut(), self.relations.as_mut()) {
                rel.push(c.drain_from(&md, 0, inv));
            }
            return Insertion::Independent;
        }
        match self.cols.as_mut() {
            Some(c) => {
                let rel = c
                    .drain_from(&md, 0, self.one)
                    .into_iter()
                    .map(|(i, v)| (i, md.from_mont(v)))
                    .collect();
                Insertion::Dependent(Some(rel))
            }
            None => Insertion::Dependent(None),
        }
    }
}

/// Rank of a list of sparse columns.
pub fn rank_of_columns(modulus: u64, nrows: usize, columns: &[Vec<(u32, u64)>]) -> usize {
    let mut ech = Echelon::new(modulus, nrows, None);
    for (j, col) in columns.iter().enumerate() {
        if ech.rank() == nrows {
            break;
        }
        ech.insert(j, col);
    }
    ech.rank()
}

/// A basis of the kernel (relations among columns), residues in standard form.
pub fn kernel_of_columns(
    modulus: u64,
    nrows: usize,
    columns: &[Vec<(u32, u64)>],
) -> Vec<Vec<(u32, u64)>> {
    let mut ech = Echelon::new(modulus, nrows, Some(columns.len()));
    let mut kernel = Vec::new();
    for (j, col) in columns.iter().enumerate() {
        if let Insertion::Dependent(Some(rel)) = ech.insert(j, col) {
            kernel.push(rel);
        }
    }
    kernel
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactring::mul_mod;

    const P: u64 = 1_000_000_007;

    #[test]
    fn identity_has_full_rank() {
        let cols: Vec<Vec<(u32, u64)>> = (0..50).map(|i| vec![(i as u32, 1)]).collect();
        assert_eq!(rank_of_columns(P, 50, &cols), 50);
    }

    #[test]
    fn integer_combination_is_detected() {
        let a = vec![(0, 1), (2, 5), (3, 7)];
        let b = vec![(1, 3), (2, 1)];
        let c = vec![(0, 2), (1, P - 9), (2, 7), (3, 14)]; // 2a - 3b
        let cols = vec![a, b, c];
        assert_eq!(rank_of_columns(P, 4, &cols), 2);
        let ker = kernel_of_columns(P, 4, &cols);
        assert_eq!(ker.len(), 1);
        // relation: c - 2a + 3b = 0 up to scaling
        let rel = &ker[0];
        let get = |j: u32| rel.iter().find(|e| e.0 == j).map(|e| e.1).unwrap_or(0);
        assert_eq!(mul_mod(get(0), 1, P), (P - 2 * get(2) % P) % P);
        assert_eq!(get(1), mul_mod(3, get(2), P));
    }

    #[test]
    fn kernel_vectors_annihilate() {
        // random dense 6x9 matrix: kernel dim >= 3
        let mut seed = 12345u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 33) % 7
        };
        let cols: Vec<Vec<(u32, u64)>> = (0..9)
            .map(|_| (0..6u32).map(|r| (r, next())).filter(|e| e.1 != 0).collect())
            .collect();
        let ker = kernel_of_columns(P, 6, &cols);
        assert_eq!(ker.len(), 9 - rank_of_columns(P, 6, &cols));
        for rel in &ker {
            let mut acc = [0u64; 6];
            for &(j, c) in rel {
                for &(r, v) in &cols[j as usize] {
                    acc[r as usize] = (acc[r as usize] + mul_mod(c, v, P)) % P;
                }
            }
            assert!(acc.iter().all(|&v| v == 0));
        }
    }
}
