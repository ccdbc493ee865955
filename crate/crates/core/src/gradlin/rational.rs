//! Dense exact elimination over ℚ for small matrices (fallbacks and
//! soundness cross-checks).

use num_rational::BigRational;
use num_traits::{One, Zero};

/// Row-reduced echelon data of a dense matrix given by columns.
pub struct RationalEchelon {
    pub rank: usize,
    /// Kernel basis, one dense vector per free column.
    pub kernel: Vec<Vec<BigRational>>,
}

/// `columns[j][i]` is entry `(i, j)`.
pub fn rational_echelon(nrows: usize, columns: &[Vec<BigRational>]) -> RationalEchelon {
    let ncols = columns.len();
    let mut a: Vec<Vec<BigRational>> = (0..nrows)
        .map(|i| columns.iter().map(|c| c[i].clone()).collect())
        .collect();
    let mut pivots: Vec<usize> = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        if row == nrows {
            break;
        }
        let Some(pr) = (row..nrows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(row, pr);
        let inv = BigRational::one() / &a[row][col];
        for v in a[row].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = a[row].clone();
        for (r, other) in a.iter_mut().enumerate() {
            if r == row || other[col].is_zero() {
                continue;
            }
            let factor = other[col].clone();
            for (v, p) in other.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &factor * p;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    let kernel = free
        .iter()
        .map(|&fc| {
            let mut v = vec![BigRational::zero(); ncols];
            v[fc] = BigRational::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[r][fc].clone();
            }
            v
        })
        .collect();
    RationalEchelon {
        rank: pivots.len(),
        kernel,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactring::int;

    #[test]
    fn rank_and_kernel() {
        // columns a, b, a + 2b
        let a = vec![int(1), int(0), int(3)];
        let b = vec![int(0), int(1), int(1)];
        let c = vec![int(1), int(2), int(5)];
        let e = rational_echelon(3, &[a.clone(), b.clone(), c.clone()]);
        assert_eq!(e.rank, 2);
        assert_eq!(e.kernel.len(), 1);
        let k = &e.kernel[0];
        for i in 0..3 {
            let s = &k[0] * &a[i] + &k[1] * &b[i] + &k[2] * &c[i];
            assert!(s.is_zero());
        }
    }
}
