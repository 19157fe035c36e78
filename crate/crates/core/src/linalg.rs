//! Exact linear systems A·x = b over GF(ℓ).
//!
//! Both solvers return the same canonical solution: the pivot columns are
//! the greedily chosen independent columns (left to right) and every other
//! unknown is zero.

use std::collections::BTreeMap;

use crate::modfield::PrimeField;

/// Sparse vector: `(row, value)` pairs with increasing rows and nonzero values.
pub type SparseVec = Vec<(u32, u32)>;

/// A system given column by column.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    pub field: PrimeField,
    pub nrows: usize,
    pub columns: Vec<SparseVec>,
    pub rhs: SparseVec,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Solution {
    /// Values of the unknowns, one per column.
    Consistent(Vec<u32>),
    Inconsistent,
}

/// Systems with at most this many matrix cells use dense elimination.
/// Beyond it the column-echelon solver avoids the rows × cols allocation.
pub const DENSE_CELL_LIMIT: usize = 16_000_000;

impl LinearSystem {
    pub fn ncols(&self) -> usize {
        self.columns.len()
    }

    pub fn solve(&self) -> Solution {
        if self.nrows.saturating_mul(self.ncols() + 1) <= DENSE_CELL_LIMIT {
            solve_dense(self)
        } else {
            solve_sparse(self)
        }
    }

    /// Checks A·x = b.
    pub fn is_solution(&self, x: &[u32]) -> bool {
        let f = self.field;
        let mut acc = vec![0u32; self.nrows];
        for (col, &xv) in self.columns.iter().zip(x) {
            if xv == 0 {
                continue;
            }
            for &(r, v) in col {
                acc[r as usize] = f.add(acc[r as usize], f.mul(v, xv));
            }
        }
        let mut expect = vec![0u32; self.nrows];
        for &(r, v) in &self.rhs {
            expect[r as usize] = v;
        }
        acc == expect
    }
}

/// Row reduction on a dense augmented matrix, then back substitution.
///
/// Rows are u64 accumulators reduced only when a row becomes a pivot or an
/// entry is read as a factor, which is sound while nrows·(ℓ−1)² fits.
pub fn solve_dense(sys: &LinearSystem) -> Solution {
    let f = sys.field;
    let p = f.modulus() as u64;
    let ncols = sys.ncols();
    let width = ncols + 1;
    let lazy = (p - 1)
        .checked_mul(p - 1)
        .and_then(|sq| sq.checked_mul(sys.nrows as u64 + 1))
        .is_some_and(|bound| bound < u64::MAX / 2);
    let mut m = vec![0u64; sys.nrows * width];
    for (c, col) in sys.columns.iter().enumerate() {
        for &(r, v) in col {
            m[r as usize * width + c] = v as u64;
        }
    }
    for &(r, v) in &sys.rhs {
        m[r as usize * width + ncols] = v as u64;
    }

    let mut pivots: Vec<(usize, usize)> = Vec::new(); // (row, col)
    let mut pivot_row = vec![0u32; width];
    let mut nonzero: Vec<usize> = Vec::with_capacity(width);
    let mut row = 0;
    for c in 0..ncols {
        if row == sys.nrows {
            break;
        }
        let Some(pr) = (row..sys.nrows).find(|&r| !m[r * width + c].is_multiple_of(p)) else {
            continue;
        };
        if pr != row {
            for k in c..width {
                m.swap(pr * width + k, row * width + k);
            }
        }
        let inv = f
            .inv((m[row * width + c] % p) as u32)
            .expect("pivot is nonzero") as u64;
        nonzero.clear();
        for k in c..width {
            let v = m[row * width + k] % p * inv % p;
            m[row * width + k] = v;
            pivot_row[k] = v as u32;
            if v != 0 {
                nonzero.push(k);
            }
        }
        let sparse = nonzero.len() * 4 < width - c;
        for other in m[(row + 1) * width..].chunks_mut(width) {
            let factor = other[c] % p;
            if factor == 0 {
                other[c] = 0;
                continue;
            }
            let neg = p - factor;
            if sparse {
                for &k in &nonzero {
                    other[k] += neg * pivot_row[k] as u64;
                }
            } else {
                for (o, &v) in other[c..].iter_mut().zip(&pivot_row[c..]) {
                    *o += neg * v as u64;
                }
            }
            if !lazy {
                for &k in &nonzero {
                    other[k] %= p;
                }
            }
        }
        pivots.push((row, c));
        row += 1;
    }
    if (row..sys.nrows).any(|r| !m[r * width + ncols].is_multiple_of(p)) {
        return Solution::Inconsistent;
    }
    // Non-pivot unknowns are zero; pivot rows are monic and reduced.
    let mut x = vec![0u32; ncols];
    for &(r, c) in pivots.iter().rev() {
        let row = &m[r * width..(r + 1) * width];
        let mut acc = row[ncols];
        for k in c + 1..ncols {
            if x[k] != 0 && row[k] != 0 {
                acc = (acc + (p - row[k]) * x[k] as u64) % p;
            }
        }
        x[c] = acc as u32;
    }
    Solution::Consistent(x)
}

fn axpy(f: PrimeField, y: &SparseVec, a: u32, x: &SparseVec) -> SparseVec {
    // y + a·x
    let mut out = Vec::with_capacity(y.len() + x.len());
    let (mut i, mut j) = (0, 0);
    while i < y.len() || j < x.len() {
        let take_y = j == x.len() || (i < y.len() && y[i].0 < x[j].0);
        let take_x = i == y.len() || (j < x.len() && x[j].0 < y[i].0);
        if take_y {
            out.push(y[i]);
            i += 1;
        } else if take_x {
            out.push((x[j].0, f.mul(a, x[j].1)));
            j += 1;
        } else {
            let v = f.add(y[i].1, f.mul(a, x[j].1));
            if v != 0 {
                out.push((y[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

struct EchelonVector {
    vec: SparseVec,
    // the vector as a combination of original columns
    combo: SparseVec,
}

type Echelon = BTreeMap<u32, EchelonVector>;

/// Reduces `v` against the basis, stopping at the first leading row with no
/// basis vector. With `combo`, the same operations are applied to it.
fn reduce(
    f: PrimeField,
    mut v: SparseVec,
    mut combo: Option<SparseVec>,
    basis: &Echelon,
) -> (SparseVec, Option<SparseVec>) {
    let mut start = 0usize;
    while start < v.len() {
        let (lead, val) = v[start];
        let Some(b) = basis.get(&lead) else { break };
        let a = f.neg(val);
        v = axpy(f, &v, a, &b.vec);
        if let Some(c) = combo.as_mut() {
            *c = axpy(f, c, a, &b.combo);
        }
        start = v.partition_point(|&(r, _)| r <= lead);
    }
    v.drain(..start);
    (v, combo)
}

fn insert(f: PrimeField, basis: &mut Echelon, v: SparseVec, combo: SparseVec) {
    let (lead, val) = v[0];
    let inv = f.inv(val).expect("nonzero leading entry");
    let scale = |s: SparseVec| s.into_iter().map(|(r, x)| (r, f.mul(x, inv))).collect();
    basis.insert(
        lead,
        EchelonVector {
            vec: scale(v),
            combo: scale(combo),
        },
    );
}

/// Column-echelon elimination on sparse vectors: each independent column is
/// reduced against the basis (indexed by leading row) and inserted with a
/// unit leading entry.
///
/// A first pass finds the pivot columns without tracking combinations, so
/// the many dependent columns of a wide system stay cheap. The second pass
/// tracks combinations over the pivot columns only.
pub fn solve_sparse(sys: &LinearSystem) -> Solution {
    let f = sys.field;
    let mut basis = Echelon::new();
    let mut pivots = Vec::new();
    for (c, col) in sys.columns.iter().enumerate() {
        if basis.len() == sys.nrows {
            break;
        }
        let (v, _) = reduce(f, col.clone(), None, &basis);
        if !v.is_empty() {
            insert(f, &mut basis, v, Vec::new());
            pivots.push(c);
        }
    }
    let (residual, _) = reduce(f, sys.rhs.clone(), None, &basis);
    if !residual.is_empty() {
        return Solution::Inconsistent;
    }

    let mut basis = Echelon::new();
    for &c in &pivots {
        let (v, combo) = reduce(f, sys.columns[c].clone(), Some(vec![(c as u32, 1)]), &basis);
        insert(f, &mut basis, v, combo.unwrap_or_default());
    }
    // b − Σ a_k·basis_k = 0; the combination tracks −Σ a_k·combo_k.
    let (_, combo) = reduce(f, sys.rhs.clone(), Some(Vec::new()), &basis);
    let mut x = vec![0u32; sys.ncols()];
    for (c, v) in combo.unwrap_or_default() {
        x[c as usize] = f.neg(v);
    }
    Solution::Consistent(x)
}
