//! Exact linear algebra over Q.
//!
//! Everything here works on tiny matrices (bidegree dimensions never exceed
//! three), so the routines favour determinism over speed: pivots are always
//! the first nonzero entry in row order.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Arbitrary-precision rational, always stored in lowest terms with a
/// positive denominator.
pub type Rational = BigRational;

/// Dense coordinate vector.
pub type Vector = Vec<Rational>;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn zero_vector(len: usize) -> Vector {
    vec![Rational::zero(); len]
}

pub fn unit_vector(len: usize, at: usize) -> Vector {
    let mut v = zero_vector(len);
    v[at] = Rational::one();
    v
}

pub fn is_zero_vector(v: &[Rational]) -> bool {
    v.iter().all(Zero::is_zero)
}

pub fn add_scaled(acc: &mut [Rational], scale: &Rational, v: &[Rational]) {
    if scale.is_zero() {
        return;
    }
    for (a, x) in acc.iter_mut().zip(v) {
        if !x.is_zero() {
            *a += scale * x;
        }
    }
}

pub fn scale_vector(v: &[Rational], s: &Rational) -> Vector {
    v.iter().map(|x| x * s).collect()
}

/// Linear combination `sum coeffs[i] * vectors[i]`.
pub fn combine(len: usize, coeffs: &[Rational], vectors: &[Vector]) -> Vector {
    let mut out = zero_vector(len);
    for (c, v) in coeffs.iter().zip(vectors) {
        add_scaled(&mut out, c, v);
    }
    out
}

/// Scale so that the first nonzero entry is one.
pub fn normalize_leading(v: &[Rational]) -> Vector {
    match v.iter().find(|x| !x.is_zero()) {
        Some(lead) => {
            let inv = lead.recip();
            scale_vector(v, &inv)
        }
        None => v.to_vec(),
    }
}

/// Sparse matrix with no stored zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    entries: BTreeMap<(usize, usize), Rational>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            entries: BTreeMap::new(),
        }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Matrix::zeros(size, size);
        for i in 0..size {
            m.set(i, i, Rational::one());
        }
        m
    }

    /// Builds a matrix from dense rows; all rows must have length `cols`.
    pub fn from_rows(cols: usize, rows: &[Vector]) -> Self {
        let mut m = Matrix::zeros(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "row {i} has wrong length");
            for (j, x) in row.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        m
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[Vector]) -> Self {
        let mut m = Matrix::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column {j} has wrong length");
            for (i, x) in col.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> Rational {
        self.entries
            .get(&(row, col))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn set(&mut self, row: usize, col: usize, value: Rational) {
        assert!(row < self.rows && col < self.cols, "index out of bounds");
        if value.is_zero() {
            self.entries.remove(&(row, col));
        } else {
            self.entries.insert((row, col), value);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nonzero_entries(&self) -> impl Iterator<Item = (&(usize, usize), &Rational)> {
        self.entries.iter()
    }

    pub fn row(&self, i: usize) -> Vector {
        (0..self.cols).map(|j| self.get(i, j)).collect()
    }

    pub fn column(&self, j: usize) -> Vector {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn to_dense_rows(&self) -> Vec<Vector> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vector {
        assert_eq!(v.len(), self.cols, "dimension mismatch");
        let mut out = zero_vector(self.rows);
        for (&(i, j), x) in &self.entries {
            if !v[j].is_zero() {
                out[i] += x * &v[j];
            }
        }
        out
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for (&(i, k), x) in &self.entries {
            for j in 0..other.cols {
                let y = other.get(k, j);
                if !y.is_zero() {
                    let cur = out.get(i, j);
                    out.set(i, j, cur + x * y);
                }
            }
        }
        out
    }
}

/// Reduced row echelon form of the given rows. Returns the nonzero reduced
/// rows and their pivot columns.
pub fn rref(cols: usize, rows: &[Vector]) -> (Vec<Vector>, Vec<usize>) {
    let mut work: Vec<Vector> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..cols {
        let Some(found) = (rank..work.len()).find(|&i| !work[i][col].is_zero()) else {
            continue;
        };
        work.swap(rank, found);
        let inv = work[rank][col].recip();
        work[rank] = scale_vector(&work[rank], &inv);
        let pivot_row = work[rank].clone();
        for (i, row) in work.iter_mut().enumerate() {
            if i != rank && !row[col].is_zero() {
                let factor = -row[col].clone();
                add_scaled(row, &factor, &pivot_row);
            }
        }
        pivots.push(col);
        rank += 1;
        if rank == work.len() {
            break;
        }
    }
    work.truncate(rank);
    (work, pivots)
}

pub fn rank(m: &Matrix) -> usize {
    rref(m.cols(), &m.to_dense_rows()).0.len()
}

/// Basis of the null space, one vector per free column, with a one in that
/// free column.
pub fn kernel_basis(m: &Matrix) -> Vec<Vector> {
    let cols = m.cols();
    let (reduced, pivots) = rref(cols, &m.to_dense_rows());
    let mut basis = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = unit_vector(cols, free);
        for (row, &pc) in reduced.iter().zip(&pivots) {
            v[pc] = -row[free].clone();
        }
        basis.push(v);
    }
    basis
}

/// A subspace of Q^dim kept in reduced row echelon form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subspace {
    dim: usize,
    rows: Vec<Vector>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(dim: usize) -> Self {
        Subspace {
            dim,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn full(dim: usize) -> Self {
        Subspace::span(dim, &(0..dim).map(|i| unit_vector(dim, i)).collect::<Vec<_>>())
    }

    pub fn span(dim: usize, vectors: &[Vector]) -> Self {
        let (rows, pivots) = rref(dim, vectors);
        Subspace { dim, rows, pivots }
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn basis(&self) -> &[Vector] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Subtract multiples of the echelon rows so that `v` vanishes on every
    /// pivot column.
    pub fn reduce(&self, v: &[Rational]) -> Vector {
        let mut out = v.to_vec();
        for (row, &pc) in self.rows.iter().zip(&self.pivots) {
            if !out[pc].is_zero() {
                let factor = -out[pc].clone();
                add_scaled(&mut out, &factor, row);
            }
        }
        out
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        is_zero_vector(&self.reduce(v))
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        other.rows.iter().all(|v| self.contains(v))
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        let mut all = self.rows.clone();
        all.extend(other.rows.iter().cloned());
        Subspace::span(self.dim, &all)
    }

    pub fn with(&self, vectors: &[Vector]) -> Subspace {
        let mut all = self.rows.clone();
        all.extend(vectors.iter().cloned());
        Subspace::span(self.dim, &all)
    }
}

/// Coordinates of `v` in terms of `basis` (assumed independent), or `None`
/// when `v` is not in their span.
pub fn solve_in_span(basis: &[Vector], v: &[Rational]) -> Option<Vector> {
    let len = v.len();
    if basis.is_empty() {
        return is_zero_vector(v).then(Vec::new);
    }
    // Solve B^T c = v via elimination on the augmented system.
    let k = basis.len();
    let rows: Vec<Vector> = (0..len)
        .map(|i| {
            let mut row: Vector = basis.iter().map(|b| b[i].clone()).collect();
            row.push(v[i].clone());
            row
        })
        .collect();
    let (reduced, pivots) = rref(k + 1, &rows);
    if pivots.contains(&k) {
        return None;
    }
    let mut coeffs = zero_vector(k);
    for (row, &pc) in reduced.iter().zip(&pivots) {
        coeffs[pc] = row[k].clone();
    }
    Some(coeffs)
}

/// Representatives completing a subspace to a basis of the ambient space,
/// together with the projector onto quotient coordinates.
#[derive(Clone, Debug)]
pub struct QuotientBasis {
    pub representatives: Vec<Vector>,
    /// `representatives.len() x ambient_dim`; rows give quotient coordinates.
    pub projector: Matrix,
}

pub fn quotient_basis(ambient_dim: usize, subspace: &[Vector]) -> QuotientBasis {
    let sub = Subspace::span(ambient_dim, subspace);
    let representatives: Vec<Vector> = (0..ambient_dim)
        .filter(|c| !sub.pivots().contains(c))
        .map(|c| unit_vector(ambient_dim, c))
        .collect();
    // Writing v = s + sum beta_j e_{free_j}, the quotient coordinates of v are
    // the free-column entries of v reduced against the echelon rows.
    let free: Vec<usize> = (0..ambient_dim)
        .filter(|c| !sub.pivots().contains(c))
        .collect();
    let mut projector = Matrix::zeros(free.len(), ambient_dim);
    for col in 0..ambient_dim {
        let reduced = sub.reduce(&unit_vector(ambient_dim, col));
        for (j, &fc) in free.iter().enumerate() {
            projector.set(j, col, reduced[fc].clone());
        }
    }
    QuotientBasis {
        representatives,
        projector,
    }
}

/// Representatives of `span / sub` chosen greedily from `span` in order;
/// `sub` must be contained in `span`.
pub fn complement_in(dim: usize, span: &[Vector], sub: &Subspace) -> Vec<Vector> {
    let mut acc = sub.clone();
    let mut reps = Vec::new();
    for v in span {
        if !acc.contains(v) {
            reps.push(v.clone());
            acc = acc.with(std::slice::from_ref(v));
        }
    }
    debug_assert_eq!(acc.ambient_dim(), dim);
    reps
}

pub fn format_rational(x: &Rational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn abs(x: &Rational) -> Rational {
    x.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> Matrix {
        let cols = rows.first().map_or(0, |r| r.len());
        let dense: Vec<Vector> = rows
            .iter()
            .map(|r| r.iter().map(|&x| rat(x)).collect())
            .collect();
        Matrix::from_rows(cols, &dense)
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&m(&[&[1, 2], &[2, 4]])), 1);
        assert_eq!(rank(&Matrix::zeros(0, 0)), 0);
        assert_eq!(rank(&Matrix::identity(3)), 3);
    }

    #[test]
    fn kernel_examples() {
        let k = kernel_basis(&m(&[&[1, 1]]));
        assert_eq!(k.len(), 1);
        assert_eq!(normalize_leading(&k[0]), vec![rat(1), rat(-1)]);

        assert!(kernel_basis(&Matrix::identity(2)).is_empty());

        // 2a + 4b = 0 by hand: (a, b) = (2, -1) up to scale.
        let k = kernel_basis(&m(&[&[2, 4], &[1, 2]]));
        assert_eq!(k.len(), 1);
        assert_eq!(normalize_leading(&k[0]), vec![rat(1), frac(-1, 2)]);
        assert_eq!(scale_vector(&k[0], &rat(-1)), vec![rat(2), rat(-1)]);
    }

    #[test]
    fn quotient_examples() {
        let q = quotient_basis(2, &[vec![rat(1), rat(0)]]);
        assert_eq!(q.representatives, vec![vec![rat(0), rat(1)]]);

        let q = quotient_basis(3, &[]);
        assert_eq!(q.representatives.len(), 3);

        let q = quotient_basis(2, &[vec![rat(1), rat(1)], vec![rat(2), rat(2)]]);
        assert_eq!(q.representatives.len(), 1);
        // projector kills the subspace
        assert!(is_zero_vector(&q.projector.mul_vec(&[rat(1), rat(1)])));
        assert_eq!(q.projector.mul_vec(&q.representatives[0]), vec![rat(1)]);
    }

    #[test]
    fn solve_and_contains() {
        let basis = vec![vec![rat(1), rat(1), rat(0)], vec![rat(0), rat(1), rat(1)]];
        let c = solve_in_span(&basis, &[rat(2), rat(5), rat(3)]).unwrap();
        assert_eq!(c, vec![rat(2), rat(3)]);
        assert!(solve_in_span(&basis, &[rat(1), rat(0), rat(0)]).is_none());
        let s = Subspace::span(3, &basis);
        assert!(s.contains(&[rat(1), rat(2), rat(1)]));
        assert!(!s.contains(&[rat(0), rat(0), rat(1)]));
    }

    #[test]
    fn matrix_stores_no_zeros() {
        let mut a = Matrix::zeros(2, 2);
        a.set(0, 1, rat(3));
        a.set(0, 1, rat(0));
        assert!(a.is_zero());
        let b = m(&[&[1, 2], &[3, 4]]);
        assert_eq!(b.mul(&Matrix::identity(2)), b);
        assert_eq!(b.mul_vec(&[rat(1), rat(1)]), vec![rat(3), rat(7)]);
    }

    #[test]
    fn rationals_are_normalized() {
        let x = frac(6, -4);
        assert_eq!(x.numer(), &BigInt::from(-3));
        assert_eq!(x.denom(), &BigInt::from(2));
        assert_eq!(format_rational(&x), "-3/2");
        assert_eq!(format_rational(&rat(0)), "0");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn matrix_strategy() -> impl Strategy<Value = Matrix> {
            (0usize..5, 0usize..5).prop_flat_map(|(r, c)| {
                proptest::collection::vec(proptest::collection::vec(-3i64..4, c), r)
                    .prop_map(move |rows| {
                        let dense: Vec<Vector> = rows
                            .iter()
                            .map(|row| row.iter().map(|&x| rat(x)).collect())
                            .collect();
                        Matrix::from_rows(c, &dense)
                    })
            })
        }

        proptest! {
            #[test]
            fn rank_nullity(mat in matrix_strategy()) {
                let k = kernel_basis(&mat);
                prop_assert_eq!(rank(&mat) + k.len(), mat.cols());
                for v in &k {
                    prop_assert!(is_zero_vector(&mat.mul_vec(v)));
                }
            }

            #[test]
            fn quotient_projector_idempotent(mat in matrix_strategy()) {
                let dim = mat.cols();
                let sub = mat.to_dense_rows();
                let q = quotient_basis(dim, &sub);
                prop_assert_eq!(q.representatives.len() + rank(&mat), dim);
                for v in &sub {
                    prop_assert!(is_zero_vector(&q.projector.mul_vec(v)));
                }
                for (j, r) in q.representatives.iter().enumerate() {
                    prop_assert_eq!(q.projector.mul_vec(r), unit_vector(q.representatives.len(), j));
                }
            }
        }
    }
}
