use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Dense matrix over the rationals. Row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ExactMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

/// Smith form `u * a * v = diag` with `u`, `v` unimodular.
#[derive(Clone, Debug)]
pub struct Smith {
    pub diag: Vec<BigInt>,
    pub u: ExactMatrix,
    pub v: ExactMatrix,
}

impl ExactMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ExactMatrix { rows, cols, data: vec![Rat::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Rat::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Rat>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        ExactMatrix { rows: rows.len(), cols, data: rows.concat() }
    }

    /// Builds from integer rows; `cols` is needed when `rows` is empty.
    pub fn from_int_rows<T: Copy + Into<i64>>(rows: &[Vec<T>], cols: usize) -> Self {
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged rows");
            for (j, &x) in r.iter().enumerate() {
                m.data[i * cols + j] = rat(x.into());
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

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: Rat) {
        self.data[i * self.cols + j] = x;
    }

    pub fn row(&self, i: usize) -> &[Rat] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<Rat>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j).clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &ExactMatrix) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> Self {
        ExactMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * c).collect() }
    }

    pub fn vstack(&self, other: &ExactMatrix) -> Self {
        assert_eq!(self.cols, other.cols, "dimension mismatch");
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        ExactMatrix { rows: self.rows + other.rows, cols: self.cols, data }
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn is_integral(&self) -> bool {
        self.data.iter().all(|x| x.is_integer())
    }

    /// Least common multiple of all entry denominators.
    pub fn denominator(&self) -> BigInt {
        self.data.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
    }

    /// Integer entries; panics on non-integral input.
    pub fn to_int_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .map(|x| {
                        assert!(x.is_integer(), "non-integral entry");
                        x.to_integer()
                    })
                    .collect()
            })
            .collect()
    }

    pub fn from_big_rows(rows: &[Vec<BigInt>], cols: usize) -> Self {
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            for (j, x) in r.iter().enumerate() {
                m.data[i * cols + j] = Rat::from_integer(x.clone());
            }
        }
        m
    }

    /// Row echelon reduction over the rationals. Returns (reduced matrix, pivot columns, determinant factor).
    fn eliminate(&self) -> (ExactMatrix, Vec<usize>, Rat) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut det = Rat::one();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
                det = Rat::zero();
                continue;
            };
            if p != r {
                m.swap_rows(p, r);
                det = -det;
            }
            let piv = m.get(r, c).clone();
            det *= &piv;
            for j in 0..m.cols {
                let x = m.get(r, j) / &piv;
                m.set(r, j, x);
            }
            for i in 0..m.rows {
                if i == r || m.get(i, c).is_zero() {
                    continue;
                }
                let f = m.get(i, c).clone();
                for j in 0..m.cols {
                    let x = m.get(i, j) - &f * m.get(r, j);
                    m.set(i, j, x);
                }
            }
            pivots.push(c);
            r += 1;
        }
        if r < m.rows {
            det = Rat::zero();
        }
        (m, pivots, det)
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        self.eliminate().1.len()
    }

    pub fn det(&self) -> Rat {
        assert!(self.is_square(), "determinant of non-square matrix");
        if self.rows == 0 {
            return Rat::one();
        }
        self.eliminate().2
    }

    pub fn inverse(&self) -> Option<ExactMatrix> {
        assert!(self.is_square(), "inverse of non-square matrix");
        let n = self.rows;
        let mut aug = Self::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, n + i, Rat::one());
        }
        let (red, pivots, _) = aug.eliminate();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let mut inv = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv.set(i, j, red.get(i, n + j).clone());
            }
        }
        Some(inv)
    }

    /// Solves `x * self = b` for a row vector `x`, if a solution exists.
    pub fn solve_left(&self, b: &[Rat]) -> Option<Vec<Rat>> {
        assert_eq!(b.len(), self.cols);
        // x * A = b  <=>  A^T x^T = b^T
        let at = self.transpose();
        let mut aug = Self::zeros(at.rows, at.cols + 1);
        for (i, bi) in b.iter().enumerate() {
            for j in 0..at.cols {
                aug.set(i, j, at.get(i, j).clone());
            }
            aug.set(i, at.cols, bi.clone());
        }
        let (red, pivots, _) = aug.eliminate();
        if pivots.last() == Some(&at.cols) {
            return None;
        }
        let mut x = vec![Rat::zero(); at.cols];
        for (r, &c) in pivots.iter().enumerate() {
            x[c] = red.get(r, at.cols).clone();
        }
        Some(x)
    }

    /// Hermite normal form of the Z-span of the rows. Zero rows are dropped.
    pub fn hnf(&self) -> ExactMatrix {
        let d = self.denominator();
        let scaled = self.scale(&Rat::from_integer(d.clone()));
        let h = hnf_int(scaled.to_int_rows(), self.cols);
        ExactMatrix::from_big_rows(&h, self.cols).scale(&Rat::new(BigInt::one(), d))
    }

    /// Smith normal form of an integral matrix.
    pub fn snf(&self) -> Smith {
        assert!(self.is_integral(), "Smith form needs integral entries");
        snf_int(self.to_int_rows(), self.rows, self.cols)
    }
}

impl fmt::Debug for ExactMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for ExactMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let cells: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "[{}]", cells.join(" "))?;
        }
        Ok(())
    }
}

fn floor_div(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_floor(b)
}

fn hnf_int(mut a: Vec<Vec<BigInt>>, cols: usize) -> Vec<Vec<BigInt>> {
    let mut r = 0;
    for c in 0..cols {
        if r == a.len() {
            break;
        }
        // gcd-combine column c over rows r.. into row r
        loop {
            let mut best: Option<usize> = None;
            for i in r..a.len() {
                if !a[i][c].is_zero() && best.is_none_or(|b| a[i][c].abs() < a[b][c].abs()) {
                    best = Some(i);
                }
            }
            let Some(b) = best else { break };
            a.swap(r, b);
            let mut done = true;
            for i in r + 1..a.len() {
                if a[i][c].is_zero() {
                    continue;
                }
                let q = floor_div(&a[i][c], &a[r][c]);
                let pivot_row = a[r].clone();
                for (x, p) in a[i].iter_mut().zip(&pivot_row) {
                    *x -= &q * p;
                }
                if !a[i][c].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if a[r][c].is_zero() {
            continue;
        }
        if a[r][c].is_negative() {
            for x in a[r].iter_mut() {
                *x = -x.clone();
            }
        }
        let pivot_row = a[r].clone();
        for row in &mut a[..r] {
            let q = floor_div(&row[c], &pivot_row[c]);
            if !q.is_zero() {
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    *x -= &q * p;
                }
            }
        }
        r += 1;
    }
    a.truncate(r);
    a
}

fn snf_int(mut a: Vec<Vec<BigInt>>, rows: usize, cols: usize) -> Smith {
    let mut u: Vec<Vec<BigInt>> =
        (0..rows).map(|i| (0..rows).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect();
    let mut v: Vec<Vec<BigInt>> =
        (0..cols).map(|i| (0..cols).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect();
    let n = rows.min(cols);
    let mut diag = Vec::new();
    for t in 0..n {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if !a[i][j].is_zero() && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else { break };
            a.swap(t, bi);
            u.swap(t, bi);
            for row in a.iter_mut() {
                row.swap(t, bj);
            }
            for row in v.iter_mut() {
                row.swap(t, bj);
            }
            let mut clean = true;
            for i in t + 1..rows {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = floor_div(&a[i][t], &a[t][t]);
                let (ta, ua) = (a[t].clone(), u[t].clone());
                for (x, p) in a[i].iter_mut().zip(&ta) {
                    *x -= &q * p;
                }
                for (x, p) in u[i].iter_mut().zip(&ua) {
                    *x -= &q * p;
                }
                if !a[i][t].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..cols {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = floor_div(&a[t][j], &a[t][t]);
                for row in a.iter_mut() {
                    let p = row[t].clone();
                    row[j] -= &q * p;
                }
                for row in v.iter_mut() {
                    let p = row[t].clone();
                    row[j] -= &q * p;
                }
                if !a[t][j].is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            let piv = a[t][t].clone();
            let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !a[i][j].is_multiple_of(&piv)));
            match bad {
                Some(i) => {
                    let (ai, ui) = (a[i].clone(), u[i].clone());
                    for (x, p) in a[t].iter_mut().zip(&ai) {
                        *x += p;
                    }
                    for (x, p) in u[t].iter_mut().zip(&ui) {
                        *x += p;
                    }
                }
                None => break,
            }
        }
        if a[t][t].is_zero() {
            break;
        }
        if a[t][t].is_negative() {
            for x in a[t].iter_mut() {
                *x = -x.clone();
            }
            for x in u[t].iter_mut() {
                *x = -x.clone();
            }
        }
        diag.push(a[t][t].clone());
    }
    Smith { diag, u: ExactMatrix::from_big_rows(&u, rows), v: ExactMatrix::from_big_rows(&v, cols) }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> ExactMatrix {
        let v: Vec<Vec<i64>> = rows.iter().map(|r| r.to_vec()).collect();
        ExactMatrix::from_int_rows(&v, rows[0].len())
    }

    #[test]
    fn smith_transforms_reproduce_diagonal() {
        let a = m(&[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]]);
        let s = a.snf();
        assert_eq!(s.diag, vec![BigInt::from(2), BigInt::from(6), BigInt::from(12)]);
        let d = s.u.mul(&a).mul(&s.v);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { Rat::from_integer(s.diag[i].clone()) } else { rat(0) };
                assert_eq!(d.get(i, j), &want);
            }
        }
        assert_eq!(s.u.det().abs(), rat(1));
        assert_eq!(s.v.det().abs(), rat(1));
    }

    #[test]
    fn hnf_of_dependent_rows() {
        let a = m(&[&[2, 0], &[0, 3], &[2, 3]]);
        let h = a.hnf();
        assert_eq!(h, m(&[&[2, 0], &[0, 3]]));
    }

    #[test]
    fn hnf_rational_rows() {
        let a = ExactMatrix::from_rows(&[vec![frac(1, 2), rat(0)], vec![rat(1), rat(1)]]);
        let h = a.hnf();
        assert_eq!(h.rows(), 2);
        assert_eq!(h.det().abs(), frac(1, 2));
    }

    #[test]
    fn inverse_and_det() {
        let a = m(&[&[2, -1], &[-1, 2]]);
        assert_eq!(a.det(), rat(3));
        let inv = a.inverse().unwrap();
        assert_eq!(inv.get(0, 0), &frac(2, 3));
        assert_eq!(a.mul(&inv), ExactMatrix::identity(2));
        assert!(m(&[&[1, 2], &[2, 4]]).inverse().is_none());
    }

    #[test]
    fn solve_left_finds_coordinates() {
        let a = m(&[&[1, 1, 0], &[0, 1, 1]]);
        let x = a.solve_left(&[rat(2), rat(5), rat(3)]).unwrap();
        assert_eq!(x, vec![rat(2), rat(3)]);
        assert!(a.solve_left(&[rat(1), rat(0), rat(0)]).is_none());
    }
}
