//! Exact integer and rational matrix algebra.
//!
//! Everything here is arbitrary-precision and exact: Smith normal form with
//! unimodular transforms, signatures by rational congruence diagonalization,
//! diagonalization over F_3, coset representatives of `Z^L / M Z^L`, and
//! enumeration of lattice points under a negative-definite quadratic form.
//! No floating point is used anywhere in this module.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;

#[derive(Debug, thiserror::Error, PartialEq, Eq, Clone)]
pub enum LinalgError {
    #[error("matrix is not square")]
    NotSquare,
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("matrix is singular")]
    Singular,
    #[error("quadratic form is not negative definite")]
    NotNegativeDefinite,
    #[error("dimension mismatch")]
    DimensionMismatch,
}

/// Dense integer matrix, row-major, arbitrary-precision entries.
#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        let data = rows.iter().flat_map(|row| row.iter().map(|&x| BigInt::from(x))).collect();
        IntMatrix { rows: r, cols: c, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let add = a * other.get(k, j);
                    let cur = out.get(i, j) + add;
                    out.set(i, j, cur);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * &v[j]).sum())
            .collect()
    }

    pub fn scale(&self, s: i64) -> Self {
        let s = BigInt::from(s);
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * &s).collect(),
        }
    }

    /// Exact determinant by fraction-free Gaussian elimination (Bareiss).
    pub fn det(&self) -> Result<BigInt, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare);
        }
        let n = self.rows;
        if n == 0 {
            return Ok(BigInt::one());
        }
        let mut a: Vec<Vec<BigInt>> =
            (0..n).map(|i| (0..n).map(|j| self.get(i, j).clone()).collect()).collect();
        let mut sign = 1i32;
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(k, i);
                        sign = -sign;
                    }
                    None => return Ok(BigInt::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = &num / &prev;
                }
                a[i][k] = BigInt::zero();
            }
            prev = a[k][k].clone();
        }
        let mut d = a[n - 1][n - 1].clone();
        if sign < 0 {
            d = -d;
        }
        Ok(d)
    }

    /// Exact inverse over the rationals.
    pub fn inverse_rational(&self) -> Result<Vec<Vec<BigRational>>, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare);
        }
        let n = self.rows;
        let mut a: Vec<Vec<BigRational>> = (0..n)
            .map(|i| (0..n).map(|j| BigRational::from(self.get(i, j).clone())).collect())
            .collect();
        let mut inv: Vec<Vec<BigRational>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            BigRational::one()
                        } else {
                            BigRational::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        for col in 0..n {
            let pivot = (col..n).find(|&i| !a[i][col].is_zero()).ok_or(LinalgError::Singular)?;
            a.swap(col, pivot);
            inv.swap(col, pivot);
            let p = a[col][col].clone();
            for j in 0..n {
                a[col][j] /= &p;
                inv[col][j] /= &p;
            }
            for i in 0..n {
                if i != col && !a[i][col].is_zero() {
                    let f = a[i][col].clone();
                    for j in 0..n {
                        let t = &a[col][j] * &f;
                        a[i][j] -= t;
                        let t = &inv[col][j] * &f;
                        inv[i][j] -= t;
                    }
                }
            }
        }
        Ok(inv)
    }
}

/// Smith normal form `U * M * V = S` with `U`, `V` unimodular and `S` a
/// non-negative diagonal matrix whose entries divide in sequence.
#[derive(Clone, Debug)]
pub struct SnfDecomposition {
    pub u: IntMatrix,
    pub s: IntMatrix,
    pub v: IntMatrix,
    /// Nonzero diagonal entries of `S`, in divisibility order.
    pub invariant_factors: Vec<BigInt>,
}

pub fn smith_normal_form(m: &IntMatrix) -> Result<SnfDecomposition, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare);
    }
    let n = m.rows;
    let mut s = m.clone();
    let mut u = IntMatrix::identity(n);
    let mut v = IntMatrix::identity(n);

    // row op: row_i += q * row_j  (applied to s and u)
    fn row_add(s: &mut IntMatrix, u: &mut IntMatrix, i: usize, j: usize, q: &BigInt) {
        for col in 0..s.cols() {
            let val = s.get(i, col) + q * s.get(j, col);
            s.set(i, col, val);
            let val = u.get(i, col) + q * u.get(j, col);
            u.set(i, col, val);
        }
    }
    fn col_add(s: &mut IntMatrix, v: &mut IntMatrix, i: usize, j: usize, q: &BigInt) {
        for row in 0..s.rows() {
            let val = s.get(row, i) + q * s.get(row, j);
            s.set(row, i, val);
            let val = v.get(row, i) + q * v.get(row, j);
            v.set(row, i, val);
        }
    }
    fn row_swap(s: &mut IntMatrix, u: &mut IntMatrix, i: usize, j: usize) {
        for col in 0..s.cols() {
            let a = s.get(i, col).clone();
            let b = s.get(j, col).clone();
            s.set(i, col, b);
            s.set(j, col, a);
            let a = u.get(i, col).clone();
            let b = u.get(j, col).clone();
            u.set(i, col, b);
            u.set(j, col, a);
        }
    }
    fn col_swap(s: &mut IntMatrix, v: &mut IntMatrix, i: usize, j: usize) {
        for row in 0..s.rows() {
            let a = s.get(row, i).clone();
            let b = s.get(row, j).clone();
            s.set(row, i, b);
            s.set(row, j, a);
            let a = v.get(row, i).clone();
            let b = v.get(row, j).clone();
            v.set(row, i, b);
            v.set(row, j, a);
        }
    }

    for t in 0..n {
        'pivot: loop {
            // smallest nonzero entry in the trailing block becomes the pivot
            let mut best: Option<(usize, usize)> = None;
            for i in t..n {
                for j in t..n {
                    if !s.get(i, j).is_zero() {
                        match best {
                            None => best = Some((i, j)),
                            Some((bi, bj)) => {
                                if s.get(i, j).abs() < s.get(bi, bj).abs() {
                                    best = Some((i, j));
                                }
                            }
                        }
                    }
                }
            }
            let (pi, pj) = match best {
                None => break 'pivot,
                Some(p) => p,
            };
            if pi != t {
                row_swap(&mut s, &mut u, t, pi);
            }
            if pj != t {
                col_swap(&mut s, &mut v, t, pj);
            }
            // clear column t below and row t to the right
            let mut clean = true;
            for i in t + 1..n {
                if !s.get(i, t).is_zero() {
                    let q = -(s.get(i, t).div_floor(s.get(t, t)));
                    row_add(&mut s, &mut u, i, t, &q);
                    if !s.get(i, t).is_zero() {
                        clean = false;
                    }
                }
            }
            for j in t + 1..n {
                if !s.get(t, j).is_zero() {
                    let q = -(s.get(t, j).div_floor(s.get(t, t)));
                    col_add(&mut s, &mut v, j, t, &q);
                    if !s.get(t, j).is_zero() {
                        clean = false;
                    }
                }
            }
            if !clean {
                continue 'pivot;
            }
            // pivot must divide every trailing entry
            for i in t + 1..n {
                for j in t + 1..n {
                    if !s.get(i, j).mod_floor(s.get(t, t)).is_zero() {
                        row_add(&mut s, &mut u, t, i, &BigInt::one());
                        continue 'pivot;
                    }
                }
            }
            break 'pivot;
        }
        if s.get(t, t).is_negative() {
            // flip the sign of row t, absorbed into U
            for col in 0..n {
                let neg = -s.get(t, col);
                s.set(t, col, neg);
                let neg = -u.get(t, col);
                u.set(t, col, neg);
            }
        }
    }

    let invariant_factors =
        (0..n).map(|i| s.get(i, i).clone()).filter(|d| !d.is_zero()).collect();
    Ok(SnfDecomposition { u, s, v, invariant_factors })
}

/// Eigenvalue sign counts `(n_plus, n_minus, n_zero)` of a symmetric integer
/// matrix, computed exactly by rational congruence diagonalization.
pub fn signature(m: &IntMatrix) -> Result<(usize, usize, usize), LinalgError> {
    if !m.is_symmetric() {
        return Err(LinalgError::NotSymmetric);
    }
    let n = m.rows;
    let mut a: Vec<Vec<BigRational>> = (0..n)
        .map(|i| (0..n).map(|j| BigRational::from(m.get(i, j).clone())).collect())
        .collect();
    let (mut n_plus, mut n_minus, mut n_zero) = (0usize, 0usize, 0usize);
    for t in 0..n {
        if a[t][t].is_zero() {
            if let Some(i) = (t + 1..n).find(|&i| !a[i][i].is_zero()) {
                // symmetric swap of index t and i
                a.swap(t, i);
                for row in a.iter_mut() {
                    row.swap(t, i);
                }
            } else {
                // all trailing diagonal entries vanish; borrow an off-diagonal one
                let mut found = None;
                'search: for i in t..n {
                    for j in i + 1..n {
                        if !a[i][j].is_zero() {
                            found = Some((i, j));
                            break 'search;
                        }
                    }
                }
                match found {
                    None => {
                        n_zero += n - t;
                        break;
                    }
                    Some((i, j)) => {
                        // row_i += row_j and col_i += col_j gives diagonal 2*a[i][j]
                        for col in 0..n {
                            let add = a[j][col].clone();
                            a[i][col] += add;
                        }
                        for row in 0..n {
                            let add = a[row][j].clone();
                            a[row][i] += add;
                        }
                        if i != t {
                            a.swap(t, i);
                            for row in a.iter_mut() {
                                row.swap(t, i);
                            }
                        }
                    }
                }
            }
        }
        let pivot = a[t][t].clone();
        if pivot.is_positive() {
            n_plus += 1;
        } else {
            n_minus += 1;
        }
        for i in t + 1..n {
            if !a[i][t].is_zero() {
                let f = &a[i][t] / &pivot;
                for j in 0..n {
                    let sub = &a[t][j] * &f;
                    a[i][j] -= sub;
                }
                for row in 0..n {
                    let sub = &a[row][t] * &f;
                    a[row][i] -= sub;
                }
            }
        }
    }
    Ok((n_plus, n_minus, n_zero))
}

/// Result of diagonalizing a symmetric form over F_3.
///
/// `transform` records `P` with `P^T M P` congruent to the diagonal mod 3,
/// entries of the diagonal normalized to `{-1, 0, +1}` (2 = -1 mod 3).
#[derive(Clone, Debug)]
pub struct Mod3Diagonal {
    pub entries: Vec<i8>,
    pub trace: i64,
    pub transform: Vec<Vec<u8>>,
}

pub fn diagonalize_mod3(m: &IntMatrix) -> Result<Mod3Diagonal, LinalgError> {
    if !m.is_symmetric() {
        return Err(LinalgError::NotSymmetric);
    }
    let n = m.rows;
    let rem3 = |x: &BigInt| -> u8 { x.mod_floor(&BigInt::from(3)).try_into().unwrap_or(0) };
    let mut a: Vec<Vec<u8>> =
        (0..n).map(|i| (0..n).map(|j| rem3(m.get(i, j))).collect()).collect();
    // columns of p accumulate the congruence transform
    let mut p: Vec<Vec<u8>> =
        (0..n).map(|i| (0..n).map(|j| u8::from(i == j)).collect()).collect();

    // symmetric column/row operation helpers over F_3
    // symmetric congruence op: col_dst += f*col_src, then the mirror row op
    let col_add = |a: &mut Vec<Vec<u8>>, p: &mut Vec<Vec<u8>>, dst: usize, src: usize, f: u8| {
        let n = a.len();
        for row in 0..n {
            a[row][dst] = (a[row][dst] + f * a[row][src]) % 3;
        }
        for col in 0..n {
            a[dst][col] = (a[dst][col] + f * a[src][col]) % 3;
        }
        for row in 0..n {
            p[row][dst] = (p[row][dst] + f * p[row][src]) % 3;
        }
    };
    let swap = |a: &mut Vec<Vec<u8>>, p: &mut Vec<Vec<u8>>, i: usize, j: usize| {
        a.swap(i, j);
        for row in a.iter_mut() {
            row.swap(i, j);
        }
        for row in p.iter_mut() {
            row.swap(i, j);
        }
    };

    for t in 0..n {
        if a[t][t] == 0 {
            if let Some(i) = (t + 1..n).find(|&i| a[i][i] != 0) {
                swap(&mut a, &mut p, t, i);
            } else {
                let mut found = None;
                'search: for i in t..n {
                    for j in i + 1..n {
                        if a[i][j] != 0 {
                            found = Some((i, j));
                            break 'search;
                        }
                    }
                }
                match found {
                    None => break,
                    Some((i, j)) => {
                        // diagonal becomes 2*a[i][j] != 0 in F_3
                        col_add(&mut a, &mut p, i, j, 1);
                        if i != t {
                            swap(&mut a, &mut p, t, i);
                        }
                    }
                }
            }
        }
        let pivot = a[t][t];
        debug_assert!(pivot != 0);
        let inv = pivot; // 1 and 2 are self-inverse mod 3
        for i in t + 1..n {
            if a[t][i] != 0 {
                let f = (3 - (a[t][i] * inv) % 3) % 3;
                col_add(&mut a, &mut p, i, t, f);
            }
        }
    }

    let entries: Vec<i8> = (0..n).map(|i| if a[i][i] == 2 { -1 } else { a[i][i] as i8 }).collect();
    let trace = entries.iter().map(|&e| e as i64).sum();
    Ok(Mod3Diagonal { entries, trace, transform: p })
}

/// Canonical labeling of cosets `Z^L / M Z^L` through the Smith normal form.
#[derive(Clone, Debug)]
pub struct CosetLabeler {
    u: IntMatrix,
    u_inv: IntMatrix,
    moduli: Vec<BigInt>,
    count: usize,
}

impl CosetLabeler {
    pub fn new(m: &IntMatrix) -> Result<Self, LinalgError> {
        let det = m.det()?;
        if det.is_zero() {
            return Err(LinalgError::Singular);
        }
        let snf = smith_normal_form(m)?;
        let n = m.rows();
        let moduli: Vec<BigInt> = (0..n).map(|i| snf.s.get(i, i).clone()).collect();
        let u_inv = unimodular_inverse(&snf.u)?;
        let count_big: BigInt = moduli.iter().product();
        let count = usize::try_from(&count_big).map_err(|_| LinalgError::DimensionMismatch)?;
        Ok(CosetLabeler { u: snf.u, u_inv, moduli, count })
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// SNF coordinates of a vector, each reduced into `[0, moduli_i)`.
    pub fn label(&self, x: &[BigInt]) -> Vec<BigInt> {
        let y = self.u.mul_vec(x);
        y.iter().zip(&self.moduli).map(|(yi, m)| yi.mod_floor(m)).collect()
    }

    /// Mixed-radix index of the label, the canonical ordering of cosets.
    pub fn index(&self, x: &[BigInt]) -> usize {
        let label = self.label(x);
        let mut idx = BigInt::zero();
        for (l, m) in label.iter().zip(&self.moduli) {
            idx = idx * m + l;
        }
        usize::try_from(&idx).expect("coset index fits usize")
    }

    /// Representative vector of the coset with the given index.
    pub fn rep(&self, mut index: usize) -> Vec<BigInt> {
        let mut label = vec![BigInt::zero(); self.moduli.len()];
        for i in (0..self.moduli.len()).rev() {
            let m = usize::try_from(&self.moduli[i]).expect("modulus fits usize");
            label[i] = BigInt::from(index % m);
            index /= m;
        }
        self.u_inv.mul_vec(&label)
    }
}

fn unimodular_inverse(u: &IntMatrix) -> Result<IntMatrix, LinalgError> {
    let inv = u.inverse_rational()?;
    let n = u.rows();
    let mut out = IntMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if !inv[i][j].is_integer() {
                return Err(LinalgError::Singular);
            }
            out.set(i, j, inv[i][j].to_integer());
        }
    }
    Ok(out)
}

/// Representatives of `Z^L / (scale*B) Z^L`, ordered lexicographically on the
/// Smith normal form coordinates.
pub fn coset_reps(b: &IntMatrix, scale: u32) -> Result<Vec<Vec<BigInt>>, LinalgError> {
    let m = b.scale(scale as i64);
    let labeler = CosetLabeler::new(&m)?;
    Ok((0..labeler.count()).map(|i| labeler.rep(i)).collect())
}

/// All `w` congruent to `residue` mod `2B Z^L` whose exponent
/// `-(w, B^{-1} w)/4` does not exceed `bound`. Complete and duplicate-free;
/// output sorted by exponent, then lexicographically.
pub fn enumerate_lattice_shell(
    b: &IntMatrix,
    residue: &[BigInt],
    bound: &BigRational,
) -> Result<Vec<Vec<BigInt>>, LinalgError> {
    if !b.is_symmetric() {
        return Err(LinalgError::NotSymmetric);
    }
    let n = b.rows();
    if residue.len() != n {
        return Err(LinalgError::DimensionMismatch);
    }
    let (n_plus, _n_minus, n_zero) = signature(b)?;
    if n_plus > 0 || n_zero > 0 {
        return Err(LinalgError::NotNegativeDefinite);
    }
    if bound < &BigRational::zero() {
        return Ok(Vec::new());
    }

    // w = residue + 2 B u; the exponent becomes the positive-definite form
    //   Q(u) = u^T (-B) u - r^T u - (r, B^{-1} r)/4
    // whose real minimum is exactly 0.
    let a: Vec<Vec<BigRational>> = (0..n)
        .map(|i| (0..n).map(|j| BigRational::from(-b.get(i, j).clone())).collect())
        .collect();
    let b_inv = b.inverse_rational()?;
    let r: Vec<BigRational> =
        residue.iter().map(|x| BigRational::from(x.clone())).collect();
    let mut c0 = BigRational::zero();
    for i in 0..n {
        for j in 0..n {
            c0 += &r[i] * &b_inv[i][j] * &r[j];
        }
    }
    let c0 = -c0 / BigRational::from(BigInt::from(4));

    let ldl = LdlDecomposition::new(&a)?;
    // center of the ellipsoid: u* = (-B)^{-1} r / 2
    let mut center = vec![BigRational::zero(); n];
    for i in 0..n {
        for j in 0..n {
            center[i] -= &b_inv[i][j] * &r[j];
        }
        center[i] /= BigRational::from(BigInt::from(2));
    }

    let mut points = Vec::new();
    let mut u = vec![BigInt::zero(); n];
    enumerate_rec(&ldl, &center, bound, n, &mut u, &mut points);

    let two = BigInt::from(2);
    let mut out: Vec<(BigRational, Vec<BigInt>)> = points
        .into_iter()
        .map(|u| {
            let bu = b.mul_vec(&u);
            let w: Vec<BigInt> =
                (0..n).map(|i| &residue[i] + &two * &bu[i]).collect();
            let mut q = c0.clone();
            for i in 0..n {
                for j in 0..n {
                    let ui = BigRational::from(u[i].clone());
                    let uj = BigRational::from(u[j].clone());
                    q += &ui * &a[i][j] * &uj;
                }
                let ui = BigRational::from(u[i].clone());
                q -= &r[i] * &ui;
            }
            (q, w)
        })
        .collect();
    out.sort_by(|(qa, wa), (qb, wb)| qa.cmp(qb).then_with(|| wa.cmp(wb)));
    Ok(out.into_iter().map(|(_, w)| w).collect())
}

/// Rational LDL^T data for a positive-definite symmetric form:
/// `x^T A x = sum_i d_i (x_i + sum_{j>i} l[i][j] x_j)^2`.
struct LdlDecomposition {
    d: Vec<BigRational>,
    l: Vec<Vec<BigRational>>,
}

impl LdlDecomposition {
    fn new(a: &[Vec<BigRational>]) -> Result<Self, LinalgError> {
        let n = a.len();
        let mut m: Vec<Vec<BigRational>> = a.to_vec();
        let mut d = vec![BigRational::zero(); n];
        let mut l: Vec<Vec<BigRational>> = vec![vec![BigRational::zero(); n]; n];
        for i in 0..n {
            d[i] = m[i][i].clone();
            if !d[i].is_positive() {
                return Err(LinalgError::NotNegativeDefinite);
            }
            for j in i + 1..n {
                l[i][j] = &m[i][j] / &d[i];
            }
            for r in i + 1..n {
                for c in i + 1..n {
                    let sub = &l[i][r] * &m[i][c];
                    m[r][c] -= sub;
                }
            }
        }
        Ok(LdlDecomposition { d, l })
    }
}

/// Depth-first enumeration over coordinates n-1 .. 0 of all integer points of
/// the shifted ellipsoid `sum d_i (x_i - c_i + sum_{j>i} l_ij (x_j - c_j))^2 <= bound`.
fn enumerate_rec(
    ldl: &LdlDecomposition,
    center: &[BigRational],
    bound: &BigRational,
    level: usize,
    u: &mut Vec<BigInt>,
    out: &mut Vec<Vec<BigInt>>,
) {
    if level == 0 {
        out.push(u.clone());
        return;
    }
    let i = level - 1;
    // effective center for coordinate i given the fixed tail u[i+1..]
    let mut shift = BigRational::zero();
    for j in i + 1..u.len() {
        let xj = BigRational::from(u[j].clone()) - &center[j];
        shift += &ldl.l[i][j] * xj;
    }
    let c_eff = center[i].clone() - &shift;
    // residual bound after the tail contribution
    let mut tail = BigRational::zero();
    for k in i + 1..u.len() {
        let mut inner = BigRational::from(u[k].clone()) - &center[k];
        for j in k + 1..u.len() {
            let xj = BigRational::from(u[j].clone()) - &center[j];
            inner += &ldl.l[k][j] * xj;
        }
        tail += &ldl.d[k] * &inner * &inner;
    }
    let rem = bound - &tail;
    if rem < BigRational::zero() {
        return;
    }
    let start = c_eff.round().to_integer();
    // walk outward in both directions while the 1-d constraint holds
    let fits = |x: &BigInt| {
        let dx = BigRational::from(x.clone()) - &c_eff;
        &ldl.d[i] * &dx * &dx <= rem
    };
    let mut x = start.clone();
    while fits(&x) {
        u[i] = x.clone();
        enumerate_rec(ldl, center, bound, i, u, out);
        x += 1;
    }
    let mut x = &start - 1;
    while fits(&x) {
        u[i] = x.clone();
        enumerate_rec(ldl, center, bound, i, u, out);
        x -= 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The negative-definite plumbing matrix of the E8 graph: a degree-3
    /// center with arms of lengths 1, 2, 4, all framings -2.
    pub fn minus_e8() -> IntMatrix {
        let mut m = IntMatrix::zeros(8, 8);
        for i in 0..8 {
            m.set(i, i, BigInt::from(-2));
        }
        for &(i, j) in &[(0usize, 1usize), (0, 2), (2, 3), (0, 4), (4, 5), (5, 6), (6, 7)] {
            m.set(i, j, BigInt::one());
            m.set(j, i, BigInt::one());
        }
        m
    }

    fn spec_4x4() -> IntMatrix {
        IntMatrix::from_rows(&[
            vec![-1, 1, 1, 1],
            vec![1, -2, 0, 0],
            vec![1, 0, -3, 0],
            vec![1, 0, 0, -8],
        ])
    }

    #[test]
    fn snf_identity() {
        let snf = smith_normal_form(&IntMatrix::identity(3)).unwrap();
        assert_eq!(snf.s, IntMatrix::identity(3));
        assert_eq!(snf.invariant_factors, vec![BigInt::one(); 3]);
    }

    #[test]
    fn snf_e8_is_unimodular() {
        let m = minus_e8();
        let snf = smith_normal_form(&m).unwrap();
        assert_eq!(snf.invariant_factors, vec![BigInt::one(); 8]);
        assert_eq!(m.det().unwrap().abs(), BigInt::one());
    }

    #[test]
    fn snf_trefoil_surgery_matrix() {
        let snf = smith_normal_form(&spec_4x4()).unwrap();
        assert_eq!(
            snf.invariant_factors,
            vec![BigInt::one(), BigInt::one(), BigInt::one(), BigInt::from(2)]
        );
    }

    #[test]
    fn snf_product_identity_holds() {
        for m in [spec_4x4(), minus_e8(), IntMatrix::from_rows(&[vec![6, 4], vec![2, 8]])] {
            let snf = smith_normal_form(&m).unwrap();
            assert_eq!(snf.u.mul(&m).mul(&snf.v), snf.s);
            assert_eq!(snf.u.det().unwrap().abs(), BigInt::one());
            assert_eq!(snf.v.det().unwrap().abs(), BigInt::one());
        }
    }

    #[test]
    fn signature_1x1() {
        let m = IntMatrix::from_rows(&[vec![-2]]);
        assert_eq!(signature(&m).unwrap(), (0, 1, 0));
    }

    #[test]
    fn signature_e8_negative_definite() {
        assert_eq!(signature(&minus_e8()).unwrap(), (0, 8, 0));
    }

    #[test]
    fn signature_spec_4x4_negative_definite() {
        assert_eq!(signature(&spec_4x4()).unwrap(), (0, 4, 0));
    }

    #[test]
    fn signature_rejects_asymmetric() {
        let m = IntMatrix::from_rows(&[vec![0, 1], vec![0, 0]]);
        assert_eq!(signature(&m), Err(LinalgError::NotSymmetric));
    }

    #[test]
    fn signature_indefinite_with_zero_diagonal() {
        // hyperbolic plane: eigenvalues +1, -1
        let m = IntMatrix::from_rows(&[vec![0, 1], vec![1, 0]]);
        assert_eq!(signature(&m).unwrap(), (1, 1, 0));
    }

    #[test]
    fn mod3_diagonal_1x1_cases() {
        let cases = [(-2i64, vec![1i8], 1i64), (-3, vec![0], 0), (-7, vec![-1], -1)];
        for (v, entries, trace) in cases {
            let d = diagonalize_mod3(&IntMatrix::from_rows(&[vec![v]])).unwrap();
            assert_eq!(d.entries, entries);
            assert_eq!(d.trace, trace);
        }
    }

    #[test]
    fn mod3_transform_is_congruence() {
        for m in [spec_4x4(), minus_e8(), IntMatrix::from_rows(&[vec![0, 1], vec![1, 0]])] {
            let d = diagonalize_mod3(&m).unwrap();
            let n = m.rows();
            // compute P^T M P mod 3 and compare with the diagonal
            let mut p = IntMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    p.set(i, j, BigInt::from(d.transform[i][j]));
                }
            }
            let prod = p.transpose().mul(&m).mul(&p);
            for i in 0..n {
                for j in 0..n {
                    let got = prod.get(i, j).mod_floor(&BigInt::from(3));
                    let want = if i == j {
                        BigInt::from(d.entries[i] as i64).mod_floor(&BigInt::from(3))
                    } else {
                        BigInt::zero()
                    };
                    assert_eq!(got, want, "entry ({i},{j}) of {m:?}");
                }
            }
        }
    }

    #[test]
    fn coset_reps_cyclic() {
        let b = IntMatrix::from_rows(&[vec![-3]]);
        let reps = coset_reps(&b, 1).unwrap();
        assert_eq!(reps.len(), 3);
        let labeler = CosetLabeler::new(&b).unwrap();
        let mut seen: Vec<usize> = reps.iter().map(|r| labeler.index(r)).collect();
        seen.sort();
        assert_eq!(seen, vec![0, 1, 2]);
    }

    #[test]
    fn coset_reps_scale_two() {
        let b = IntMatrix::from_rows(&[vec![-2]]);
        assert_eq!(coset_reps(&b, 2).unwrap().len(), 4);
    }

    #[test]
    fn coset_reps_spec_4x4() {
        assert_eq!(coset_reps(&spec_4x4(), 1).unwrap().len(), 2);
    }

    #[test]
    fn shell_diag_minus_two() {
        let b = IntMatrix::from_rows(&[vec![-2]]);
        let pts = enumerate_lattice_shell(&b, &[BigInt::zero()], &BigRational::one()).unwrap();
        let vals: Vec<i64> = pts.iter().map(|w| i64::try_from(&w[0]).unwrap()).collect();
        // exponent of w is w^2/8: 0 at w=0, 1/2 at w=+-2
        assert_eq!(vals, vec![0, -2, 2]);
    }

    #[test]
    fn shell_negative_bound_empty() {
        let b = IntMatrix::from_rows(&[vec![-2]]);
        let pts = enumerate_lattice_shell(
            &b,
            &[BigInt::zero()],
            &-BigRational::one(),
        )
        .unwrap();
        assert!(pts.is_empty());
    }

    #[test]
    fn shell_rejects_indefinite() {
        let b = IntMatrix::from_rows(&[vec![0, 1], vec![1, 0]]);
        let r = vec![BigInt::zero(), BigInt::zero()];
        assert!(matches!(
            enumerate_lattice_shell(&b, &r, &BigRational::one()),
            Err(LinalgError::NotNegativeDefinite)
        ));
    }

    #[test]
    fn shell_monotone_in_bound() {
        let b = spec_4x4();
        let delta = vec![BigInt::from(1), BigInt::from(1), BigInt::from(1), BigInt::from(1)];
        let small = enumerate_lattice_shell(&b, &delta, &BigRational::from(BigInt::from(2)))
            .unwrap();
        let large = enumerate_lattice_shell(&b, &delta, &BigRational::from(BigInt::from(5)))
            .unwrap();
        assert!(small.len() <= large.len());
        for w in &small {
            assert!(large.contains(w), "shell not monotone: {w:?}");
        }
    }

    #[test]
    fn shell_exponents_nonnegative_and_exact() {
        let b = spec_4x4();
        let binv = b.inverse_rational().unwrap();
        let delta = vec![BigInt::from(1), BigInt::from(1), BigInt::from(1), BigInt::from(1)];
        let bound = BigRational::from(BigInt::from(3));
        for w in enumerate_lattice_shell(&b, &delta, &bound).unwrap() {
            let mut q = BigRational::zero();
            for i in 0..4 {
                for j in 0..4 {
                    q += BigRational::from(w[i].clone())
                        * &binv[i][j]
                        * BigRational::from(w[j].clone());
                }
            }
            let exponent = -q / BigRational::from(BigInt::from(4));
            assert!(exponent >= BigRational::zero());
            assert!(exponent <= bound);
        }
    }
}
