//! Exact linear algebra over arbitrary-precision integers and rationals:
//! ranks, determinants, Smith elementary divisors, saturated integer kernels,
//! unimodular completions, and exact inverses. Everything here is
//! tolerance-free; matrices are `Vec<Vec<Int>>` in row-major order.

use std::cmp::Ordering;

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::{Int, Rat};

pub fn int(v: i64) -> Int {
    Int::from(v)
}

pub fn vec_int(v: &[i64]) -> Vec<Int> {
    v.iter().map(|&x| Int::from(x)).collect()
}

pub fn mat_int(rows: &[&[i64]]) -> Vec<Vec<Int>> {
    rows.iter().map(|r| vec_int(r)).collect()
}

pub fn dot(a: &[Int], b: &[Int]) -> Int {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn dot_rat(a: &[Rat], b: &[Int]) -> Rat {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| x * Rat::from_integer(y.clone()))
        .sum()
}

pub fn is_zero_vec(v: &[Int]) -> bool {
    v.iter().all(|x| x.is_zero())
}

pub fn neg_vec(v: &[Int]) -> Vec<Int> {
    v.iter().map(|x| -x).collect()
}

pub fn gcd_vec(v: &[Int]) -> Int {
    v.iter().fold(Int::zero(), |g, x| g.gcd(x))
}

/// Divide by the component gcd; `None` for the zero vector.
pub fn primitivize(v: &[Int]) -> Option<Vec<Int>> {
    let g = gcd_vec(v);
    if g.is_zero() {
        return None;
    }
    Some(v.iter().map(|x| x / &g).collect())
}

/// Flip sign so the first nonzero component is positive; zero stays zero.
pub fn sign_canonical(v: &[Int]) -> Vec<Int> {
    for x in v {
        if x.is_positive() {
            return v.to_vec();
        }
        if x.is_negative() {
            return neg_vec(v);
        }
    }
    v.to_vec()
}

pub fn lex_cmp(a: &[Int], b: &[Int]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

pub fn identity(n: usize) -> Vec<Vec<Int>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Int::one() } else { Int::zero() })
                .collect()
        })
        .collect()
}

pub fn transpose(m: &[Vec<Int>]) -> Vec<Vec<Int>> {
    if m.is_empty() {
        return Vec::new();
    }
    let cols = m[0].len();
    (0..cols)
        .map(|j| m.iter().map(|row| row[j].clone()).collect())
        .collect()
}

/// Matrix times column vector (rows of `m` dotted with `v`).
pub fn mat_vec(m: &[Vec<Int>], v: &[Int]) -> Vec<Int> {
    m.iter().map(|row| dot(row, v)).collect()
}

pub fn mat_vec_rat(m: &[Vec<Rat>], v: &[Rat]) -> Vec<Rat> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn mat_mul(a: &[Vec<Int>], b: &[Vec<Int>]) -> Vec<Vec<Int>> {
    let bt = transpose(b);
    a.iter()
        .map(|row| bt.iter().map(|col| dot(row, col)).collect())
        .collect()
}

/// Rank over the rationals, by fraction-free elimination on a copy.
pub fn rank(rows: &[Vec<Int>]) -> usize {
    let mut m: Vec<Vec<Int>> = rows.to_vec();
    let nrows = m.len();
    if nrows == 0 {
        return 0;
    }
    let ncols = m[0].len();
    let mut r = 0;
    for col in 0..ncols {
        let Some(p) = (r..nrows).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        for i in (r + 1)..nrows {
            if m[i][col].is_zero() {
                continue;
            }
            let (a, b) = (m[r][col].clone(), m[i][col].clone());
            for j in col..ncols {
                let v = &m[i][j] * &a - &m[r][j] * &b;
                m[i][j] = v;
            }
        }
        r += 1;
        if r == nrows {
            break;
        }
    }
    r
}

/// Determinant of a square matrix by Bareiss fraction-free elimination.
pub fn det(mat: &[Vec<Int>]) -> Int {
    let n = mat.len();
    if n == 0 {
        return Int::one();
    }
    debug_assert!(mat.iter().all(|r| r.len() == n));
    let mut m: Vec<Vec<Int>> = mat.to_vec();
    let mut sign = 1i32;
    let mut prev = Int::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            let Some(p) = ((k + 1)..n).find(|&i| !m[i][k].is_zero()) else {
                return Int::zero();
            };
            m.swap(k, p);
            sign = -sign;
        }
        for i in (k + 1)..n {
            for j in (k + 1)..n {
                let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
            m[i][k] = Int::zero();
        }
        prev = m[k][k].clone();
    }
    if sign < 0 {
        -m[n - 1][n - 1].clone()
    } else {
        m[n - 1][n - 1].clone()
    }
}

/// Greedily select a maximal set of linearly independent rows; returns their
/// indices (in input order).
pub fn independent_rows(rows: &[Vec<Int>], want: usize) -> Vec<usize> {
    let mut picked: Vec<usize> = Vec::new();
    let mut current: Vec<Vec<Int>> = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        current.push(row.clone());
        if rank(&current) == current.len() {
            picked.push(i);
            if picked.len() == want {
                break;
            }
        } else {
            current.pop();
        }
    }
    picked
}

// ---------------------------------------------------------------------------
// Smith normal form
// ---------------------------------------------------------------------------

struct SmithCalc {
    a: Vec<Vec<Int>>,
    /// Right transform: column ops applied to `a` are mirrored here, so that
    /// a_in * w = a_out column-wise. Kernel vectors of `a_in` are the columns
    /// of `w` past the rank.
    w: Option<Vec<Vec<Int>>>,
}

impl SmithCalc {
    fn new(a: Vec<Vec<Int>>, track_w: bool) -> Self {
        let cols = if a.is_empty() { 0 } else { a[0].len() };
        let w = track_w.then(|| identity(cols));
        SmithCalc { a, w }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for row in &mut self.a {
            row.swap(i, j);
        }
        if let Some(w) = &mut self.w {
            for row in w.iter_mut() {
                row.swap(i, j);
            }
        }
    }

    fn negate_col(&mut self, j: usize) {
        for row in &mut self.a {
            let v = -row[j].clone();
            row[j] = v;
        }
        if let Some(w) = &mut self.w {
            for row in w.iter_mut() {
                let v = -row[j].clone();
                row[j] = v;
            }
        }
    }

    /// col_j -= q * col_i
    fn addmul_col(&mut self, j: usize, i: usize, q: &Int) {
        if q.is_zero() {
            return;
        }
        for row in &mut self.a {
            let v = &row[j] - q * &row[i];
            row[j] = v;
        }
        if let Some(w) = &mut self.w {
            for row in w.iter_mut() {
                let v = &row[j] - q * &row[i];
                row[j] = v;
            }
        }
    }

    /// row_i -= q * row_t (row ops never touch `w`)
    fn addmul_row(&mut self, i: usize, t: usize, q: &Int) {
        if q.is_zero() {
            return;
        }
        let src = self.a[t].clone();
        for (x, s) in self.a[i].iter_mut().zip(&src) {
            *x -= q * s;
        }
    }

    fn min_abs_nonzero(&self, t: usize) -> Option<(usize, usize)> {
        let nrows = self.a.len();
        let ncols = if nrows == 0 { 0 } else { self.a[0].len() };
        let mut best: Option<(usize, usize)> = None;
        for i in t..nrows {
            for j in t..ncols {
                if self.a[i][j].is_zero() {
                    continue;
                }
                match best {
                    None => best = Some((i, j)),
                    Some((bi, bj)) => {
                        if self.a[i][j].abs() < self.a[bi][bj].abs() {
                            best = Some((i, j));
                        }
                    }
                }
            }
        }
        best
    }

    fn process(&mut self) -> usize {
        let nrows = self.a.len();
        let ncols = if nrows == 0 { 0 } else { self.a[0].len() };
        let mut t = 0;
        while t < nrows.min(ncols) {
            let Some((pi, pj)) = self.min_abs_nonzero(t) else {
                break;
            };
            self.a.swap(t, pi);
            self.swap_cols(t, pj);
            // Clear row and column t; re-pivot whenever a remainder survives.
            loop {
                let mut clean = true;
                for i in (t + 1)..nrows {
                    if self.a[i][t].is_zero() {
                        continue;
                    }
                    let q = &self.a[i][t] / &self.a[t][t];
                    self.addmul_row(i, t, &q);
                    if !self.a[i][t].is_zero() {
                        clean = false;
                    }
                }
                for j in (t + 1)..ncols {
                    if self.a[t][j].is_zero() {
                        continue;
                    }
                    let q = &self.a[t][j] / &self.a[t][t];
                    self.addmul_col(j, t, &q);
                    if !self.a[t][j].is_zero() {
                        clean = false;
                    }
                }
                if clean {
                    break;
                }
                let (pi, pj) = self.min_abs_nonzero(t).expect("nonzero pivot persists");
                self.a.swap(t, pi);
                self.swap_cols(t, pj);
            }
            // Divisibility sweep: the pivot must divide the whole remaining block.
            let pivot = self.a[t][t].clone();
            let mut offender = None;
            'scan: for i in (t + 1)..nrows {
                for j in (t + 1)..ncols {
                    if !(&self.a[i][j] % &pivot).is_zero() {
                        offender = Some(i);
                        break 'scan;
                    }
                }
            }
            if let Some(i) = offender {
                // Fold the offending row into row t and redo this pivot.
                let src = self.a[i].clone();
                for (x, s) in self.a[t].iter_mut().zip(&src) {
                    *x += s;
                }
                continue;
            }
            if self.a[t][t].is_negative() {
                self.negate_col(t);
            }
            t += 1;
        }
        t
    }
}

/// Nonzero elementary divisors (ascending divisibility order).
pub fn smith_divisors(rows: &[Vec<Int>]) -> Vec<Int> {
    if rows.is_empty() {
        return Vec::new();
    }
    let mut calc = SmithCalc::new(rows.to_vec(), false);
    let r = calc.process();
    (0..r).map(|i| calc.a[i][i].clone()).collect()
}

/// Saturated basis of the integer kernel `{x : rows * x = 0}`, one kernel
/// vector per returned row, sign-canonicalized. The basis generates the full
/// kernel lattice (every vector is primitive).
pub fn kernel_basis(rows: &[Vec<Int>]) -> Vec<Vec<Int>> {
    if rows.is_empty() {
        return Vec::new();
    }
    let ncols = rows[0].len();
    let mut calc = SmithCalc::new(rows.to_vec(), true);
    let r = calc.process();
    let w = calc.w.expect("tracked");
    (r..ncols)
        .map(|j| sign_canonical(&w.iter().map(|row| row[j].clone()).collect::<Vec<_>>()))
        .collect()
}

/// Solve `rows * x = rhs` when the solution is unique over the rationals
/// (full column rank). Returns `None` when inconsistent or rank-deficient.
pub fn solve_unique_rational(rows: &[Vec<Int>], rhs: &[Int]) -> Option<Vec<Rat>> {
    debug_assert_eq!(rows.len(), rhs.len());
    if rows.is_empty() {
        return None;
    }
    let n = rows[0].len();
    let idx = independent_rows(rows, n);
    if idx.len() < n {
        return None;
    }
    // Gaussian elimination over Q on the selected square system.
    let mut m: Vec<Vec<Rat>> = idx
        .iter()
        .map(|&i| {
            rows[i]
                .iter()
                .map(|x| Rat::from_integer(x.clone()))
                .chain(std::iter::once(Rat::from_integer(rhs[i].clone())))
                .collect()
        })
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&i| !m[i][col].is_zero())?;
        m.swap(col, p);
        let inv = m[col][col].clone();
        for j in col..=n {
            let v = &m[col][j] / &inv;
            m[col][j] = v;
        }
        for i in 0..n {
            if i == col || m[i][col].is_zero() {
                continue;
            }
            let f = m[i][col].clone();
            for j in col..=n {
                let v = &m[i][j] - &f * &m[col][j];
                m[i][j] = v;
            }
        }
    }
    let x: Vec<Rat> = (0..n).map(|i| m[i][n].clone()).collect();
    // Verify against every row (the system may be overdetermined).
    for (row, b) in rows.iter().zip(rhs) {
        let lhs: Rat = row
            .iter()
            .zip(&x)
            .map(|(a, xi)| Rat::from_integer(a.clone()) * xi)
            .sum();
        if lhs != Rat::from_integer(b.clone()) {
            return None;
        }
    }
    Some(x)
}

/// Exact inverse of a square integer matrix, as rationals. `None` if singular.
pub fn inverse_rational(mat: &[Vec<Int>]) -> Option<Vec<Vec<Rat>>> {
    let n = mat.len();
    let mut m: Vec<Vec<Rat>> = mat
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .map(|x| Rat::from_integer(x.clone()))
                .chain((0..n).map(|j| {
                    if i == j {
                        Rat::from_integer(Int::one())
                    } else {
                        Rat::from_integer(Int::zero())
                    }
                }))
                .collect()
        })
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&i| !m[i][col].is_zero())?;
        m.swap(col, p);
        let inv = m[col][col].clone();
        for j in 0..2 * n {
            let v = &m[col][j] / &inv;
            m[col][j] = v;
        }
        for i in 0..n {
            if i == col || m[i][col].is_zero() {
                continue;
            }
            let f = m[i][col].clone();
            for j in 0..2 * n {
                let v = &m[i][j] - &f * &m[col][j];
                m[i][j] = v;
            }
        }
    }
    Some(m.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Inverse of a unimodular integer matrix, staying in integers.
pub fn inverse_unimodular(mat: &[Vec<Int>]) -> Result<Vec<Vec<Int>>> {
    let inv = inverse_rational(mat)
        .ok_or_else(|| Error::Internal("singular matrix passed as unimodular".into()))?;
    inv.into_iter()
        .map(|row| {
            row.into_iter()
                .map(|x| {
                    if x.is_integer() {
                        Ok(x.to_integer())
                    } else {
                        Err(Error::Internal("matrix is not unimodular".into()))
                    }
                })
                .collect()
        })
        .collect()
}

/// Unimodular matrix whose first row is the given primitive vector.
pub fn unimodular_completion_row(gamma: &[Int]) -> Result<Vec<Vec<Int>>> {
    let n = gamma.len();
    if gcd_vec(gamma) != Int::one() {
        return Err(Error::Internal(
            "unimodular completion requires a primitive vector".into(),
        ));
    }
    let mut x: Vec<Int> = gamma.to_vec();
    let mut m = identity(n);
    // Column ops reduce x to e_1; each op's inverse is accumulated on the left
    // of m, so m stays equal to the inverse of the accumulated product and its
    // first row stays equal to gamma.
    loop {
        let mut piv: Option<usize> = None;
        for (j, v) in x.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            match piv {
                None => piv = Some(j),
                Some(p) => {
                    if v.abs() < x[p].abs() {
                        piv = Some(j);
                    }
                }
            }
        }
        let p = piv.expect("primitive vector is nonzero");
        if p != 0 {
            x.swap(0, p);
            m.swap(0, p);
        }
        let mut done = true;
        for j in 1..n {
            if x[j].is_zero() {
                continue;
            }
            let q = &x[j] / &x[0];
            let v = &x[j] - &q * &x[0];
            x[j] = v;
            // inverse of (col_j -= q col_0) is row_0 += q row_j
            let add: Vec<Int> = m[j].iter().map(|w| &q * w).collect();
            for (a, b) in m[0].iter_mut().zip(add) {
                *a += b;
            }
            if !x[j].is_zero() {
                done = false;
            }
        }
        if done && x.iter().skip(1).all(|v| v.is_zero()) {
            break;
        }
    }
    if x[0].is_negative() {
        for v in x.iter_mut() {
            *v = -v.clone();
        }
        for v in m[0].iter_mut() {
            *v = -v.clone();
        }
    }
    debug_assert!(x[0].is_one());
    debug_assert_eq!(m[0], gamma.to_vec());
    Ok(m)
}

/// Unimodular matrix `A` with `A * xi = e_1` for primitive `xi` (column form).
/// Rows `1..n` of `A` give a projection `Z^n -> Z^(n-1)` along `xi`.
pub fn reduction_to_e1(xi: &[Int]) -> Result<Vec<Vec<Int>>> {
    let n = xi.len();
    if gcd_vec(xi) != Int::one() {
        return Err(Error::Internal("reduction requires a primitive vector".into()));
    }
    let mut x: Vec<Int> = xi.to_vec();
    let mut a = identity(n);
    loop {
        let mut piv: Option<usize> = None;
        for (i, v) in x.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            match piv {
                None => piv = Some(i),
                Some(p) => {
                    if v.abs() < x[p].abs() {
                        piv = Some(i);
                    }
                }
            }
        }
        let p = piv.expect("primitive vector is nonzero");
        if p != 0 {
            x.swap(0, p);
            a.swap(0, p);
        }
        let mut done = true;
        for i in 1..n {
            if x[i].is_zero() {
                continue;
            }
            let q = &x[i] / &x[0];
            let v = &x[i] - &q * &x[0];
            x[i] = v;
            let sub: Vec<Int> = a[0].iter().map(|w| &q * w).collect();
            for (t, s) in a[i].iter_mut().zip(sub) {
                *t -= s;
            }
            if !x[i].is_zero() {
                done = false;
            }
        }
        if done && x.iter().skip(1).all(|v| v.is_zero()) {
            break;
        }
    }
    if x[0].is_negative() {
        x[0] = -x[0].clone();
        for v in a[0].iter_mut() {
            *v = -v.clone();
        }
    }
    debug_assert!(x[0].is_one());
    debug_assert_eq!(mat_vec(&a, xi), {
        let mut e1 = vec![Int::zero(); n];
        e1[0] = Int::one();
        e1
    });
    Ok(a)
}

/// Best rational approximation of `x` with denominator bounded by `max_den`,
/// via the continued-fraction convergents.
pub fn rational_approx(x: f64, max_den: u64) -> Option<Rat> {
    if !x.is_finite() {
        return None;
    }
    let exact = Rat::from_float(x)?;
    let max_den = Int::from(max_den);
    if exact.denom() <= &max_den {
        return Some(exact);
    }
    let (mut p0, mut q0) = (Int::one(), Int::zero());
    let (mut p1, mut q1) = (Int::zero(), Int::one());
    let mut frac = exact;
    loop {
        let a = frac.floor().to_integer();
        let p2 = &a * &p0 + &p1;
        let q2 = &a * &q0 + &q1;
        if q2 > max_den {
            return Some(Rat::new(p0, q0));
        }
        p1 = std::mem::replace(&mut p0, p2);
        q1 = std::mem::replace(&mut q0, q2);
        let rem = &frac - Rat::from_integer(a);
        if rem.is_zero() {
            return Some(Rat::new(p0, q0));
        }
        frac = rem.recip();
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
