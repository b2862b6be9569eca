//! Small dense matrix helpers. State dimensions stay in single digits, so
//! plain nested `Vec`s beat pulling in a linear-algebra crate.

pub type Matrix = Vec<Vec<f64>>;

pub fn zeros(rows: usize, cols: usize) -> Matrix {
    vec![vec![0.0; cols]; rows]
}

pub fn identity(n: usize) -> Matrix {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

pub fn mat_vec(m: &Matrix, v: &[f64]) -> Vec<f64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// mᵀ v for m with shape (rows × cols), v of length rows.
pub fn mat_t_vec(m: &Matrix, v: &[f64]) -> Vec<f64> {
    let cols = m.first().map_or(0, Vec::len);
    let mut out = vec![0.0; cols];
    for (row, &vi) in m.iter().zip(v) {
        for (o, &a) in out.iter_mut().zip(row) {
            *o += a * vi;
        }
    }
    out
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let rows = a.len();
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    let mut out = zeros(rows, cols);
    for i in 0..rows {
        for k in 0..inner {
            let aik = a[i][k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..cols {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

/// a aᵀ (Gram matrix of the rows).
pub fn gram(a: &Matrix) -> Matrix {
    let rows = a.len();
    let mut out = zeros(rows, rows);
    for i in 0..rows {
        for j in 0..=i {
            let s: f64 = a[i].iter().zip(&a[j]).map(|(x, y)| x * y).sum();
            out[i][j] = s;
            out[j][i] = s;
        }
    }
    out
}

/// tr(a b) for square a, b of equal size.
pub fn trace_prod(a: &Matrix, b: &Matrix) -> f64 {
    let mut tr = 0.0;
    for (i, row) in a.iter().enumerate() {
        for (j, &aij) in row.iter().enumerate() {
            tr += aij * b[j][i];
        }
    }
    tr
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// aᵀ m a for m square (n × n), a of length n: used for quadratic forms.
pub fn quadratic_form(m: &Matrix, a: &[f64]) -> f64 {
    let mut s = 0.0;
    for (i, row) in m.iter().enumerate() {
        for (j, &mij) in row.iter().enumerate() {
            s += a[i] * mij * a[j];
        }
    }
    s
}

/// Frobenius norm.
pub fn frobenius(m: &Matrix) -> f64 {
    m.iter()
        .flat_map(|r| r.iter())
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
}
