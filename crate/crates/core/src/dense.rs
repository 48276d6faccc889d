use alloc::vec::Vec;

/// Solves the square system `a · x = b` (row-major `a`) by Gaussian
/// elimination with partial pivoting. `None` when a pivot falls below
/// `tol` times the largest entry.
pub(crate) fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>, tol: f64) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= tol * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = alloc::vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Picks `cols.len()` linearly independent rows of the tall matrix whose
/// columns are `cols` (each of length m). `None` if the columns are rank
/// deficient.
pub(crate) fn independent_rows(cols: &[Vec<f64>], tol: f64) -> Option<Vec<usize>> {
    let k = cols.len();
    if k == 0 {
        return Some(Vec::new());
    }
    let m = cols[0].len();
    // Work on the transpose: k rows of length m, eliminate by full row pivoting.
    let mut t: Vec<Vec<f64>> = cols.to_vec();
    let scale = t
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let mut used = alloc::vec![false; m];
    let mut chosen = Vec::with_capacity(k);
    for i in 0..k {
        let (best, val) = (0..m)
            .filter(|&j| !used[j])
            .map(|j| (j, t[i][j].abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))?;
        if val <= tol * scale {
            return None;
        }
        used[best] = true;
        chosen.push(best);
        for r in i + 1..k {
            let f = t[r][best] / t[i][best];
            if f == 0.0 {
                continue;
            }
            for c in 0..m {
                t[r][c] -= f * t[i][c];
            }
        }
    }
    chosen.sort_unstable();
    Some(chosen)
}
