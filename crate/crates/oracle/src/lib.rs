//! Brute-force reference solvers for checking the DEA engine.
//!
//! Everything here is deliberately naive and shares no code with
//! `dea-core`: linear programs are solved by enumerating every basis, and
//! the slacks-based score by scanning a grid of intensity vectors.
//! Datasets are DMU-major: `x[j]` holds the inputs of DMU `j`.

#![allow(clippy::needless_range_loop)]

/// Solves `a · x = b` for square `a` by Gauss–Jordan elimination.
fn gauss_jordan(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if m[r][col].abs() > m[piv][col].abs() {
                piv = r;
            }
        }
        if m[piv][col].abs() < 1e-10 {
            return None;
        }
        m.swap(col, piv);
        let p = m[col][col];
        for v in m[col].iter_mut() {
            *v /= p;
        }
        for r in 0..n {
            if r != col {
                let f = m[r][col];
                if f != 0.0 {
                    for c in 0..=n {
                        m[r][c] -= f * m[col][c];
                    }
                }
            }
        }
    }
    Some(m.iter().map(|r| r[n]).collect())
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// A basic feasible solution of `A·x = b, x ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub basis: Vec<usize>,
    pub x: Vec<f64>,
    pub objective: f64,
}

/// Every basic feasible solution, found by trying all `C(n, m)` column
/// subsets. `A` must have full row rank.
pub fn basic_feasible_solutions(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Vec<Vertex> {
    let (m, n) = (b.len(), c.len());
    let mut out = Vec::new();
    for basis in combinations(n, m) {
        let sub: Vec<Vec<f64>> = a.iter().map(|row| basis.iter().map(|&j| row[j]).collect()).collect();
        let Some(xb) = gauss_jordan(&sub, b) else { continue };
        if xb.iter().any(|&v| v < -1e-9) {
            continue;
        }
        let mut x = vec![0.0; n];
        for (&j, &v) in basis.iter().zip(&xb) {
            x[j] = v.max(0.0);
        }
        let objective = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
        out.push(Vertex { basis, x, objective });
    }
    out
}

/// Minimum objective over all basic feasible solutions; `None` if there
/// are none. Only meaningful for bounded problems.
pub fn lp_min_by_enumeration(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Option<Vertex> {
    basic_feasible_solutions(c, a, b)
        .into_iter()
        .min_by(|p, q| p.objective.total_cmp(&q.objective))
}

/// Output-oriented CRS CCR efficiency `1/φ*` of DMU `k`, from the raw
/// envelopment program `max φ  s.t.  Xλ + s⁻ = x_k, Yλ − s⁺ = φ y_k`
/// solved by basis enumeration.
pub fn ccr_output_score(x: &[Vec<f64>], y: &[Vec<f64>], k: usize) -> f64 {
    let n = x.len();
    let m = x[0].len();
    let s = y[0].len();
    let nv = 1 + n + m + s;
    let mut c = vec![0.0; nv];
    c[0] = -1.0;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for i in 0..m {
        let mut row = vec![0.0; nv];
        for j in 0..n {
            row[1 + j] = x[j][i];
        }
        row[1 + n + i] = 1.0;
        a.push(row);
        b.push(x[k][i]);
    }
    for r in 0..s {
        let mut row = vec![0.0; nv];
        row[0] = -y[k][r];
        for j in 0..n {
            row[1 + j] = y[j][r];
        }
        row[1 + n + m + r] = -1.0;
        a.push(row);
        b.push(0.0);
    }
    let best = lp_min_by_enumeration(&c, &a, &b).expect("λ = e_k is always feasible");
    1.0 / best.x[0]
}

/// One input, one output, CRS: efficiency is the DMU's output/input ratio
/// over the best ratio.
pub fn ratio_score(x: &[f64], y: &[f64], k: usize) -> f64 {
    let best = x.iter().zip(y).map(|(a, b)| b / a).fold(f64::MIN, f64::max);
    (y[k] / x[k]) / best
}

fn sbm_ratio(x0: &[f64], g0: &[f64], b0: &[f64], sx: &[f64], sg: &[f64], sb: &[f64]) -> f64 {
    let m = x0.len() as f64;
    let s = (g0.len() + b0.len()) as f64;
    let num = 1.0 - sx.iter().zip(x0).map(|(s, x)| s / x).sum::<f64>() / m;
    let den = 1.0
        + (sg.iter().zip(g0).map(|(s, y)| s / y).sum::<f64>() + sb.iter().zip(b0).map(|(s, y)| s / y).sum::<f64>()) / s;
    num / den
}

/// CRS slacks-based score with undesirable outputs of DMU `k`, minimised
/// over a grid of intensity vectors.
///
/// The first `n − 1` intensities run over `steps + 1` evenly spaced values
/// in `[0, ub_j]`, where `ub_j` is the largest value any input constraint
/// allows. Slacks follow from the equality blocks. For the last intensity
/// the feasible interval is computed exactly and both ends are tried; the
/// ratio is monotone along that line, so no grid is needed there.
pub fn sbm_grid_score(x: &[Vec<f64>], g: &[Vec<f64>], w: &[Vec<f64>], k: usize, steps: usize) -> f64 {
    let n = x.len();
    let (m, s1, s2) = (x[0].len(), g[0].len(), w[0].len());
    let ub: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|i| x[k][i] / x[j][i]).fold(f64::INFINITY, f64::min))
        .collect();
    let last = n - 1;
    let grid_dims = n - 1;
    let mut idx = vec![0usize; grid_dims];
    let mut best = f64::INFINITY;
    let mut lambda = vec![0.0; n];
    let (mut sx, mut sg, mut sb) = (vec![0.0; m], vec![0.0; s1], vec![0.0; s2]);
    loop {
        for d in 0..grid_dims {
            lambda[d] = ub[d] * (idx[d] as f64 / steps as f64);
        }
        // Interval for the last intensity.
        let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
        let partial =
            |data: &[Vec<f64>], r: usize, lambda: &[f64]| -> f64 { (0..last).map(|j| data[j][r] * lambda[j]).sum() };
        for i in 0..m {
            hi = hi.min((x[k][i] - partial(x, i, &lambda)) / x[last][i]);
        }
        for r in 0..s1 {
            lo = lo.max((g[k][r] - partial(g, r, &lambda)) / g[last][r]);
        }
        for r in 0..s2 {
            hi = hi.min((w[k][r] - partial(w, r, &lambda)) / w[last][r]);
        }
        if lo <= hi + 1e-12 {
            for cand in [lo, hi.max(lo)] {
                lambda[last] = cand;
                for i in 0..m {
                    sx[i] = (x[k][i] - (0..n).map(|j| x[j][i] * lambda[j]).sum::<f64>()).max(0.0);
                }
                for r in 0..s1 {
                    sg[r] = ((0..n).map(|j| g[j][r] * lambda[j]).sum::<f64>() - g[k][r]).max(0.0);
                }
                for r in 0..s2 {
                    sb[r] = (w[k][r] - (0..n).map(|j| w[j][r] * lambda[j]).sum::<f64>()).max(0.0);
                }
                best = best.min(sbm_ratio(&x[k], &g[k], &w[k], &sx, &sg, &sb));
            }
        }
        // Advance the odometer.
        let mut d = 0;
        loop {
            if d == grid_dims {
                return best;
            }
            idx[d] += 1;
            if idx[d] <= steps {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

/// DMU-major raw data: inputs, desirable outputs, undesirable outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDea {
    pub x: Vec<Vec<f64>>,
    pub g: Vec<Vec<f64>>,
    pub w: Vec<Vec<f64>>,
}

/// SplitMix64; enough for reproducible test data without extra crates.
pub struct SplitMix(u64);

impl SplitMix {
    pub fn new(seed: u64) -> Self {
        SplitMix(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * ((self.next_u64() >> 11) as f64 / (1u64 << 53) as f64)
    }

    /// Integer in `lo..=hi`.
    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.next_u64() % (hi - lo + 1) as u64) as usize
    }
}

/// Random strictly positive dataset with `1..=max_n` DMUs, `1..=max_m`
/// inputs and one output of each kind, values uniform in `[lo, hi]`.
pub fn random_dea(rng: &mut SplitMix, max_n: usize, max_m: usize, lo: f64, hi: f64) -> RawDea {
    let n = rng.range(1, max_n);
    let m = rng.range(1, max_m);
    let mut block = |width: usize| -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| (0..width).map(|_| rng.uniform(lo, hi)).collect())
            .collect()
    };
    let x = block(m);
    let g = block(1);
    let w = block(1);
    RawDea { x, g, w }
}
