//! Dense reference computations for the verification suite.

use schwarz_lfa::C64;

/// Row-major dense product `a · b`, both `n×n`.
pub fn matmul(n: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let x = a[i * n + k];
            if x != 0.0 {
                for j in 0..n {
                    out[i * n + j] += x * b[k * n + j];
                }
            }
        }
    }
    out
}

pub fn matvec(n: usize, a: &[f64], x: &[f64]) -> Vec<f64> {
    (0..n).map(|i| (0..n).map(|j| a[i * n + j] * x[j]).sum()).collect()
}

/// Gauss–Jordan inverse with partial pivoting; `None` if singular.
pub fn inverse(n: usize, a: &[f64]) -> Option<Vec<f64>> {
    let mut m = a.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for col in 0..n {
        let p = (col..n).max_by(|&x, &y| m[x * n + col].abs().total_cmp(&m[y * n + col].abs()))?;
        if m[p * n + col] == 0.0 {
            return None;
        }
        for j in 0..n {
            m.swap(col * n + j, p * n + j);
            inv.swap(col * n + j, p * n + j);
        }
        let d = m[col * n + col];
        for j in 0..n {
            m[col * n + j] /= d;
            inv[col * n + j] /= d;
        }
        for r in 0..n {
            let f = m[r * n + col];
            if r != col && f != 0.0 {
                for j in 0..n {
                    m[r * n + j] -= f * m[col * n + j];
                    inv[r * n + j] -= f * inv[col * n + j];
                }
            }
        }
    }
    Some(inv)
}

/// Complex Gaussian elimination with partial pivoting.
pub fn complex_solve(n: usize, a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    for col in 0..n {
        let p = (col..n).max_by(|&u, &v| m[u * n + col].norm().total_cmp(&m[v * n + col].norm())).unwrap();
        for j in 0..n {
            m.swap(col * n + j, p * n + j);
        }
        x.swap(col, p);
        for r in col + 1..n {
            let f = m[r * n + col] / m[col * n + col];
            for j in col..n {
                let t = m[col * n + j];
                m[r * n + j] -= f * t;
            }
            let t = x[col];
            x[r] -= f * t;
        }
    }
    for r in (0..n).rev() {
        let s: C64 = (r + 1..n).fold(x[r], |s, j| s - m[r * n + j] * x[j]);
        x[r] = s / m[r * n + r];
    }
    x
}

/// Block origins along a line: stride multiples while the block fits, then
/// one block flush with the far end.
pub fn axis_origins(len: usize, size: usize, stride: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (0..).map(|k| k * stride).take_while(|&o| o + size <= len).collect();
    if v.last().is_some_and(|&o| o + size != len) {
        v.push(len - size);
    }
    v
}

/// Index sets of `w×h` blocks in west→east, south→north order.
pub fn forward_blocks(side: usize, w: usize, h: usize, sx: usize, sy: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for &y0 in &axis_origins(side, h, sy) {
        for &x0 in &axis_origins(side, w, sx) {
            out.push((y0..y0 + h).flat_map(|y| (x0..x0 + w).map(move |x| y * side + x)).collect());
        }
    }
    out
}

/// `∏ (I − V (VᵀAV)⁻¹ Vᵀ A)`, first block rightmost.
pub fn schwarz_propagator(n: usize, a: &[f64], blocks: &[Vec<usize>]) -> Option<Vec<f64>> {
    let mut e = vec![0.0; n * n];
    for i in 0..n {
        e[i * n + i] = 1.0;
    }
    for s in blocks {
        let k = s.len();
        let local: Vec<f64> = s.iter().flat_map(|&r| s.iter().map(move |&c| a[r * n + c])).collect();
        let inv = inverse(k, &local)?;
        let mut step = vec![0.0; n * n];
        for i in 0..n {
            step[i * n + i] = 1.0;
        }
        for (i, &gi) in s.iter().enumerate() {
            for c in 0..n {
                let t: f64 = s.iter().enumerate().map(|(j, &gj)| inv[i * k + j] * a[gj * n + c]).sum();
                step[gi * n + c] -= t;
            }
        }
        e = matmul(n, &step, &e);
    }
    Some(e)
}
