#![allow(dead_code)]

use schwarz_lfa::C64;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub n: usize,
    pub v: Vec<f64>,
}

impl Dense {
    pub fn zeros(n: usize) -> Self {
        Self { n, v: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.v[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_vec(n: usize, v: Vec<f64>) -> Self {
        assert_eq!(v.len(), n * n);
        Self { n, v }
    }

    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.v[r * self.n + c]
    }

    pub fn mul(&self, o: &Dense) -> Dense {
        let n = self.n;
        let mut out = Dense::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.v[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.v[i * n + j] += a * o.v[k * n + j];
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.v[i * self.n + j] * x[j]).sum()).collect()
    }
}

/// Rectangular row-major matrix product `a (r×k) · b (k×c)`.
pub fn rect_mul(a: &[f64], b: &[f64], r: usize, k: usize, c: usize) -> Vec<f64> {
    let mut out = vec![0.0; r * c];
    for i in 0..r {
        for t in 0..k {
            let x = a[i * k + t];
            if x == 0.0 {
                continue;
            }
            for j in 0..c {
                out[i * c + j] += x * b[t * c + j];
            }
        }
    }
    out
}

pub fn transpose(a: &[f64], r: usize, c: usize) -> Vec<f64> {
    let mut out = vec![0.0; r * c];
    for i in 0..r {
        for j in 0..c {
            out[j * r + i] = a[i * c + j];
        }
    }
    out
}

/// Gauss–Jordan inverse with partial pivoting.
pub fn inverse(a: &Dense) -> Dense {
    let n = a.n;
    let mut m = a.v.clone();
    let mut inv = Dense::identity(n).v;
    for col in 0..n {
        let p = (col..n).max_by(|&x, &y| m[x * n + col].abs().total_cmp(&m[y * n + col].abs())).unwrap();
        assert!(m[p * n + col].abs() > 1e-300, "singular");
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
            if r == col {
                continue;
            }
            let f = m[r * n + col];
            if f == 0.0 {
                continue;
            }
            for j in 0..n {
                m[r * n + j] -= f * m[col * n + j];
                inv[r * n + j] -= f * inv[col * n + j];
            }
        }
    }
    Dense::from_vec(n, inv)
}

/// Complex Gaussian elimination with partial pivoting.
pub fn csolve(n: usize, a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    for col in 0..n {
        let p = (col..n).max_by(|&u, &v| m[u * n + col].norm().total_cmp(&m[v * n + col].norm())).unwrap();
        for j in 0..n {
            m.swap(col * n + j, p * n + j);
        }
        x.swap(col, p);
        let d = m[col * n + col];
        for r in col + 1..n {
            let f = m[r * n + col] / d;
            for j in col..n {
                let t = m[col * n + j];
                m[r * n + j] -= f * t;
            }
            let t = x[col];
            x[r] -= f * t;
        }
    }
    for r in (0..n).rev() {
        let mut s = x[r];
        for j in r + 1..n {
            s -= m[r * n + j] * x[j];
        }
        x[r] = s / m[r * n + r];
    }
    x
}

/// SplitMix64 stream for test data.
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn vector(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| 2.0 * self.uniform() - 1.0).collect()
    }
}

/// Origins along one axis: multiples of the stride while the block fits,
/// then one block flush with the end.
pub fn axis_origins(len: usize, size: usize, stride: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (0..).map(|k| k * stride).take_while(|&o| o + size <= len).collect();
    if *v.last().unwrap() + size != len {
        v.push(len - size);
    }
    v
}

/// Index sets of `w×h` blocks on a `side×side` grid in forward order
/// (x fastest) or transposed order (x descending outer, y ascending inner).
pub fn blocks(side: usize, w: usize, h: usize, sx: usize, sy: usize, transposed: bool) -> Vec<Vec<usize>> {
    let xs = axis_origins(side, w, sx);
    let ys = axis_origins(side, h, sy);
    let mut origins = Vec::new();
    if transposed {
        for &x in xs.iter().rev() {
            for &y in &ys {
                origins.push((x, y));
            }
        }
    } else {
        for &y in &ys {
            for &x in &xs {
                origins.push((x, y));
            }
        }
    }
    origins
        .into_iter()
        .map(|(x0, y0)| {
            let mut d = Vec::new();
            for y in y0..y0 + h {
                for x in x0..x0 + w {
                    d.push(y * side + x);
                }
            }
            d
        })
        .collect()
}

/// `∏ (I − w V (VᵀAV)⁻¹ Vᵀ A)` with the first block applied first.
pub fn schwarz_propagator(a: &Dense, blocks: &[Vec<usize>], w: f64) -> Dense {
    let n = a.n;
    let mut e = Dense::identity(n);
    for s in blocks {
        let k = s.len();
        let mut local = Dense::zeros(k);
        for (i, &gi) in s.iter().enumerate() {
            for (j, &gj) in s.iter().enumerate() {
                local.v[i * k + j] = a.at(gi, gj);
            }
        }
        let inv = inverse(&local);
        // step = I − w V inv Vᵀ A
        let mut step = Dense::identity(n);
        for (i, &gi) in s.iter().enumerate() {
            for c in 0..n {
                let mut t = 0.0;
                for (j, &gj) in s.iter().enumerate() {
                    t += inv.at(i, j) * a.at(gj, c);
                }
                step.v[gi * n + c] -= w * t;
            }
        }
        e = step.mul(&e);
    }
    e
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}
