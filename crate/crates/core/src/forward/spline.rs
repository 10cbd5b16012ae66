//! Interpolating cubic B-splines on square node grids, with mirror
//! boundary conditions and analytic derivatives up to second order.

const POLE: f64 = -0.267_949_192_431_122_7; // √3 − 2

/// In-place conversion of samples to B-spline coefficients.
fn prefilter_line(c: &mut [f64]) {
    let n = c.len();
    for x in c.iter_mut() {
        *x *= 6.0;
    }
    let z = POLE;
    // Exact causal initialization for the mirror-symmetric extension.
    let zn = z.powi(n as i32 - 1);
    let z2n = zn * zn;
    let mut zk = z;
    let mut zr = zn * zn / z;
    let mut sum = c[0] + zn * c[n - 1];
    for x in &c[1..n - 1] {
        sum += (zk + zr) * x;
        zk *= z;
        zr /= z;
    }
    let sum = sum / (1.0 - z2n);
    c[0] = sum;
    for k in 1..n {
        c[k] += z * c[k - 1];
    }
    c[n - 1] = z / (z * z - 1.0) * (c[n - 1] + z * c[n - 2]);
    for k in (0..n - 1).rev() {
        c[k] = z * (c[k + 1] - c[k]);
    }
}

/// Replaces an `n×n` row-major block of samples by its coefficients.
pub fn prefilter_2d(block: &mut [f64], n: usize) {
    for row in block.chunks_exact_mut(n) {
        prefilter_line(row);
    }
    let mut col = vec![0.0; n];
    for j in 0..n {
        for i in 0..n {
            col[i] = block[i * n + j];
        }
        prefilter_line(&mut col);
        for i in 0..n {
            block[i * n + j] = col[i];
        }
    }
}

/// Basis weights and their first two derivatives at fraction `f`.
#[inline]
fn basis(f: f64) -> [[f64; 4]; 3] {
    let g = 1.0 - f;
    let f2 = f * f;
    let f3 = f2 * f;
    [
        [g * g * g / 6.0, (3.0 * f3 - 6.0 * f2 + 4.0) / 6.0, (-3.0 * f3 + 3.0 * f2 + 3.0 * f + 1.0) / 6.0, f3 / 6.0],
        [-0.5 * g * g, 0.5 * (3.0 * f2 - 4.0 * f), 0.5 * (-3.0 * f2 + 2.0 * f + 1.0), 0.5 * f2],
        [g, 3.0 * f - 2.0, 1.0 - 3.0 * f, f],
    ]
}

#[inline]
fn mirror(i: i64, n: i64) -> usize {
    let m = if i < 0 { -i } else if i >= n { 2 * (n - 1) - i } else { i };
    m.clamp(0, n - 1) as usize
}

/// Value and derivatives of a scalar function of `(u, v)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet2 {
    pub v: f64,
    pub du: f64,
    pub dv: f64,
    pub duu: f64,
    pub duv: f64,
    pub dvv: f64,
}

impl Jet2 {
    pub fn scaled_add(&mut self, w: f64, o: &Jet2) {
        self.v += w * o.v;
        self.du += w * o.du;
        self.dv += w * o.dv;
        self.duu += w * o.duu;
        self.duv += w * o.duv;
        self.dvv += w * o.dvv;
    }
}

/// Grid geometry: nodes at `lo + i·h`, `i ∈ 0..n`, on both axes; the
/// first axis is the row index.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplineGrid {
    pub n: usize,
    pub lo: f64,
    pub h: f64,
}

impl SplineGrid {
    pub fn hi(&self) -> f64 {
        self.lo + (self.n - 1) as f64 * self.h
    }

    /// Evaluates the spline with coefficients `coef` at `(u, v)`;
    /// `None` outside the node box.
    pub fn jet(&self, coef: &[f64], u: f64, v: f64) -> Option<Jet2> {
        let hi = self.hi();
        if !(u >= self.lo && u <= hi && v >= self.lo && v <= hi) {
            return None;
        }
        let n = self.n as i64;
        let tu = (u - self.lo) / self.h;
        let tv = (v - self.lo) / self.h;
        let iu = (tu.floor() as i64).min(n - 2);
        let iv = (tv.floor() as i64).min(n - 2);
        let bu = basis(tu - iu as f64);
        let bv = basis(tv - iv as f64);
        let mut acc = [0.0; 6];
        for a in 0..4 {
            let row = mirror(iu - 1 + a as i64, n) * self.n;
            let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
            for b in 0..4 {
                let c = coef[row + mirror(iv - 1 + b as i64, n)];
                s0 += bv[0][b] * c;
                s1 += bv[1][b] * c;
                s2 += bv[2][b] * c;
            }
            acc[0] += bu[0][a] * s0;
            acc[1] += bu[1][a] * s0;
            acc[2] += bu[0][a] * s1;
            acc[3] += bu[2][a] * s0;
            acc[4] += bu[1][a] * s1;
            acc[5] += bu[0][a] * s2;
        }
        let ih = 1.0 / self.h;
        let ih2 = ih * ih;
        Some(Jet2 {
            v: acc[0],
            du: acc[1] * ih,
            dv: acc[2] * ih,
            duu: acc[3] * ih2,
            duv: acc[4] * ih2,
            dvv: acc[5] * ih2,
        })
    }
}
