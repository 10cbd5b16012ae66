use super::GridSpec;
use crate::Vec3;

/// Catmull-Rom weights for the four nodes `i₀−1 .. i₀+2` at fraction `t`.
#[inline]
pub fn catmull_rom_weights(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        0.5 * (-t3 + 2.0 * t2 - t),
        0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
        0.5 * (-3.0 * t3 + 4.0 * t2 + t),
        0.5 * (t3 - t2),
    ]
}

/// Tricubic Catmull-Rom interpolation of several component arrays sharing
/// `spec`. Nodes outside the grid count as zero.
pub fn tricubic<const C: usize>(spec: &GridSpec, comps: &[&[f64]; C], x: &Vec3) -> [f64; C] {
    let mut base = [0i64; 3];
    let mut w = [[0.0; 4]; 3];
    for a in 0..3 {
        let u = (x[a] - spec.origin[a]) / spec.spacing[a];
        if !(u > -1.0 && u < spec.dims[a] as f64) {
            return [0.0; C];
        }
        let f = u.floor();
        base[a] = f as i64 - 1;
        w[a] = catmull_rom_weights(u - f);
    }
    let n = spec.dims.map(|d| d as i64);
    let mut out = [0.0; C];
    for (di, wi) in w[0].iter().enumerate() {
        let i = base[0] + di as i64;
        if i < 0 || i >= n[0] || *wi == 0.0 {
            continue;
        }
        for (dj, wj) in w[1].iter().enumerate() {
            let j = base[1] + dj as i64;
            if j < 0 || j >= n[1] {
                continue;
            }
            let wij = wi * wj;
            let row = ((i * n[1] + j) * n[2]) as usize;
            for (dk, wk) in w[2].iter().enumerate() {
                let k = base[2] + dk as i64;
                if k < 0 || k >= n[2] {
                    continue;
                }
                let idx = row + k as usize;
                let ww = wij * wk;
                for c in 0..C {
                    out[c] += ww * comps[c][idx];
                }
            }
        }
    }
    out
}
