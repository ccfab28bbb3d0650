//! Real spherical harmonics up to degree 3, in the ordering and with the
//! constants used across splat tooling. Colors are stored as SH coefficients
//! around a 0.5 offset; `sh_color` applies offset and clamp.

use nalgebra::Vector3;

const C0: f64 = 0.28209479177387814;
const C1: f64 = 0.4886025119029199;
const C2: [f64; 5] = [
    1.0925484305920792,
    -1.0925484305920792,
    0.31539156525252005,
    -1.0925484305920792,
    0.5462742152960396,
];
const C3: [f64; 7] = [
    -0.5900435899266435,
    2.890611442640554,
    -0.4570457994644658,
    0.3731763325901154,
    -0.4570457994644658,
    1.445305721320277,
    -0.5900435899266435,
];

/// Evaluates the SH expansion at unit direction `dir` for one color channel
/// set: `coeffs[k][ch]`, k over (degree+1)^2 basis functions.
/// Returns the raw (un-offset, unclamped) RGB value.
pub fn eval_sh(degree: usize, coeffs: &[[f64; 3]], dir: &Vector3<f64>) -> [f64; 3] {
    let (x, y, z) = (dir[0], dir[1], dir[2]);
    let mut out = [0.0; 3];
    for ch in 0..3 {
        let mut v = C0 * coeffs[0][ch];
        if degree >= 1 {
            v += -C1 * y * coeffs[1][ch] + C1 * z * coeffs[2][ch] - C1 * x * coeffs[3][ch];
        }
        if degree >= 2 {
            let (xx, yy, zz) = (x * x, y * y, z * z);
            v += C2[0] * x * y * coeffs[4][ch]
                + C2[1] * y * z * coeffs[5][ch]
                + C2[2] * (2.0 * zz - xx - yy) * coeffs[6][ch]
                + C2[3] * x * z * coeffs[7][ch]
                + C2[4] * (xx - yy) * coeffs[8][ch];
            if degree >= 3 {
                v += C3[0] * y * (3.0 * xx - yy) * coeffs[9][ch]
                    + C3[1] * x * y * z * coeffs[10][ch]
                    + C3[2] * y * (4.0 * zz - xx - yy) * coeffs[11][ch]
                    + C3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy) * coeffs[12][ch]
                    + C3[4] * x * (4.0 * zz - xx - yy) * coeffs[13][ch]
                    + C3[5] * z * (xx - yy) * coeffs[14][ch]
                    + C3[6] * x * (xx - 3.0 * yy) * coeffs[15][ch];
            }
        }
        out[ch] = v;
    }
    out
}

/// Splat color: SH value shifted by the conventional 0.5 offset and clamped
/// to [0,1] so blending stays within range.
pub fn sh_color(degree: usize, coeffs: &[[f64; 3]], dir: &Vector3<f64>) -> [f64; 3] {
    let raw = eval_sh(degree, coeffs, dir);
    [
        (raw[0] + 0.5).clamp(0.0, 1.0),
        (raw[1] + 0.5).clamp(0.0, 1.0),
        (raw[2] + 0.5).clamp(0.0, 1.0),
    ]
}

/// Jacobian of [`eval_sh`] with respect to the direction: `jac[ch]` is the
/// gradient of channel `ch`. The direction is treated as a free 3-vector;
/// normalization is chained by the caller.
pub fn eval_sh_jacobian(degree: usize, coeffs: &[[f64; 3]], dir: &Vector3<f64>) -> [Vector3<f64>; 3] {
    let (x, y, z) = (dir[0], dir[1], dir[2]);
    let mut out = [Vector3::zeros(); 3];
    for ch in 0..3 {
        let mut g = Vector3::zeros();
        if degree >= 1 {
            g[0] += -C1 * coeffs[3][ch];
            g[1] += -C1 * coeffs[1][ch];
            g[2] += C1 * coeffs[2][ch];
        }
        if degree >= 2 {
            let (c4, c5, c6, c7, c8) = (
                coeffs[4][ch],
                coeffs[5][ch],
                coeffs[6][ch],
                coeffs[7][ch],
                coeffs[8][ch],
            );
            g[0] += C2[0] * y * c4 + C2[2] * (-2.0 * x) * c6 + C2[3] * z * c7 + C2[4] * 2.0 * x * c8;
            g[1] += C2[0] * x * c4 + C2[1] * z * c5 + C2[2] * (-2.0 * y) * c6 - C2[4] * 2.0 * y * c8;
            g[2] += C2[1] * y * c5 + C2[2] * 4.0 * z * c6 + C2[3] * x * c7;
            if degree >= 3 {
                let (xx, yy, zz) = (x * x, y * y, z * z);
                let (c9, c10, c11, c12, c13, c14, c15) = (
                    coeffs[9][ch],
                    coeffs[10][ch],
                    coeffs[11][ch],
                    coeffs[12][ch],
                    coeffs[13][ch],
                    coeffs[14][ch],
                    coeffs[15][ch],
                );
                g[0] += C3[0] * 6.0 * x * y * c9
                    + C3[1] * y * z * c10
                    + C3[2] * y * (-2.0 * x) * c11
                    + C3[3] * z * (-6.0 * x) * c12
                    + C3[4] * (4.0 * zz - 3.0 * xx - yy) * c13
                    + C3[5] * 2.0 * x * z * c14
                    + C3[6] * 3.0 * (xx - yy) * c15;
                g[1] += C3[0] * 3.0 * (xx - yy) * c9
                    + C3[1] * x * z * c10
                    + C3[2] * (4.0 * zz - xx - 3.0 * yy) * c11
                    + C3[3] * z * (-6.0 * y) * c12
                    + C3[4] * x * (-2.0 * y) * c13
                    - C3[5] * 2.0 * y * z * c14
                    - C3[6] * 6.0 * x * y * c15;
                g[2] += C3[1] * x * y * c10
                    + C3[2] * 8.0 * y * z * c11
                    + C3[3] * (6.0 * zz - 3.0 * xx - 3.0 * yy) * c12
                    + C3[4] * 8.0 * x * z * c13
                    + C3[5] * (xx - yy) * c14;
            }
        }
        out[ch] = g;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree0_is_direction_independent() {
        let coeffs = vec![[1.0, -0.5, 0.25]];
        let a = eval_sh(0, &coeffs, &Vector3::new(0.0, 0.0, 1.0));
        let b = eval_sh(0, &coeffs, &Vector3::new(1.0, 0.0, 0.0));
        assert_eq!(a, b);
        assert!((a[0] - C0).abs() < 1e-15);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        // Deterministic coefficients covering all 16 basis functions.
        let mut coeffs = vec![[0.0; 3]; 16];
        for (k, c) in coeffs.iter_mut().enumerate() {
            for ch in 0..3 {
                c[ch] = ((k * 3 + ch) as f64 * 0.37).sin() * 0.5;
            }
        }
        let dir = Vector3::new(0.3, -0.5, 0.81).normalize();
        let jac = eval_sh_jacobian(3, &coeffs, &dir);
        let h = 1e-6;
        for axis in 0..3 {
            let mut dp = dir;
            let mut dm = dir;
            dp[axis] += h;
            dm[axis] -= h;
            let fp = eval_sh(3, &coeffs, &dp);
            let fm = eval_sh(3, &coeffs, &dm);
            for ch in 0..3 {
                let fd = (fp[ch] - fm[ch]) / (2.0 * h);
                assert!(
                    (fd - jac[ch][axis]).abs() < 1e-6,
                    "ch {ch} axis {axis}: fd {fd} vs analytic {}",
                    jac[ch][axis]
                );
            }
        }
    }

    #[test]
    fn color_is_clamped() {
        let coeffs = vec![[10.0, -10.0, 0.0]];
        let c = sh_color(0, &coeffs, &Vector3::z());
        assert_eq!(c[0], 1.0);
        assert_eq!(c[1], 0.0);
        assert!((c[2] - 0.5).abs() < 1e-15);
    }
}
