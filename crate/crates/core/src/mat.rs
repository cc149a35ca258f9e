//! Minimal fixed-size complex matrix helpers for 2x2 and 4x4 operators.

use crate::C64;

#[allow(unused_imports)]
use num_traits::Float;

pub type Mat2 = [[C64; 2]; 2];
pub type Mat4 = [[C64; 4]; 4];

pub const fn czero() -> C64 {
    C64::new(0.0, 0.0)
}

pub fn identity2() -> Mat2 {
    let mut m = [[czero(); 2]; 2];
    m[0][0] = C64::new(1.0, 0.0);
    m[1][1] = C64::new(1.0, 0.0);
    m
}

pub fn identity4() -> Mat4 {
    let mut m = [[czero(); 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = C64::new(1.0, 0.0);
    }
    m
}

pub fn matmul2(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[czero(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for (k, bk) in b.iter().enumerate() {
                out[i][j] += a[i][k] * bk[j];
            }
        }
    }
    out
}

pub fn matmul4(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [[czero(); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for (k, bk) in b.iter().enumerate() {
                out[i][j] += a[i][k] * bk[j];
            }
        }
    }
    out
}

pub fn adjoint2(a: &Mat2) -> Mat2 {
    let mut out = [[czero(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[j][i].conj();
        }
    }
    out
}

pub fn adjoint4(a: &Mat4) -> Mat4 {
    let mut out = [[czero(); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = a[j][i].conj();
        }
    }
    out
}

pub fn kron2(a: &Mat2, b: &Mat2) -> Mat4 {
    let mut out = [[czero(); 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[2 * i + k][2 * j + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn matvec4(a: &Mat4, v: &[C64; 4]) -> [C64; 4] {
    let mut out = [czero(); 4];
    for (i, row) in a.iter().enumerate() {
        for (j, aij) in row.iter().enumerate() {
            out[i] += aij * v[j];
        }
    }
    out
}

pub fn matvec2(a: &Mat2, v: &[C64; 2]) -> [C64; 2] {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

pub fn inner4(a: &[C64; 4], b: &[C64; 4]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn inner2(a: &[C64; 2], b: &[C64; 2]) -> C64 {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

pub fn kron_vec(a: &[C64; 2], b: &[C64; 2]) -> [C64; 4] {
    [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]]
}

pub fn trace4(a: &Mat4) -> C64 {
    a[0][0] + a[1][1] + a[2][2] + a[3][3]
}

/// Max entrywise absolute difference.
pub fn max_diff2(a: &Mat2, b: &Mat2) -> f64 {
    let mut m = 0.0_f64;
    for i in 0..2 {
        for j in 0..2 {
            m = m.max((a[i][j] - b[i][j]).norm());
        }
    }
    m
}

pub fn max_diff4(a: &Mat4, b: &Mat4) -> f64 {
    let mut m = 0.0_f64;
    for i in 0..4 {
        for j in 0..4 {
            m = m.max((a[i][j] - b[i][j]).norm());
        }
    }
    m
}

/// Pauli sigma_1 in matrix form.
pub fn sigma1() -> Mat2 {
    [[czero(), C64::new(1.0, 0.0)], [C64::new(1.0, 0.0), czero()]]
}

/// sigma_1 (x) sigma_1.
pub fn sigma1_sigma1() -> Mat4 {
    kron2(&sigma1(), &sigma1())
}

/// Rotation by pi/2 around the y axis, `exp(-i*pi*sigma_2/4)`.
pub fn ry_half_pi() -> Mat2 {
    let s = core::f64::consts::FRAC_1_SQRT_2;
    [
        [C64::new(s, 0.0), C64::new(-s, 0.0)],
        [C64::new(s, 0.0), C64::new(s, 0.0)],
    ]
}
