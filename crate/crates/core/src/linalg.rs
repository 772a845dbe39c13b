//! Small dense linear algebra: symmetric eigendecomposition by cyclic Jacobi
//! sweeps, 2×2 rotations, and angle extraction from orthonormal 2×2 matrices.

/// Row-major 2×2 matrix.
pub type Mat2 = [[f64; 2]; 2];

/// Eigenpairs of a symmetric matrix.
///
/// Eigenvalues are sorted descending. Column `k` of `vectors` belongs to
/// `values[k]`, with its largest-magnitude entry made positive.
#[derive(Debug, Clone, PartialEq)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

impl SymEigen {
    /// Column `k` as a vector.
    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.iter().map(|row| row[k]).collect()
    }
}

const MAX_SWEEPS: usize = 64;

/// Eigendecomposition of a real symmetric matrix. Only the upper triangle
/// is read.
pub fn sym_eigen(m: &[Vec<f64>]) -> SymEigen {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if j >= i { m[i][j] } else { m[j][i] }).collect())
        .collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let diag: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum();
        if off <= f64::EPSILON * f64::EPSILON * diag || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                // rotation angle that zeroes a[p][q]
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]));
    let values: Vec<f64> = order.iter().map(|&k| a[k][k]).collect();
    let mut vectors: Vec<Vec<f64>> = (0..n)
        .map(|i| order.iter().map(|&k| v[i][k]).collect())
        .collect();
    for k in 0..n {
        let lead = (0..n)
            .max_by(|&i, &j| vectors[i][k].abs().total_cmp(&vectors[j][k].abs()))
            .unwrap_or(0);
        if vectors[lead][k] < 0.0 {
            for row in vectors.iter_mut() {
                row[k] = -row[k];
            }
        }
    }
    SymEigen { values, vectors }
}

/// Eigendecomposition of a symmetric 2×2 matrix, same conventions as
/// [`sym_eigen`]. Returns (values, E) with eigenvectors in the columns of E.
pub fn sym_eigen2(m: &Mat2) -> ([f64; 2], Mat2) {
    let e = sym_eigen(&[m[0].to_vec(), m[1].to_vec()]);
    (
        [e.values[0], e.values[1]],
        [
            [e.vectors[0][0], e.vectors[0][1]],
            [e.vectors[1][0], e.vectors[1][1]],
        ],
    )
}

/// `[[cos θ, −sin θ], [sin θ, cos θ]]`.
pub fn rotation(theta: f64) -> Mat2 {
    let (s, c) = theta.sin_cos();
    [[c, -s], [s, c]]
}

pub fn transpose(m: &Mat2) -> Mat2 {
    [[m[0][0], m[1][0]], [m[0][1], m[1][1]]]
}

pub fn matmul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn det(m: &Mat2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

pub fn to_rows(m: &Mat2) -> Vec<Vec<f64>> {
    vec![m[0].to_vec(), m[1].to_vec()]
}

pub fn from_rows(m: &[Vec<f64>]) -> Mat2 {
    [[m[0][0], m[0][1]], [m[1][0], m[1][1]]]
}

/// Angle (degrees) of the rotation closest to an approximately orthonormal
/// 2×2 unmixing matrix. A negative determinant is resolved by flipping the
/// sign of the second row first, which leaves the separated sources
/// unchanged up to sign.
pub fn rotation_angle_deg(w: &Mat2) -> f64 {
    let mut w = *w;
    if det(&w) < 0.0 {
        w[1][0] = -w[1][0];
        w[1][1] = -w[1][1];
    }
    (w[1][0] - w[0][1]).atan2(w[0][0] + w[1][1]).to_degrees()
}

/// Spectral condition number of a 2×2 matrix.
pub fn condition_number(m: &Mat2) -> f64 {
    let g = matmul(&transpose(m), m);
    let (vals, _) = sym_eigen2(&g);
    if vals[1] <= 0.0 {
        return f64::INFINITY;
    }
    (vals[0] / vals[1]).sqrt()
}
