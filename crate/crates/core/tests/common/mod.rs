//! Reference implementations used as test oracles. Plain `Vec` arithmetic,
//! deliberately sharing no code with the library.
#![allow(dead_code, clippy::needless_range_loop)]

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type Mat = Vec<Vec<f64>>;

pub fn rows_of(a: &Array2<f64>) -> Mat {
    a.rows().into_iter().map(|r| r.to_vec()).collect()
}

fn centered(a: &Mat) -> Mat {
    a.iter()
        .map(|r| {
            let m = r.iter().sum::<f64>() / r.len() as f64;
            r.iter().map(|v| v - m).collect()
        })
        .collect()
}

fn cross(a: &Mat, b: &Mat) -> Mat {
    let n = a[0].len() as f64;
    a.iter()
        .map(|ra| {
            b.iter()
                .map(|rb| ra.iter().zip(rb).map(|(x, y)| x * y).sum::<f64>() / n)
                .collect()
        })
        .collect()
}

fn matmul(a: &Mat, b: &Mat) -> Mat {
    let (n, m, p) = (a.len(), b.len(), b[0].len());
    let mut out = vec![vec![0.0; p]; n];
    for i in 0..n {
        for k in 0..m {
            for j in 0..p {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

fn transpose(a: &Mat) -> Mat {
    (0..a[0].len())
        .map(|j| a.iter().map(|r| r[j]).collect())
        .collect()
}

/// Lower-triangular `L` with `L L^T = a`.
pub fn cholesky(a: &Mat) -> Mat {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                l[i][i] = (a[i][i] - s).sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    l
}

/// Solves `a x = b` column by column with partial pivoting.
pub fn solve(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let p = b[0].len();
    let mut m: Mat = a
        .iter()
        .zip(b)
        .map(|(ra, rb)| [ra.clone(), rb.clone()].concat())
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        m.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = m[r][col] / m[col][col];
                for c in col..n + p {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    (0..n)
        .map(|r| (0..p).map(|c| m[r][n + c] / m[r][r]).collect())
        .collect()
}

/// `L^{-1} b` for lower-triangular `L`.
fn forward(l: &Mat, b: &Mat) -> Mat {
    let n = l.len();
    let p = b[0].len();
    let mut x = vec![vec![0.0; p]; n];
    for c in 0..p {
        for i in 0..n {
            let s: f64 = (0..i).map(|k| l[i][k] * x[k][c]).sum();
            x[i][c] = (b[i][c] - s) / l[i][i];
        }
    }
    x
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(a: &Mat) -> Vec<f64> {
    let n = a.len();
    let mut m = a.clone();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    (0..n).map(|i| m[i][i]).collect()
}

/// Largest canonical correlation from the generalized eigenproblem
/// `Cxy Cyy^{-1} Cyx w = rho^2 Cxx w`, reduced to a symmetric problem with
/// the Cholesky factor of `Cxx`.
pub fn oracle_rho(x: &Array2<f64>, y: &Array2<f64>) -> f64 {
    let xc = centered(&rows_of(x));
    let yc = centered(&rows_of(y));
    let cxx = cross(&xc, &xc);
    let cyy = cross(&yc, &yc);
    let cxy = cross(&xc, &yc);
    let cyx = transpose(&cxy);
    let k = matmul(&cxy, &solve(&cyy, &cyx));
    let l = cholesky(&cxx);
    let half = forward(&l, &k);
    let s = transpose(&forward(&l, &transpose(&half)));
    let sym: Mat = (0..s.len())
        .map(|i| (0..s.len()).map(|j| 0.5 * (s[i][j] + s[j][i])).collect())
        .collect();
    let top = jacobi_eigenvalues(&sym)
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    top.max(0.0).sqrt()
}

/// Least-squares amplitudes of sinusoids at `freqs` (plus a constant) in `x`.
pub fn fit_amplitudes(x: &[f64], freqs: &[f64], fs: f64) -> Vec<f64> {
    let basis: Mat = freqs
        .iter()
        .flat_map(|&f| {
            let w = 2.0 * std::f64::consts::PI * f / fs;
            [
                (0..x.len())
                    .map(|k| (w * k as f64).sin())
                    .collect::<Vec<_>>(),
                (0..x.len())
                    .map(|k| (w * k as f64).cos())
                    .collect::<Vec<_>>(),
            ]
        })
        .chain(std::iter::once(vec![1.0; x.len()]))
        .collect();
    let gram: Mat = basis
        .iter()
        .map(|a| {
            basis
                .iter()
                .map(|b| a.iter().zip(b).map(|(u, v)| u * v).sum())
                .collect()
        })
        .collect();
    let rhs: Mat = basis
        .iter()
        .map(|a| vec![a.iter().zip(x).map(|(u, v)| u * v).sum()])
        .collect();
    let coef = solve(&gram, &rhs);
    (0..freqs.len())
        .map(|i| coef[2 * i][0].hypot(coef[2 * i + 1][0]))
        .collect()
}

pub fn sine(hz: f64, fs: f64, n: usize, amplitude: f64, phase: f64) -> Vec<f64> {
    (0..n)
        .map(|k| amplitude * (2.0 * std::f64::consts::PI * hz * k as f64 / fs + phase).sin())
        .collect()
}

/// Amplitude-spectrum magnitude at an exact DFT bin frequency.
pub fn dft_amplitude(x: &[f64], hz: f64, fs: f64) -> f64 {
    let w = 2.0 * std::f64::consts::PI * hz / fs;
    let (mut re, mut im) = (0.0, 0.0);
    for (k, v) in x.iter().enumerate() {
        re += v * (w * k as f64).cos();
        im -= v * (w * k as f64).sin();
    }
    2.0 * re.hypot(im) / x.len() as f64
}

pub fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.sample::<f64, _>(StandardNormal))
}

/// Pair of matrices sharing `latent` random sources plus independent noise.
pub fn correlated_pair(seed: u64) -> (Array2<f64>, Array2<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let px = rng.random_range(4..=8);
    let py = rng.random_range(4..=8);
    let n = rng.random_range(500..=2000);
    let latent = rng.random_range(1..=3);
    let z = gaussian(&mut rng, latent, n);
    let a = gaussian(&mut rng, px, latent);
    let b = gaussian(&mut rng, py, latent);
    let noise_x = rng.random_range(0.1..3.0);
    let noise_y = rng.random_range(0.1..3.0);
    let x = a.dot(&z) + gaussian(&mut rng, px, n) * noise_x;
    let y = b.dot(&z) + gaussian(&mut rng, py, n) * noise_y;
    (x, y)
}
