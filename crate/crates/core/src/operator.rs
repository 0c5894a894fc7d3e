//! Dense complex matrices acting on truncated coefficient vectors.
//! Row and column index `i` corresponds to mode `i - N`.

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::density::{strong_weight, CircleDensity};
use crate::error::{Result, StoError};

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    max_mode: usize,
    mat: DMatrix<Complex64>,
}

impl OperatorMatrix {
    pub fn zeros(max_mode: usize) -> Self {
        let d = 2 * max_mode + 1;
        OperatorMatrix {
            max_mode,
            mat: DMatrix::zeros(d, d),
        }
    }

    pub fn identity(max_mode: usize) -> Self {
        let d = 2 * max_mode + 1;
        OperatorMatrix {
            max_mode,
            mat: DMatrix::identity(d, d),
        }
    }

    pub fn from_matrix(max_mode: usize, mat: DMatrix<Complex64>) -> Result<Self> {
        let d = 2 * max_mode + 1;
        if mat.nrows() != d || mat.ncols() != d {
            return Err(StoError::InvalidInput(format!(
                "matrix is {}x{}, expected {d}x{d}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(OperatorMatrix { max_mode, mat })
    }

    /// Builds from rows given as functions of the output mode.
    pub fn from_rows(max_mode: usize, rows: Vec<Vec<Complex64>>) -> Self {
        let d = 2 * max_mode + 1;
        assert_eq!(rows.len(), d);
        OperatorMatrix {
            max_mode,
            mat: DMatrix::from_fn(d, d, |i, j| rows[i][j]),
        }
    }

    /// `u v^T` with `u` a density and `v` a linear functional on coefficients.
    pub fn rank_one(u: &CircleDensity, v: &[Complex64]) -> Self {
        let d = u.len();
        assert_eq!(v.len(), d);
        OperatorMatrix {
            max_mode: u.max_mode(),
            mat: DMatrix::from_fn(d, d, |i, j| u.coeffs()[i] * v[j]),
        }
    }

    /// Multiplication by `diag(d_{-N..N})`.
    pub fn diagonal(max_mode: usize, diag: &[Complex64]) -> Self {
        OperatorMatrix {
            max_mode,
            mat: DMatrix::from_diagonal(&DVector::from_column_slice(diag)),
        }
    }

    pub fn max_mode(&self) -> usize {
        self.max_mode
    }

    pub fn dim(&self) -> usize {
        2 * self.max_mode + 1
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    /// Entry for output mode `n`, input mode `m`.
    pub fn get(&self, n: i64, m: i64) -> Complex64 {
        let o = self.max_mode as i64;
        self.mat[((n + o) as usize, (m + o) as usize)]
    }

    pub fn apply(&self, f: &CircleDensity) -> CircleDensity {
        assert_eq!(f.max_mode(), self.max_mode, "truncation mismatch");
        let v = DVector::from_column_slice(f.coeffs());
        let out = &self.mat * v;
        CircleDensity::from_coeffs(self.max_mode, out.as_slice().to_vec())
            .expect("operator output has the right shape")
    }

    /// `self * other`, i.e. apply `other` first.
    pub fn compose(&self, other: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix {
            max_mode: self.max_mode,
            mat: &self.mat * &other.mat,
        }
    }

    pub fn add(&self, other: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix {
            max_mode: self.max_mode,
            mat: &self.mat + &other.mat,
        }
    }

    pub fn sub(&self, other: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix {
            max_mode: self.max_mode,
            mat: &self.mat - &other.mat,
        }
    }

    pub fn scale(&self, alpha: f64) -> OperatorMatrix {
        OperatorMatrix {
            max_mode: self.max_mode,
            mat: self.mat.map(|c| c * alpha),
        }
    }

    pub fn power(&self, k: u32) -> OperatorMatrix {
        let mut out = OperatorMatrix::identity(self.max_mode);
        for _ in 0..k {
            out = self.compose(&out);
        }
        out
    }

    /// The `2N x 2N` block acting on zero-average coefficients (mode 0 removed).
    pub fn zero_average_block(&self) -> DMatrix<Complex64> {
        zero_average_block(&self.mat, self.max_mode)
    }

    /// Max deviation from the structure `A[-n][-m] = conj(A[n][m])` of real-preserving maps.
    pub fn real_preserving_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let a = self.mat[(i, j)];
                let b = self.mat[(d - 1 - i, d - 1 - j)].conj();
                worst = worst.max((a - b).norm());
            }
        }
        worst
    }

    /// Induced norm of the zero-average block for the weighted l1 norm
    /// `sum_n (1 + 2 pi |n|) |c_n|` (max weighted column sum).
    pub fn strong_coefficient_norm(&self) -> f64 {
        weighted_column_norm(&self.zero_average_block(), self.max_mode)
    }

    /// Induced norm from the weighted (strong) to the plain (weak) coefficient l1 norm on the full space.
    pub fn strong_to_weak_coefficient_norm(&self) -> f64 {
        let d = self.dim();
        let o = self.max_mode as i64;
        (0..d)
            .map(|j| {
                let col: f64 = (0..d).map(|i| self.mat[(i, j)].norm()).sum();
                col / strong_weight(j as i64 - o)
            })
            .fold(0.0, f64::max)
    }

    /// Induced norm on the full space for the coefficient weights `w(n)`:
    /// order 0 is plain l1, order 1 the strong and order 2 the strongest surrogate.
    pub fn full_coefficient_norm(&self, order: u32) -> f64 {
        let d = self.dim();
        let o = self.max_mode as i64;
        let w: Vec<f64> = (0..d)
            .map(|i| coefficient_weight(i as i64 - o, order))
            .collect();
        (0..d)
            .map(|j| (0..d).map(|i| w[i] * self.mat[(i, j)].norm()).sum::<f64>() / w[j])
            .fold(0.0, f64::max)
    }

    /// Weighted column-sum norms of the block powers `B^1..B^{n_max}`.
    pub fn block_power_norms(&self, n_max: usize) -> Vec<f64> {
        let b = self.zero_average_block();
        let mut p = b.clone();
        let mut out = Vec::with_capacity(n_max);
        for k in 1..=n_max {
            if k > 1 {
                p = &b * &p;
            }
            out.push(weighted_column_norm(&p, self.max_mode));
        }
        out
    }

    /// Eigenvalues of the zero-average block.
    pub fn zero_average_eigenvalues(&self) -> Vec<Complex64> {
        eigenvalues(self.zero_average_block())
    }

    pub fn zero_average_spectral_radius(&self) -> f64 {
        self.zero_average_eigenvalues()
            .iter()
            .fold(0.0, |acc, l| acc.max(l.norm()))
    }

    pub fn max_abs(&self) -> f64 {
        self.mat.iter().fold(0.0, |acc, c| acc.max(c.norm()))
    }
}

pub fn zero_average_block(mat: &DMatrix<Complex64>, max_mode: usize) -> DMatrix<Complex64> {
    let d = 2 * max_mode;
    let skip = |i: usize| if i < max_mode { i } else { i + 1 };
    DMatrix::from_fn(d, d, |i, j| mat[(skip(i), skip(j))])
}

/// Mode index of row/column `i` of a zero-average block.
pub fn block_mode(i: usize, max_mode: usize) -> i64 {
    if i < max_mode {
        i as i64 - max_mode as i64
    } else {
        i as i64 - max_mode as i64 + 1
    }
}

/// `1`, `1 + 2 pi |n|` or `1 + 2 pi |n| + (2 pi n)^2` for orders 0, 1, 2.
pub fn coefficient_weight(n: i64, order: u32) -> f64 {
    let k = std::f64::consts::TAU * n.unsigned_abs() as f64;
    match order {
        0 => 1.0,
        1 => 1.0 + k,
        _ => 1.0 + k + k * k,
    }
}

pub fn weighted_column_norm(block: &DMatrix<Complex64>, max_mode: usize) -> f64 {
    let d = block.nrows();
    let w: Vec<f64> = (0..d)
        .map(|i| strong_weight(block_mode(i, max_mode)))
        .collect();
    (0..d)
        .map(|j| (0..d).map(|i| w[i] * block[(i, j)].norm()).sum::<f64>() / w[j])
        .fold(0.0, f64::max)
}

pub fn eigenvalues(m: DMatrix<Complex64>) -> Vec<Complex64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let schur = Schur::try_new(m.clone(), 1e-14, 10_000).unwrap_or_else(|| Schur::new(m));
    let (_, t) = schur.unpack();
    t.diagonal().iter().copied().collect()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OperatorRepr {
    max_mode: usize,
    rows: Vec<Vec<[f64; 2]>>,
}

impl Serialize for OperatorMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let d = self.dim();
        OperatorRepr {
            max_mode: self.max_mode,
            rows: (0..d)
                .map(|i| {
                    (0..d)
                        .map(|j| [self.mat[(i, j)].re, self.mat[(i, j)].im])
                        .collect()
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for OperatorMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = OperatorRepr::deserialize(d)?;
        let dim = 2 * repr.max_mode + 1;
        if repr.rows.len() != dim || repr.rows.iter().any(|r| r.len() != dim) {
            return Err(serde::de::Error::custom(
                "operator rows have the wrong shape",
            ));
        }
        let rows = repr
            .rows
            .into_iter()
            .map(|r| r.into_iter().map(|[a, b]| Complex64::new(a, b)).collect())
            .collect();
        Ok(OperatorMatrix::from_rows(repr.max_mode, rows))
    }
}
