//! Direct solver for real block-tridiagonal systems.
//!
//! Unknowns are grouped into consecutive blocks; the matrix may only couple a
//! block to itself and to its immediate neighbours. Factorization is the block
//! Thomas recursion with a partially pivoted dense LU on every Schur
//! complement.

use nalgebra::{DMatrix, DVector, LU, Dyn};

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

pub(crate) struct BlockTridiagonal {
    /// Start offset of every block, plus a final sentinel.
    offsets: Vec<usize>,
    /// LU of the Schur complements `D̃_k`.
    pivots: Vec<LU<f64, Dyn, Dyn>>,
    /// `X_k = D̃_k⁻¹ U_k`, coupling block `k` to `k+1`.
    upper_solved: Vec<DMatrix<f64>>,
    /// `L_k`, coupling block `k` to `k−1` (empty for the first block).
    lower: Vec<DMatrix<f64>>,
}

impl BlockTridiagonal {
    /// Factor `A − shift·I`, where `A` is given in CSR form and `offsets`
    /// delimits the blocks.
    pub(crate) fn factor(a: &CsrMatrix, offsets: Vec<usize>, shift: f64) -> Result<Self> {
        let n_blocks = offsets.len() - 1;
        let n = *offsets.last().unwrap();
        assert_eq!(a.n_rows(), n);
        let block_of = {
            let mut v = vec![0usize; n];
            for k in 0..n_blocks {
                for slot in &mut v[offsets[k]..offsets[k + 1]] {
                    *slot = k;
                }
            }
            v
        };
        let size = |k: usize| offsets[k + 1] - offsets[k];

        let mut diag: Vec<DMatrix<f64>> = (0..n_blocks).map(|k| DMatrix::zeros(size(k), size(k))).collect();
        let mut lower: Vec<DMatrix<f64>> = (0..n_blocks)
            .map(|k| if k == 0 { DMatrix::zeros(0, 0) } else { DMatrix::zeros(size(k), size(k - 1)) })
            .collect();
        let mut upper: Vec<DMatrix<f64>> = (0..n_blocks)
            .map(|k| {
                if k + 1 == n_blocks {
                    DMatrix::zeros(0, 0)
                } else {
                    DMatrix::zeros(size(k), size(k + 1))
                }
            })
            .collect();
        for i in 0..n {
            let bi = block_of[i];
            let li = i - offsets[bi];
            for (j, v) in a.row(i) {
                let bj = block_of[j];
                let lj = j - offsets[bj];
                if bj == bi {
                    diag[bi][(li, lj)] += v;
                } else if bj + 1 == bi {
                    lower[bi][(li, lj)] += v;
                } else if bj == bi + 1 {
                    upper[bi][(li, lj)] += v;
                } else {
                    return Err(Error::param(
                        "generator",
                        "coupling beyond neighbouring excitation levels",
                    ));
                }
            }
            diag[bi][(li, li)] -= shift;
        }

        let mut pivots = Vec::with_capacity(n_blocks);
        let mut upper_solved = Vec::with_capacity(n_blocks);
        let mut prev_x: Option<DMatrix<f64>> = None;
        for k in 0..n_blocks {
            let mut schur = std::mem::replace(&mut diag[k], DMatrix::zeros(0, 0));
            if let Some(x) = prev_x.take() {
                schur -= &lower[k] * x;
            }
            let lu = schur.lu();
            if !lu.is_invertible() {
                return Err(Error::Singular("block-tridiagonal factorization"));
            }
            let x = if k + 1 < n_blocks {
                lu.solve(&upper[k]).ok_or(Error::Singular("block-tridiagonal factorization"))?
            } else {
                DMatrix::zeros(0, 0)
            };
            upper_solved.push(x.clone());
            prev_x = Some(x);
            pivots.push(lu);
        }
        Ok(Self {
            offsets,
            pivots,
            upper_solved,
            lower,
        })
    }

    pub(crate) fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n_blocks = self.pivots.len();
        let seg = |k: usize| self.offsets[k]..self.offsets[k + 1];
        let mut z: Vec<DVector<f64>> = Vec::with_capacity(n_blocks);
        for k in 0..n_blocks {
            let mut b = DVector::from_column_slice(&rhs[seg(k)]);
            if k > 0 {
                b -= &self.lower[k] * &z[k - 1];
            }
            let zk = self.pivots[k]
                .solve(&b)
                .ok_or(Error::Singular("block-tridiagonal solve"))?;
            z.push(zk);
        }
        for k in (0..n_blocks.saturating_sub(1)).rev() {
            let correction = &self.upper_solved[k] * &z[k + 1];
            z[k] -= correction;
        }
        let mut out = Vec::with_capacity(rhs.len());
        for zk in z {
            out.extend(zk.iter().copied());
        }
        Ok(out)
    }
}
