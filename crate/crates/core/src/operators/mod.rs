//! Linear maps between couples and the quantities behind compactness.
//!
//! Suprema are reported as brackets: the lower end is attained by the stored
//! witness vector, the upper end is exact where extreme points can be
//! enumerated or a closed form applies, and an envelope otherwise.

mod compact;
mod norm;

pub use compact::{
    approx_numbers, compactness_modulus, constrained_image_norm, constrained_sup, fourier_coefficient_bound,
    CompactnessModulus,
};
pub use norm::{couple_operator_norm, op_norm, OpNormConfig};

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::spaces::{cvec, Couple, Exponent, NormModel};
use crate::{NormBracket, C64};

/// `T: X -> Y` given by a complex `m x n` matrix, `n = dim X`, `m = dim Y`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "OperatorDoc", into = "OperatorDoc")]
pub struct CoupleOperator {
    rows: Vec<Vec<C64>>,
    source: Couple,
    target: Couple,
    cache: Arc<Mutex<BTreeMap<String, NormBracket>>>,
}

impl PartialEq for CoupleOperator {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows && self.source == other.source && self.target == other.target
    }
}

impl CoupleOperator {
    pub fn new(rows: Vec<Vec<C64>>, source: Couple, target: Couple) -> Result<Self> {
        check_dim(target.dim(), rows.len())?;
        for r in &rows {
            check_dim(source.dim(), r.len())?;
            if r.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
                return Err(Error::InvalidParameter("non-finite matrix entry".into()));
            }
        }
        Ok(CoupleOperator { rows, source, target, cache: Arc::default() })
    }

    pub fn diagonal(d: &[f64], source: Couple, target: Couple) -> Result<Self> {
        let n = d.len();
        let rows = (0..n)
            .map(|i| (0..n).map(|j| C64::new(if i == j { d[i] } else { 0.0 }, 0.0)).collect())
            .collect();
        Self::new(rows, source, target)
    }

    pub fn rows(&self) -> &[Vec<C64>] {
        &self.rows
    }

    pub fn source(&self) -> &Couple {
        &self.source
    }

    pub fn target(&self) -> &Couple {
        &self.target
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        apply_rows(&self.rows, x)
    }

    /// `||T||_{X_i -> Y_j}`, cached per configuration.
    pub fn endpoint_norm(&self, i: usize, j: usize, cfg: &OpNormConfig) -> Result<NormBracket> {
        let key = format!("{i}{j}:{}", serde_json::to_string(cfg)?);
        if let Some(b) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(b.clone());
        }
        let b = op_norm(&self.rows, self.source.space(i), self.target.space(j), cfg)?;
        self.cache.lock().expect("cache lock").insert(key, b.clone());
        Ok(b)
    }

    /// The same matrix between other couples.
    pub fn with_couples(&self, source: Couple, target: Couple) -> Result<Self> {
        Self::new(self.rows.clone(), source, target)
    }
}

/// `T = diag(2^-i)`, `i = 1..n`, from `(l_p, l_p(e^(step i)))` to
/// `(l_p, l_p(e^(step i) 2^i / sqrt(i)))`: `a_k(T: X0 -> Y0) = 2^-k` and
/// `||T: X1 -> Y1|| = 1`.
pub fn canonical_operator(n: usize, p: Exponent, step: f64) -> Result<CoupleOperator> {
    let idx: Vec<f64> = (1..=n).map(|i| i as f64).collect();
    let flat = NormModel::weighted_lp(p, vec![1.0; n])?;
    let x1 = NormModel::weighted_lp(p, idx.iter().map(|i| (step * i).exp()).collect())?;
    let y1 = NormModel::weighted_lp(p, idx.iter().map(|i| (step * i).exp() * 2f64.powf(*i) / i.sqrt()).collect())?;
    let d: Vec<f64> = idx.iter().map(|i| 2f64.powf(-i)).collect();
    CoupleOperator::diagonal(&d, Couple::new(flat.clone(), x1)?, Couple::new(flat, y1)?)
}

pub(crate) fn apply_rows(rows: &[Vec<C64>], x: &[C64]) -> Vec<C64> {
    rows.iter().map(|r| crate::spaces::apply(r, x)).collect()
}

/// `A^H g`.
pub(crate) fn adjoint_apply(rows: &[Vec<C64>], g: &[C64]) -> Vec<C64> {
    let n = rows.first().map_or(0, |r| r.len());
    let mut out = vec![C64::new(0.0, 0.0); n];
    for (r, gi) in rows.iter().zip(g) {
        for (o, a) in out.iter_mut().zip(r) {
            *o += a.conj() * gi;
        }
    }
    out
}

pub(crate) fn to_matrix(rows: &[Vec<C64>]) -> DMatrix<C64> {
    let n = rows.first().map_or(0, |r| r.len());
    DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j])
}

pub(crate) fn from_matrix(m: &DMatrix<C64>) -> Vec<Vec<C64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OperatorDoc {
    m: usize,
    n: usize,
    /// Rows of `[re, im]` pairs.
    matrix: Vec<Vec<[f64; 2]>>,
    source: Couple,
    target: Couple,
}

impl From<CoupleOperator> for OperatorDoc {
    fn from(t: CoupleOperator) -> Self {
        OperatorDoc {
            m: t.rows.len(),
            n: t.source.dim(),
            matrix: t.rows.iter().map(|r| cvec::to_pairs(r)).collect(),
            source: t.source,
            target: t.target,
        }
    }
}

impl TryFrom<OperatorDoc> for CoupleOperator {
    type Error = Error;

    fn try_from(d: OperatorDoc) -> Result<Self> {
        check_dim(d.m, d.matrix.len())?;
        check_dim(d.n, d.source.dim())?;
        check_dim(d.m, d.target.dim())?;
        CoupleOperator::new(d.matrix.iter().map(|r| cvec::from_pairs(r)).collect(), d.source, d.target)
    }
}
