//! Lee-Carter decomposition of log mortality:
//! `ln m[x,t] = a[x] + sum_i b[i,x] k[i,t] + e[x,t]`.
//!
//! `a` is the row mean over time; `b` and `k` come from the leading singular
//! triplets of the centered matrix, normalized so every `b[i,.]` sums to one
//! and every `k[i,.]` sums to zero. There is no second-stage refit of `k`.

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hmd::MortalityMatrix;
use crate::linalg;

/// Clipping floor applied to rates before taking logs.
pub const DEFAULT_FLOOR: f64 = 1e-12;

// |sum_x U[x,i]| at or below this makes the b normalization undefined.
const DEGENERATE_SUM: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum LeeCarterError {
    #[error("need at least 2 years, got {0}")]
    TooFewYears(usize),
    #[error("order {order} outside 1..={max}")]
    BadOrder { order: usize, max: usize },
    #[error("component {0}: age loadings sum to zero, normalization undefined")]
    DegenerateComponent(usize),
    #[error("log mortality contains a non-finite value at age {age}, column {col}")]
    NonFinite { age: usize, col: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// `ln(max(m, floor))` over an ages x years grid. Every entry is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct LogMortalityMatrix {
    values: Array2<f64>,
}

impl LogMortalityMatrix {
    pub fn from_array(values: Array2<f64>) -> Result<Self, LeeCarterError> {
        if let Some(((age, col), _)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(LeeCarterError::NonFinite { age, col });
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn n_ages(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_years(&self) -> usize {
        self.values.ncols()
    }
}

/// Clips rates at `floor` and takes natural logs.
///
/// Panics if `floor` is not a positive finite number.
pub fn log_transform(m: &MortalityMatrix, floor: f64) -> LogMortalityMatrix {
    assert!(floor > 0.0 && floor.is_finite(), "clipping floor must be positive");
    LogMortalityMatrix {
        values: m.rates().mapv(|r| r.max(floor).ln()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeeCarterFit {
    pub order: usize,
    pub ax: Array1<f64>,
    /// `order x ages`
    pub bx: Array2<f64>,
    /// `order x years`
    pub kt: Array2<f64>,
    /// `ages x years`
    pub residuals: Array2<f64>,
    pub singular_values: Vec<f64>,
    /// Components beyond the rank of the centered matrix, filled with
    /// uniform `b` and zero `k`.
    pub padded: Vec<bool>,
}

/// Fits an order-`order` model.
pub fn fit(logm: &LogMortalityMatrix, order: usize) -> Result<LeeCarterFit, LeeCarterError> {
    let (n_ages, n_years) = logm.values.dim();
    if n_years < 2 {
        return Err(LeeCarterError::TooFewYears(n_years));
    }
    let max = n_ages.min(n_years);
    if order == 0 || order > max {
        return Err(LeeCarterError::BadOrder { order, max });
    }

    let ax = logm
        .values
        .mean_axis(Axis(1))
        .expect("at least one year");
    let centered = &logm.values - &ax.view().insert_axis(Axis(1));

    let dec = linalg::svd(&centered);
    let s_max = dec.s[0];
    let rank_tol = s_max * f64::EPSILON * (n_ages.max(n_years) as f64) * 8.0;

    let mut bx = Array2::zeros((order, n_ages));
    let mut kt = Array2::zeros((order, n_years));
    let mut singular_values = Vec::with_capacity(order);
    let mut padded = Vec::with_capacity(order);
    for i in 0..order {
        let sigma = dec.s[i];
        if s_max == 0.0 || sigma <= rank_tol {
            bx.row_mut(i).fill(1.0 / n_ages as f64);
            singular_values.push(sigma);
            padded.push(true);
            continue;
        }
        let mut u = dec.u.column(i).to_owned();
        let mut v = dec.v.column(i).to_owned();
        let mut sum_u = u.sum();
        let flip = if sum_u != 0.0 {
            sum_u < 0.0
        } else {
            u.iter().find(|x| **x != 0.0).is_some_and(|x| *x < 0.0)
        };
        if flip {
            u.mapv_inplace(|x| -x);
            v.mapv_inplace(|x| -x);
            sum_u = -sum_u;
        }
        if sum_u.abs() <= DEGENERATE_SUM {
            return Err(LeeCarterError::DegenerateComponent(i));
        }
        bx.row_mut(i).assign(&(&u / sum_u));
        kt.row_mut(i).assign(&(&v * (sigma * sum_u)));
        singular_values.push(sigma);
        padded.push(false);
    }

    let residuals = centered - bx.t().dot(&kt);
    Ok(LeeCarterFit {
        order,
        ax,
        bx,
        kt,
        residuals,
        singular_values,
        padded,
    })
}

/// Log rates `a[x] + sum_i b[i,x] k_future[i,h]` for an `order x H` index path.
pub fn project(fit: &LeeCarterFit, kt_future: &Array2<f64>) -> Result<Array2<f64>, LeeCarterError> {
    if kt_future.nrows() != fit.order {
        return Err(LeeCarterError::Dimension {
            expected: fit.order,
            got: kt_future.nrows(),
        });
    }
    Ok(fit.bx.t().dot(kt_future) + fit.ax.view().insert_axis(Axis(1)))
}

impl LeeCarterFit {
    /// In-sample log rates without the residual term.
    pub fn fitted(&self) -> Array2<f64> {
        project(self, &self.kt).expect("own index has matching order")
    }

    pub fn residual_norm(&self) -> f64 {
        self.residuals.iter().map(|e| e * e).sum::<f64>().sqrt()
    }

    pub fn to_document(&self) -> LeeCarterDocument {
        LeeCarterDocument {
            order: self.order,
            ax: self.ax.to_vec(),
            bx: self.bx.outer_iter().map(|r| r.to_vec()).collect(),
            kt: self.kt.outer_iter().map(|r| r.to_vec()).collect(),
            singular_values: self.singular_values.clone(),
        }
    }
}

/// JSON form of a fit. Residuals are left out; they are recomputable from
/// the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeeCarterDocument {
    pub order: usize,
    pub ax: Vec<f64>,
    pub bx: Vec<Vec<f64>>,
    pub kt: Vec<Vec<f64>>,
    pub singular_values: Vec<f64>,
}

impl LeeCarterDocument {
    /// Rebuilds a fit with residuals recomputed against `logm`.
    pub fn into_fit(self, logm: &LogMortalityMatrix) -> Result<LeeCarterFit, LeeCarterError> {
        let (n_ages, n_years) = logm.values.dim();
        let check = |expected: usize, got: usize| {
            if expected == got {
                Ok(())
            } else {
                Err(LeeCarterError::Dimension { expected, got })
            }
        };
        check(n_ages, self.ax.len())?;
        check(self.order, self.bx.len())?;
        check(self.order, self.kt.len())?;
        for row in &self.bx {
            check(n_ages, row.len())?;
        }
        for row in &self.kt {
            check(n_years, row.len())?;
        }
        let bx = Array2::from_shape_vec((self.order, n_ages), self.bx.concat()).expect("checked shape");
        let kt = Array2::from_shape_vec((self.order, n_years), self.kt.concat()).expect("checked shape");
        let ax = Array1::from(self.ax);
        let residuals = &logm.values - &ax.view().insert_axis(Axis(1)) - bx.t().dot(&kt);
        let padded = kt.outer_iter().map(|k| k.iter().all(|v| *v == 0.0)).collect();
        Ok(LeeCarterFit {
            order: self.order,
            ax,
            bx,
            kt,
            residuals,
            singular_values: self.singular_values,
            padded,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hmd::Sex;
    use ndarray::array;

    fn lm(values: Array2<f64>) -> LogMortalityMatrix {
        LogMortalityMatrix::from_array(values).unwrap()
    }

    #[test]
    fn log_transform_clips_at_floor() {
        let m = MortalityMatrix::new("aaa", Sex::Total, 2000, array![[1.0, 0.0, 0.01]]).unwrap();
        let l = log_transform(&m, DEFAULT_FLOOR);
        assert_eq!(l.values()[[0, 0]], 0.0);
        assert!((l.values()[[0, 1]] - (-27.631_021_115_928_547)).abs() < 1e-9);
        assert!((l.values()[[0, 2]] - (-4.605_170_185_988_091)).abs() < 1e-9);
    }

    #[test]
    fn two_by_two_hand_example() {
        let f = fit(&lm(array![[1.0, 3.0], [2.0, 4.0]]), 1).unwrap();
        let close = |a: f64, b: f64| (a - b).abs() < 1e-12;
        assert!(close(f.ax[0], 2.0) && close(f.ax[1], 3.0));
        assert!(close(f.bx[[0, 0]], 0.5) && close(f.bx[[0, 1]], 0.5));
        assert!(close(f.kt[[0, 0]], -2.0) && close(f.kt[[0, 1]], 2.0));
        assert!(f.residuals.iter().all(|e| e.abs() < 1e-12));

        let out = project(&f, &array![[4.0]]).unwrap();
        assert!(close(out[[0, 0]], 4.0) && close(out[[1, 0]], 5.0));
    }

    #[test]
    fn constant_matrix_pads_component() {
        let f = fit(&lm(Array2::from_elem((5, 4), -3.5)), 1).unwrap();
        assert!(f.ax.iter().all(|&a| a == -3.5));
        assert_eq!(f.padded, vec![true]);
        assert!(f.kt.iter().all(|&k| k == 0.0));
        assert!((f.bx.sum() - 1.0).abs() < 1e-12);
        assert!(f.fitted().iter().all(|&v| v == -3.5));
    }

    #[test]
    fn order_beyond_rank_pads_and_reconstructs() {
        let logm = lm(array![[1.0, 3.0, 5.0], [2.0, 4.0, 6.0], [0.0, 0.5, 1.0]]);
        let f = fit(&logm, 3).unwrap();
        assert_eq!(f.padded, vec![false, true, true]);
        let rebuilt = f.fitted() + &f.residuals;
        assert!((rebuilt - logm.values()).iter().all(|e| e.abs() < 1e-12));
    }

    #[test]
    fn rejects_bad_orders() {
        let logm = lm(Array2::zeros((3, 2)));
        assert_eq!(fit(&logm, 0).unwrap_err(), LeeCarterError::BadOrder { order: 0, max: 2 });
        assert!(fit(&logm, 3).is_err());
        assert_eq!(fit(&lm(Array2::zeros((3, 1))), 1).unwrap_err(), LeeCarterError::TooFewYears(1));
    }

    #[test]
    fn zero_index_is_neutral_in_projection() {
        let f = fit(&lm(array![[1.0, 3.0], [2.0, 4.0]]), 1).unwrap();
        let out = project(&f, &Array2::zeros((1, 3))).unwrap();
        for col in out.columns() {
            assert_eq!(col.to_vec(), f.ax.to_vec());
        }
        assert!(project(&f, &Array2::zeros((2, 3))).is_err());
    }

    #[test]
    fn document_round_trip() {
        let logm = lm(Array2::from_shape_fn((6, 5), |(x, t)| -(x as f64) - 0.1 * (t * t) as f64 + 0.03 * ((x * t) % 4) as f64));
        let f = fit(&logm, 2).unwrap();
        let json = serde_json::to_string(&f.to_document()).unwrap();
        assert!(!json.contains("residuals"));
        let back: LeeCarterDocument = serde_json::from_str(&json).unwrap();
        let g = back.into_fit(&logm).unwrap();
        assert_eq!(g.bx, f.bx);
        assert_eq!(g.kt, f.kt);
        assert!((g.residuals - &f.residuals).iter().all(|e| e.abs() < 1e-13));
    }
}
