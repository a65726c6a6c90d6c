//! Uniform parameter grids, residual sweeps and trapezoid quadrature.

use rayon::prelude::*;
use thiserror::Error;

use crate::expr::{EvalError, Expr};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("axis {axis}: lower bound {lo} is not below upper bound {hi}")]
    EmptyInterval { axis: usize, lo: f64, hi: f64 },
    #[error("axis {axis}: need at least 2 samples, got {count}")]
    TooFewSamples { axis: usize, count: usize },
    #[error("domain has {got} axes, expected {expected}")]
    Dimension { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub samples: usize,
}

impl Axis {
    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.samples - 1) as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        if k + 1 == self.samples {
            self.hi
        } else {
            self.lo + k as f64 * self.step()
        }
    }

    fn weight(&self, k: usize) -> f64 {
        let h = self.step();
        if k == 0 || k + 1 == self.samples {
            0.5 * h
        } else {
            h
        }
    }
}

/// A box in parameter space sampled on a uniform grid, endpoints included.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamDomain {
    axes: Vec<Axis>,
    parallel: bool,
}

impl ParamDomain {
    pub fn new(axes: Vec<Axis>) -> Result<ParamDomain, DomainError> {
        for (i, a) in axes.iter().enumerate() {
            if !(a.lo < a.hi) {
                return Err(DomainError::EmptyInterval {
                    axis: i,
                    lo: a.lo,
                    hi: a.hi,
                });
            }
            if a.samples < 2 {
                return Err(DomainError::TooFewSamples {
                    axis: i,
                    count: a.samples,
                });
            }
        }
        Ok(ParamDomain {
            axes,
            parallel: false,
        })
    }

    /// `[lo, hi]^dim` with `samples` points per axis.
    pub fn cube(dim: usize, lo: f64, hi: f64, samples: usize) -> Result<ParamDomain, DomainError> {
        ParamDomain::new(vec![Axis { lo, hi, samples }; dim])
    }

    pub fn interval(lo: f64, hi: f64, samples: usize) -> Result<ParamDomain, DomainError> {
        ParamDomain::cube(1, lo, hi, samples)
    }

    /// Spread grid sweeps over the rayon pool.
    pub fn parallel(mut self, on: bool) -> ParamDomain {
        self.parallel = on;
        self
    }

    pub fn is_parallel(&self) -> bool {
        self.parallel
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn expect_dim(&self, dim: usize) -> Result<(), DomainError> {
        if self.dim() == dim {
            Ok(())
        } else {
            Err(DomainError::Dimension {
                expected: dim,
                got: self.dim(),
            })
        }
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.samples).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for (slot, axis) in idx.iter_mut().zip(&self.axes).rev() {
            *slot = flat % axis.samples;
            flat /= axis.samples;
        }
        idx
    }

    /// Coordinates of the grid point with row-major index `flat`.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .iter()
            .zip(&self.axes)
            .map(|(&k, a)| a.node(k))
            .collect()
    }

    /// All grid points, row-major (last axis fastest).
    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }

    fn weight(&self, flat: usize) -> f64 {
        self.multi_index(flat)
            .iter()
            .zip(&self.axes)
            .map(|(&k, a)| a.weight(k))
            .product()
    }

    /// The (dim-1)-dimensional face where axis `axis` is pinned to its upper
    /// (`upper = true`) or lower bound. Returns the face grid and the pinned
    /// coordinate value.
    pub fn face(&self, axis: usize, upper: bool) -> (Option<ParamDomain>, f64) {
        let a = self.axes[axis];
        let value = if upper { a.hi } else { a.lo };
        let rest: Vec<Axis> = self
            .axes
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != axis)
            .map(|(_, a)| *a)
            .collect();
        let face = (!rest.is_empty()).then(|| ParamDomain {
            axes: rest,
            parallel: self.parallel,
        });
        (face, value)
    }

    fn map_points<T, F>(&self, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        if self.parallel {
            (0..self.len()).into_par_iter().map(f).collect()
        } else {
            (0..self.len()).map(f).collect()
        }
    }
}

/// Largest absolute value found during a sweep, and where it occurred.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMax {
    pub max_abs: f64,
    /// Grid coordinates of the maximum.
    pub argmax: Vec<f64>,
    /// Which of the swept expressions attained it.
    pub component: usize,
}

impl GridMax {
    pub fn zero(dim: usize) -> GridMax {
        GridMax {
            max_abs: 0.0,
            argmax: vec![0.0; dim],
            component: 0,
        }
    }

    pub fn within(&self, tol: f64) -> bool {
        self.max_abs <= tol
    }

    /// Keep whichever of the two maxima is larger; ties keep `self`.
    pub fn merge(self, other: GridMax) -> GridMax {
        if other.max_abs > self.max_abs {
            other
        } else {
            self
        }
    }
}

/// Sweep `exprs` over `domain`, with `vars[a]` bound to grid axis `a`.
/// Components are indexed by position in `exprs`.
pub fn max_abs(exprs: &[Expr], vars: &[&str], domain: &ParamDomain) -> Result<GridMax, EvalError> {
    let per = max_abs_each(exprs, vars, domain)?;
    Ok(per
        .into_iter()
        .fold(GridMax::zero(domain.dim()), GridMax::merge))
}

/// Like [`max_abs`], but one report per expression.
pub fn max_abs_each(
    exprs: &[Expr],
    vars: &[&str],
    domain: &ParamDomain,
) -> Result<Vec<GridMax>, EvalError> {
    let compiled = exprs
        .iter()
        .map(|e| e.compile(vars))
        .collect::<Result<Vec<_>, _>>()?;
    let rows = domain.map_points(|i| {
        let p = domain.point(i);
        compiled
            .iter()
            .map(|c| c.eval(&p).map(f64::abs))
            .collect::<Result<Vec<_>, _>>()
    });
    let mut best: Vec<GridMax> = (0..exprs.len())
        .map(|k| GridMax {
            component: k,
            ..GridMax::zero(domain.dim())
        })
        .collect();
    for (i, row) in rows.into_iter().enumerate() {
        for (k, v) in row?.into_iter().enumerate() {
            // NaN never wins a comparison; surface it instead of hiding it
            if v > best[k].max_abs || v.is_nan() {
                best[k].max_abs = v;
                best[k].argmax = domain.point(i);
            }
        }
    }
    Ok(best)
}

/// Composite trapezoid rule over the whole domain.
pub fn integrate(e: &Expr, vars: &[&str], domain: &ParamDomain) -> Result<f64, EvalError> {
    let c = e.compile(vars)?;
    let terms = domain.map_points(|i| c.eval(&domain.point(i)).map(|v| v * domain.weight(i)));
    terms.into_iter().sum()
}

/// Evaluate `e` at every grid point.
pub fn sample(e: &Expr, vars: &[&str], domain: &ParamDomain) -> Result<Vec<f64>, EvalError> {
    let c = e.compile(vars)?;
    domain
        .map_points(|i| c.eval(&domain.point(i)))
        .into_iter()
        .collect()
}
