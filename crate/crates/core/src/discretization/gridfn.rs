use std::fmt;
use std::path::Path;
use std::sync::Arc;

use super::Grid;
use crate::error::{Error, Result};
use crate::expr::{Bindings, Expr, VarKind};

/// Real values at the nodes of a grid.
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl PartialEq for GridFunction {
    fn eq(&self, other: &Self) -> bool {
        self.values == other.values && (Arc::ptr_eq(&self.grid, &other.grid) || self.grid == other.grid)
    }
}

impl GridFunction {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::SizeMismatch { expected: grid.len(), actual: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidOptions(format!("value {} at node {i} is not finite", values[i])));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = grid.nodes().map(f).collect();
        Self::new(grid.clone(), values)
    }

    /// Evaluates an expression in `x0, x1` at every node.
    pub fn from_expr(grid: &Arc<Grid>, src: &str) -> Result<Self> {
        let e = Expr::parse(src)?;
        e.check_variables(&[VarKind::Points], grid.dim())?;
        Self::from_fn(grid, |x| e.eval(&Bindings::point(x)))
    }

    pub fn constant(grid: &Arc<Grid>, c: f64) -> Self {
        GridFunction { grid: grid.clone(), values: vec![c; grid.len()] }
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Same grid, values mapped pointwise.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        GridFunction { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| s * v)
    }

    pub fn shift(&self, c: f64) -> Self {
        self.map(|v| v + c)
    }

    /// `a·self + b·other`
    pub fn lincomb(&self, a: f64, other: &GridFunction, b: f64) -> Result<Self> {
        self.check_same(other)?;
        let values = self.values.iter().zip(&other.values).map(|(u, v)| a * u + b * v).collect();
        Ok(GridFunction { grid: self.grid.clone(), values })
    }

    pub fn add(&self, other: &GridFunction) -> Result<Self> {
        self.lincomb(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<Self> {
        self.lincomb(1.0, other, -1.0)
    }

    pub(crate) fn check_same(&self, other: &GridFunction) -> Result<()> {
        if self.grid.len() != other.grid.len() {
            return Err(Error::SizeMismatch { expected: self.grid.len(), actual: other.grid.len() });
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `Σ |u_i|^p w_i`
    pub fn lp_power(&self, p: f64) -> f64 {
        self.values.iter().zip(self.grid.weights()).map(|(u, w)| u.abs().powf(p) * w).sum()
    }

    /// `(Σ |u_i|^p w_i)^(1/p)`
    pub fn lp_norm(&self, p: f64) -> f64 {
        self.lp_power(p).powf(1.0 / p)
    }

    /// `Σ u_i w_i`
    pub fn integral(&self) -> f64 {
        self.values.iter().zip(self.grid.weights()).map(|(u, w)| u * w).sum()
    }

    /// Restriction to the nodes kept by [`Grid::restrict`].
    pub fn restrict(&self, grid: &Arc<Grid>, kept: &[usize]) -> Result<Self> {
        Self::new(grid.clone(), kept.iter().map(|&i| self.values[i]).collect())
    }

    /// Writes `x0[,x1],value` rows.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header: Vec<String> = (0..self.grid.dim()).map(|a| format!("x{a}")).collect();
        header.push("value".into());
        w.write_record(&header)?;
        for (x, v) in self.grid.nodes().zip(&self.values) {
            let mut rec: Vec<String> = x.iter().map(|c| format!("{c:.17e}")).collect();
            rec.push(format!("{v:.17e}"));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads rows written by [`GridFunction::write_csv`]; node coordinates
    /// must match the grid.
    pub fn read_csv(grid: &Arc<Grid>, path: impl AsRef<Path>) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let d = grid.dim();
        let mut values = Vec::with_capacity(grid.len());
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            if rec.len() != d + 1 {
                return Err(Error::Config(format!("row {i} has {} columns, expected {}", rec.len(), d + 1)));
            }
            let parse =
                |k: usize| rec[k].trim().parse::<f64>().map_err(|e| Error::Config(format!("row {i}, column {k}: {e}")));
            if i >= grid.len() {
                return Err(Error::SizeMismatch { expected: grid.len(), actual: i + 1 });
            }
            for a in 0..d {
                let c = parse(a)?;
                if (c - grid.node(i)[a]).abs() > 1e-9 * (1.0 + c.abs()) {
                    return Err(Error::Config(format!("row {i} is at {c}, node is at {}", grid.node(i)[a])));
                }
            }
            values.push(parse(d)?);
        }
        Self::new(grid.clone(), values)
    }
}

type PairFn = dyn Fn(usize, usize) -> f64 + Send + Sync;

/// A function of node pairs `(i, j)`, stored densely or evaluated lazily.
#[derive(Clone)]
pub enum PairFunction {
    Dense { n: usize, values: Arc<Vec<f64>> },
    Lazy { n: usize, f: Arc<PairFn> },
}

impl fmt::Debug for PairFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairFunction::Dense { n, .. } => write!(f, "PairFunction::Dense({n}x{n})"),
            PairFunction::Lazy { n, .. } => write!(f, "PairFunction::Lazy({n}x{n})"),
        }
    }
}

impl PairFunction {
    pub fn dense(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::SizeMismatch { expected: n * n, actual: values.len() });
        }
        Ok(PairFunction::Dense { n, values: Arc::new(values) })
    }

    pub fn lazy(n: usize, f: impl Fn(usize, usize) -> f64 + Send + Sync + 'static) -> Self {
        PairFunction::Lazy { n, f: Arc::new(f) }
    }

    /// `U(x, y) = f(x, y)` at the grid nodes.
    pub fn from_points(grid: &Arc<Grid>, f: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        let g = grid.clone();
        Self::lazy(grid.len(), move |i, j| f(g.node(i), g.node(j)))
    }

    /// `U(x, y) = u(x) - u(y)`
    pub fn difference(u: &GridFunction) -> Self {
        let v = Arc::new(u.values().to_vec());
        Self::lazy(u.len(), move |i, j| v[i] - v[j])
    }

    pub fn zeros(n: usize) -> Self {
        Self::lazy(n, |_, _| 0.0)
    }

    pub fn n(&self) -> usize {
        match self {
            PairFunction::Dense { n, .. } | PairFunction::Lazy { n, .. } => *n,
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            PairFunction::Dense { n, values } => values[i * n + j],
            PairFunction::Lazy { f, .. } => f(i, j),
        }
    }

    /// Evaluates every pair once and stores the result.
    pub fn materialize(&self) -> Self {
        match self {
            PairFunction::Dense { .. } => self.clone(),
            PairFunction::Lazy { n, f } => {
                let n = *n;
                let values = (0..n * n).map(|k| f(k / n, k % n)).collect();
                PairFunction::Dense { n, values: Arc::new(values) }
            }
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        let me = self.clone();
        Self::lazy(self.n(), move |i, j| s * me.get(i, j))
    }

    pub fn add(&self, other: &PairFunction) -> Result<Self> {
        if self.n() != other.n() {
            return Err(Error::SizeMismatch { expected: self.n(), actual: other.n() });
        }
        let (a, b) = (self.clone(), other.clone());
        Ok(Self::lazy(self.n(), move |i, j| a.get(i, j) + b.get(i, j)))
    }

    pub fn transpose(&self) -> Self {
        let me = self.clone();
        Self::lazy(self.n(), move |i, j| me.get(j, i))
    }

    /// Writes `i,j,value` rows.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["i", "j", "value"])?;
        let n = self.n();
        for i in 0..n {
            for j in 0..n {
                w.write_record(&[i.to_string(), j.to_string(), format!("{:.17e}", self.get(i, j))])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::DomainSpec;

    fn grid(n: usize) -> Arc<Grid> {
        Arc::new(Grid::new(&DomainSpec::unit_interval(n)).unwrap())
    }

    #[test]
    fn expressions_and_arithmetic() {
        let g = grid(4);
        let u = GridFunction::from_expr(&g, "2*x0").unwrap();
        assert_eq!(u.values(), &[0.25, 0.75, 1.25, 1.75]);
        let v = u.sub(&u.scale(0.5)).unwrap();
        assert_eq!(v.values(), &[0.125, 0.375, 0.625, 0.875]);
        assert_eq!(GridFunction::constant(&g, 2.0).integral(), 2.0);
        assert!(GridFunction::from_expr(&g, "x1").is_err());
        assert!(GridFunction::from_expr(&g, "1/(x0-x0)").is_err());
    }

    #[test]
    fn csv_round_trip() {
        let g = grid(16);
        let u = GridFunction::from_expr(&g, "sin(7*x0) + 1/3").unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.csv");
        u.write_csv(&path).unwrap();
        let back = GridFunction::read_csv(&g, &path).unwrap();
        assert_eq!(back, u);
        assert!(GridFunction::read_csv(&grid(8), &path).is_err());
    }

    #[test]
    fn pair_functions() {
        let g = grid(4);
        let u = GridFunction::from_expr(&g, "x0").unwrap();
        let d = PairFunction::difference(&u);
        assert_eq!(d.get(3, 0), 0.75);
        assert_eq!(d.transpose().get(3, 0), -0.75);
        let m = d.materialize();
        assert!(matches!(m, PairFunction::Dense { .. }));
        assert_eq!(m.get(2, 1), d.get(2, 1));
        let s = d.add(&d.scale(-1.0)).unwrap();
        assert_eq!(s.get(1, 2), 0.0);
        assert!(PairFunction::dense(3, vec![0.0; 8]).is_err());
    }
}
