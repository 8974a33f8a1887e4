use serde::{Deserialize, Serialize};

use super::Kernel;
use crate::error::{Error, Result};
use crate::phi::PhiDomain;

/// Node-pair budget of a grid.
pub const MAX_PAIRS: u64 = 1 << 24;

/// One axis-aligned box with its per-axis cell counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub cells: Vec<usize>,
}

impl BoxSpec {
    pub fn interval(lo: f64, hi: f64, cells: usize) -> Self {
        BoxSpec { lo: vec![lo], hi: vec![hi], cells: vec![cells] }
    }

    pub fn rect(lo: [f64; 2], hi: [f64; 2], cells: [usize; 2]) -> Self {
        BoxSpec { lo: lo.to_vec(), hi: hi.to_vec(), cells: cells.to_vec() }
    }

    fn dim(&self) -> usize {
        self.lo.len()
    }
}

/// A union of boxes, each discretized by a uniform cell-centered grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub boxes: Vec<BoxSpec>,
}

impl DomainSpec {
    pub fn interval(lo: f64, hi: f64, cells: usize) -> Self {
        DomainSpec { boxes: vec![BoxSpec::interval(lo, hi, cells)] }
    }

    pub fn unit_interval(cells: usize) -> Self {
        Self::interval(0.0, 1.0, cells)
    }

    pub fn unit_square(cells: usize) -> Self {
        DomainSpec { boxes: vec![BoxSpec::rect([0.0, 0.0], [1.0, 1.0], [cells, cells])] }
    }
}

/// A discretized component.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub cells: Vec<usize>,
    /// Node indices `start..end` belonging to this component.
    pub nodes: std::ops::Range<usize>,
}

impl Component {
    pub fn cell_width(&self, axis: usize) -> f64 {
        (self.hi[axis] - self.lo[axis]) / self.cells[axis] as f64
    }
}

/// Cell-centered nodes with their cell measures.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dim: usize,
    components: Vec<Component>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    total_measure: f64,
}

/// Builds a grid; with a kernel, also checks that consecutive components
/// are closer than the diameter of the kernel's lower-bound ball.
pub fn build_grid(spec: &DomainSpec, kernel: Option<&Kernel>) -> Result<Grid> {
    let grid = Grid::new(spec)?;
    if let Some(k) = kernel {
        grid.check_gaps(k.r0())?;
    }
    Ok(grid)
}

impl Grid {
    pub fn new(spec: &DomainSpec) -> Result<Self> {
        let first = spec.boxes.first().ok_or_else(|| Error::InvalidDomain("no boxes".into()))?;
        let dim = first.dim();
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidDomain(format!("dimension {dim} is not 1 or 2")));
        }
        let mut count: u64 = 0;
        for (k, b) in spec.boxes.iter().enumerate() {
            if b.dim() != dim || b.hi.len() != dim || b.cells.len() != dim {
                return Err(Error::InvalidDomain(format!("box {k} does not have dimension {dim}")));
            }
            for a in 0..dim {
                if !(b.lo[a] < b.hi[a]) || !b.lo[a].is_finite() || !b.hi[a].is_finite() {
                    return Err(Error::InvalidDomain(format!("box {k} has empty or unbounded axis {a}")));
                }
                if b.cells[a] < 2 {
                    return Err(Error::InvalidDomain(format!("box {k} needs at least 2 cells on axis {a}")));
                }
            }
            count += b.cells.iter().map(|&c| c as u64).product::<u64>();
        }
        let pairs = count.saturating_mul(count);
        if pairs > MAX_PAIRS {
            return Err(Error::TooManyPairs { nodes: count as usize, pairs, limit: MAX_PAIRS });
        }
        for (i, a) in spec.boxes.iter().enumerate() {
            for (j, b) in spec.boxes.iter().enumerate().skip(i + 1) {
                if (0..dim).all(|k| a.lo[k] < b.hi[k] && b.lo[k] < a.hi[k]) {
                    return Err(Error::OverlappingBoxes { first: i, second: j });
                }
            }
        }
        let mut nodes = Vec::with_capacity(count as usize * dim);
        let mut weights = Vec::with_capacity(count as usize);
        let mut components = Vec::with_capacity(spec.boxes.len());
        for b in &spec.boxes {
            let h: Vec<f64> = (0..dim).map(|a| (b.hi[a] - b.lo[a]) / b.cells[a] as f64).collect();
            let vol: f64 = h.iter().product();
            let start = weights.len();
            // x0 varies fastest
            let total: usize = b.cells.iter().product();
            for idx in 0..total {
                let mut rem = idx;
                for a in 0..dim {
                    let k = rem % b.cells[a];
                    rem /= b.cells[a];
                    nodes.push(b.lo[a] + (k as f64 + 0.5) * h[a]);
                }
                weights.push(vol);
            }
            components.push(Component {
                lo: b.lo.clone(),
                hi: b.hi.clone(),
                cells: b.cells.clone(),
                nodes: start..weights.len(),
            });
        }
        let total_measure = weights.iter().sum();
        Ok(Grid { dim, components, nodes, weights, total_measure })
    }

    /// Rejects consecutive components whose distance reaches `2 r0`.
    pub fn check_gaps(&self, r0: f64) -> Result<()> {
        for (k, pair) in self.components.windows(2).enumerate() {
            let gap = box_distance(&pair[0], &pair[1]);
            if !(gap < 2.0 * r0) {
                return Err(Error::ComponentGapTooLarge { first: k, second: k + 1, gap, diameter: 2.0 * r0 });
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    #[inline]
    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[f64]> {
        self.nodes.chunks_exact(self.dim)
    }

    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_measure(&self) -> f64 {
        self.total_measure
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn min_weight(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Smallest box containing every component.
    pub fn bounding_box(&self) -> PhiDomain {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for c in &self.components {
            for a in 0..self.dim {
                lo[a] = lo[a].min(c.lo[a]);
                hi[a] = hi[a].max(c.hi[a]);
            }
        }
        PhiDomain::new(lo, hi)
    }

    /// Largest distance between two points of the bounding box.
    pub fn diameter(&self) -> f64 {
        let b = self.bounding_box();
        b.lo.iter().zip(&b.hi).map(|(l, h)| (h - l) * (h - l)).sum::<f64>().sqrt()
    }

    /// Half of the narrowest component width.
    pub fn min_half_width(&self) -> f64 {
        self.components
            .iter()
            .flat_map(|c| (0..self.dim).map(move |a| 0.5 * (c.hi[a] - c.lo[a])))
            .fold(f64::INFINITY, f64::min)
    }

    /// The nodes satisfying `keep`, as a grid of their own, with the kept
    /// indices of `self`.
    pub fn restrict(&self, keep: impl Fn(&[f64]) -> bool) -> (Grid, Vec<usize>) {
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut kept = Vec::new();
        let mut components = Vec::new();
        for c in &self.components {
            let start = weights.len();
            for i in c.nodes.clone() {
                if keep(self.node(i)) {
                    nodes.extend_from_slice(self.node(i));
                    weights.push(self.weights[i]);
                    kept.push(i);
                }
            }
            if weights.len() > start {
                components.push(Component { nodes: start..weights.len(), ..c.clone() });
            }
        }
        let total_measure = weights.iter().sum();
        (Grid { dim: self.dim, components, nodes, weights, total_measure }, kept)
    }
}

fn box_distance(a: &Component, b: &Component) -> f64 {
    a.lo.iter()
        .zip(&a.hi)
        .zip(b.lo.iter().zip(&b.hi))
        .map(|((alo, ahi), (blo, bhi))| {
            let d = (blo - ahi).max(alo - bhi).max(0.0);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{build_kernel, KernelSpec};

    #[test]
    fn midpoint_nodes() {
        let g = Grid::new(&DomainSpec::unit_interval(4)).unwrap();
        let xs: Vec<f64> = g.nodes().map(|x| x[0]).collect();
        assert_eq!(xs, vec![0.125, 0.375, 0.625, 0.875]);
        assert!(g.weights().iter().all(|&w| w == 0.25));
        assert_eq!(g.total_measure(), 1.0);
    }

    #[test]
    fn square_nodes() {
        let g = Grid::new(&DomainSpec::unit_square(4)).unwrap();
        assert_eq!(g.len(), 16);
        assert_eq!(g.node(1), &[0.375, 0.125]);
        assert_eq!(g.node(4), &[0.125, 0.375]);
        assert!((g.total_measure() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn component_gaps() {
        let k = build_kernel(&KernelSpec::Indicator { r: 0.5 }, 1).unwrap();
        let near = DomainSpec { boxes: vec![BoxSpec::interval(0.0, 1.0, 8), BoxSpec::interval(1.2, 2.0, 8)] };
        assert_eq!(build_grid(&near, Some(&k)).unwrap().components().len(), 2);
        let far = DomainSpec { boxes: vec![BoxSpec::interval(0.0, 1.0, 8), BoxSpec::interval(3.0, 4.0, 8)] };
        assert!(matches!(build_grid(&far, Some(&k)), Err(Error::ComponentGapTooLarge { .. })));
        assert!(build_grid(&far, None).is_ok());
    }

    #[test]
    fn rejects_bad_specs() {
        let overlap = DomainSpec { boxes: vec![BoxSpec::interval(0.0, 1.0, 8), BoxSpec::interval(0.5, 2.0, 8)] };
        assert!(matches!(Grid::new(&overlap), Err(Error::OverlappingBoxes { first: 0, second: 1 })));
        assert!(matches!(Grid::new(&DomainSpec::unit_interval(5000)), Err(Error::TooManyPairs { .. })));
        assert!(Grid::new(&DomainSpec::unit_interval(4096)).is_ok());
        assert!(matches!(Grid::new(&DomainSpec::unit_interval(1)), Err(Error::InvalidDomain(_))));
        assert!(matches!(Grid::new(&DomainSpec { boxes: vec![] }), Err(Error::InvalidDomain(_))));
        // touching boxes are fine
        let touch = DomainSpec { boxes: vec![BoxSpec::interval(0.0, 1.0, 4), BoxSpec::interval(1.0, 2.0, 4)] };
        assert!(Grid::new(&touch).is_ok());
    }

    #[test]
    fn restriction_keeps_weights() {
        let g = Grid::new(&DomainSpec::unit_interval(8)).unwrap();
        let (sub, kept) = g.restrict(|x| x[0] < 0.5);
        assert_eq!(sub.len(), 4);
        assert_eq!(kept, vec![0, 1, 2, 3]);
        assert_eq!(sub.total_measure(), 0.5);
    }
}
