//! Parameter domains and chart atlases.

use crate::jet::Jet;
use crate::scalar::{lit, Real};

/// A parameter domain for an immersion.
#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    /// The unit sphere `S^dim`, covered by the `2(dim+1)` gnomonic charts of
    /// the circumscribed cube. Chart coordinates range over `[-1, 1]^dim`.
    CubeSphere { dim: usize },
    /// The circle `R / 2πZ`, one periodic chart.
    Circle,
    /// An open box `(-w, w)^dim` (non-closed test charts).
    Box { dim: usize, half_width: f64 },
    /// Cartesian product; charts and coordinates are concatenated in order.
    Product(Vec<Domain>),
}

/// A point of a parameter domain: chart index plus chart coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartPoint<T> {
    pub chart: usize,
    pub coords: Vec<T>,
}

impl<T: Real> ChartPoint<T> {
    pub fn new(chart: usize, coords: Vec<T>) -> Self {
        ChartPoint { chart, coords }
    }

    /// Copy of the point with coordinate `axis` shifted by `delta`.
    pub fn shifted(&self, axis: usize, delta: T) -> Self {
        let mut p = self.clone();
        p.coords[axis] += delta;
        p
    }
}

impl Domain {
    pub fn torus() -> Self {
        Domain::Product(vec![Domain::Circle, Domain::Circle])
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::CubeSphere { dim } | Domain::Box { dim, .. } => *dim,
            Domain::Circle => 1,
            Domain::Product(parts) => parts.iter().map(Domain::dim).sum(),
        }
    }

    pub fn chart_count(&self) -> usize {
        match self {
            Domain::CubeSphere { dim } => 2 * (dim + 1),
            Domain::Circle | Domain::Box { .. } => 1,
            Domain::Product(parts) => parts.iter().map(Domain::chart_count).product(),
        }
    }

    /// Splits a product chart index into per-factor chart indices (mixed radix,
    /// first factor least significant).
    pub fn split_chart(&self, chart: usize) -> Vec<usize> {
        match self {
            Domain::Product(parts) => {
                let mut rest = chart;
                parts
                    .iter()
                    .map(|p| {
                        let c = rest % p.chart_count();
                        rest /= p.chart_count();
                        c
                    })
                    .collect()
            }
            _ => vec![chart],
        }
    }

    /// Extent of one chart coordinate axis.
    pub fn axis_lengths(&self) -> Vec<f64> {
        match self {
            Domain::CubeSphere { dim } => vec![2.0; *dim],
            Domain::Circle => vec![std::f64::consts::TAU],
            Domain::Box { dim, half_width } => vec![2.0 * half_width; *dim],
            Domain::Product(parts) => parts.iter().flat_map(Domain::axis_lengths).collect(),
        }
    }

    /// Stencil spacing per coordinate for a grid of `m` cells per axis.
    pub fn stencil_steps<T: Real>(&self, m: usize) -> Vec<T> {
        self.axis_lengths()
            .into_iter()
            .map(|l| lit(l / m as f64))
            .collect()
    }

    /// Cell-centred sample grid with `m` cells per chart axis, over every chart.
    pub fn sample_grid<T: Real>(&self, m: usize) -> Vec<ChartPoint<T>> {
        match self {
            Domain::CubeSphere { dim } => {
                let axis: Vec<f64> = (0..m).map(|i| -1.0 + (i as f64 + 0.5) * 2.0 / m as f64).collect();
                let mut out = Vec::new();
                for chart in 0..self.chart_count() {
                    for coords in cartesian(&vec![axis.clone(); *dim]) {
                        out.push(ChartPoint::new(chart, coords.into_iter().map(lit).collect()));
                    }
                }
                out
            }
            Domain::Circle => (0..m)
                .map(|i| {
                    let u = std::f64::consts::TAU * (i as f64 + 0.5) / m as f64;
                    ChartPoint::new(0, vec![lit(u)])
                })
                .collect(),
            Domain::Box { dim, half_width } => {
                let w = *half_width;
                let axis: Vec<f64> = (0..m).map(|i| -w + (i as f64 + 0.5) * 2.0 * w / m as f64).collect();
                cartesian(&vec![axis; *dim])
                    .into_iter()
                    .map(|c| ChartPoint::new(0, c.into_iter().map(lit).collect()))
                    .collect()
            }
            Domain::Product(parts) => {
                let grids: Vec<Vec<ChartPoint<T>>> = parts.iter().map(|p| p.sample_grid(m)).collect();
                let mut out: Vec<ChartPoint<T>> = vec![ChartPoint::new(0, Vec::new())];
                let mut radix = 1;
                for (part, grid) in parts.iter().zip(&grids) {
                    let mut next = Vec::with_capacity(out.len() * grid.len());
                    for prefix in &out {
                        for q in grid {
                            let mut coords = prefix.coords.clone();
                            coords.extend(q.coords.iter().copied());
                            next.push(ChartPoint::new(prefix.chart + radix * q.chart, coords));
                        }
                    }
                    radix *= part.chart_count();
                    out = next;
                }
                out
            }
        }
    }
}

fn cartesian(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for axis in axes {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for prefix in &out {
            for &x in axis {
                let mut v = prefix.clone();
                v.push(x);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// Point of the unit sphere `S^dim ⊂ R^{dim+1}` in gnomonic cube chart `chart`.
///
/// Face `chart / 2` is the coordinate axis pinned to `±1` (sign from the chart
/// parity); the remaining axes take the chart coordinates in order.
pub fn cube_sphere_point<T: Real>(dim: usize, chart: usize, u: &[Jet<T>]) -> Vec<Jet<T>> {
    debug_assert_eq!(u.len(), dim);
    let axis = chart / 2;
    let sign = if chart % 2 == 0 { T::one() } else { -T::one() };
    let mut c = Vec::with_capacity(dim + 1);
    let mut it = u.iter();
    for a in 0..=dim {
        if a == axis {
            c.push(Jet::constant(sign));
        } else {
            c.push(*it.next().expect("chart coordinate"));
        }
    }
    let r = crate::jet::norm_squared(&c).sqrt().recip();
    c.into_iter().map(|x| x * r).collect()
}

/// Inverse of [`cube_sphere_point`]: chart and coordinates of a unit vector.
pub fn cube_sphere_chart<T: Real>(omega: &[T]) -> ChartPoint<T> {
    let (axis, _) = omega
        .iter()
        .enumerate()
        .fold((0, T::zero()), |best, (i, &x)| if x.abs() > best.1 { (i, x.abs()) } else { best });
    let pivot = omega[axis];
    let chart = 2 * axis + usize::from(pivot < T::zero());
    let coords = omega
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != axis)
        .map(|(_, &x)| x / pivot.abs())
        .collect();
    ChartPoint::new(chart, coords)
}
