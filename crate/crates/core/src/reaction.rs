//! Reaction terms of the `|h|²` and `|H|²` evolution equations.

use crate::immersion::PointGeometry;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReactionTerms<T> {
    /// `Σ_{αβ} (Σ_{ij} h_ijα h_ijβ)² + |R⊥|²`
    pub r1: T,
    /// `Σ_{ij} (Σ_α H_α h_ijα)²`
    pub r2: T,
    /// `|R⊥|² = Σ_{ijαβ} (Σ_p h_ipα h_jpβ − h_jpα h_ipβ)²`
    pub normal_curvature2: T,
    /// Remainder of the contracted Simons identity.
    pub z: T,
}

/// Brute-force index sums over the orthonormal tangent frame and the normal frame.
pub fn reaction_terms<T: Real>(pg: &PointGeometry<T>) -> ReactionTerms<T> {
    let n = pg.n;
    let k = pg.k;
    let h = |i: usize, j: usize, a: usize| pg.h[a][(i, j)];
    let hm = |a: usize| pg.mean_components[a];

    let mut normal_curvature2 = T::zero();
    for a in 0..k {
        for b in 0..k {
            for i in 0..n {
                for j in 0..n {
                    let mut c = T::zero();
                    for p in 0..n {
                        c += h(i, p, a) * h(j, p, b) - h(j, p, a) * h(i, p, b);
                    }
                    normal_curvature2 += c * c;
                }
            }
        }
    }

    let mut gram2 = T::zero();
    for a in 0..k {
        for b in 0..k {
            let mut s = T::zero();
            for i in 0..n {
                for j in 0..n {
                    s += h(i, j, a) * h(i, j, b);
                }
            }
            gram2 += s * s;
        }
    }

    let mut r2 = T::zero();
    for i in 0..n {
        for j in 0..n {
            let mut s = T::zero();
            for a in 0..k {
                s += hm(a) * h(i, j, a);
            }
            r2 += s * s;
        }
    }

    let mut cubic = T::zero();
    for a in 0..k {
        for b in 0..k {
            for i in 0..n {
                for j in 0..n {
                    for p in 0..n {
                        cubic += hm(a) * h(i, p, a) * h(i, j, b) * h(p, j, b);
                    }
                }
            }
        }
    }

    ReactionTerms {
        r1: gram2 + normal_curvature2,
        r2,
        normal_curvature2,
        z: -gram2 - normal_curvature2 + cubic,
    }
}
