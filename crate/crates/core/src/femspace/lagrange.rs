//! Nodal Lagrange shape functions of degree `p` on the reference triangle.
//!
//! Nodes are equispaced and identified by barycentric multi-indices
//! `(i0, i1, i2)` with `i0 + i1 + i2 = p`, where `lambda0 = 1 - x - y`,
//! `lambda1 = x`, `lambda2 = y`. Local ordering: the three vertices, then
//! the interior nodes of edges `0->1`, `1->2`, `2->0` (each walked from its
//! first vertex), then element-interior nodes.

use crate::real::Vec2;
use crate::Real;

#[derive(Clone, Debug)]
pub struct LagrangeBasis {
    degree: usize,
    nodes: Vec<[usize; 3]>,
}

const GRAD_LAMBDA: [[f64; 2]; 3] = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];

impl LagrangeBasis {
    pub fn new(degree: usize) -> Self {
        assert!(degree >= 1, "Lagrange degree must be positive");
        let p = degree;
        let mut nodes = vec![[p, 0, 0], [0, p, 0], [0, 0, p]];
        for j in 1..p {
            nodes.push([p - j, j, 0]);
        }
        for j in 1..p {
            nodes.push([0, p - j, j]);
        }
        for j in 1..p {
            nodes.push([j, 0, p - j]);
        }
        for i1 in 1..p {
            for i2 in 1..p {
                if i1 + i2 < p {
                    nodes.push([p - i1 - i2, i1, i2]);
                }
            }
        }
        debug_assert_eq!(nodes.len(), (p + 1) * (p + 2) / 2);
        Self { degree, nodes }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn edge_nodes_per_edge(&self) -> usize {
        self.degree - 1
    }

    pub fn interior_nodes(&self) -> usize {
        self.nodes.len() - 3 * self.degree
    }

    /// Reference coordinates of local node `i`.
    pub fn node<T: Real>(&self, i: usize) -> Vec2<T> {
        let p = T::from_usize_lossy(self.degree);
        let [_, a, b] = self.nodes[i];
        [T::from_usize_lossy(a) / p, T::from_usize_lossy(b) / p]
    }

    /// `l_n(lambda) = prod_{r<n} (p lambda - r) / (r + 1)` and its derivative.
    fn factor<T: Real>(&self, n: usize, lambda: T) -> (T, T) {
        let p = T::from_usize_lossy(self.degree);
        let mut val = T::one();
        let mut der = T::zero();
        for r in 0..n {
            let rr = T::from_usize_lossy(r);
            let denom = rr + T::one();
            let f = (p * lambda - rr) / denom;
            der = der * f + val * p / denom;
            val *= f;
        }
        (val, der)
    }

    /// Values and reference gradients of all shape functions at `xi`.
    pub fn eval<T: Real>(&self, xi: Vec2<T>, values: &mut [T], grads: &mut [Vec2<T>]) {
        let lambda = [T::one() - xi[0] - xi[1], xi[0], xi[1]];
        for (k, alpha) in self.nodes.iter().enumerate() {
            let f: [(T, T); 3] = [
                self.factor(alpha[0], lambda[0]),
                self.factor(alpha[1], lambda[1]),
                self.factor(alpha[2], lambda[2]),
            ];
            values[k] = f[0].0 * f[1].0 * f[2].0;
            let mut g = [T::zero(); 2];
            for m in 0..3 {
                let others = f[(m + 1) % 3].0 * f[(m + 2) % 3].0;
                let d = f[m].1 * others;
                g[0] += d * T::lit(GRAD_LAMBDA[m][0]);
                g[1] += d * T::lit(GRAD_LAMBDA[m][1]);
            }
            grads[k] = g;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronecker_property() {
        for p in 1..=5 {
            let b = LagrangeBasis::new(p);
            let n = b.len();
            let mut v = vec![0.0; n];
            let mut g = vec![[0.0; 2]; n];
            for j in 0..n {
                b.eval(b.node::<f64>(j), &mut v, &mut g);
                for (i, &vi) in v.iter().enumerate() {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((vi - expect).abs() < 1e-12, "p={p} i={i} j={j} v={vi}");
                }
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let b = LagrangeBasis::new(4);
        let n = b.len();
        let (mut v, mut vp, mut vm) = (vec![0.0f64; n], vec![0.0f64; n], vec![0.0f64; n]);
        let mut g = vec![[0.0f64; 2]; n];
        let mut scratch = vec![[0.0; 2]; n];
        let xi = [0.21, 0.37];
        let h = 1e-6;
        b.eval(xi, &mut v, &mut g);
        for d in 0..2 {
            let mut xp = xi;
            let mut xm = xi;
            xp[d] += h;
            xm[d] -= h;
            b.eval(xp, &mut vp, &mut scratch);
            b.eval(xm, &mut vm, &mut scratch);
            for i in 0..n {
                let fd = (vp[i] - vm[i]) / (2.0 * h);
                assert!((fd - g[i][d]).abs() < 1e-7 * (1.0 + g[i][d].abs()));
            }
        }
    }
}
