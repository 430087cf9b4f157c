use crate::funcspace::GridFunction;
use crate::quadrature::{gauss5_points, GAUSS_WEIGHTS};

/// Per-cell five-point Gauss data on a fixed node set.
#[derive(Debug, Clone)]
pub(crate) struct Mesh {
    pub nodes: Vec<f64>,
    pub pts: Vec<[f64; 5]>,
    pub wts: Vec<[f64; 5]>,
}

impl Mesh {
    pub fn new(nodes: Vec<f64>) -> Self {
        let pts = nodes.windows(2).map(|w| gauss5_points(w[0], w[1])).collect();
        let wts = nodes
            .windows(2)
            .map(|w| GAUSS_WEIGHTS.map(|g| 0.5 * (w[1] - w[0]) * g))
            .collect();
        Self { nodes, pts, wts }
    }

    pub fn t_max(&self) -> f64 {
        *self.nodes.last().expect("nonempty mesh")
    }

    pub fn map(&self, f: impl Fn(usize, usize, f64) -> f64) -> Vec<[f64; 5]> {
        self.pts
            .iter()
            .enumerate()
            .map(|(i, p)| std::array::from_fn(|j| f(i, j, p[j])))
            .collect()
    }

    pub fn sample(&self, u: &GridFunction) -> Vec<[f64; 5]> {
        self.map(|i, _, s| u.eval_in_cell(i, s))
    }

    fn cell_sums(&self, g: &[[f64; 5]]) -> Vec<f64> {
        g.iter()
            .zip(self.wts.iter())
            .map(|(v, w)| v.iter().zip(w.iter()).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `out[i] = int_{n_0}^{n_i} g`.
    pub fn forward(&self, g: &[[f64; 5]]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.nodes.len());
        out.push(0.0);
        let mut acc = 0.0;
        for s in self.cell_sums(g) {
            acc += s;
            out.push(acc);
        }
        out
    }

    /// `out[i] = int_{n_i}^{n_last} g`.
    pub fn backward(&self, g: &[[f64; 5]]) -> Vec<f64> {
        let sums = self.cell_sums(g);
        let mut out = vec![0.0; self.nodes.len()];
        for i in (0..sums.len()).rev() {
            out[i] = out[i + 1] + sums[i];
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cumulatives_of_a_polynomial() {
        let m = Mesh::new(vec![1.0, 1.5, 2.5, 4.0]);
        let g = m.map(|_, _, s| s * s);
        let f = m.forward(&g);
        let b = m.backward(&g);
        for (i, t) in m.nodes.iter().enumerate() {
            assert!((f[i] - (t.powi(3) - 1.0) / 3.0).abs() < 1e-13);
            assert!((b[i] - (64.0 - t.powi(3)) / 3.0).abs() < 1e-13);
        }
    }
}
