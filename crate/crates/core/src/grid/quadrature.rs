use super::GridFunction;

/// Composite trapezoid weights for `n` nodes of spacing `h`; a single node gets weight 1.
pub fn trapezoid_weights(n: usize, h: f64) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![1.0],
        _ => {
            let mut w = vec![h; n];
            w[0] = 0.5 * h;
            w[n - 1] = 0.5 * h;
            w
        }
    }
}

/// Trapezoidal integral of `f` over its grid; an axis with one node is not integrated.
pub fn integrate(f: &GridFunction) -> f64 {
    let g = f.grid();
    let wt = trapezoid_weights(g.n_theta, g.d_theta);
    let we = trapezoid_weights(g.n_eta, g.d_eta);
    let wv = trapezoid_weights(g.n_v, g.d_v);
    let vals = f.values();
    let mut total = 0.0;
    for (k, wk) in wv.iter().enumerate() {
        let mut level = 0.0;
        for (j, wj) in we.iter().enumerate() {
            let base = g.index(0, j, k);
            let row: f64 = vals[base..base + g.n_theta].iter().zip(&wt).map(|(x, w)| x * w).sum();
            level += wj * row;
        }
        total += wk * level;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;

    #[test]
    fn trilinear_integrated_exactly() {
        let g = build_grid([(0.0, 1.0), (0.0, 2.0), (0.0, 3.0)], [5, 9, 4]).unwrap();
        let f = GridFunction::from_fn(g, |t, e, v| 1.0 + t + e * v + t * e * v);
        let exact = 6.0 + 3.0 + 9.0 + 4.5;
        assert!((integrate(&f) - exact).abs() < 1e-12);
    }
}
