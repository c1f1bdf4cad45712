//! Finite-difference weights on arbitrary nodes.

/// Fornberg's recursion: `weights[k][i]` is the weight of `nodes[i]` in the
/// approximation of the `k`-th derivative at `x0`, for `k = 0..=max_order`.
pub fn fornberg_weights(x0: f64, nodes: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let len = nodes.len();
    let mut c = vec![vec![0.0; len]; max_order + 1];
    if len == 0 {
        return c;
    }
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for i in 1..len {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Central stencil `-r..=r` on unit spacing.
pub fn central_weights(half_width: usize, max_order: usize) -> Vec<Vec<f64>> {
    let nodes: Vec<f64> = (-(half_width as i64)..=half_width as i64).map(|k| k as f64).collect();
    fornberg_weights(0.0, &nodes, max_order)
}
