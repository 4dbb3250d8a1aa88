//! Finite-difference weights on arbitrary node sets (Fornberg's recursion).

/// Weights `w_k` such that `f^(m)(x0) ≈ Σ_k w_k f(nodes[k])`.
///
/// Exact for polynomials up to degree `nodes.len() - 1`; the nodes must be
/// pairwise distinct and there must be more than `order` of them.
pub fn fd_weights(nodes: &[f64], x0: f64, order: usize) -> Vec<f64> {
    let n = nodes.len();
    assert!(n > order, "need more than {order} nodes for derivative order {order}");

    // c[k][j] = weight of node k for the j-th derivative, built incrementally
    // over prefixes of the node list.
    let mut c = vec![vec![0.0; order + 1]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// Uniform symmetric nodes `x0 + k·h` for k = -half..=half.
pub fn central_nodes(x0: f64, h: f64, half_width: usize) -> Vec<f64> {
    (-(half_width as i64)..=half_width as i64)
        .map(|k| x0 + k as f64 * h)
        .collect()
}

/// Uniform one-sided nodes `x0 + k·h` for k = 0..count.
pub fn forward_nodes(x0: f64, h: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| x0 + k as f64 * h).collect()
}
