/// A quadrature rule on the k-simplex in barycentric coordinates; weights sum to 1, so
/// the integral over a simplex is its volume times `sum w f(node)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexRule {
    pub degree: usize,
    /// Polynomial degree integrated exactly.
    pub exactness: usize,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

/// Symmetric rule on the `degree`-simplex exact for polynomials of total degree `order`:
/// the centroid for order 1, the Stroud degree-2 rule for order 2 and
/// Grundmann-Moeller rules above.
pub fn simplex_rule(degree: usize, order: usize) -> SimplexRule {
    let k = degree;
    if k == 0 {
        return SimplexRule { degree: 0, exactness: usize::MAX, nodes: vec![vec![1.0]], weights: vec![1.0] };
    }
    match order {
        0 | 1 => SimplexRule {
            degree: k,
            exactness: 1,
            nodes: vec![vec![1.0 / (k + 1) as f64; k + 1]],
            weights: vec![1.0],
        },
        2 => {
            let kf = k as f64;
            let b = (kf + 2.0 - (kf + 2.0).sqrt()) / ((kf + 1.0) * (kf + 2.0));
            let a = 1.0 - kf * b;
            let nodes = (0..=k).map(|i| (0..=k).map(|j| if i == j { a } else { b }).collect()).collect();
            SimplexRule { degree: k, exactness: 2, nodes, weights: vec![1.0 / (kf + 1.0); k + 1] }
        }
        p => grundmann_moeller(k, (p - 1).div_ceil(2)),
    }
}

/// Grundmann-Moeller rule of index `s` (exact to degree `2s + 1`).
fn grundmann_moeller(k: usize, s: usize) -> SimplexRule {
    let d = 2 * s + 1;
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let kf = (1..=k).map(|i| i as f64).product::<f64>();
    for i in 0..=s {
        let denom = (d + k - 2 * i) as f64;
        let fact_i: f64 = (1..=i).map(|v| v as f64).product();
        let fact_top: f64 = (1..=(d + k - i)).map(|v| v as f64).product();
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        // weight relative to the simplex volume 1/k!
        let w = sign * 2f64.powi(-(2 * s as i32)) * denom.powi(d as i32) / (fact_i * fact_top) * kf;
        for beta in compositions(s - i, k + 1) {
            nodes.push(beta.iter().map(|b| (2 * b + 1) as f64 / denom).collect());
            weights.push(w);
        }
    }
    SimplexRule { degree: k, exactness: d, nodes, weights }
}

/// All vectors of `parts` nonnegative integers summing to `total`.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    (0..=total)
        .rev()
        .flat_map(|first| {
            compositions(total - first, parts - 1).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    /// Mean of `prod lambda_i^alpha_i` over the k-simplex: `k! alpha! / (|alpha| + k)!`
    /// for the barycentric coordinates `lambda_1 .. lambda_k`.
    fn monomial_mean(alpha: &[u32]) -> f64 {
        let k = alpha.len() as u32;
        let total: u32 = alpha.iter().sum();
        factorial(k) * alpha.iter().map(|a| factorial(*a)).product::<f64>() / factorial(total + k)
    }

    fn apply(rule: &SimplexRule, alpha: &[u32]) -> f64 {
        rule.nodes
            .iter()
            .zip(&rule.weights)
            .map(|(node, w)| w * alpha.iter().enumerate().map(|(i, a)| node[i + 1].powi(*a as i32)).product::<f64>())
            .sum()
    }

    #[test]
    fn rules_are_exact_to_their_order() {
        for k in 1..=4usize {
            for order in 1..=7usize {
                let rule = simplex_rule(k, order);
                assert!(rule.exactness >= order);
                assert!((rule.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                for node in &rule.nodes {
                    assert!((node.iter().sum::<f64>() - 1.0).abs() < 1e-14);
                    assert!(node.iter().all(|v| *v > 0.0));
                }
                // every monomial of total degree <= order
                let mut alpha = vec![0u32; k];
                loop {
                    let total: u32 = alpha.iter().sum();
                    if total as usize <= order {
                        let err = (apply(&rule, &alpha) - monomial_mean(&alpha)).abs();
                        assert!(err < 1e-12, "k = {k}, order = {order}, alpha = {alpha:?}: {err}");
                    }
                    let mut i = 0;
                    while i < k {
                        alpha[i] += 1;
                        if alpha[i] as usize <= order {
                            break;
                        }
                        alpha[i] = 0;
                        i += 1;
                    }
                    if i == k {
                        break;
                    }
                }
            }
        }
    }

    #[test]
    fn order_two_is_not_exact_for_cubics() {
        let rule = simplex_rule(2, 2);
        assert!((apply(&rule, &[3, 0]) - monomial_mean(&[3, 0])).abs() > 1e-4);
    }
}
