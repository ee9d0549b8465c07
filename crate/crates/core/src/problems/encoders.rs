use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{ProblemError, QuadraticProgram};

/// Mean-variance portfolio selection with a budget penalty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortfolioSpec {
    pub expected_returns: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub risk_factor: f64,
    pub budget: usize,
    pub penalty: f64,
}

impl PortfolioSpec {
    pub fn n_assets(&self) -> usize {
        self.expected_returns.len()
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        let n = self.n_assets();
        if self.covariance.len() != n || self.covariance.iter().any(|r| r.len() != n) {
            return Err(ProblemError::Dimension(format!(
                "covariance must be {n}x{n} to match {n} expected returns"
            )));
        }
        for i in 0..n {
            for j in 0..i {
                if (self.covariance[i][j] - self.covariance[j][i]).abs() > 1e-12 {
                    return Err(ProblemError::Invalid(format!(
                        "covariance is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        if self.budget > n {
            return Err(ProblemError::Invalid(format!(
                "budget {} exceeds the {n} assets",
                self.budget
            )));
        }
        Ok(())
    }

    /// Builds a spec from a return series (rows = periods, columns = assets)
    /// using the sample mean and the unbiased sample covariance.
    pub fn from_returns(
        series: &[Vec<f64>],
        risk_factor: f64,
        budget: usize,
        penalty: f64,
    ) -> Result<Self, ProblemError> {
        let periods = series.len();
        if periods < 2 {
            return Err(ProblemError::Invalid("need at least two return periods".into()));
        }
        let n = series[0].len();
        if series.iter().any(|r| r.len() != n) {
            return Err(ProblemError::Dimension("ragged return series".into()));
        }
        let mean: Vec<f64> = (0..n)
            .map(|a| series.iter().map(|r| r[a]).sum::<f64>() / periods as f64)
            .collect();
        let covariance = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| {
                        series
                            .iter()
                            .map(|r| (r[a] - mean[a]) * (r[b] - mean[b]))
                            .sum::<f64>()
                            / (periods - 1) as f64
                    })
                    .collect()
            })
            .collect();
        let spec = Self { expected_returns: mean, covariance, risk_factor, budget, penalty };
        spec.validate()?;
        Ok(spec)
    }

    /// Direct objective q·xᵀΣx − μᵀx + P·(Σx − B)².
    pub fn objective(&self, x: &[u8]) -> f64 {
        let n = self.n_assets();
        let xf: Vec<f64> = x.iter().map(|&b| f64::from(b)).collect();
        let mut risk = 0.0;
        for i in 0..n {
            for j in 0..n {
                risk += xf[i] * self.covariance[i][j] * xf[j];
            }
        }
        let ret: f64 = (0..n).map(|i| self.expected_returns[i] * xf[i]).sum();
        let excess = xf.iter().sum::<f64>() - self.budget as f64;
        self.risk_factor * risk - ret + self.penalty * excess * excess
    }
}

pub fn portfolio_to_qp(spec: &PortfolioSpec) -> Result<QuadraticProgram, ProblemError> {
    spec.validate()?;
    let n = spec.n_assets();
    let budget = spec.budget as f64;
    let mut qp = QuadraticProgram::new(n);
    for i in 0..n {
        qp.add_linear(i, -spec.expected_returns[i] - 2.0 * spec.penalty * budget);
        for j in 0..n {
            qp.add_quadratic(i, j, spec.risk_factor * spec.covariance[i][j] + spec.penalty);
        }
    }
    qp.add_constant(spec.penalty * budget * budget);
    Ok(qp.fold_diagonal())
}

/// Weighted undirected graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub n_nodes: usize,
    /// (i, j, weight)
    pub edges: Vec<(usize, usize, f64)>,
}

impl GraphSpec {
    pub fn validate(&self) -> Result<(), ProblemError> {
        let mut seen = BTreeSet::new();
        for &(i, j, _) in &self.edges {
            if i == j {
                return Err(ProblemError::Invalid(format!("self-loop on node {i}")));
            }
            if i >= self.n_nodes || j >= self.n_nodes {
                return Err(ProblemError::Invalid(format!(
                    "edge ({i},{j}) outside {} nodes",
                    self.n_nodes
                )));
            }
            if !seen.insert((i.min(j), i.max(j))) {
                return Err(ProblemError::Invalid(format!("duplicate edge ({i},{j})")));
            }
        }
        Ok(())
    }

    pub fn weight(&self, i: usize, j: usize) -> Option<f64> {
        self.edges
            .iter()
            .find(|&&(a, b, _)| (a, b) == (i, j) || (a, b) == (j, i))
            .map(|e| e.2)
    }

    pub fn is_complete(&self) -> bool {
        (0..self.n_nodes).all(|i| (i + 1..self.n_nodes).all(|j| self.weight(i, j).is_some()))
    }

    pub fn max_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.2.abs()).fold(0.0, f64::max)
    }

    pub fn cycle(n_nodes: usize) -> Self {
        Self {
            n_nodes,
            edges: (0..n_nodes).map(|i| (i, (i + 1) % n_nodes, 1.0)).collect(),
        }
    }

    /// Total weight of edges whose endpoints differ in `x`.
    pub fn cut_value(&self, x: &[u8]) -> f64 {
        self.edges
            .iter()
            .filter(|&&(i, j, _)| x[i] != x[j])
            .map(|e| e.2)
            .sum()
    }
}

/// Negated cut: minimize −Σ w·(x_i + x_j − 2 x_i x_j).
pub fn maxcut_to_qp(graph: &GraphSpec) -> Result<QuadraticProgram, ProblemError> {
    graph.validate()?;
    let mut qp = QuadraticProgram::new(graph.n_nodes);
    for &(i, j, w) in &graph.edges {
        qp.add_linear(i, -w);
        qp.add_linear(j, -w);
        qp.add_quadratic(i, j, 2.0 * w);
    }
    Ok(qp)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TspEncoding {
    /// n² one-hot variables x_{i,p}, index i·n + p.
    #[default]
    Full,
    /// City 0 pinned to position 0; (n−1)² variables x_{i,p} for i, p ≥ 1,
    /// index (i−1)·(n−1) + (p−1).
    Reduced,
}

/// Default one-hot penalty: 10 × largest edge weight × n.
pub fn default_tsp_penalty(graph: &GraphSpec) -> f64 {
    10.0 * graph.max_weight() * graph.n_nodes as f64
}

/// Variable index of "city i at position p", or `None` for the pinned
/// city/position in the reduced encoding.
pub fn tsp_variable(n: usize, encoding: TspEncoding, city: usize, position: usize) -> Option<usize> {
    match encoding {
        TspEncoding::Full => Some(city * n + position),
        TspEncoding::Reduced => {
            if city == 0 || position == 0 {
                None
            } else {
                Some((city - 1) * (n - 1) + (position - 1))
            }
        }
    }
}

/// Cyclic-tour TSP as a penalized QUBO.
pub fn tsp_to_qp(
    graph: &GraphSpec,
    penalty: f64,
    encoding: TspEncoding,
) -> Result<QuadraticProgram, ProblemError> {
    graph.validate()?;
    let n = graph.n_nodes;
    if n < 2 || !graph.is_complete() {
        return Err(ProblemError::Invalid("TSP needs a complete graph on at least 2 nodes".into()));
    }
    let n_vars = match encoding {
        TspEncoding::Full => n * n,
        TspEncoding::Reduced => (n - 1) * (n - 1),
    };
    let mut qp = QuadraticProgram::new(n_vars);
    // A variable that is pinned reads as constant 1 for (0, 0) and 0 for the
    // rest of city 0's row and position 0's column.
    let var = |i: usize, p: usize| tsp_variable(n, encoding, i, p);
    let pinned_one = |i: usize, p: usize| encoding == TspEncoding::Reduced && i == 0 && p == 0;

    // Distance: Σ_{i≠j} Σ_p w_ij x_{i,p} x_{j,p+1}.
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let w = graph.weight(i, j).expect("complete graph");
            for p in 0..n {
                let q = (p + 1) % n;
                match (var(i, p), var(j, q)) {
                    (Some(a), Some(b)) => qp.add_quadratic(a, b, w),
                    (None, Some(b)) if pinned_one(i, p) => qp.add_linear(b, w),
                    (Some(a), None) if pinned_one(j, q) => qp.add_linear(a, w),
                    _ => {}
                }
            }
        }
    }

    // A·(Σ_k y_k − 1)² over each row (fixed city) and column (fixed position).
    let mut add_one_hot = |cells: Vec<(usize, usize)>| {
        let mut fixed = 0.0;
        let mut vars = Vec::new();
        for (i, p) in cells {
            match var(i, p) {
                Some(v) => vars.push(v),
                None if pinned_one(i, p) => fixed += 1.0,
                None => {}
            }
        }
        // (Σ y + fixed − 1)² = Σ_a Σ_b y_a y_b + 2(fixed − 1)Σ y + (fixed − 1)²
        let shift = fixed - 1.0;
        for &a in &vars {
            for &b in &vars {
                qp.add_quadratic(a, b, penalty);
            }
            qp.add_linear(a, 2.0 * penalty * shift);
        }
        qp.add_constant(penalty * shift * shift);
    };
    for i in 0..n {
        add_one_hot((0..n).map(|p| (i, p)).collect());
    }
    for p in 0..n {
        add_one_hot((0..n).map(|i| (i, p)).collect());
    }
    Ok(qp.fold_diagonal())
}

/// Length of the closed tour visiting `order`.
pub fn tour_length(graph: &GraphSpec, order: &[usize]) -> Option<f64> {
    let n = order.len();
    (0..n)
        .map(|k| graph.weight(order[k], order[(k + 1) % n]))
        .sum()
}

/// Reads a tour from a one-hot assignment; `None` when infeasible.
pub fn decode_tour(n: usize, encoding: TspEncoding, x: &[u8]) -> Option<Vec<usize>> {
    let mut order = vec![usize::MAX; n];
    for p in 0..n {
        let mut city = None;
        for i in 0..n {
            let on = match tsp_variable(n, encoding, i, p) {
                Some(v) => x[v] != 0,
                None => encoding == TspEncoding::Reduced && i == 0 && p == 0,
            };
            if on {
                if city.is_some() {
                    return None;
                }
                city = Some(i);
            }
        }
        order[p] = city?;
    }
    let distinct: BTreeSet<_> = order.iter().collect();
    (distinct.len() == n).then_some(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::qp::assignment_of;

    #[test]
    fn penalty_only_portfolio() {
        let spec = PortfolioSpec {
            expected_returns: vec![0.0],
            covariance: vec![vec![0.0]],
            risk_factor: 0.7,
            budget: 0,
            penalty: 1.0,
        };
        let qp = portfolio_to_qp(&spec).unwrap();
        assert_eq!(qp.linear(), &[1.0]);
        assert_eq!(qp.constant(), 0.0);
        assert_eq!(qp.q(0, 0), 0.0);
    }

    #[test]
    fn two_asset_portfolio_value() {
        let spec = PortfolioSpec {
            expected_returns: vec![1.0, 1.0],
            covariance: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            risk_factor: 0.5,
            budget: 1,
            penalty: 2.0,
        };
        let qp = portfolio_to_qp(&spec).unwrap();
        assert_eq!(qp.evaluate(&[1, 0]), -0.5);
        assert_eq!(spec.objective(&[1, 0]), -0.5);
    }

    #[test]
    fn portfolio_validation() {
        let spec = PortfolioSpec {
            expected_returns: vec![1.0, 1.0],
            covariance: vec![vec![1.0]],
            risk_factor: 0.5,
            budget: 1,
            penalty: 2.0,
        };
        assert!(matches!(portfolio_to_qp(&spec), Err(ProblemError::Dimension(_))));
        let spec = PortfolioSpec { covariance: vec![vec![1.0, 0.0], vec![0.0, 1.0]], budget: 3, ..spec };
        assert!(matches!(portfolio_to_qp(&spec), Err(ProblemError::Invalid(_))));
    }

    #[test]
    fn maxcut_small_graphs() {
        let edge = GraphSpec { n_nodes: 2, edges: vec![(0, 1, 1.0)] };
        let qp = maxcut_to_qp(&edge).unwrap();
        assert_eq!(qp.evaluate(&[1, 0]), -1.0);
        assert_eq!(qp.evaluate(&[0, 1]), -1.0);
        assert_eq!(qp.evaluate(&[1, 1]), 0.0);

        let tri = GraphSpec::cycle(3);
        let qp = maxcut_to_qp(&tri).unwrap();
        let min = (0..8).map(|i| qp.evaluate_index(i)).fold(f64::INFINITY, f64::min);
        assert_eq!(min, -2.0);
        for i in 0..8 {
            let x = assignment_of(i, 3);
            assert_eq!(qp.evaluate(&x), -tri.cut_value(&x));
        }
    }

    #[test]
    fn graph_validation() {
        assert!(GraphSpec { n_nodes: 2, edges: vec![(0, 0, 1.0)] }.validate().is_err());
        assert!(GraphSpec { n_nodes: 2, edges: vec![(0, 1, 1.0), (1, 0, 2.0)] }.validate().is_err());
        assert!(GraphSpec { n_nodes: 2, edges: vec![(0, 2, 1.0)] }.validate().is_err());
    }

    fn triangle() -> GraphSpec {
        GraphSpec { n_nodes: 3, edges: vec![(0, 1, 1.0), (0, 2, 2.0), (1, 2, 3.0)] }
    }

    #[test]
    fn tsp_requires_complete_graph() {
        let g = GraphSpec { n_nodes: 3, edges: vec![(0, 1, 1.0), (1, 2, 1.0)] };
        assert!(matches!(tsp_to_qp(&g, 10.0, TspEncoding::Full), Err(ProblemError::Invalid(_))));
    }

    #[test]
    fn tsp_feasible_assignments_cost_tour_length() {
        let g = triangle();
        for encoding in [TspEncoding::Full, TspEncoding::Reduced] {
            let qp = tsp_to_qp(&g, 100.0, encoding).unwrap();
            let mut feasible = 0;
            let mut best = f64::INFINITY;
            for index in 0..1usize << qp.n_vars() {
                let x = assignment_of(index, qp.n_vars());
                let v = qp.evaluate(&x);
                best = best.min(v);
                if let Some(order) = decode_tour(3, encoding, &x) {
                    feasible += 1;
                    assert_eq!(v, tour_length(&g, &order).unwrap());
                    assert_eq!(v, 6.0);
                } else {
                    assert!(v >= 100.0, "{encoding:?} infeasible {x:?} scored {v}");
                }
            }
            assert_eq!(feasible, if encoding == TspEncoding::Full { 6 } else { 2 });
            assert_eq!(best, 6.0);
        }
    }

    #[test]
    fn default_penalty_scales_with_graph() {
        assert_eq!(default_tsp_penalty(&triangle()), 90.0);
    }
}
