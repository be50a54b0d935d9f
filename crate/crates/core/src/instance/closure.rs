use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::ProblemInstance;
use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq)]
struct Dist(f64);

impl Eq for Dist {}

impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dist {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Single-source shortest paths over the explicit edges; returns predecessors.
fn dijkstra(inst: &ProblemInstance, source: usize) -> (Vec<f64>, Vec<Option<usize>>) {
    let n = inst.n();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![None; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Reverse((Dist(0.0), source)));
    while let Some(Reverse((Dist(d), u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for v in 0..n {
            if !inst.is_explicit_direct(u, v) {
                continue;
            }
            let nd = d + inst.expected_cost(u, v).expect("explicit edge");
            if nd < dist[v] {
                dist[v] = nd;
                pred[v] = Some(u);
                heap.push(Reverse((Dist(nd), v)));
            }
        }
    }
    (dist, pred)
}

/// Adds every missing ordered pair with the expected cost of the shortest
/// path over the explicit edges.
///
/// Added edges keep their vertex sequence, so sampling one draws each
/// constituent explicit edge independently and sums the draws. Existing edges
/// are left untouched. An already complete instance is returned unchanged.
#[allow(clippy::needless_range_loop)]
pub fn complete_graph_closure(instance: &ProblemInstance) -> Result<ProblemInstance> {
    if instance.is_complete() {
        return Ok(instance.clone());
    }
    let n = instance.n();
    let mut closed = instance.clone();
    for i in 0..n {
        let (dist, pred) = dijkstra(instance, i);
        for j in 0..n {
            if i == j || instance.has_edge(i, j) {
                continue;
            }
            if !dist[j].is_finite() {
                return Err(Error::Closure { from: i, unreachable: j });
            }
            let mut via = vec![j];
            let mut cur = j;
            while let Some(p) = pred[cur] {
                via.push(p);
                cur = p;
            }
            via.reverse();
            debug_assert_eq!(via[0], i);
            closed.edges.set_composite(via);
        }
    }
    Ok(closed)
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use crate::instance::{CostModel, ExplicitEdge, Vertex};
    use proptest::prelude::*;

    fn explicit(n: usize, edges: &[(usize, usize, f64)]) -> ProblemInstance {
        let vertices = (0..n).map(|id| Vertex { id, x: 0.0, y: 0.0, reward: 1.0 }).collect();
        let edges = edges.iter().map(|&(i, j, mean)| ExplicitEdge { i, j, mean }).collect();
        ProblemInstance::new("g", vertices, 0, n - 1, CostModel::ExplicitEdges { kappa: 0.5, edges }).unwrap()
    }

    #[test]
    fn triangle_gets_sum_of_means() {
        let inst = explicit(3, &[(0, 1, 1.0), (1, 2, 1.0), (1, 0, 1.0), (2, 1, 1.0)]);
        let closed = complete_graph_closure(&inst).unwrap();
        assert!(closed.is_complete());
        assert_eq!(closed.expected_cost(0, 2), Some(2.0));
        assert_eq!(closed.expected_cost(2, 0), Some(2.0));
        assert_eq!(closed.route(0, 2), Some(vec![0, 1, 2]));
        assert_eq!(closed.cost_floor(0, 2), Some(1.0));
        assert_eq!(closed.expected_cost(0, 1), Some(1.0));
    }

    #[test]
    fn complete_instance_is_unchanged() {
        let inst = explicit(3, &[(0, 1, 1.0), (1, 2, 1.0), (1, 0, 1.0), (2, 1, 1.0), (0, 2, 5.0), (2, 0, 5.0)]);
        assert_eq!(complete_graph_closure(&inst).unwrap(), inst);
    }

    #[test]
    fn disconnected_graph_names_unreachable_vertex() {
        let inst = explicit(3, &[(0, 1, 1.0), (1, 0, 1.0)]);
        match complete_graph_closure(&inst) {
            Err(Error::Closure { from: 0, unreachable: 2 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    /// Floyd–Warshall over the explicit means, the reference for closure costs.
    fn floyd_warshall(n: usize, edges: &[(usize, usize, f64)]) -> Vec<Vec<f64>> {
        let mut d = vec![vec![f64::INFINITY; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        for &(i, j, m) in edges {
            d[i][j] = d[i][j].min(m);
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if d[i][k] + d[k][j] < d[i][j] {
                        d[i][j] = d[i][k] + d[k][j];
                    }
                }
            }
        }
        d
    }

    /// Sparse graphs over planar points, symmetric, always containing a
    /// Hamiltonian cycle so that every pair is reachable.
    fn sparse_metric_graph(n: usize) -> impl Strategy<Value = Vec<(usize, usize, f64)>> {
        (proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0), n), proptest::collection::vec(any::<bool>(), n * n))
            .prop_map(move |(pts, keep)| {
                let dist = |i: usize, j: usize| {
                    let (a, b) = (pts[i], pts[j]);
                    (a.0 - b.0).hypot(a.1 - b.1) + 1e-3
                };
                let mut edges = Vec::new();
                for i in 0..n {
                    for j in (i + 1)..n {
                        if j == i + 1 || (i == 0 && j == n - 1) || keep[i * n + j] {
                            edges.push((i, j, dist(i, j)));
                            edges.push((j, i, dist(i, j)));
                        }
                    }
                }
                edges
            })
    }

    #[test]
    fn five_vertex_closure_matches_floyd_warshall() {
        let edges = [
            (0, 1, 0.7),
            (1, 0, 0.7),
            (1, 2, 0.4),
            (2, 1, 0.4),
            (2, 3, 1.1),
            (3, 2, 1.1),
            (3, 4, 0.2),
            (4, 3, 0.2),
            (0, 3, 2.5),
            (3, 0, 2.5),
        ];
        let closed = complete_graph_closure(&explicit(5, &edges)).unwrap();
        let fw = floyd_warshall(5, &edges);
        for i in 0..5 {
            for j in 0..5 {
                if i != j && !edges.iter().any(|e| e.0 == i && e.1 == j) {
                    let got = closed.expected_cost(i, j).unwrap();
                    assert!((got - fw[i][j]).abs() < 1e-12, "({i},{j}) {got} vs {}", fw[i][j]);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn closure_matches_all_pairs_shortest_paths(edges in (3usize..8).prop_flat_map(sparse_metric_graph)) {
            let n = edges.iter().map(|e| e.0.max(e.1)).max().unwrap() + 1;
            let inst = explicit(n, &edges);
            let closed = complete_graph_closure(&inst).unwrap();
            let fw = floyd_warshall(n, &edges);
            for i in 0..n {
                for j in 0..n {
                    if i == j { continue; }
                    let c = closed.expected_cost(i, j).unwrap();
                    prop_assert!(c > 0.0 && c.is_finite());
                    match inst.expected_cost(i, j) {
                        // existing edges untouched
                        Some(orig) => prop_assert_eq!(orig, c),
                        None => prop_assert!((c - fw[i][j]).abs() < 1e-9),
                    }
                    for k in 0..n {
                        if k != i && k != j {
                            let via = closed.expected_cost(i, k).unwrap() + closed.expected_cost(k, j).unwrap();
                            prop_assert!(c <= via + 1e-9);
                        }
                    }
                }
            }
            prop_assert_eq!(complete_graph_closure(&closed).unwrap(), closed);
        }
    }
}
