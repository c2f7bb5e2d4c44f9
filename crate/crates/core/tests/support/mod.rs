//! Independent oracles shared by the integration suites.
//!
//! Everything here recomputes results through a different algorithmic route
//! than the library: full Jacobi diagonalization instead of inverse
//! iteration, characteristic-polynomial bisection for tiny matrices, and
//! union-find connectivity instead of graph traversal.

use std::collections::BTreeSet;

use asns_core::graph::{DirectedGraph, NodeId};

/// Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order paired with unit-norm
/// eigenvectors; `vectors[e]` is the eigenvector of `values[e]`.
pub fn jacobi_eigen(matrix: &[f64], n: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    assert_eq!(matrix.len(), n * n);
    let mut a = matrix.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    for _sweep in 0..200 {
        let off: f64 = (0..n)
            .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| a[p * n + q] * a[p * n + q])
            .sum();
        if off < 1e-24 {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[x * n + x].partial_cmp(&a[y * n + y]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&col| (0..n).map(|row| v[row * n + col]).collect())
        .collect();
    (values, vectors)
}

/// Determinant of a small dense matrix by cofactor expansion.
fn det(matrix: &[f64], n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => matrix[0],
        2 => matrix[0] * matrix[3] - matrix[1] * matrix[2],
        _ => {
            let mut total = 0.0;
            for col in 0..n {
                let minor: Vec<f64> = (1..n)
                    .flat_map(|r| {
                        (0..n)
                            .filter(move |&c| c != col)
                            .map(move |c| matrix[r * n + c])
                    })
                    .collect();
                let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
                total += sign * matrix[col] * det(&minor, n - 1);
            }
            total
        }
    }
}

/// Smallest eigenvalue of a symmetric positive definite matrix with n <= 4,
/// located by scanning the characteristic polynomial for its first sign
/// change and bisecting the bracket.
pub fn charpoly_smallest_eigenvalue(matrix: &[f64], n: usize) -> f64 {
    assert!(n <= 4, "characteristic-polynomial oracle limited to n <= 4");
    let p = |x: f64| -> f64 {
        let shifted: Vec<f64> = (0..n * n)
            .map(|idx| {
                let (r, c) = (idx / n, idx % n);
                matrix[idx] - if r == c { x } else { 0.0 }
            })
            .collect();
        det(&shifted, n)
    };
    // Gershgorin upper bound of the spectrum.
    let upper = (0..n)
        .map(|r| (0..n).map(|c| matrix[r * n + c].abs()).sum::<f64>())
        .fold(0.0, f64::max);
    // det(A) > 0 for positive definite A; scan for the first sign change.
    let steps = 20_000;
    let mut lo = 0.0;
    let mut hi = upper;
    let mut found = false;
    for i in 1..=steps {
        let x = upper * i as f64 / steps as f64;
        if p(x) <= 0.0 {
            lo = upper * (i - 1) as f64 / steps as f64;
            hi = x;
            found = true;
            break;
        }
    }
    assert!(found, "no sign change found; matrix not positive definite?");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if p(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Union-find connectivity over the undirected view of `g` restricted to
/// `nodes`, independent of the library's traversal code.
pub fn connected_by_union_find(g: &DirectedGraph, nodes: &BTreeSet<NodeId>) -> bool {
    let ids: Vec<NodeId> = nodes.iter().copied().collect();
    if ids.len() <= 1 {
        return true;
    }
    let index = |v: NodeId| ids.binary_search(&v).expect("node in set");
    let mut parent: Vec<usize> = (0..ids.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (j, i, _) in g.edges() {
        if nodes.contains(&j) && nodes.contains(&i) {
            let (a, b) = (find(&mut parent, index(j)), find(&mut parent, index(i)));
            if a != b {
                parent[a] = b;
            }
        }
    }
    let root = find(&mut parent, 0);
    (1..ids.len()).all(|x| find(&mut parent, x) == root)
}

/// Every removal set that leaves each surviving agent with at most
/// `f_bound` removed neighbors (the admissible worst cases for an F-local
/// adversary), excluding removals that wipe out the whole node set.
pub fn admissible_removals(g: &DirectedGraph, f_bound: usize) -> Vec<BTreeSet<NodeId>> {
    let ids: Vec<NodeId> = g.node_ids().to_vec();
    let n = ids.len();
    assert!(n <= 16, "exhaustive removal enumeration limited to 16 nodes");
    let mut result = Vec::new();
    for mask in 0u32..(1 << n) {
        let removed: BTreeSet<NodeId> = ids
            .iter()
            .enumerate()
            .filter(|(bit, _)| mask & (1 << bit) != 0)
            .map(|(_, &v)| v)
            .collect();
        if removed.len() == n {
            continue;
        }
        let admissible = ids
            .iter()
            .filter(|v| !removed.contains(v))
            .all(|&v| {
                g.in_neighbors(v)
                    .iter()
                    .filter(|j| removed.contains(j))
                    .count()
                    <= f_bound
            });
        if admissible {
            result.push(removed);
        }
    }
    result
}
