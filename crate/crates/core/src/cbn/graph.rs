//! Graph utilities over parent lists (`parents[v]` = parents of node `v`).

use std::collections::{BTreeSet, VecDeque};

/// Kahn's algorithm; ties resolved by smallest node index. `None` on a cycle.
pub fn topological_order(parents: &[Vec<usize>]) -> Option<Vec<usize>> {
    let n = parents.len();
    let mut indegree: Vec<usize> = parents.iter().map(Vec::len).collect();
    let children = children_of(parents);
    let mut ready: BTreeSet<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = ready.pop_first() {
        order.push(v);
        for &c in &children[v] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.insert(c);
            }
        }
    }
    (order.len() == n).then_some(order)
}

pub fn children_of(parents: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut children = vec![Vec::new(); parents.len()];
    for (child, ps) in parents.iter().enumerate() {
        for &p in ps {
            children[p].push(child);
        }
    }
    children
}

/// Strict descendants of `start`.
pub fn descendants(parents: &[Vec<usize>], start: usize) -> BTreeSet<usize> {
    reach(&children_of(parents), start)
}

/// Strict ancestors of `start`.
pub fn ancestors(parents: &[Vec<usize>], start: usize) -> BTreeSet<usize> {
    reach(parents, start)
}

/// Whether a directed path of length >= 1 leads from `from` to `to`.
pub fn has_directed_path(parents: &[Vec<usize>], from: usize, to: usize) -> bool {
    descendants(parents, from).contains(&to)
}

fn reach(adjacency: &[Vec<usize>], start: usize) -> BTreeSet<usize> {
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for &next in &adjacency[v] {
            if seen.insert(next) {
                queue.push_back(next);
            }
        }
    }
    seen
}

/// Tests `x ⊥ y | given` by the moralized ancestral graph criterion.
pub fn d_separated(parents: &[Vec<usize>], x: usize, y: usize, given: &BTreeSet<usize>) -> bool {
    let n = parents.len();
    let mut relevant = BTreeSet::from([x, y]);
    relevant.extend(given.iter().copied());
    for v in relevant.clone() {
        relevant.extend(ancestors(parents, v));
    }

    let mut adjacency = vec![BTreeSet::new(); n];
    for &v in &relevant {
        let ps = &parents[v];
        for &p in ps {
            adjacency[v].insert(p);
            adjacency[p].insert(v);
        }
        for (i, &a) in ps.iter().enumerate() {
            for &b in &ps[i + 1..] {
                adjacency[a].insert(b);
                adjacency[b].insert(a);
            }
        }
    }

    if given.contains(&x) || given.contains(&y) {
        return true;
    }
    let mut seen = BTreeSet::from([x]);
    let mut queue = VecDeque::from([x]);
    while let Some(v) = queue.pop_front() {
        if v == y {
            return false;
        }
        for &next in &adjacency[v] {
            if !given.contains(&next) && seen.insert(next) {
                queue.push_back(next);
            }
        }
    }
    true
}

/// Enumerates every simple directed path from `from` to `to`, following
/// `children` adjacency. Paths are returned in lexicographic node order.
pub fn directed_paths(children: &[Vec<usize>], from: usize, to: usize) -> Vec<Vec<usize>> {
    fn walk(
        children: &[Vec<usize>],
        node: usize,
        to: usize,
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if node == to && path.len() > 1 {
            out.push(path.clone());
            return;
        }
        let mut next: Vec<usize> = children[node].clone();
        next.sort_unstable();
        next.dedup();
        for c in next {
            if !path.contains(&c) {
                path.push(c);
                walk(children, c, to, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    let mut path = vec![from];
    walk(children, from, to, &mut path, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    // 0 -> 1 -> 2, 0 -> 2, 3 -> 2
    fn sample() -> Vec<Vec<usize>> {
        vec![vec![], vec![0], vec![1, 0, 3], vec![]]
    }

    #[test]
    fn topo_respects_edges() {
        let order = topological_order(&sample()).unwrap();
        assert_eq!(order, vec![0, 1, 3, 2]);
        assert!(topological_order(&[vec![1], vec![0]]).is_none());
    }

    #[test]
    fn reachability() {
        let g = sample();
        assert_eq!(descendants(&g, 0), BTreeSet::from([1, 2]));
        assert_eq!(ancestors(&g, 2), BTreeSet::from([0, 1, 3]));
        assert!(!has_directed_path(&g, 3, 0));
        assert!(!has_directed_path(&g, 0, 0));
    }

    #[test]
    fn collider_blocks_until_observed() {
        // 0 -> 2 <- 1
        let g = vec![vec![], vec![], vec![0, 1]];
        assert!(d_separated(&g, 0, 1, &BTreeSet::new()));
        assert!(!d_separated(&g, 0, 1, &BTreeSet::from([2])));
    }

    #[test]
    fn chain_blocked_by_middle() {
        let g = vec![vec![], vec![0], vec![1]];
        assert!(!d_separated(&g, 0, 2, &BTreeSet::new()));
        assert!(d_separated(&g, 0, 2, &BTreeSet::from([1])));
    }

    #[test]
    fn enumerates_paths() {
        let g = sample();
        let paths = directed_paths(&children_of(&g), 0, 2);
        assert_eq!(paths, vec![vec![0, 1, 2], vec![0, 2]]);
    }
}
