//! Dependency graphs, strongly connected components and AND-OR reachability.

use std::collections::VecDeque;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

/// Strongly connected components, each sorted, listed so that every component comes after
/// all components it has edges into.
pub fn sccs_bottom_up(succ: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut g: DiGraph<(), ()> = DiGraph::with_capacity(succ.len(), 0);
    let nodes: Vec<NodeIndex> = (0..succ.len()).map(|_| g.add_node(())).collect();
    for (i, s) in succ.iter().enumerate() {
        for &j in s {
            g.add_edge(nodes[i], nodes[j], ());
        }
    }
    tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut v: Vec<usize> = c.into_iter().map(|n| n.index()).collect();
            v.sort_unstable();
            v
        })
        .collect()
}

/// A component with no edge leaving it inside the subgraph induced by `members`, choosing the
/// one containing the smallest index.
pub fn bottom_scc_within(succ: &[Vec<usize>], members: &[bool]) -> Option<Vec<usize>> {
    let idx: Vec<usize> = (0..succ.len()).filter(|&i| members[i]).collect();
    if idx.is_empty() {
        return None;
    }
    let mut pos = vec![usize::MAX; succ.len()];
    for (k, &i) in idx.iter().enumerate() {
        pos[i] = k;
    }
    let sub: Vec<Vec<usize>> = idx
        .iter()
        .map(|&i| succ[i].iter().filter(|&&j| members[j]).map(|&j| pos[j]).collect())
        .collect();
    let comps = sccs_bottom_up(&sub);
    let mut comp_of = vec![0usize; idx.len()];
    for (c, comp) in comps.iter().enumerate() {
        for &v in comp {
            comp_of[v] = c;
        }
    }
    comps
        .iter()
        .enumerate()
        .filter(|(c, comp)| comp.iter().all(|&v| sub[v].iter().all(|&w| comp_of[w] == *c)))
        .map(|(_, comp)| comp.iter().map(|&v| idx[v]).collect::<Vec<_>>())
        .min_by_key(|comp| comp[0])
}

pub fn predecessors(succ: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut pred = vec![Vec::new(); succ.len()];
    for (i, s) in succ.iter().enumerate() {
        for &j in s {
            if !pred[j].contains(&i) {
                pred[j].push(i);
            }
        }
    }
    for p in pred.iter_mut() {
        p.sort_unstable();
    }
    pred
}

/// Least set containing the seeds and closed under: an OR node joins once one successor is in,
/// an AND node once all successors are in. Only nodes marked `allowed` may join.
///
/// Returns, per node, the order in which it joined (seeds keep their given stamps; new nodes
/// get consecutive stamps from `next_stamp`). Predecessors are scanned in ascending index.
pub fn and_or_closure(
    succ: &[Vec<usize>],
    is_and: &[bool],
    seeds: Vec<Option<u64>>,
    allowed: Option<&[bool]>,
    mut next_stamp: u64,
) -> Vec<Option<u64>> {
    let n = succ.len();
    let pred = predecessors(succ);
    let mut missing: Vec<usize> = succ
        .iter()
        .map(|s| {
            let mut d = s.clone();
            d.sort_unstable();
            d.dedup();
            d.len()
        })
        .collect();
    let mut stamp = seeds;
    let mut initial: Vec<usize> = (0..n).filter(|&i| stamp[i].is_some()).collect();
    initial.sort_by_key(|&i| (stamp[i], i));
    let mut queue: VecDeque<usize> = initial.into_iter().collect();
    while let Some(u) = queue.pop_front() {
        for &p in &pred[u] {
            if stamp[p].is_some() || allowed.is_some_and(|a| !a[p]) {
                continue;
            }
            let join = if is_and[p] {
                missing[p] -= 1;
                missing[p] == 0
            } else {
                true
            };
            if join {
                stamp[p] = Some(next_stamp);
                next_stamp += 1;
                queue.push_back(p);
            }
        }
    }
    stamp
}

/// Nodes that are, or can reach, a seed.
pub fn can_reach(succ: &[Vec<usize>], seeds: &[bool]) -> Vec<bool> {
    let n = succ.len();
    let s = and_or_closure(
        succ,
        &vec![false; n],
        seeds.iter().enumerate().map(|(i, &b)| b.then_some(i as u64)).collect(),
        None,
        n as u64,
    );
    s.into_iter().map(|x| x.is_some()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scc_order_is_bottom_up() {
        // 0 -> 1 <-> 2 -> 3
        let succ = vec![vec![1], vec![2], vec![1, 3], vec![]];
        let c = sccs_bottom_up(&succ);
        assert_eq!(c, vec![vec![3], vec![1, 2], vec![0]]);
    }

    #[test]
    fn and_node_waits_for_all_successors() {
        // 0 AND over {1, 2}; 1 OR -> 3; 2 OR -> 2
        let succ = vec![vec![1, 2], vec![3], vec![2], vec![]];
        let is_and = vec![true, false, false, false];
        let s = and_or_closure(&succ, &is_and, vec![None, None, None, Some(0)], None, 1);
        assert_eq!(s, vec![None, Some(1), None, Some(0)]);
    }

    #[test]
    fn bottom_component_of_subgraph() {
        let succ = vec![vec![1], vec![0, 2], vec![2], vec![]];
        let members = vec![true, true, true, false];
        assert_eq!(bottom_scc_within(&succ, &members), Some(vec![2]));
    }
}
