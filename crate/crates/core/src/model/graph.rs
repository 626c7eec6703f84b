use std::collections::{BTreeSet, HashMap};

use super::definition::ProcessDefinition;

/// Index over a definition's control graph.
///
/// Edges whose endpoints are not declared activities are ignored, so a
/// topology can be built for any definition; only validated definitions are
/// guaranteed a complete `order`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    index: HashMap<String, usize>,
    /// (source, target) activity indices per control edge.
    pub ends: Vec<Option<(usize, usize)>>,
    /// Control-edge indices entering each activity.
    pub incoming: Vec<Vec<usize>>,
    /// Control-edge indices leaving each activity, in declaration order.
    pub outgoing: Vec<Vec<usize>>,
    /// Activity indices in canonical order. Shorter than the activity list
    /// iff the control graph has a cycle.
    pub order: Vec<usize>,
}

impl Topology {
    pub fn new(def: &ProcessDefinition) -> Topology {
        let n = def.activities.len();
        let mut index = HashMap::with_capacity(n);
        for (i, a) in def.activities.iter().enumerate() {
            index.entry(a.name.clone()).or_insert(i);
        }
        let mut incoming = vec![Vec::new(); n];
        let mut outgoing = vec![Vec::new(); n];
        let mut ends = Vec::with_capacity(def.control_edges.len());
        for (e, edge) in def.control_edges.iter().enumerate() {
            let pair = index.get(&edge.source).copied().zip(index.get(&edge.target).copied());
            if let Some((s, t)) = pair {
                outgoing[s].push(e);
                incoming[t].push(e);
            }
            ends.push(pair);
        }

        // Kahn's algorithm, smallest name first among the ready set.
        let mut pending: Vec<usize> = incoming.iter().map(Vec::len).collect();
        let mut ready: BTreeSet<(&str, usize)> =
            (0..n).filter(|&i| pending[i] == 0).map(|i| (def.activities[i].name.as_str(), i)).collect();
        let mut order = Vec::with_capacity(n);
        while let Some((_, i)) = ready.pop_first() {
            order.push(i);
            for &e in &outgoing[i] {
                let (_, t) = ends[e].expect("indexed edges have both ends");
                pending[t] -= 1;
                if pending[t] == 0 {
                    ready.insert((def.activities[t].name.as_str(), t));
                }
            }
        }

        Topology { index, ends, incoming, outgoing, order }
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn is_acyclic(&self) -> bool {
        self.order.len() == self.incoming.len()
    }

    /// Activities left over by the topological sort: every cycle member
    /// plus anything downstream of one.
    pub fn unordered(&self) -> Vec<usize> {
        let mut placed = vec![false; self.incoming.len()];
        for &i in &self.order {
            placed[i] = true;
        }
        (0..placed.len()).filter(|&i| !placed[i]).collect()
    }

    /// `reach[a][b]` iff a control path of length ≥ 1 leads from a to b.
    pub fn reachability(&self) -> Vec<Vec<bool>> {
        let n = self.incoming.len();
        let mut reach = vec![vec![false; n]; n];
        for (start, row) in reach.iter_mut().enumerate() {
            let mut stack: Vec<usize> = vec![start];
            while let Some(v) = stack.pop() {
                for &e in &self.outgoing[v] {
                    let (_, t) = self.ends[e].expect("indexed edges have both ends");
                    if !row[t] {
                        row[t] = true;
                        stack.push(t);
                    }
                }
            }
        }
        reach
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("control flow contains a cycle through {0:?}")]
pub struct CyclicControlFlow(pub Vec<String>);

/// Deterministic topological order, ties broken lexicographically by name.
pub fn canonical_order(def: &ProcessDefinition) -> Result<Vec<String>, CyclicControlFlow> {
    let topo = Topology::new(def);
    if !topo.is_acyclic() {
        let names = topo.unordered().into_iter().map(|i| def.activities[i].name.clone()).collect();
        return Err(CyclicControlFlow(names));
    }
    Ok(topo.order.iter().map(|&i| def.activities[i].name.clone()).collect())
}
