use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::graph::{DecisionEdge, MatchGraph, Verdict};

/// Assignment of every annotation to an individual. An individual is named
/// after its lexicographically smallest member annotation.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndividualPartition {
    assignment: BTreeMap<String, String>,
}

impl IndividualPartition {
    pub fn from_assignment(assignment: BTreeMap<String, String>) -> Self {
        IndividualPartition { assignment }
    }

    /// Builds a partition from arbitrary group labels, renaming each group
    /// after its smallest member.
    pub fn from_labels<L: Ord>(labels: impl IntoIterator<Item = (String, L)>) -> Self {
        let mut groups: BTreeMap<L, Vec<String>> = BTreeMap::new();
        for (id, label) in labels {
            groups.entry(label).or_default().push(id);
        }
        let mut assignment = BTreeMap::new();
        for members in groups.into_values() {
            let name = members.iter().min().expect("groups are non-empty").clone();
            for m in members {
                assignment.insert(m, name.clone());
            }
        }
        IndividualPartition { assignment }
    }

    pub fn individual_of(&self, annotation_id: &str) -> Option<&str> {
        self.assignment.get(annotation_id).map(String::as_str)
    }

    pub fn assignment(&self) -> &BTreeMap<String, String> {
        &self.assignment
    }

    pub fn annotation_count(&self) -> usize {
        self.assignment.len()
    }

    pub fn individual_count(&self) -> usize {
        self.assignment.iter().filter(|(annotation, individual)| annotation == individual).count()
    }

    /// individual_id -> sorted member annotation ids.
    pub fn members(&self) -> BTreeMap<&str, Vec<&str>> {
        let mut out: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for (annotation, individual) in &self.assignment {
            out.entry(individual.as_str()).or_default().push(annotation.as_str());
        }
        out
    }

    pub fn cluster_size(&self, annotation_id: &str) -> usize {
        match self.individual_of(annotation_id) {
            Some(ind) => self.assignment.values().filter(|v| *v == ind).count(),
            None => 0,
        }
    }

    /// Sub-partition over the annotations accepted by `keep`. Individual
    /// names are recomputed so they stay the smallest retained member.
    pub fn restrict<F: Fn(&str) -> bool>(&self, keep: F) -> IndividualPartition {
        IndividualPartition::from_labels(
            self.assignment.iter().filter(|(a, _)| keep(a)).map(|(a, i)| (a.clone(), i.clone())),
        )
    }
}

struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet { parent: (0..n).collect(), rank: vec![0; n] }
    }

    fn find(&mut self, mut node: usize) -> usize {
        let mut root = node;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[node] != root {
            let next = self.parent[node];
            self.parent[node] = root;
            node = next;
        }
        root
    }

    fn union(&mut self, x: usize, y: usize) {
        let (mut x, mut y) = (self.find(x), self.find(y));
        if x == y {
            return;
        }
        if self.rank[x] < self.rank[y] {
            std::mem::swap(&mut x, &mut y);
        }
        self.parent[y] = x;
        if self.rank[x] == self.rank[y] {
            self.rank[x] += 1;
        }
    }
}

/// Connected components over live "same" verdicts. Candidates without a
/// verdict never merge, and "different" verdicts do not split components;
/// see [`detect_conflicts`].
pub fn cluster_individuals(graph: &MatchGraph) -> IndividualPartition {
    let ids: Vec<&str> = graph.annotation_ids().collect();
    let index: BTreeMap<&str, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let mut sets = DisjointSet::new(ids.len());
    for edge in graph.live_decisions().filter(|e| e.verdict == Verdict::Same) {
        sets.union(index[edge.a.as_str()], index[edge.b.as_str()]);
    }
    // ids are sorted, so the first member seen for a root is its smallest.
    let mut names: BTreeMap<usize, &str> = BTreeMap::new();
    let mut assignment = BTreeMap::new();
    for (i, &id) in ids.iter().enumerate() {
        let root = sets.find(i);
        let name = *names.entry(root).or_insert(id);
        assignment.insert(id.to_owned(), name.to_owned());
    }
    IndividualPartition { assignment }
}

/// A "different" verdict contradicted by a chain of "same" verdicts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conflict {
    pub edge: DecisionEdge,
    /// Annotation ids from `edge.a` to `edge.b`, consecutive ids joined by
    /// live "same" verdicts. Shortest such path, lexicographically first.
    pub witness: Vec<String>,
}

/// Every live "different" verdict whose endpoints are joined by "same"
/// verdicts, ordered by pair.
pub fn detect_conflicts(graph: &MatchGraph) -> Vec<Conflict> {
    let mut adjacency: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for e in graph.live_decisions().filter(|e| e.verdict == Verdict::Same) {
        adjacency.entry(&e.a).or_default().insert(&e.b);
        adjacency.entry(&e.b).or_default().insert(&e.a);
    }
    let partition = cluster_individuals(graph);
    graph
        .live_decisions()
        .filter(|e| e.verdict == Verdict::Different)
        .filter(|e| partition.individual_of(&e.a) == partition.individual_of(&e.b))
        .map(|e| Conflict {
            edge: e.clone(),
            witness: shortest_path(&adjacency, &e.a, &e.b).expect("endpoints share a component"),
        })
        .collect()
}

fn shortest_path(adjacency: &BTreeMap<&str, BTreeSet<&str>>, from: &str, to: &str) -> Option<Vec<String>> {
    let mut previous: BTreeMap<&str, &str> = BTreeMap::new();
    let mut queue = VecDeque::from([from]);
    let mut seen = BTreeSet::from([from]);
    while let Some(node) = queue.pop_front() {
        if node == to {
            let mut path = vec![to.to_owned()];
            let mut cur = to;
            while let Some(&p) = previous.get(cur) {
                path.push(p.to_owned());
                cur = p;
            }
            path.reverse();
            return Some(path);
        }
        for &next in adjacency.get(node).into_iter().flatten() {
            if seen.insert(next) {
                previous.insert(next, node);
                queue.push_back(next);
            }
        }
    }
    None
}
