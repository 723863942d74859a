//! Communication topology between agents: an unweighted graph given as an
//! edge list, either undirected (consensus controllers) or directed with a
//! designated root (tracking controller).
//!
//! The stability guarantees of the controllers hold on connected trees
//! (undirected case) and rooted out-trees (directed case), so scenario
//! validation rejects anything else. The validators here are deliberately
//! simple — breadth-first reachability plus degree counting — and are tested
//! exhaustively against brute-force oracles on all graphs with up to five
//! nodes.

use thiserror::Error;

/// Errors from graph construction and queries.
#[derive(Debug, Error)]
pub enum GraphError {
    /// An edge referred to a node outside `0..n`.
    #[error("edge ({a}, {b}) references a node outside 0..{n}")]
    EdgeOutOfRange { a: usize, b: usize, n: usize },
    /// Self-loops carry no information between distinct agents.
    #[error("self-loop at node {node} is not allowed")]
    SelfLoop { node: usize },
    /// The same edge appeared twice.
    #[error("duplicate edge ({a}, {b})")]
    DuplicateEdge { a: usize, b: usize },
    /// The root id passed for a directed graph is out of range.
    #[error("root {root} is outside 0..{n}")]
    RootOutOfRange { root: usize, n: usize },
    /// A query that requires an undirected graph was made on a directed one.
    #[error("operation requires an undirected graph")]
    RequiresUndirected,
    /// A query that requires a directed graph was made on an undirected one.
    #[error("operation requires a directed graph")]
    RequiresDirected,
    /// A node index was out of range.
    #[error("node {node} is outside 0..{n}")]
    NodeOutOfRange { node: usize, n: usize },
}

/// An unweighted communication graph over nodes `0..n`.
///
/// Directed edges `(a, b)` mean information flows a → b (node `b` hears
/// node `a`). Undirected edges carry information both ways. Immutable after
/// construction; all queries take `&self`.
#[derive(Clone, Debug)]
pub struct CommGraph {
    n: usize,
    directed: bool,
    root: Option<usize>,
    edges: Vec<(usize, usize)>,
    /// Per node, the nodes it receives information from.
    in_neighbors: Vec<Vec<usize>>,
    /// Per node, the nodes that receive its information.
    out_neighbors: Vec<Vec<usize>>,
}

impl CommGraph {
    /// Builds an undirected graph from an edge list.
    pub fn undirected(n: usize, edges: &[(usize, usize)]) -> Result<CommGraph, GraphError> {
        Self::build(n, edges, false, None)
    }

    /// Builds a directed graph from an arc list `(from, to)` with a root id.
    pub fn directed(
        n: usize,
        edges: &[(usize, usize)],
        root: usize,
    ) -> Result<CommGraph, GraphError> {
        if root >= n {
            return Err(GraphError::RootOutOfRange { root, n });
        }
        Self::build(n, edges, true, Some(root))
    }

    fn build(
        n: usize,
        edges: &[(usize, usize)],
        directed: bool,
        root: Option<usize>,
    ) -> Result<CommGraph, GraphError> {
        let mut in_neighbors = vec![Vec::new(); n];
        let mut out_neighbors = vec![Vec::new(); n];
        let mut seen = std::collections::HashSet::new();
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(GraphError::EdgeOutOfRange { a, b, n });
            }
            if a == b {
                return Err(GraphError::SelfLoop { node: a });
            }
            let key = if directed {
                (a, b)
            } else {
                (a.min(b), a.max(b))
            };
            if !seen.insert(key) {
                return Err(GraphError::DuplicateEdge { a, b });
            }
            out_neighbors[a].push(b);
            in_neighbors[b].push(a);
            if !directed {
                out_neighbors[b].push(a);
                in_neighbors[a].push(b);
            }
        }
        Ok(CommGraph {
            n,
            directed,
            root,
            edges: edges.to_vec(),
            in_neighbors,
            out_neighbors,
        })
    }

    /// Number of nodes.
    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Whether the edges are directed.
    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// The designated root of a directed graph.
    pub fn root(&self) -> Option<usize> {
        self.root
    }

    /// The edge list as given at construction.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Nodes that `i` receives information from.
    pub fn in_neighbors(&self, i: usize) -> &[usize] {
        &self.in_neighbors[i]
    }

    /// Nodes that receive information from `i`.
    pub fn out_neighbors(&self, i: usize) -> &[usize] {
        &self.out_neighbors[i]
    }

    /// The number of neighbors node `i` hears: incident edges for an
    /// undirected graph, incoming arcs for a directed one.
    pub fn degree(&self, i: usize) -> Result<usize, GraphError> {
        self.check_node(i)?;
        Ok(self.in_neighbors[i].len())
    }

    /// The in-degree of node `i` (equals [`CommGraph::degree`] by the
    /// information-flow convention used here).
    pub fn in_degree(&self, i: usize) -> Result<usize, GraphError> {
        self.degree(i)
    }

    fn check_node(&self, i: usize) -> Result<(), GraphError> {
        if i >= self.n {
            return Err(GraphError::NodeOutOfRange { node: i, n: self.n });
        }
        Ok(())
    }

    /// True iff the undirected graph is connected with exactly n−1 edges.
    pub fn is_connected_tree(&self) -> Result<bool, GraphError> {
        if self.directed {
            return Err(GraphError::RequiresUndirected);
        }
        if self.n == 0 {
            return Ok(false);
        }
        if self.edges.len() != self.n - 1 {
            return Ok(false);
        }
        Ok(self.reachable_from(0) == self.n)
    }

    /// True iff every non-root node has in-degree exactly one, the root has
    /// in-degree zero, and every node is reachable from `root`.
    pub fn is_directed_out_tree(&self, root: usize) -> Result<bool, GraphError> {
        if !self.directed {
            return Err(GraphError::RequiresDirected);
        }
        self.check_node(root)?;
        if !self.in_neighbors[root].is_empty() {
            return Ok(false);
        }
        for i in 0..self.n {
            if i != root && self.in_neighbors[i].len() != 1 {
                return Ok(false);
            }
        }
        Ok(self.reachable_from(root) == self.n)
    }

    /// Nodes of degree one in an undirected tree.
    pub fn leaves(&self) -> Result<Vec<usize>, GraphError> {
        if self.directed {
            return Err(GraphError::RequiresUndirected);
        }
        Ok((0..self.n)
            .filter(|&i| self.in_neighbors[i].len() == 1)
            .collect())
    }

    /// Nodes in breadth-first order from `start` following out-edges.
    /// For a rooted out-tree this lists parents before children.
    pub fn bfs_order(&self, start: usize) -> Vec<usize> {
        let mut seen = vec![false; self.n];
        let mut queue = std::collections::VecDeque::new();
        let mut order = Vec::new();
        if start < self.n {
            seen[start] = true;
            queue.push_back(start);
        }
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &v in &self.out_neighbors[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        order
    }

    fn reachable_from(&self, start: usize) -> usize {
        self.bfs_order(start).len()
    }
}
