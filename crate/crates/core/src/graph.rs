//! Finite weighted graphs, lattice boxes, and the wired boundary.
//!
//! Vertices are indexed `0..N`. Boxes store their lattice points in
//! row-major order; the wired boundary vertex δ, when present, is always
//! the last index. Everything downstream (matrix assembly, elimination
//! order) relies on that ordering. Graphs are immutable after
//! construction: the builders return new graphs.
//!
//! No self-loops are represented: `w(i, i) = 0` always, so a simulated
//! walker's neighbor rates stay constant between jumps.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Axis-aligned lattice box `[-n, n]^d` (side 2n+1) around `center`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxSpec {
    pub dimension: usize,
    /// Half-width; the box has (2n+1)^d vertices.
    pub half_width: usize,
    #[serde(default)]
    pub center: Vec<i64>,
    #[serde(default)]
    pub wired: bool,
}

impl BoxSpec {
    pub fn new(dimension: usize, half_width: usize) -> Self {
        BoxSpec {
            dimension,
            half_width,
            center: vec![0; dimension],
            wired: false,
        }
    }

    pub fn wired(mut self) -> Self {
        self.wired = true;
        self
    }

    pub fn side(&self) -> usize {
        2 * self.half_width + 1
    }

    pub fn vertex_count(&self) -> usize {
        self.side().pow(self.dimension as u32)
    }

    fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(CoreError::InvalidParameter("dimension must be >= 1".into()));
        }
        if self.half_width == 0 {
            return Err(CoreError::InvalidParameter("half_width must be >= 1".into()));
        }
        if !self.center.is_empty() && self.center.len() != self.dimension {
            return Err(CoreError::InvalidParameter(
                "center length must match dimension".into(),
            ));
        }
        Ok(())
    }

    /// Lattice coordinates of vertex `i` in row-major order.
    pub fn coord(&self, i: usize) -> Vec<i64> {
        let side = self.side() as i64;
        let n = self.half_width as i64;
        let mut rem = i as i64;
        let mut c = vec![0i64; self.dimension];
        for ax in (0..self.dimension).rev() {
            c[ax] = rem % side - n;
            rem /= side;
        }
        if self.center.len() == self.dimension {
            for ax in 0..self.dimension {
                c[ax] += self.center[ax];
            }
        }
        c
    }

    /// Row-major index of the lattice point `p`, if inside the box.
    pub fn index_of(&self, p: &[i64]) -> Option<usize> {
        if p.len() != self.dimension {
            return None;
        }
        let side = self.side() as i64;
        let n = self.half_width as i64;
        let mut idx = 0i64;
        for ax in 0..self.dimension {
            let centered = p[ax] - self.center.get(ax).copied().unwrap_or(0);
            if centered < -n || centered > n {
                return None;
            }
            idx = idx * side + (centered + n);
        }
        Some(idx as usize)
    }

    /// Index of the center vertex.
    pub fn center_index(&self) -> usize {
        (self.vertex_count() - 1) / 2
    }
}

/// A finite connected weighted graph: positive edge weights `w`,
/// positive vertex weights `theta`, non-negative boundary field `eta`,
/// and an optional wired boundary vertex δ (always the last index).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    theta: Vec<f64>,
    eta: Vec<f64>,
    /// Sorted neighbor lists, (neighbor, weight).
    adj: Vec<Vec<(usize, f64)>>,
    /// Unordered edges with i < j.
    edges: Vec<(usize, usize, f64)>,
    delta: Option<usize>,
    box_spec: Option<BoxSpec>,
}

impl WeightedGraph {
    /// Explicit edge list with the given vertex marked as the wired
    /// boundary δ.
    pub fn from_edges_with_delta(
        vertex_count: usize,
        edges: &[(usize, usize, f64)],
        theta: Vec<f64>,
        eta: Vec<f64>,
        delta: usize,
    ) -> Result<Self> {
        let mut g = WeightedGraph::from_edges(vertex_count, edges, theta, eta)?;
        if delta >= vertex_count {
            return Err(CoreError::InvalidParameter("delta out of range".into()));
        }
        g.delta = Some(delta);
        Ok(g)
    }

    /// Build a graph from an explicit edge list. Rejects self-loops,
    /// duplicate edges, non-positive weights, and disconnected graphs.
    pub fn from_edges(
        vertex_count: usize,
        edges: &[(usize, usize, f64)],
        theta: Vec<f64>,
        eta: Vec<f64>,
    ) -> Result<Self> {
        if vertex_count == 0 {
            return Err(CoreError::InvalidParameter("empty vertex set".into()));
        }
        if theta.len() != vertex_count || eta.len() != vertex_count {
            return Err(CoreError::InvalidParameter(
                "theta/eta length must equal vertex count".into(),
            ));
        }
        if theta.iter().any(|t| !(*t > 0.0)) {
            return Err(CoreError::InvalidParameter("theta must be positive".into()));
        }
        if eta.iter().any(|e| !(*e >= 0.0)) {
            return Err(CoreError::InvalidParameter("eta must be non-negative".into()));
        }
        let mut norm: Vec<(usize, usize, f64)> = Vec::with_capacity(edges.len());
        for &(a, b, w) in edges {
            if a == b {
                return Err(CoreError::InvalidParameter(format!("self-loop at {a}")));
            }
            if a >= vertex_count || b >= vertex_count {
                return Err(CoreError::InvalidParameter("edge endpoint out of range".into()));
            }
            if !(w > 0.0) {
                return Err(CoreError::InvalidParameter(format!(
                    "edge weight must be positive, got {w}"
                )));
            }
            norm.push((a.min(b), a.max(b), w));
        }
        norm.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        if norm.windows(2).any(|p| (p[0].0, p[0].1) == (p[1].0, p[1].1)) {
            return Err(CoreError::InvalidParameter("duplicate edge".into()));
        }
        let mut adj = vec![Vec::new(); vertex_count];
        for &(a, b, w) in &norm {
            adj[a].push((b, w));
            adj[b].push((a, w));
        }
        for list in &mut adj {
            list.sort_by_key(|(j, _)| *j);
        }
        let g = WeightedGraph {
            theta,
            eta,
            adj,
            edges: norm,
            delta: None,
            box_spec: None,
        };
        if !g.is_connected() {
            return Err(CoreError::NotConnected);
        }
        Ok(g)
    }

    fn is_connected(&self) -> bool {
        let n = self.vertex_count();
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &(u, _) in &self.adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    stack.push(u);
                }
            }
        }
        count == n
    }

    pub fn vertex_count(&self) -> usize {
        self.theta.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Neighbors of `i` as (vertex, weight) pairs, sorted by vertex.
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adj[i]
    }

    /// Unordered edge list with endpoints i < j.
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// Edge weight, 0 if `{i, j}` is not an edge (including i = j).
    pub fn w(&self, i: usize, j: usize) -> f64 {
        self.adj[i]
            .binary_search_by_key(&j, |(v, _)| *v)
            .map(|k| self.adj[i][k].1)
            .unwrap_or(0.0)
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    pub fn delta(&self) -> Option<usize> {
        self.delta
    }

    pub fn box_spec(&self) -> Option<&BoxSpec> {
        self.box_spec.as_ref()
    }

    /// Index of the box center, when the graph came from a `BoxSpec`.
    pub fn center_index(&self) -> Option<usize> {
        self.box_spec.as_ref().map(|s| s.center_index())
    }

    /// Default elimination order: storage order. The marginalization
    /// sweep peels vertices from the back, so on wired graphs δ (stored
    /// last) is eliminated first.
    pub fn default_order(&self) -> Vec<usize> {
        (0..self.vertex_count()).collect()
    }

    /// Replace theta and eta, keeping the topology.
    fn with_vertex_weights(&self, theta: Vec<f64>, eta: Vec<f64>) -> Result<Self> {
        let mut g = self.clone();
        if theta.len() != g.vertex_count() || eta.len() != g.vertex_count() {
            return Err(CoreError::InvalidParameter("weight length mismatch".into()));
        }
        if theta.iter().any(|t| !(*t > 0.0)) || eta.iter().any(|e| !(*e >= 0.0)) {
            return Err(CoreError::InvalidParameter("bad vertex weights".into()));
        }
        g.theta = theta;
        g.eta = eta;
        Ok(g)
    }

    /// Same topology with new edge weights (parallel to `edges()`).
    pub fn with_edge_weights(&self, weights: &[f64]) -> Result<Self> {
        if weights.len() != self.edges.len() {
            return Err(CoreError::InvalidParameter("edge weight count mismatch".into()));
        }
        let edges: Vec<(usize, usize, f64)> = self
            .edges
            .iter()
            .zip(weights)
            .map(|(&(a, b, _), &w)| (a, b, w))
            .collect();
        let mut g = WeightedGraph::from_edges(
            self.vertex_count(),
            &edges,
            self.theta.clone(),
            self.eta.clone(),
        )?;
        g.delta = self.delta;
        g.box_spec = self.box_spec.clone();
        Ok(g)
    }
}

/// Nearest-neighbor lattice box with constant edge weight `w` and
/// constant vertex weight `theta`; `eta` is identically zero.
pub fn build_box(spec: &BoxSpec, w: f64, theta: f64) -> Result<WeightedGraph> {
    spec.validate()?;
    if !(w > 0.0) {
        return Err(CoreError::InvalidParameter("w must be positive".into()));
    }
    if !(theta > 0.0) {
        return Err(CoreError::InvalidParameter("theta must be positive".into()));
    }
    let n = spec.vertex_count();
    let side = spec.side() as i64;
    let mut edges = Vec::new();
    // neighbor in +axis direction exists unless we're on the top face
    for i in 0..n {
        let mut stride = 1usize;
        let mut rem = i;
        // row-major: last axis has stride 1
        let mut pos = vec![0usize; spec.dimension];
        for ax in (0..spec.dimension).rev() {
            pos[ax] = rem % side as usize;
            rem /= side as usize;
        }
        for ax in (0..spec.dimension).rev() {
            if pos[ax] + 1 < side as usize {
                edges.push((i, i + stride, w));
            }
            stride *= side as usize;
        }
    }
    let mut g = WeightedGraph::from_edges(n, &edges, vec![theta; n], vec![0.0; n])?;
    g.box_spec = Some(BoxSpec {
        wired: false,
        ..spec.clone()
    });
    Ok(g)
}

/// Boundary vertices of a box and, per vertex, the number of lattice
/// neighbors that fall outside the box.
pub fn missing_neighbor_counts(spec: &BoxSpec) -> Vec<usize> {
    let n = spec.vertex_count();
    let side = spec.side();
    let mut missing = vec![0usize; n];
    for (i, m) in missing.iter_mut().enumerate() {
        let mut rem = i;
        for _ax in (0..spec.dimension).rev() {
            let p = rem % side;
            rem /= side;
            if p == 0 {
                *m += 1;
            }
            if p == side - 1 {
                *m += 1;
            }
        }
    }
    missing
}

/// Add the wired boundary vertex δ. Each boundary vertex `i` gets an
/// edge to δ carrying the summed weight of its missing lattice
/// neighbors; δ's vertex weight is `theta_delta` and its field is 0.
pub fn wire_box(graph: &WeightedGraph, theta_delta: f64) -> Result<WeightedGraph> {
    if graph.delta.is_some() {
        return Err(CoreError::InvalidParameter("graph is already wired".into()));
    }
    let spec = graph
        .box_spec
        .as_ref()
        .ok_or_else(|| CoreError::InvalidParameter("wire_box needs a lattice box".into()))?
        .clone();
    if !(theta_delta > 0.0) {
        return Err(CoreError::InvalidParameter("theta_delta must be positive".into()));
    }
    let n = graph.vertex_count();
    let delta = n;
    let missing = missing_neighbor_counts(&spec);
    // constant-W box: every missing neighbor would have carried the bulk weight
    let w_bulk = graph.edges[0].2;
    let mut edges = graph.edges.clone();
    for (i, m) in missing.iter().enumerate() {
        if *m > 0 {
            edges.push((i, delta, *m as f64 * w_bulk));
        }
    }
    let mut theta = graph.theta.clone();
    theta.push(theta_delta);
    let mut eta = graph.eta.clone();
    eta.push(0.0);
    let mut g = WeightedGraph::from_edges(n + 1, &edges, theta, eta)?;
    g.delta = Some(delta);
    g.box_spec = Some(BoxSpec { wired: true, ..spec });
    Ok(g)
}

/// Transfer the vertex weights onto the edges: θ'_i = 1 and
/// w'_{ij} = w_{ij} θ_i θ_j. Stated only for η ≡ 0.
pub fn scale_to_unit_theta(graph: &WeightedGraph) -> Result<WeightedGraph> {
    if graph.eta.iter().any(|e| *e != 0.0) {
        return Err(CoreError::InvalidParameter(
            "theta scaling requires eta = 0".into(),
        ));
    }
    let weights: Vec<f64> = graph
        .edges
        .iter()
        .map(|&(a, b, w)| w * graph.theta[a] * graph.theta[b])
        .collect();
    let scaled = graph.with_edge_weights(&weights)?;
    scaled.with_vertex_weights(vec![1.0; graph.vertex_count()], vec![0.0; graph.vertex_count()])
}

// --- serialization -------------------------------------------------------

/// On-disk graph description; round-trips bit-exactly through TOML.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphDoc {
    /// Constant-weight lattice box, optionally wired.
    Box {
        dimension: usize,
        side: usize,
        #[serde(rename = "W")]
        w: f64,
        theta: f64,
        wired: bool,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        center: Vec<i64>,
    },
    /// Explicit edge list. `delta` marks a wired boundary vertex.
    Edges {
        vertex_count: usize,
        theta: Vec<f64>,
        eta: Vec<f64>,
        edges: Vec<(usize, usize, f64)>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        delta: Option<usize>,
    },
}

impl WeightedGraph {
    /// Describe the graph for serialization. Boxes built by `build_box`
    /// / `wire_box` keep their compact form when still homogeneous.
    pub fn to_doc(&self) -> GraphDoc {
        if let Some(spec) = &self.box_spec {
            let w = self.edges[0].2;
            let theta = self.theta[0];
            let lattice_n = spec.vertex_count();
            let homogeneous = self
                .edges
                .iter()
                .filter(|(a, b, _)| *a < lattice_n && *b < lattice_n)
                .all(|(_, _, ew)| *ew == w)
                && self.theta.iter().all(|t| *t == theta)
                && self.eta.iter().all(|e| *e == 0.0);
            if homogeneous {
                return GraphDoc::Box {
                    dimension: spec.dimension,
                    side: spec.side(),
                    w,
                    theta,
                    wired: self.delta.is_some(),
                    center: if spec.center.iter().all(|c| *c == 0) {
                        Vec::new()
                    } else {
                        spec.center.clone()
                    },
                };
            }
        }
        GraphDoc::Edges {
            vertex_count: self.vertex_count(),
            theta: self.theta.clone(),
            eta: self.eta.clone(),
            edges: self.edges.clone(),
            delta: self.delta,
        }
    }

    pub fn from_doc(doc: &GraphDoc) -> Result<Self> {
        match doc {
            GraphDoc::Box {
                dimension,
                side,
                w,
                theta,
                wired,
                center,
            } => {
                if side % 2 == 0 || *side < 3 {
                    return Err(CoreError::Parse(format!("side must be odd >= 3, got {side}")));
                }
                let mut spec = BoxSpec::new(*dimension, (side - 1) / 2);
                if !center.is_empty() {
                    spec.center = center.clone();
                }
                let g = build_box(&spec, *w, *theta)?;
                if *wired {
                    wire_box(&g, *theta)
                } else {
                    Ok(g)
                }
            }
            GraphDoc::Edges {
                vertex_count,
                theta,
                eta,
                edges,
                delta,
            } => {
                let mut g =
                    WeightedGraph::from_edges(*vertex_count, edges, theta.clone(), eta.clone())?;
                if let Some(d) = delta {
                    if *d >= g.vertex_count() {
                        return Err(CoreError::Parse("delta out of range".into()));
                    }
                    g.delta = Some(*d);
                }
                Ok(g)
            }
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_doc()).expect("graph serialization cannot fail")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let doc: GraphDoc = toml::from_str(text).map_err(|e| CoreError::Parse(e.to_string()))?;
        WeightedGraph::from_doc(&doc)
    }
}

/// Convenience builders for the small graphs used throughout the tests
/// and the CLI defaults.
pub mod small {
    use super::*;

    /// Single vertex, no edges.
    pub fn single(theta: f64, eta: f64) -> WeightedGraph {
        WeightedGraph::from_edges(1, &[], vec![theta], vec![eta]).unwrap()
    }

    /// Two vertices joined by one edge.
    pub fn pair(w: f64, theta: [f64; 2]) -> WeightedGraph {
        WeightedGraph::from_edges(2, &[(0, 1, w)], theta.to_vec(), vec![0.0; 2]).unwrap()
    }

    /// Path graph on `n` vertices with constant weights.
    pub fn path(n: usize, w: f64, theta: f64) -> WeightedGraph {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, w)).collect();
        WeightedGraph::from_edges(n, &edges, vec![theta; n], vec![0.0; n]).unwrap()
    }

    /// Cycle graph on `n` vertices.
    pub fn cycle(n: usize, w: f64, theta: f64) -> WeightedGraph {
        let mut edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, w)).collect();
        edges.push((0, n - 1, w));
        WeightedGraph::from_edges(n, &edges, vec![theta; n], vec![0.0; n]).unwrap()
    }

    /// Star with `arms` leaves around center 0.
    pub fn star(arms: usize, w: f64, theta: f64) -> WeightedGraph {
        let edges: Vec<_> = (1..=arms).map(|i| (0, i, w)).collect();
        WeightedGraph::from_edges(arms + 1, &edges, vec![theta; arms + 1], vec![0.0; arms + 1])
            .unwrap()
    }
}
