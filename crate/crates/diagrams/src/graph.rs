//! Stranded (d+1)-colored tensor graphs: construction, validation, faces,
//! boundary, degree, and divergence degree.
//!
//! Nodes carry an external flag; edges carry a color in `0..=d`. Color 0 is
//! the propagator/link color, colors `1..=d` are the strand colors of the
//! quartic vertex. A color-c interaction vertex is four nodes where the two
//! c-colored edges join the slot pairs `(f,g)` and `(h,k)` and the remaining
//! d-1 colors join `(f,k)` and `(g,h)`, matching the trilinear kernel's index
//! routing. Faces are traced deterministically (lowest-index start, lower
//! color first) so every analysis is reproducible.

use std::collections::HashMap;

use crate::error::{DiagramError, Result};

/// One colored edge between two distinct nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphEdge {
    /// First endpoint (node id).
    pub a: usize,
    /// Second endpoint (node id).
    pub b: usize,
    /// Edge color in `0..=d`.
    pub color: usize,
}

impl GraphEdge {
    /// The endpoint opposite to `node`.
    pub fn other(&self, node: usize) -> usize {
        if node == self.a {
            self.b
        } else {
            self.a
        }
    }

    fn touches(&self, node: usize) -> bool {
        self.a == node || self.b == node
    }
}

/// The four nodes of a quartic interaction vertex, named by kernel slot.
#[derive(Debug, Clone, Copy)]
pub struct VertexNodes {
    /// Slot 1 (first kernel argument).
    pub f: usize,
    /// Slot 2 (second kernel argument).
    pub g: usize,
    /// Slot 3 (third kernel argument).
    pub h: usize,
    /// Output slot (the leg pairing the kernel against a fourth field).
    pub k: usize,
}

/// A two-colored face: a maximal alternating walk in the `(c1,c2)` subgraph.
#[derive(Debug, Clone)]
pub struct Face {
    /// The two colors, smaller first.
    pub colors: (usize, usize),
    /// Visited nodes in trace order (cycle start not repeated).
    pub nodes: Vec<usize>,
    /// Visited edge ids in trace order.
    pub edges: Vec<usize>,
    /// True for cycles, false for open walks ending at external nodes.
    pub closed: bool,
}

impl Face {
    /// Number of edges on the face.
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    /// True when the face has no edges.
    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// Whether a graph equals one of the two primary divergent patterns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exceptional {
    /// Not a primary divergent graph.
    None,
    /// The one-vertex melonic tadpole with two external legs.
    MelonicTadpole,
    /// The two-vertex melonic snowball with two external legs.
    MelonicSnowball,
}

/// Weights dressing the divergence degree; the neutral defaults zero out
/// every dressing term.
#[derive(Debug, Clone, Copy)]
pub struct OmegaWeights {
    /// Inner-regularity weight on the marked alpha link.
    pub alpha: f64,
    /// Outer-regularity weight on the marked beta link (the root).
    pub beta: f64,
    /// Time-line weight on marked integrated links.
    pub eta: f64,
}

impl Default for OmegaWeights {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: -1.0,
            eta: 1.0,
        }
    }
}

/// A stranded tensor graph over colors `0..=d`.
#[derive(Debug, Clone)]
pub struct TensorGraph {
    d: usize,
    external: Vec<bool>,
    edges: Vec<GraphEdge>,
    l_alpha: Option<usize>,
    l_beta: Option<usize>,
    time_links: Vec<usize>,
}

impl TensorGraph {
    /// An empty graph over colors `0..=d`.
    pub fn new(d: usize) -> Self {
        Self {
            d,
            external: Vec::new(),
            edges: Vec::new(),
            l_alpha: None,
            l_beta: None,
            time_links: Vec::new(),
        }
    }

    /// Strand color count d.
    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of nodes.
    pub fn node_count(&self) -> usize {
        self.external.len()
    }

    /// True when node `i` is external.
    pub fn is_external(&self, i: usize) -> bool {
        self.external[i]
    }

    /// The edge list in insertion order.
    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    /// Marked alpha link, if any.
    pub fn l_alpha(&self) -> Option<usize> {
        self.l_alpha
    }

    /// Marked beta (root) link, if any.
    pub fn l_beta(&self) -> Option<usize> {
        self.l_beta
    }

    /// Edge ids of marked time-integrated links.
    pub fn time_links(&self) -> &[usize] {
        &self.time_links
    }

    /// Adds a node and returns its id.
    pub fn add_node(&mut self, external: bool) -> usize {
        self.external.push(external);
        self.external.len() - 1
    }

    /// Adds an edge and returns its id.
    pub fn add_edge(&mut self, a: usize, b: usize, color: usize) -> Result<usize> {
        if a >= self.node_count() || b >= self.node_count() {
            return Err(DiagramError::InvalidArgument(format!(
                "edge ({a},{b}) references a missing node"
            )));
        }
        if a == b {
            return Err(DiagramError::InvalidArgument(format!(
                "self-loop on node {a}: nodes carry one half-edge per color"
            )));
        }
        if color > self.d {
            return Err(DiagramError::InvalidArgument(format!(
                "edge color {color} exceeds d = {}",
                self.d
            )));
        }
        self.edges.push(GraphEdge { a, b, color });
        Ok(self.edges.len() - 1)
    }

    /// Adds the four nodes and six colored edges of a color-c quartic vertex.
    pub fn add_vertex(&mut self, color: usize) -> Result<VertexNodes> {
        if color == 0 || color > self.d {
            return Err(DiagramError::InvalidArgument(format!(
                "vertex color {color} is outside 1..={}",
                self.d
            )));
        }
        let f = self.add_node(false);
        let g = self.add_node(false);
        let h = self.add_node(false);
        let k = self.add_node(false);
        self.add_edge(f, g, color)?;
        self.add_edge(h, k, color)?;
        for b in 1..=self.d {
            if b != color {
                self.add_edge(f, k, b)?;
                self.add_edge(g, h, b)?;
            }
        }
        Ok(VertexNodes { f, g, h, k })
    }

    /// Attaches a fresh external node to `node` through a color-0 leg.
    pub fn add_external_leg(&mut self, node: usize) -> Result<usize> {
        let ext = self.add_node(true);
        self.add_edge(node, ext, 0)
    }

    fn mark(&mut self, edge: usize, what: &str) -> Result<usize> {
        match self.edges.get(edge) {
            Some(e) if e.color == 0 => Ok(edge),
            Some(e) => Err(DiagramError::InvalidArgument(format!(
                "{what} marker needs a color-0 link, edge {edge} has color {}",
                e.color
            ))),
            None => Err(DiagramError::InvalidArgument(format!(
                "{what} marker references a missing edge {edge}"
            ))),
        }
    }

    /// Marks the alpha-weighted link.
    pub fn mark_alpha(&mut self, edge: usize) -> Result<()> {
        self.l_alpha = Some(self.mark(edge, "alpha")?);
        Ok(())
    }

    /// Marks the beta-weighted root link.
    pub fn mark_beta(&mut self, edge: usize) -> Result<()> {
        self.l_beta = Some(self.mark(edge, "beta")?);
        Ok(())
    }

    /// Marks a time-integrated link.
    pub fn mark_time(&mut self, edge: usize) -> Result<()> {
        let e = self.mark(edge, "time")?;
        if !self.time_links.contains(&e) {
            self.time_links.push(e);
        }
        Ok(())
    }

    /// Edge ids incident to each node, bucketed by color.
    fn incidence(&self) -> Vec<Vec<Vec<usize>>> {
        let mut inc = vec![vec![Vec::new(); self.d + 1]; self.node_count()];
        for (id, e) in self.edges.iter().enumerate() {
            inc[e.a][e.color].push(id);
            inc[e.b][e.color].push(id);
        }
        inc
    }

    /// Checks per-node half-edge counts; the face and parallel-edge checks in
    /// [`TensorGraph::validate`] rely on these holding first.
    fn validate_degrees(&self, inc: &[Vec<Vec<usize>>]) -> Result<()> {
        for (node, buckets) in inc.iter().enumerate() {
            let total: usize = buckets.iter().map(Vec::len).sum();
            if self.external[node] {
                if total != 1 || buckets[0].len() != 1 {
                    return Err(DiagramError::InvalidGraph(format!(
                        "external node {node} must have exactly one incident edge, of color 0 \
                         (found {total} edges, {} of color 0)",
                        buckets[0].len()
                    )));
                }
            } else {
                for (color, ids) in buckets.iter().enumerate() {
                    if ids.len() != 1 {
                        return Err(DiagramError::InvalidGraph(format!(
                            "internal node {node} has {} incident edges of color {color}; \
                             exactly one is required",
                            ids.len()
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Validates the four tensor-graph invariants, naming any violation.
    pub fn validate(&self) -> Result<()> {
        let inc = self.incidence();
        self.validate_degrees(&inc)?;
        for c1 in 1..self.d {
            for c2 in (c1 + 1)..=self.d {
                for face in self.trace_faces(&inc, c1, c2) {
                    if face.len() != 2 && face.len() != 4 {
                        return Err(DiagramError::InvalidGraph(format!(
                            "({c1},{c2})-face through node {} has length {}; \
                             colored faces must have length 2 or 4",
                            face.nodes[0],
                            face.len()
                        )));
                    }
                }
            }
        }
        let mut parallel: HashMap<(usize, usize), usize> = HashMap::new();
        for e in &self.edges {
            if e.color > 0 {
                let key = (e.a.min(e.b), e.a.max(e.b));
                *parallel.entry(key).or_insert(0) += 1;
            }
        }
        for ((a, b), count) in parallel {
            if count >= self.d {
                return Err(DiagramError::InvalidGraph(format!(
                    "nodes {a} and {b} are joined by {count} parallel colored edges; \
                     at most {} are allowed",
                    self.d - 1
                )));
            }
        }
        Ok(())
    }

    /// Traces all `(c1,c2)` faces; assumes per-node color degrees are valid.
    fn trace_faces(&self, inc: &[Vec<Vec<usize>>], c1: usize, c2: usize) -> Vec<Face> {
        let lo = c1.min(c2);
        let hi = c1.max(c2);
        let mut seen_edge = vec![false; self.edges.len()];
        let mut faces = Vec::new();
        let degree = |node: usize| inc[node][lo].len() + inc[node][hi].len();
        let only_edge = |node: usize| -> Option<(usize, usize)> {
            match (inc[node][lo].first(), inc[node][hi].first()) {
                (Some(&e), _) => Some((e, lo)),
                (None, Some(&e)) => Some((e, hi)),
                (None, None) => None,
            }
        };
        // Open walks start from degree-1 nodes, lowest id first.
        for start in 0..self.node_count() {
            if degree(start) != 1 {
                continue;
            }
            let (first, first_color) = only_edge(start).expect("degree-1 node has an edge");
            if seen_edge[first] {
                continue;
            }
            faces.push(self.walk(inc, &mut seen_edge, start, first, first_color, lo, hi, false));
        }
        // Remaining components are cycles; start at the lowest unvisited node
        // along its lower-color edge.
        for start in 0..self.node_count() {
            let candidate = inc[start][lo]
                .first()
                .map(|&e| (e, lo))
                .or_else(|| inc[start][hi].first().map(|&e| (e, hi)));
            if let Some((first, first_color)) = candidate {
                if !seen_edge[first] {
                    faces.push(
                        self.walk(inc, &mut seen_edge, start, first, first_color, lo, hi, true),
                    );
                }
            }
        }
        faces
    }

    /// Walks one alternating face from `start` along `first`.
    #[allow(clippy::too_many_arguments)]
    fn walk(
        &self,
        inc: &[Vec<Vec<usize>>],
        seen_edge: &mut [bool],
        start: usize,
        first: usize,
        first_color: usize,
        lo: usize,
        hi: usize,
        closed: bool,
    ) -> Face {
        let mut nodes = vec![start];
        let mut edges = Vec::new();
        let mut node = start;
        let mut edge = first;
        let mut color = first_color;
        loop {
            seen_edge[edge] = true;
            edges.push(edge);
            node = self.edges[edge].other(node);
            if closed && node == start {
                break;
            }
            nodes.push(node);
            let next_color = if color == lo { hi } else { lo };
            match inc[node][next_color].first() {
                Some(&e) => {
                    edge = e;
                    color = next_color;
                }
                None => break,
            }
        }
        Face {
            colors: (lo, hi),
            nodes,
            edges,
            closed,
        }
    }

    /// All faces over every color pair, strand colors and links alike.
    pub fn faces(&self) -> Result<Vec<Face>> {
        let inc = self.incidence();
        self.validate_degrees(&inc)?;
        let mut out = Vec::new();
        for c1 in 0..self.d {
            for c2 in (c1 + 1)..=self.d {
                out.extend(self.trace_faces(&inc, c1, c2));
            }
        }
        Ok(out)
    }

    /// The `(0,b)` faces: the strands of the graph.
    pub fn strands(&self) -> Result<Vec<Face>> {
        let inc = self.incidence();
        self.validate_degrees(&inc)?;
        let mut out = Vec::new();
        for b in 1..=self.d {
            out.extend(self.trace_faces(&inc, 0, b));
        }
        Ok(out)
    }

    /// Component id per node over edges with colors `1..=d`.
    pub(crate) fn vertex_components(&self) -> Vec<usize> {
        let mut parent: Vec<usize> = (0..self.node_count()).collect();
        fn find(parent: &mut Vec<usize>, x: usize) -> usize {
            if parent[x] != x {
                let root = find(parent, parent[x]);
                parent[x] = root;
            }
            parent[x]
        }
        for e in &self.edges {
            if e.color > 0 {
                let ra = find(&mut parent, e.a);
                let rb = find(&mut parent, e.b);
                if ra != rb {
                    parent[ra] = rb;
                }
            }
        }
        (0..self.node_count())
            .map(|i| find(&mut parent, i))
            .collect()
    }

    /// Number of connected components over all edges (isolated nodes count).
    pub fn connected_components(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.node_count()).collect();
        fn find(parent: &mut Vec<usize>, x: usize) -> usize {
            if parent[x] != x {
                let root = find(parent, parent[x]);
                parent[x] = root;
            }
            parent[x]
        }
        for e in &self.edges {
            let ra = find(&mut parent, e.a);
            let rb = find(&mut parent, e.b);
            if ra != rb {
                parent[ra] = rb;
            }
        }
        let mut roots: Vec<usize> = (0..self.node_count())
            .map(|i| find(&mut parent, i))
            .collect();
        roots.sort_unstable();
        roots.dedup();
        roots.len()
    }

    /// The d-colored boundary graph on the external nodes: internal links are
    /// removed and the open strands through them are reconnected. A closed
    /// graph yields the empty graph.
    pub fn boundary_graph(&self) -> Result<TensorGraph> {
        let strands = self.strands()?;
        let ext_ids: Vec<usize> = (0..self.node_count())
            .filter(|&i| self.external[i])
            .collect();
        let mut boundary = TensorGraph::new(self.d);
        for _ in &ext_ids {
            boundary.add_node(false);
        }
        let slot = |orig: usize| ext_ids.binary_search(&orig).expect("external node id");
        for strand in &strands {
            if strand.closed {
                continue;
            }
            let first = *strand.nodes.first().expect("open strand has nodes");
            let last = *strand.nodes.last().expect("open strand has nodes");
            boundary.add_edge(slot(first), slot(last), strand.colors.1)?;
        }
        Ok(boundary)
    }

    /// Full structural analysis: faces, strand counts, boundary, degree, and
    /// the divergence-degree bookkeeping.
    pub fn analyze(&self) -> Result<GraphAnalysis> {
        self.validate()?;
        let faces = self.faces()?;
        let strands: Vec<&Face> = faces.iter().filter(|f| f.colors.0 == 0).collect();
        let internal_strands = strands.iter().filter(|f| f.closed).count();
        let strand_count = strands.len();
        let internal_links = self
            .edges
            .iter()
            .filter(|e| e.color == 0 && !self.external[e.a] && !self.external[e.b])
            .count();
        let external_links = self
            .edges
            .iter()
            .filter(|e| e.color == 0 && (self.external[e.a] || self.external[e.b]))
            .count();
        if external_links % 2 != 0 {
            return Err(DiagramError::InvalidArgument(format!(
                "external leg count {external_links} is odd; amplitudes pair legs evenly"
            )));
        }
        let comp = self.vertex_components();
        let mut vertex_roots: Vec<usize> = (0..self.node_count())
            .filter(|&i| !self.external[i])
            .map(|i| comp[i])
            .collect();
        vertex_roots.sort_unstable();
        vertex_roots.dedup();
        let vertices = vertex_roots.len();
        let boundary_components = self.boundary_graph()?.connected_components();
        let d = self.d as i64;
        let delta = d - boundary_components as i64 + (d - 1) * vertices as i64
            - internal_strands as i64
            - (d - 1) * external_links as i64 / 2;
        let internal_link = |edge: usize| -> bool {
            let e = &self.edges[edge];
            e.color == 0 && !self.external[e.a] && !self.external[e.b]
        };
        let exceptional = self.classify_exceptional(&comp);
        Ok(GraphAnalysis {
            d: self.d,
            vertices,
            internal_links,
            external_links,
            strands: strand_count,
            internal_strands,
            boundary_components,
            delta,
            melonic: delta == 0,
            exceptional,
            alpha_internal: self.l_alpha.map(internal_link).unwrap_or(false),
            beta_internal: self.l_beta.map(internal_link).unwrap_or(false),
            time_internal: self
                .time_links
                .iter()
                .filter(|&&e| internal_link(e))
                .count(),
            faces,
        })
    }

    /// Colors (>= 1) of the parallel edges joining `a` and `b`.
    fn parallel_colors(&self, a: usize, b: usize) -> Vec<usize> {
        let mut colors: Vec<usize> = self
            .edges
            .iter()
            .filter(|e| e.color > 0 && e.touches(a) && e.touches(b))
            .map(|e| e.color)
            .collect();
        colors.sort_unstable();
        colors.dedup();
        colors
    }

    /// True when `a` and `b` are joined by exactly d-1 distinct colored
    /// edges; returns the one missing color.
    pub(crate) fn melonic_pair(&self, a: usize, b: usize) -> Option<usize> {
        let colors = self.parallel_colors(a, b);
        if colors.len() != self.d - 1 {
            return None;
        }
        (1..=self.d).find(|c| !colors.contains(c))
    }

    /// Detects whether the whole graph is one of the two primary divergent
    /// patterns: the melonic tadpole or the melonic snowball.
    fn classify_exceptional(&self, comp: &[usize]) -> Exceptional {
        let internal: Vec<&GraphEdge> = self
            .edges
            .iter()
            .filter(|e| e.color == 0 && !self.external[e.a] && !self.external[e.b])
            .collect();
        let external_count = self
            .edges
            .iter()
            .filter(|e| e.color == 0 && (self.external[e.a] || self.external[e.b]))
            .count();
        let mut vertex_roots: Vec<usize> = (0..self.node_count())
            .filter(|&i| !self.external[i])
            .map(|i| comp[i])
            .collect();
        vertex_roots.sort_unstable();
        vertex_roots.dedup();
        if external_count != 2 {
            return Exceptional::None;
        }
        if vertex_roots.len() == 1 && internal.len() == 1 {
            let e = internal[0];
            if self.melonic_pair(e.a, e.b).is_some() {
                return Exceptional::MelonicTadpole;
            }
            return Exceptional::None;
        }
        if vertex_roots.len() == 2 && internal.len() == 3 {
            let self_links: Vec<&&GraphEdge> = internal
                .iter()
                .filter(|e| comp[e.a] == comp[e.b])
                .collect();
            let connectors: Vec<&&GraphEdge> = internal
                .iter()
                .filter(|e| comp[e.a] != comp[e.b])
                .collect();
            if self_links.len() != 1 || connectors.len() != 2 {
                return Exceptional::None;
            }
            let inner = self_links[0];
            let c_inner = match self.melonic_pair(inner.a, inner.b) {
                Some(c) => c,
                None => return Exceptional::None,
            };
            let inner_vertex = comp[inner.a];
            // Both connectors must run from the inner vertex to a melonic
            // pair of the outer vertex, which also carries the two legs.
            let mut outer_ends = Vec::new();
            for e in &connectors {
                let (from_inner, to_outer) = if comp[e.a] == inner_vertex {
                    (e.a, e.b)
                } else if comp[e.b] == inner_vertex {
                    (e.b, e.a)
                } else {
                    return Exceptional::None;
                };
                if from_inner == inner.a || from_inner == inner.b {
                    return Exceptional::None;
                }
                outer_ends.push(to_outer);
            }
            if outer_ends[0] == outer_ends[1] || comp[outer_ends[0]] != comp[outer_ends[1]] {
                return Exceptional::None;
            }
            let c_outer = match self.melonic_pair(outer_ends[0], outer_ends[1]) {
                Some(c) => c,
                None => return Exceptional::None,
            };
            if c_outer != c_inner {
                return Exceptional::MelonicSnowball;
            }
        }
        Exceptional::None
    }

    /// Serializes the graph as structured text.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("d {}\n", self.d));
        out.push_str(&format!("nodes {}\n", self.node_count()));
        for (i, ext) in self.external.iter().enumerate() {
            if *ext {
                out.push_str(&format!("external {i}\n"));
            }
        }
        for e in &self.edges {
            out.push_str(&format!("edge {} {} {}\n", e.a, e.b, e.color));
        }
        if let Some(e) = self.l_alpha {
            out.push_str(&format!("alpha {e}\n"));
        }
        if let Some(e) = self.l_beta {
            out.push_str(&format!("beta {e}\n"));
        }
        for e in &self.time_links {
            out.push_str(&format!("time {e}\n"));
        }
        out
    }

    /// Parses the structured-text form produced by [`TensorGraph::to_text`].
    pub fn from_text(text: &str) -> Result<Self> {
        let mut d = None;
        let mut graph: Option<TensorGraph> = None;
        let mut externals = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let key = parts.next().expect("nonempty line has a key");
            let mut next_num = |what: &str| -> Result<usize> {
                parts
                    .next()
                    .ok_or_else(|| {
                        DiagramError::Format(format!("line {}: missing {what}", lineno + 1))
                    })?
                    .parse()
                    .map_err(|_| {
                        DiagramError::Format(format!("line {}: bad {what}", lineno + 1))
                    })
            };
            match key {
                "d" => d = Some(next_num("dimension")?),
                "nodes" => {
                    let count = next_num("node count")?;
                    let dim = d.ok_or_else(|| {
                        DiagramError::Format("d must come before nodes".into())
                    })?;
                    let mut g = TensorGraph::new(dim);
                    for _ in 0..count {
                        g.add_node(false);
                    }
                    graph = Some(g);
                }
                "external" => externals.push(next_num("node id")?),
                "edge" => {
                    let a = next_num("endpoint")?;
                    let b = next_num("endpoint")?;
                    let color = next_num("color")?;
                    graph
                        .as_mut()
                        .ok_or_else(|| DiagramError::Format("edge before nodes".into()))?
                        .add_edge(a, b, color)?;
                }
                "alpha" => {
                    let e = next_num("edge id")?;
                    graph
                        .as_mut()
                        .ok_or_else(|| DiagramError::Format("alpha before nodes".into()))?
                        .mark_alpha(e)?;
                }
                "beta" => {
                    let e = next_num("edge id")?;
                    graph
                        .as_mut()
                        .ok_or_else(|| DiagramError::Format("beta before nodes".into()))?
                        .mark_beta(e)?;
                }
                "time" => {
                    let e = next_num("edge id")?;
                    graph
                        .as_mut()
                        .ok_or_else(|| DiagramError::Format("time before nodes".into()))?
                        .mark_time(e)?;
                }
                other => {
                    return Err(DiagramError::Format(format!(
                        "line {}: unknown key {other}",
                        lineno + 1
                    )));
                }
            }
        }
        let mut g = graph.ok_or_else(|| DiagramError::Format("no nodes line".into()))?;
        for i in externals {
            if i >= g.node_count() {
                return Err(DiagramError::Format(format!(
                    "external references missing node {i}"
                )));
            }
            g.external[i] = true;
        }
        Ok(g)
    }
}

/// Structural analysis of a validated tensor graph.
#[derive(Debug, Clone)]
pub struct GraphAnalysis {
    /// Strand color count.
    pub d: usize,
    /// Number of interaction vertices (colored components of internal nodes).
    pub vertices: usize,
    /// Count of color-0 links between internal nodes.
    pub internal_links: usize,
    /// Count of color-0 legs reaching external nodes.
    pub external_links: usize,
    /// Total strand count |S|.
    pub strands: usize,
    /// Closed strand count |S^int|.
    pub internal_strands: usize,
    /// Connected components of the boundary graph.
    pub boundary_components: usize,
    /// The degree: an integer that vanishes exactly on melonic graphs.
    pub delta: i64,
    /// True when the degree vanishes.
    pub melonic: bool,
    /// Whether the whole graph is a primary divergent pattern.
    pub exceptional: Exceptional,
    /// All two-colored faces, strands included.
    pub faces: Vec<Face>,
    alpha_internal: bool,
    beta_internal: bool,
    time_internal: usize,
}

impl GraphAnalysis {
    /// The undressed, unimproved divergence degree.
    pub fn omega_perturbative(&self) -> f64 {
        let d = self.d as f64;
        d - (5.0 - d) * self.vertices as f64
            - (d - 3.0) / 2.0 * self.external_links as f64
            - self.delta as f64
            - self.boundary_components as f64
    }

    fn dressing(&self, w: &OmegaWeights) -> f64 {
        let mut total = 0.0;
        if self.alpha_internal {
            total += 2.0 * (1.0 - w.alpha);
        }
        if self.beta_internal {
            total += 2.0 * (1.0 + w.beta);
        }
        total += 2.0 * (1.0 - w.eta) * self.time_internal as f64;
        total
    }

    fn improvement(&self) -> f64 {
        match self.exceptional {
            Exceptional::None => 0.0,
            _ => 2.0,
        }
    }

    /// Divergence degree in the structural form: perturbative degree plus
    /// weight dressing, minus the primary-pattern improvement.
    pub fn omega_structural(&self, w: &OmegaWeights) -> f64 {
        self.omega_perturbative() + self.dressing(w) - self.improvement()
    }

    /// Divergence degree in the link form: minus twice the sum of link
    /// labels plus the closed strand count, minus the improvement.
    pub fn omega_links(&self, w: &OmegaWeights) -> f64 {
        let mut label_sum = self.internal_links as f64;
        if self.alpha_internal {
            label_sum -= 1.0 - w.alpha;
        }
        if self.beta_internal {
            label_sum -= 1.0 + w.beta;
        }
        label_sum -= (1.0 - w.eta) * self.time_internal as f64;
        -2.0 * label_sum + self.internal_strands as f64 - self.improvement()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// One-vertex melonic tadpole: slot pair (g,h) closed, legs on f and k.
    fn melonic_tadpole(d: usize, color: usize) -> TensorGraph {
        let mut g = TensorGraph::new(d);
        let v = g.add_vertex(color).unwrap();
        g.add_edge(v.g, v.h, 0).unwrap();
        g.add_external_leg(v.f).unwrap();
        g.add_external_leg(v.k).unwrap();
        g
    }

    #[test]
    fn tadpole_is_the_primary_log_graph() {
        for d in 2..=5 {
            let g = melonic_tadpole(d, 1);
            let a = g.analyze().unwrap();
            assert_eq!(a.vertices, 1);
            assert_eq!(a.internal_links, 1);
            assert_eq!(a.external_links, 2);
            assert_eq!(a.internal_strands, d - 1);
            assert_eq!(a.strands, 2 * d - 1);
            assert_eq!(a.boundary_components, 1);
            assert_eq!(a.delta, 0);
            assert!(a.melonic);
            assert_eq!(a.exceptional, Exceptional::MelonicTadpole);
            let expected = d as f64 - 3.0;
            assert_eq!(a.omega_perturbative(), expected);
            let w = OmegaWeights::default();
            assert_eq!(a.omega_structural(&w), expected - 2.0);
            assert_eq!(a.omega_links(&w), expected - 2.0);
        }
    }

    #[test]
    fn tadpole_boundary_is_the_full_dipole() {
        let g = melonic_tadpole(4, 2);
        let b = g.boundary_graph().unwrap();
        assert_eq!(b.node_count(), 2);
        assert_eq!(b.edges().len(), 4);
        assert_eq!(b.connected_components(), 1);
    }

    #[test]
    fn vacuum_melon_is_closed_and_melonic() {
        for d in 2..=5 {
            let mut g = TensorGraph::new(d);
            let v = g.add_vertex(1).unwrap();
            g.add_edge(v.g, v.h, 0).unwrap();
            g.add_edge(v.f, v.k, 0).unwrap();
            let a = g.analyze().unwrap();
            assert_eq!(a.external_links, 0);
            assert_eq!(a.boundary_components, 0);
            assert_eq!(a.internal_strands, 2 * d - 1);
            assert_eq!(a.delta, 0);
            assert_eq!(a.exceptional, Exceptional::None);
        }
    }

    #[test]
    fn snowball_detection_requires_distinct_colors() {
        for (outer, inner, expect) in [(1, 2, true), (1, 1, false)] {
            let mut g = TensorGraph::new(4);
            let a = g.add_vertex(outer).unwrap();
            let b = g.add_vertex(inner).unwrap();
            g.add_edge(b.g, b.h, 0).unwrap();
            g.add_edge(a.g, b.f, 0).unwrap();
            g.add_edge(a.h, b.k, 0).unwrap();
            g.add_external_leg(a.f).unwrap();
            g.add_external_leg(a.k).unwrap();
            let analysis = g.analyze().unwrap();
            let found = analysis.exceptional == Exceptional::MelonicSnowball;
            assert_eq!(found, expect, "outer {outer} inner {inner}");
        }
    }

    #[test]
    fn degree_checks_name_the_constraint() {
        let mut g = TensorGraph::new(3);
        let n0 = g.add_node(false);
        let n1 = g.add_node(false);
        g.add_edge(n0, n1, 1).unwrap();
        let err = g.validate().unwrap_err().to_string();
        assert!(err.contains("color"), "{err}");

        let mut g = TensorGraph::new(3);
        let v = g.add_vertex(1).unwrap();
        g.add_edge(v.g, v.h, 0).unwrap();
        let ext = g.add_node(true);
        g.add_edge(v.f, ext, 0).unwrap();
        g.add_edge(v.k, ext, 0).unwrap();
        let err = g.validate().unwrap_err().to_string();
        assert!(err.contains("external node"), "{err}");
    }

    #[test]
    fn long_faces_and_full_parallels_are_rejected() {
        // Hexagon alternating colors 1 and 2 at d=2: a length-6 face.
        let mut g = TensorGraph::new(2);
        for _ in 0..6 {
            g.add_node(false);
        }
        for i in 0..6 {
            g.add_edge(i, (i + 1) % 6, 1 + (i % 2)).unwrap();
        }
        for pair in [(0, 3), (1, 4), (2, 5)] {
            g.add_edge(pair.0, pair.1, 0).unwrap();
        }
        let err = g.validate().unwrap_err().to_string();
        assert!(err.contains("length"), "{err}");

        // Two nodes with every strand color in parallel at d=2.
        let mut g = TensorGraph::new(2);
        let a = g.add_node(false);
        let b = g.add_node(false);
        g.add_edge(a, b, 1).unwrap();
        g.add_edge(a, b, 2).unwrap();
        let a1 = g.add_node(true);
        g.add_edge(a, a1, 0).unwrap();
        let a2 = g.add_node(true);
        g.add_edge(b, a2, 0).unwrap();
        let err = g.validate().unwrap_err().to_string();
        assert!(err.contains("parallel"), "{err}");
    }

    #[test]
    fn single_vertex_with_four_legs_has_one_boundary_cycle() {
        let mut g = TensorGraph::new(3);
        let v = g.add_vertex(1).unwrap();
        for node in [v.f, v.g, v.h, v.k] {
            g.add_external_leg(node).unwrap();
        }
        let a = g.analyze().unwrap();
        assert_eq!(a.boundary_components, 1);
        let b = g.boundary_graph().unwrap();
        assert_eq!(b.node_count(), 4);
        assert_eq!(b.edges().len(), 2 * 3);
    }

    #[test]
    fn text_roundtrip_preserves_structure_and_markers() {
        let mut g = melonic_tadpole(3, 2);
        let internal = g
            .edges()
            .iter()
            .position(|e| e.color == 0 && !g.is_external(e.a) && !g.is_external(e.b))
            .unwrap();
        g.mark_beta(internal).unwrap();
        g.mark_time(internal).unwrap();
        let text = g.to_text();
        let back = TensorGraph::from_text(&text).unwrap();
        assert_eq!(back.d(), g.d());
        assert_eq!(back.node_count(), g.node_count());
        assert_eq!(back.edges(), g.edges());
        assert_eq!(back.l_beta(), g.l_beta());
        assert_eq!(back.time_links(), g.time_links());
        let a = g.analyze().unwrap();
        let b = back.analyze().unwrap();
        assert_eq!(a.delta, b.delta);
        assert_eq!(a.internal_strands, b.internal_strands);
    }
}
