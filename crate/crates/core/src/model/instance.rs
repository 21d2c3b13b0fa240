use std::collections::{BTreeMap, HashMap, VecDeque};

use super::{DependencyNet, EdgeId, EdgeSpec, EdgeStatus, ModelError, VertexId};
use crate::numeric::{Cost, Rational};

/// Sensing costs keyed by (observer vertex, sensed edge). Absent entries
/// mean sensing is unavailable.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SensingCostMap {
    pub entries: BTreeMap<(VertexId, EdgeId), Cost>,
}

impl SensingCostMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, vertex: VertexId, edge: EdgeId, cost: Cost) {
        self.entries.insert((vertex, edge), cost);
    }

    pub fn cost(&self, vertex: VertexId, edge: EdgeId) -> Cost {
        self.entries
            .get(&(vertex, edge))
            .cloned()
            .unwrap_or(Cost::Infinite)
    }

    /// Finite-cost sensing options available at `vertex`.
    pub fn available_at(&self, vertex: VertexId) -> impl Iterator<Item = (EdgeId, &Rational)> + '_ {
        self.entries
            .range((vertex, EdgeId(0))..=(vertex, EdgeId(usize::MAX)))
            .filter_map(|(&(_, e), c)| c.as_finite().map(|c| (e, c)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Variant {
    Independent,
    Dependent(DependencyNet),
    Sensing(SensingCostMap),
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Independent => "independent",
            Variant::Dependent(_) => "dependent",
            Variant::Sensing(_) => "sensing",
        }
    }
}

/// Mutable construction surface; `build` validates into a [`CtpInstance`].
#[derive(Clone, Debug)]
pub struct InstanceBuilder {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeSpec>,
    pub source: Option<VertexId>,
    pub target: Option<VertexId>,
    pub variant: Variant,
}

impl Default for InstanceBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl InstanceBuilder {
    pub fn new() -> Self {
        InstanceBuilder {
            vertices: Vec::new(),
            edges: Vec::new(),
            source: None,
            target: None,
            variant: Variant::Independent,
        }
    }

    pub fn add_vertex(&mut self, name: impl Into<String>) -> VertexId {
        self.vertices.push(name.into());
        VertexId(self.vertices.len() - 1)
    }

    pub fn vertex(&self, name: &str) -> Option<VertexId> {
        self.vertices.iter().position(|v| v == name).map(VertexId)
    }

    pub fn edge(&self, name: &str) -> Option<EdgeId> {
        self.edges.iter().position(|e| e.name == name).map(EdgeId)
    }

    pub fn add_edge(
        &mut self,
        name: impl Into<String>,
        tail: VertexId,
        head: VertexId,
        directed: bool,
        cost: Cost,
        blocking_prior: Rational,
    ) -> EdgeId {
        self.edges.push(EdgeSpec {
            name: name.into(),
            tail,
            head,
            directed,
            cost,
            blocking_prior,
        });
        EdgeId(self.edges.len() - 1)
    }

    /// Undirected always-traversable edge.
    pub fn add_sure(
        &mut self,
        name: impl Into<String>,
        a: VertexId,
        b: VertexId,
        cost: Rational,
    ) -> EdgeId {
        self.add_edge(name, a, b, false, Cost::Finite(cost), Rational::zero())
    }

    /// Undirected edge blocked with probability `p`.
    pub fn add_uncertain(
        &mut self,
        name: impl Into<String>,
        a: VertexId,
        b: VertexId,
        cost: Rational,
        p: Rational,
    ) -> EdgeId {
        self.add_edge(name, a, b, false, Cost::Finite(cost), p)
    }

    pub fn set_source(&mut self, v: VertexId) {
        self.source = Some(v);
    }

    pub fn set_target(&mut self, v: VertexId) {
        self.target = Some(v);
    }

    pub fn set_variant(&mut self, variant: Variant) {
        self.variant = variant;
    }

    pub fn dependency_mut(&mut self) -> Option<&mut DependencyNet> {
        match &mut self.variant {
            Variant::Dependent(net) => Some(net),
            _ => None,
        }
    }

    pub fn sensing_mut(&mut self) -> Option<&mut SensingCostMap> {
        match &mut self.variant {
            Variant::Sensing(map) => Some(map),
            _ => None,
        }
    }

    fn vname(&self, v: VertexId) -> String {
        self.vertices
            .get(v.0)
            .cloned()
            .unwrap_or_else(|| v.to_string())
    }

    /// Identifies `b` with `a`: b's edges are rehomed to a and b is removed.
    /// A zero-cost sure edge joining them disappears; any other edge between
    /// them would become a self-loop and is rejected. Vertex ids above `b`
    /// shift down by one, and edge ids above a dropped edge shift likewise.
    pub fn merge_vertices(&mut self, a: VertexId, b: VertexId) -> Result<(), ModelError> {
        if a.0 >= self.vertices.len() {
            return Err(ModelError::UnknownVertex(a.to_string()));
        }
        if b.0 >= self.vertices.len() {
            return Err(ModelError::UnknownVertex(b.to_string()));
        }
        if a == b {
            return Err(ModelError::MergeSame(self.vname(a)));
        }
        let terminals = [self.source, self.target];
        if terminals.contains(&Some(a)) && terminals.contains(&Some(b)) {
            return Err(ModelError::MergeTerminals);
        }
        let mut dropped = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            if (e.tail == a && e.head == b) || (e.tail == b && e.head == a) {
                let referenced = match &self.variant {
                    Variant::Dependent(net) => {
                        net.variables.iter().any(|v| v.edge == Some(EdgeId(i)))
                    }
                    Variant::Sensing(map) => map.entries.keys().any(|&(_, x)| x == EdgeId(i)),
                    Variant::Independent => false,
                };
                if e.blocking_prior.is_zero() && e.cost == Cost::zero() && !referenced {
                    dropped.push(i);
                } else {
                    return Err(ModelError::MergeSelfLoop {
                        edge: e.name.clone(),
                    });
                }
            }
        }
        let shift_v = |v: VertexId| -> VertexId {
            let v = if v == b { a } else { v };
            if v.0 > b.0 {
                VertexId(v.0 - 1)
            } else {
                v
            }
        };
        let edge_map: Vec<Option<EdgeId>> = {
            let mut next = 0;
            (0..self.edges.len())
                .map(|i| {
                    if dropped.contains(&i) {
                        None
                    } else {
                        next += 1;
                        Some(EdgeId(next - 1))
                    }
                })
                .collect()
        };
        let old_edges = std::mem::take(&mut self.edges);
        self.edges = old_edges
            .into_iter()
            .enumerate()
            .filter(|(i, _)| !dropped.contains(i))
            .map(|(_, mut e)| {
                e.tail = shift_v(e.tail);
                e.head = shift_v(e.head);
                e
            })
            .collect();
        self.vertices.remove(b.0);
        self.source = self.source.map(shift_v);
        self.target = self.target.map(shift_v);
        match &mut self.variant {
            Variant::Dependent(net) => {
                net.remap_edges(&|e: EdgeId| edge_map[e.0])
                    .expect("referenced edges are never dropped");
            }
            Variant::Sensing(map) => {
                let old = std::mem::take(&mut map.entries);
                for ((v, e), c) in old {
                    let key = (
                        shift_v(v),
                        edge_map[e.0].expect("referenced edges are never dropped"),
                    );
                    // Two observers collapsing onto one vertex keep the cheaper sense.
                    let slot = map.entries.entry(key).or_insert_with(|| c.clone());
                    if c < *slot {
                        *slot = c;
                    }
                }
            }
            Variant::Independent => {}
        }
        Ok(())
    }

    pub fn build(self) -> Result<CtpInstance, ModelError> {
        CtpInstance::validate(self)
    }
}

/// A validated, immutable CTP instance.
#[derive(Clone, Debug)]
pub struct CtpInstance {
    vertices: Vec<String>,
    edges: Vec<EdgeSpec>,
    source: VertexId,
    target: VertexId,
    variant: Variant,
    incidence: Vec<Vec<EdgeId>>,
    vertex_index: HashMap<String, VertexId>,
    edge_index: HashMap<String, EdgeId>,
    uncertain: Vec<EdgeId>,
}

impl PartialEq for CtpInstance {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices
            && self.edges == other.edges
            && self.source == other.source
            && self.target == other.target
            && self.variant == other.variant
    }
}

impl CtpInstance {
    /// Checks every invariant and returns the first violation.
    pub fn validate(raw: InstanceBuilder) -> Result<CtpInstance, ModelError> {
        let InstanceBuilder {
            vertices,
            edges,
            source,
            target,
            mut variant,
        } = raw;
        let mut vertex_index = HashMap::new();
        for (i, name) in vertices.iter().enumerate() {
            if vertex_index.insert(name.clone(), VertexId(i)).is_some() {
                return Err(ModelError::DuplicateVertex(name.clone()));
            }
        }
        let (source, target) = match (source, target) {
            (Some(s), Some(t)) if s != t && s.0 < vertices.len() && t.0 < vertices.len() => (s, t),
            _ => return Err(ModelError::BadTerminals),
        };
        let mut edge_index = HashMap::new();
        let mut incidence = vec![Vec::new(); vertices.len()];
        let mut uncertain = Vec::new();
        for (i, e) in edges.iter().enumerate() {
            if e.tail.0 >= vertices.len() || e.head.0 >= vertices.len() {
                return Err(ModelError::DanglingEndpoint {
                    edge: e.name.clone(),
                });
            }
            if e.tail == e.head {
                return Err(ModelError::SelfLoop {
                    edge: e.name.clone(),
                });
            }
            if !e.blocking_prior.in_unit_interval() {
                return Err(ModelError::ProbabilityOutOfRange {
                    edge: e.name.clone(),
                    value: e.blocking_prior.clone(),
                });
            }
            if let Cost::Finite(c) = &e.cost {
                if c.is_negative() {
                    return Err(ModelError::NegativeCost {
                        edge: e.name.clone(),
                        value: c.clone(),
                    });
                }
            }
            if edge_index.insert(e.name.clone(), EdgeId(i)).is_some() {
                return Err(ModelError::DuplicateEdge(e.name.clone()));
            }
            incidence[e.tail.0].push(EdgeId(i));
            incidence[e.head.0].push(EdgeId(i));
            if e.forced_status().is_none() {
                uncertain.push(EdgeId(i));
            }
        }
        match &mut variant {
            Variant::Independent => {}
            Variant::Dependent(net) => {
                net.validate(edges.len(), |e| edges[e.0].name.clone())?;
                for &e in &uncertain {
                    if net.variable_for_edge(e).is_none() {
                        return Err(ModelError::UncoveredEdge {
                            edge: edges[e.0].name.clone(),
                        });
                    }
                }
            }
            Variant::Sensing(map) => {
                for ((v, e), c) in &map.entries {
                    if v.0 >= vertices.len() {
                        return Err(ModelError::UnknownVertex(v.to_string()));
                    }
                    if e.0 >= edges.len() {
                        return Err(ModelError::UnknownEdge(e.to_string()));
                    }
                    if c.as_finite().is_some_and(|c| c.is_negative()) {
                        return Err(ModelError::BadSensingCost {
                            vertex: vertices[v.0].clone(),
                            edge: edges[e.0].name.clone(),
                        });
                    }
                }
            }
        }
        let inst = CtpInstance {
            vertices,
            edges,
            source,
            target,
            variant,
            incidence,
            vertex_index,
            edge_index,
            uncertain,
        };
        inst.check_connectivity()?;
        Ok(inst)
    }

    fn check_connectivity(&self) -> Result<(), ModelError> {
        // Weakly connected over all edges.
        let mut seen = vec![false; self.vertices.len()];
        let mut queue = VecDeque::from([self.source]);
        seen[self.source.0] = true;
        while let Some(v) = queue.pop_front() {
            for &e in &self.incidence[v.0] {
                let w = self.edges[e.0].other_end(v).unwrap();
                if !seen[w.0] {
                    seen[w.0] = true;
                    queue.push_back(w);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(ModelError::Disconnected);
        }
        // Optimistic reachability: every uncertain edge open, infinite and
        // certainly blocked edges excluded.
        let mut seen = vec![false; self.vertices.len()];
        let mut queue = VecDeque::from([self.source]);
        seen[self.source.0] = true;
        while let Some(v) = queue.pop_front() {
            for &e in &self.incidence[v.0] {
                let spec = &self.edges[e.0];
                if !spec.cost.is_finite() || spec.blocking_prior.is_one() {
                    continue;
                }
                if let Some(w) = spec.traverse_from(v) {
                    if !seen[w.0] {
                        seen[w.0] = true;
                        queue.push_back(w);
                    }
                }
            }
        }
        if !seen[self.target.0] {
            return Err(ModelError::TargetUnreachable);
        }
        Ok(())
    }

    pub fn to_builder(&self) -> InstanceBuilder {
        InstanceBuilder {
            vertices: self.vertices.clone(),
            edges: self.edges.clone(),
            source: Some(self.source),
            target: Some(self.target),
            variant: self.variant.clone(),
        }
    }

    /// Identifies `b` with `a` and revalidates.
    pub fn merge_vertices(&self, a: VertexId, b: VertexId) -> Result<CtpInstance, ModelError> {
        let mut builder = self.to_builder();
        builder.merge_vertices(a, b)?;
        builder.build()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[EdgeSpec] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> &EdgeSpec {
        &self.edges[e.0]
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.vertices[v.0]
    }

    pub fn edge_name(&self, e: EdgeId) -> &str {
        &self.edges[e.0].name
    }

    pub fn vertex_id(&self, name: &str) -> Option<VertexId> {
        self.vertex_index.get(name).copied()
    }

    pub fn edge_id(&self, name: &str) -> Option<EdgeId> {
        self.edge_index.get(name).copied()
    }

    pub fn source(&self) -> VertexId {
        self.source
    }

    pub fn target(&self) -> VertexId {
        self.target
    }

    pub fn variant(&self) -> &Variant {
        &self.variant
    }

    pub fn dependency(&self) -> Option<&DependencyNet> {
        match &self.variant {
            Variant::Dependent(net) => Some(net),
            _ => None,
        }
    }

    pub fn sensing(&self) -> Option<&SensingCostMap> {
        match &self.variant {
            Variant::Sensing(map) => Some(map),
            _ => None,
        }
    }

    pub fn incident(&self, v: VertexId) -> &[EdgeId] {
        &self.incidence[v.0]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.incidence[v.0].len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges whose status is not fixed a priori, in edge order.
    pub fn uncertain_edges(&self) -> &[EdgeId] {
        &self.uncertain
    }

    pub fn is_uncertain(&self, e: EdgeId) -> bool {
        self.edges[e.0].forced_status().is_none()
    }

    /// Joint distribution of the statuses of `reveal` given the statuses in
    /// `known`. Every edge in `reveal` must be uncertain and unknown. Returns
    /// (statuses aligned with `reveal`, conditional probability) for every
    /// outcome of positive probability, in a fixed order.
    pub fn reveal_distribution(
        &self,
        known: &[Option<EdgeStatus>],
        reveal: &[EdgeId],
    ) -> Vec<(Vec<EdgeStatus>, Rational)> {
        let decode = |bits: usize| -> Vec<EdgeStatus> {
            (0..reveal.len())
                .map(|i| EdgeStatus::from_blocked(bits >> i & 1 == 1))
                .collect()
        };
        match &self.variant {
            Variant::Dependent(net) => {
                let evidence: Vec<(EdgeId, EdgeStatus)> = self
                    .uncertain
                    .iter()
                    .filter_map(|&e| known[e.0].map(|s| (e, s)))
                    .collect();
                let (weights, total) = net.joint(&evidence, reveal);
                assert!(!total.is_zero(), "belief has zero probability");
                weights
                    .into_iter()
                    .enumerate()
                    .filter(|(_, w)| !w.is_zero())
                    .map(|(bits, w)| (decode(bits), w / &total))
                    .collect()
            }
            _ => {
                let mut out = vec![(Vec::with_capacity(reveal.len()), Rational::one())];
                for &e in reveal {
                    let p = &self.edges[e.0].blocking_prior;
                    let mut next = Vec::with_capacity(out.len() * 2);
                    for (statuses, prob) in out {
                        let mut open = statuses.clone();
                        open.push(EdgeStatus::Traversable);
                        next.push((open, &prob * &p.complement()));
                        let mut closed = statuses;
                        closed.push(EdgeStatus::Blocked);
                        next.push((closed, &prob * p));
                    }
                    out = next;
                }
                out.retain(|(_, p)| !p.is_zero());
                out
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::q;

    fn toy() -> InstanceBuilder {
        let mut b = InstanceBuilder::new();
        let s = b.add_vertex("s");
        let t = b.add_vertex("t");
        b.add_sure("st", s, t, q(5, 1));
        b.set_source(s);
        b.set_target(t);
        b
    }

    #[test]
    fn minimal_instance_is_valid() {
        let inst = toy().build().unwrap();
        assert_eq!(inst.edge_count(), 1);
        assert!(inst.uncertain_edges().is_empty());
    }

    #[test]
    fn probability_out_of_range() {
        let mut b = toy();
        b.edges[0].blocking_prior = q(3, 2);
        let err = b.build().unwrap_err();
        assert!(
            err.to_string().contains("probability out of range"),
            "{err}"
        );
    }

    #[test]
    fn dangling_endpoint_and_self_loop() {
        let mut b = toy();
        b.edges[0].head = VertexId(9);
        assert!(matches!(
            b.build(),
            Err(ModelError::DanglingEndpoint { .. })
        ));
        let mut b = toy();
        b.edges[0].head = VertexId(0);
        assert!(matches!(b.build(), Err(ModelError::SelfLoop { .. })));
    }

    #[test]
    fn unreachable_target_rejected() {
        let mut b = InstanceBuilder::new();
        let s = b.add_vertex("s");
        let t = b.add_vertex("t");
        b.add_edge("ts", t, s, true, Cost::finite(1), Rational::zero());
        b.set_source(s);
        b.set_target(t);
        assert_eq!(b.build().unwrap_err(), ModelError::TargetUnreachable);
    }

    #[test]
    fn merge_drops_zero_cost_sure_edge() {
        let mut b = toy();
        let x = b.add_vertex("x");
        let y = b.add_vertex("y");
        let s = b.vertex("s").unwrap();
        b.add_sure("sx", s, x, q(1, 1));
        b.add_sure("xy", x, y, Rational::zero());
        b.merge_vertices(x, y).unwrap();
        let inst = b.build().unwrap();
        assert_eq!(inst.vertex_count(), 3);
        assert_eq!(inst.edge_count(), 2);
        assert!(inst.edge_id("xy").is_none());
    }

    #[test]
    fn merge_rejects_terminals_and_loops() {
        let inst = toy().build().unwrap();
        assert_eq!(
            inst.merge_vertices(inst.source(), inst.target()),
            Err(ModelError::MergeTerminals)
        );
        let mut b = toy();
        let x = b.add_vertex("x");
        let s = b.vertex("s").unwrap();
        b.add_sure("sx", s, x, q(1, 1));
        assert!(matches!(
            b.merge_vertices(s, x),
            Err(ModelError::MergeSelfLoop { .. })
        ));
    }

    #[test]
    fn merge_sums_degrees() {
        let mut b = toy();
        let (s, t) = (b.vertex("s").unwrap(), b.vertex("t").unwrap());
        let x = b.add_vertex("x");
        let y = b.add_vertex("y");
        b.add_sure("sx", s, x, q(1, 1));
        b.add_sure("xt", x, t, q(1, 1));
        b.add_uncertain("sy", s, y, q(1, 1), q(1, 2));
        let before = b.clone().build().unwrap();
        let total = before.degree(x) + before.degree(y);
        let merged = before.merge_vertices(x, y).unwrap();
        assert_eq!(merged.degree(merged.vertex_id("x").unwrap()), total);
        assert!(merged.vertex_id("y").is_none());
    }

    #[test]
    fn independent_reveal_is_product_form() {
        let mut b = toy();
        let (s, t) = (b.vertex("s").unwrap(), b.vertex("t").unwrap());
        let e1 = b.add_uncertain("a", s, t, q(1, 1), q(1, 2));
        let e2 = b.add_uncertain("b", s, t, q(1, 1), q(3, 4));
        let inst = b.build().unwrap();
        let known = vec![None; inst.edge_count()];
        let dist = inst.reveal_distribution(&known, &[e1, e2]);
        let probs: Vec<Rational> = dist.iter().map(|(_, p)| p.clone()).collect();
        assert_eq!(probs, vec![q(1, 8), q(3, 8), q(1, 8), q(3, 8)]);
    }
}
