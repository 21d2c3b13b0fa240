use super::{CtpInstance, EdgeId, EdgeStatus, ModelError, VertexId, Weather};

/// Agent position plus every edge status revealed so far. Edges with a
/// fixed prior are known from the start.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Belief {
    pub position: VertexId,
    pub known: Vec<Option<EdgeStatus>>,
}

impl Belief {
    /// The traveler at the source, before observing anything there.
    pub fn initial(inst: &CtpInstance) -> Belief {
        Belief {
            position: inst.source(),
            known: inst.edges().iter().map(|e| e.forced_status()).collect(),
        }
    }

    pub fn status(&self, e: EdgeId) -> Option<EdgeStatus> {
        self.known[e.0]
    }

    pub fn is_known_open(&self, e: EdgeId) -> bool {
        self.known[e.0] == Some(EdgeStatus::Traversable)
    }

    pub fn is_known_blocked(&self, e: EdgeId) -> bool {
        self.known[e.0] == Some(EdgeStatus::Blocked)
    }

    pub fn reveal(&mut self, e: EdgeId, status: EdgeStatus) {
        self.known[e.0] = Some(status);
    }

    /// Incident edges of `v` whose status is still unknown, in edge order.
    pub fn unknown_incident(&self, inst: &CtpInstance, v: VertexId) -> Vec<EdgeId> {
        inst.incident(v)
            .iter()
            .copied()
            .filter(|e| self.known[e.0].is_none())
            .collect()
    }

    /// Copies the statuses of every edge incident on `vertex` from `weather`.
    pub fn observe(
        &self,
        inst: &CtpInstance,
        weather: &Weather,
        vertex: VertexId,
    ) -> Result<Belief, ModelError> {
        if vertex != self.position {
            return Err(ModelError::VertexMismatch {
                expected: inst.vertex_name(self.position).to_string(),
                got: inst.vertex_name(vertex).to_string(),
            });
        }
        let mut next = self.clone();
        for &e in inst.incident(vertex) {
            next.known[e.0] = Some(weather.status(e));
        }
        Ok(next)
    }

    /// Compact rendering of the revealed uncertain edges, e.g. "T?B".
    pub fn knowledge_key(&self, inst: &CtpInstance) -> String {
        inst.uncertain_edges()
            .iter()
            .map(|&e| self.known[e.0].map_or('?', |s| s.short()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::InstanceBuilder;
    use crate::numeric::q;

    #[test]
    fn observe_reveals_incident_only_and_is_idempotent() {
        let mut b = InstanceBuilder::new();
        let u = b.add_vertex("u");
        let v1 = b.add_vertex("v1");
        let t = b.add_vertex("t");
        let uv = b.add_uncertain("uv1", u, v1, q(1, 4), q(1, 2));
        let vt = b.add_uncertain("v1t", v1, t, q(0, 1), q(1, 2));
        b.add_sure("ut", u, t, q(2, 1));
        b.set_source(u);
        b.set_target(t);
        let inst = b.build().unwrap();
        let weather = inst.weather_support(16).unwrap().remove(0);
        let start = Belief::initial(&inst);
        let at_u = start.observe(&inst, &weather, u).unwrap();
        assert!(at_u.status(uv).is_some());
        assert!(at_u.status(vt).is_none());
        assert_eq!(at_u.observe(&inst, &weather, u).unwrap(), at_u);

        let mut at_v1 = at_u.clone();
        at_v1.position = v1;
        let at_v1 = at_v1.observe(&inst, &weather, v1).unwrap();
        assert!(at_v1.status(vt).is_some());
        assert!(at_u.observe(&inst, &weather, v1).is_err());
    }
}
