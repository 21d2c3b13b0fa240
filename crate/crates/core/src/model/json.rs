//! JSON instance format. Costs and probabilities are exact "num/den"
//! strings, infinite costs are "inf".

use serde::{Deserialize, Serialize};

use super::{
    CtpInstance, DependencyNet, EdgeId, InstanceBuilder, ModelError, SensingCostMap, Variant,
    VertexId,
};
use crate::numeric::{Cost, Rational};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceJson {
    pub variant: String,
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeJson>,
    pub s: String,
    pub t: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dependency: Option<DependencyJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensing: Option<Vec<SensingJson>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeJson {
    pub id: String,
    pub tail: String,
    pub head: String,
    pub directed: bool,
    pub cost: Cost,
    pub block_p: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DependencyJson {
    pub max_in_degree: usize,
    pub variables: Vec<VariableJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableJson {
    pub id: String,
    #[serde(default)]
    pub edge: Option<String>,
    #[serde(default)]
    pub parents: Vec<String>,
    /// Rows of [P(false), P(true)], parent j contributing bit j of the row.
    pub cpt: Vec<[Rational; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensingJson {
    pub vertex: String,
    pub edge: String,
    pub cost: Cost,
}

impl From<&CtpInstance> for InstanceJson {
    fn from(inst: &CtpInstance) -> Self {
        let vname = |v: VertexId| inst.vertex_name(v).to_string();
        let ename = |e: EdgeId| inst.edge_name(e).to_string();
        let edges = inst
            .edges()
            .iter()
            .map(|e| EdgeJson {
                id: e.name.clone(),
                tail: vname(e.tail),
                head: vname(e.head),
                directed: e.directed,
                cost: e.cost.clone(),
                block_p: e.blocking_prior.clone(),
            })
            .collect();
        let dependency = inst.dependency().map(|net| DependencyJson {
            max_in_degree: net.max_in_degree,
            variables: net
                .variables
                .iter()
                .map(|v| VariableJson {
                    id: v.name.clone(),
                    edge: v.edge.map(ename),
                    parents: v
                        .parents
                        .iter()
                        .map(|&p| net.variables[p].name.clone())
                        .collect(),
                    cpt: v.cpt.clone(),
                })
                .collect(),
        });
        let sensing = inst.sensing().map(|map| {
            map.entries
                .iter()
                .map(|(&(v, e), c)| SensingJson {
                    vertex: vname(v),
                    edge: ename(e),
                    cost: c.clone(),
                })
                .collect()
        });
        InstanceJson {
            variant: inst.variant().name().to_string(),
            vertices: inst.vertices().to_vec(),
            edges,
            s: vname(inst.source()),
            t: vname(inst.target()),
            dependency,
            sensing,
        }
    }
}

impl InstanceJson {
    /// Resolves names into a builder without validating invariants.
    pub fn into_builder(self) -> Result<InstanceBuilder, ModelError> {
        let mut b = InstanceBuilder::new();
        for v in &self.vertices {
            if b.vertex(v).is_some() {
                return Err(ModelError::DuplicateVertex(v.clone()));
            }
            b.add_vertex(v.clone());
        }
        let vid = |b: &InstanceBuilder, name: &str| {
            b.vertex(name)
                .ok_or_else(|| ModelError::UnknownVertex(name.to_string()))
        };
        for e in &self.edges {
            let (tail, head) = (vid(&b, &e.tail)?, vid(&b, &e.head)?);
            b.add_edge(
                e.id.clone(),
                tail,
                head,
                e.directed,
                e.cost.clone(),
                e.block_p.clone(),
            );
        }
        let s = vid(&b, &self.s)?;
        let t = vid(&b, &self.t)?;
        b.set_source(s);
        b.set_target(t);
        let eid = |b: &InstanceBuilder, name: &str| {
            b.edge(name)
                .ok_or_else(|| ModelError::UnknownEdge(name.to_string()))
        };
        let variant = match self.variant.as_str() {
            "independent" => Variant::Independent,
            "dependent" => {
                let dep = self.dependency.ok_or_else(|| {
                    ModelError::Json("dependent variant needs a dependency net".into())
                })?;
                let mut net = DependencyNet::new(dep.max_in_degree);
                let names: Vec<&str> = dep.variables.iter().map(|v| v.id.as_str()).collect();
                for v in &dep.variables {
                    let edge = v.edge.as_deref().map(|e| eid(&b, e)).transpose()?;
                    let parents = v
                        .parents
                        .iter()
                        .map(|p| {
                            names.iter().position(|n| n == p).ok_or_else(|| {
                                ModelError::Json(format!("unknown parent variable {p:?}"))
                            })
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    net.add_variable(v.id.clone(), edge, parents, v.cpt.clone());
                }
                Variant::Dependent(net)
            }
            "sensing" => {
                let mut map = SensingCostMap::new();
                for entry in self.sensing.unwrap_or_default() {
                    map.insert(vid(&b, &entry.vertex)?, eid(&b, &entry.edge)?, entry.cost);
                }
                Variant::Sensing(map)
            }
            other => return Err(ModelError::Json(format!("unknown variant {other:?}"))),
        };
        b.set_variant(variant);
        Ok(b)
    }
}

pub fn to_json_string(inst: &CtpInstance) -> String {
    let mut out =
        serde_json::to_string_pretty(&InstanceJson::from(inst)).expect("instance serializes");
    out.push('\n');
    out
}

pub fn from_json_str(text: &str) -> Result<CtpInstance, ModelError> {
    let raw: InstanceJson =
        serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))?;
    raw.into_builder()?.build()
}
