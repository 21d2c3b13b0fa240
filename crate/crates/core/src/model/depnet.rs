use std::collections::{BTreeMap, HashMap};

use rand::Rng;

use super::{EdgeId, EdgeStatus, ModelError};
use crate::numeric::Rational;

/// A binary variable of the dependency network. For variables tied to an
/// edge, the value `true` means the edge is blocked.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetVariable {
    pub name: String,
    pub edge: Option<EdgeId>,
    pub parents: Vec<usize>,
    /// One row per parent assignment; parent `j` contributes bit `j` of the
    /// row index. Each row is `[P(false), P(true)]`.
    pub cpt: Vec<[Rational; 2]>,
}

/// Bayes network over edge-status variables plus auxiliary variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DependencyNet {
    pub max_in_degree: usize,
    pub variables: Vec<NetVariable>,
    topo: Vec<usize>,
    edge_var: HashMap<EdgeId, usize>,
}

impl DependencyNet {
    pub fn new(max_in_degree: usize) -> Self {
        DependencyNet {
            max_in_degree,
            variables: Vec::new(),
            topo: Vec::new(),
            edge_var: HashMap::new(),
        }
    }

    pub fn add_variable(
        &mut self,
        name: impl Into<String>,
        edge: Option<EdgeId>,
        parents: Vec<usize>,
        cpt: Vec<[Rational; 2]>,
    ) -> usize {
        self.variables.push(NetVariable {
            name: name.into(),
            edge,
            parents,
            cpt,
        });
        self.variables.len() - 1
    }

    /// Root variable that is `true` with probability `p_true`.
    pub fn add_coin(
        &mut self,
        name: impl Into<String>,
        edge: Option<EdgeId>,
        p_true: Rational,
    ) -> usize {
        let row = [p_true.complement(), p_true];
        self.add_variable(name, edge, Vec::new(), vec![row])
    }

    /// Deterministic copy (or negation) of a single parent.
    pub fn add_copy(
        &mut self,
        name: impl Into<String>,
        edge: Option<EdgeId>,
        parent: usize,
        negate: bool,
    ) -> usize {
        let (f, t) = (Rational::zero(), Rational::one());
        let cpt = if negate {
            vec![[f.clone(), t.clone()], [t, f]]
        } else {
            vec![[t.clone(), f.clone()], [f, t]]
        };
        self.add_variable(name, edge, vec![parent], cpt)
    }

    /// Deterministic XOR of two parents, optionally negating the second.
    pub fn add_xor(
        &mut self,
        name: impl Into<String>,
        edge: Option<EdgeId>,
        a: usize,
        b: usize,
        negate_b: bool,
    ) -> usize {
        let (f, t) = (Rational::zero(), Rational::one());
        let cpt = (0..4usize)
            .map(|row| {
                let va = row & 1 == 1;
                let vb = (row >> 1 & 1 == 1) ^ negate_b;
                if va ^ vb {
                    [f.clone(), t.clone()]
                } else {
                    [t.clone(), f.clone()]
                }
            })
            .collect();
        self.add_variable(name, edge, vec![a, b], cpt)
    }

    pub fn variable_for_edge(&self, e: EdgeId) -> Option<usize> {
        self.edge_var.get(&e).copied()
    }

    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    /// A variable is stochastic when some CPT row leaves both values possible.
    pub fn is_stochastic(&self, var: usize) -> bool {
        self.variables[var]
            .cpt
            .iter()
            .any(|row| !row[0].is_zero() && !row[1].is_zero())
    }

    pub fn stochastic_count(&self) -> usize {
        (0..self.variables.len())
            .filter(|&v| self.is_stochastic(v))
            .count()
    }

    /// Checks structure and CPTs, then caches the topological order and the
    /// edge-to-variable map. `edge_name` renders edges in errors.
    pub(crate) fn validate(
        &mut self,
        edge_count: usize,
        edge_name: impl Fn(EdgeId) -> String,
    ) -> Result<(), ModelError> {
        let n = self.variables.len();
        let mut edge_var = HashMap::new();
        for (i, var) in self.variables.iter().enumerate() {
            for &p in &var.parents {
                if p >= n || p == i {
                    return Err(ModelError::UnknownParent {
                        variable: var.name.clone(),
                        parent: p,
                    });
                }
            }
            if var.parents.len() > self.max_in_degree {
                return Err(ModelError::InDegreeExceeded {
                    variable: var.name.clone(),
                    degree: var.parents.len(),
                    bound: self.max_in_degree,
                });
            }
            let expected = 1usize << var.parents.len();
            if var.cpt.len() != expected {
                return Err(ModelError::CptShape {
                    variable: var.name.clone(),
                    found: var.cpt.len(),
                    expected,
                });
            }
            for (r, row) in var.cpt.iter().enumerate() {
                if !row[0].in_unit_interval() || !row[1].in_unit_interval() {
                    return Err(ModelError::CptOutOfRange {
                        variable: var.name.clone(),
                        row: r,
                    });
                }
                let sum = &row[0] + &row[1];
                if !sum.is_one() {
                    return Err(ModelError::CptNotNormalized {
                        variable: var.name.clone(),
                        row: r,
                        sum,
                    });
                }
            }
            if let Some(e) = var.edge {
                if e.0 >= edge_count {
                    return Err(ModelError::UnknownEdge(format!("{}", e)));
                }
                if edge_var.insert(e, i).is_some() {
                    return Err(ModelError::EdgeCoveredTwice { edge: edge_name(e) });
                }
            }
        }
        // Kahn's algorithm; ties broken by index for a stable order.
        let mut indegree: Vec<usize> = self.variables.iter().map(|v| v.parents.len()).collect();
        let mut children = vec![Vec::new(); n];
        for (i, var) in self.variables.iter().enumerate() {
            for &p in &var.parents {
                children[p].push(i);
            }
        }
        let mut ready: std::collections::BTreeSet<usize> =
            (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut topo = Vec::with_capacity(n);
        while let Some(&i) = ready.iter().next() {
            ready.remove(&i);
            topo.push(i);
            for &c in &children[i] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        if topo.len() != n {
            return Err(ModelError::CyclicDependency);
        }
        self.topo = topo;
        self.edge_var = edge_var;
        Ok(())
    }

    /// Rewrites edge references after edges were removed or reordered.
    pub(crate) fn remap_edges(
        &mut self,
        map: &dyn Fn(EdgeId) -> Option<EdgeId>,
    ) -> Result<(), EdgeId> {
        for var in &mut self.variables {
            if let Some(e) = var.edge {
                var.edge = Some(map(e).ok_or(e)?);
            }
        }
        Ok(())
    }

    fn row_index(&self, var: usize, values: &[Option<bool>]) -> usize {
        self.variables[var]
            .parents
            .iter()
            .enumerate()
            .map(|(j, &p)| (values[p].expect("parent assigned before child") as usize) << j)
            .sum()
    }

    /// Ancestral closure of `seeds`, listed in topological order.
    fn closure(&self, seeds: impl IntoIterator<Item = usize>) -> Vec<usize> {
        let mut inside = vec![false; self.variables.len()];
        let mut stack: Vec<usize> = seeds.into_iter().collect();
        while let Some(v) = stack.pop() {
            if !inside[v] {
                inside[v] = true;
                stack.extend(self.variables[v].parents.iter().copied());
            }
        }
        self.topo.iter().copied().filter(|&v| inside[v]).collect()
    }

    /// Joint distribution of the `query` edge variables given `evidence`,
    /// marginalizing everything else exactly. Returns unnormalized weights
    /// indexed by the query bits (bit `i` set = `query[i]` blocked) and the
    /// probability of the evidence.
    pub(crate) fn joint(
        &self,
        evidence: &[(EdgeId, EdgeStatus)],
        query: &[EdgeId],
    ) -> (Vec<Rational>, Rational) {
        let mut fixed: Vec<Option<bool>> = vec![None; self.variables.len()];
        let mut seeds = Vec::new();
        for &(e, s) in evidence {
            if let Some(v) = self.variable_for_edge(e) {
                fixed[v] = Some(s.is_blocked());
                seeds.push(v);
            }
        }
        let query_vars: Vec<usize> = query
            .iter()
            .map(|&e| {
                self.variable_for_edge(e)
                    .expect("query edge must be covered by the net")
            })
            .collect();
        seeds.extend(query_vars.iter().copied());
        let order = self.closure(seeds);
        let mut buckets = vec![Rational::zero(); 1 << query.len()];
        let mut values = vec![None; self.variables.len()];
        self.accumulate(
            &order,
            0,
            &fixed,
            &mut values,
            Rational::one(),
            &mut |vals, p| {
                let idx: usize = query_vars
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| (vals[v].unwrap() as usize) << i)
                    .sum();
                buckets[idx] += p;
            },
        );
        let total = buckets.iter().sum();
        (buckets, total)
    }

    fn accumulate(
        &self,
        order: &[usize],
        depth: usize,
        fixed: &[Option<bool>],
        values: &mut Vec<Option<bool>>,
        prob: Rational,
        sink: &mut dyn FnMut(&[Option<bool>], Rational),
    ) {
        if depth == order.len() {
            sink(values, prob);
            return;
        }
        let var = order[depth];
        let row = &self.variables[var].cpt[self.row_index(var, values)];
        for value in [false, true] {
            if fixed[var].is_some_and(|f| f != value) {
                continue;
            }
            let p = &row[value as usize];
            if p.is_zero() {
                continue;
            }
            values[var] = Some(value);
            self.accumulate(order, depth + 1, fixed, values, &prob * p, sink);
        }
        values[var] = None;
    }

    /// Every positive-probability assignment of all variables, marginalized
    /// onto the covered edges.
    pub(crate) fn edge_marginals(&self) -> BTreeMap<Vec<(EdgeId, bool)>, Rational> {
        let order = self.topo.clone();
        let fixed = vec![None; self.variables.len()];
        let mut values = vec![None; self.variables.len()];
        let mut edge_vars: Vec<(EdgeId, usize)> =
            self.edge_var.iter().map(|(&e, &v)| (e, v)).collect();
        edge_vars.sort();
        let mut out: BTreeMap<Vec<(EdgeId, bool)>, Rational> = BTreeMap::new();
        self.accumulate(
            &order,
            0,
            &fixed,
            &mut values,
            Rational::one(),
            &mut |vals, p| {
                let key = edge_vars
                    .iter()
                    .map(|&(e, v)| (e, vals[v].unwrap()))
                    .collect();
                *out.entry(key).or_insert_with(Rational::zero) += p;
            },
        );
        out
    }

    /// Ancestral sampling of every variable; returns blocked flags per edge.
    pub(crate) fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<(EdgeId, bool)> {
        let mut values: Vec<Option<bool>> = vec![None; self.variables.len()];
        for &var in &self.topo {
            let row = &self.variables[var].cpt[self.row_index(var, &values)];
            values[var] = Some(crate::model::weather::bernoulli(rng, &row[1]));
        }
        let mut out: Vec<(EdgeId, bool)> = self
            .edge_var
            .iter()
            .map(|(&e, &v)| (e, values[v].unwrap()))
            .collect();
        out.sort();
        out
    }
}
