//! Weighted hypergraph `G = (V, E, w)` with edges of cardinality `2..=m`.

use std::collections::{HashMap, HashSet};
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// A hyperedge: strictly increasing vertex indices and a nonzero finite weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    vertices: Box<[usize]>,
    weight: f64,
}

impl Edge {
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }
}

/// Per-vertex and per-pair edge lists.
#[derive(Debug, Clone, Default)]
pub struct IncidenceIndex {
    per_vertex: Vec<Vec<usize>>,
    per_pair: OnceLock<HashMap<(usize, usize), Vec<usize>>>,
}

impl IncidenceIndex {
    fn build(n: usize, edges: &[Edge]) -> Self {
        let mut per_vertex = vec![Vec::new(); n];
        for (id, e) in edges.iter().enumerate() {
            for &v in e.vertices() {
                per_vertex[v].push(id);
            }
        }
        Self {
            per_vertex,
            per_pair: OnceLock::new(),
        }
    }

    pub fn per_vertex(&self, i: usize) -> &[usize] {
        &self.per_vertex[i]
    }

    fn per_pair(&self, edges: &[Edge]) -> &HashMap<(usize, usize), Vec<usize>> {
        self.per_pair.get_or_init(|| {
            let mut map: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
            for (id, e) in edges.iter().enumerate() {
                let vs = e.vertices();
                for a in 0..vs.len() {
                    for b in a + 1..vs.len() {
                        map.entry((vs[a], vs[b])).or_default().push(id);
                    }
                }
            }
            map
        })
    }
}

/// Immutable weighted hypergraph.
///
/// Construction sorts each edge's vertices, drops zero-weight edges and rejects
/// repeated vertices, out-of-range indices, cardinalities outside `[2, m]`,
/// non-finite weights and duplicate vertex sets.
#[derive(Debug, Clone)]
pub struct WeightedHypergraph {
    n: usize,
    m: usize,
    edges: Vec<Edge>,
    incidence: IncidenceIndex,
}

impl WeightedHypergraph {
    pub fn new<I, V>(n: usize, m: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (V, f64)>,
        V: Into<Vec<usize>>,
    {
        if n == 0 {
            return Err(Error::InvalidHypergraph("vertex count must be positive".into()));
        }
        if m < 2 {
            return Err(Error::InvalidHypergraph(format!("m = {m} must be at least 2")));
        }
        let mut seen: HashSet<Box<[usize]>> = HashSet::new();
        let mut out = Vec::new();
        for (vertices, weight) in edges {
            let mut vs: Vec<usize> = vertices.into();
            vs.sort_unstable();
            if vs.len() < 2 || vs.len() > m {
                return Err(Error::InvalidHypergraph(format!(
                    "edge {vs:?} has cardinality {} outside [2, {m}]",
                    vs.len()
                )));
            }
            if vs.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidHypergraph(format!("edge {vs:?} repeats a vertex")));
            }
            if let Some(&v) = vs.last() {
                if v >= n {
                    return Err(Error::VertexOutOfRange { index: v, n });
                }
            }
            if !weight.is_finite() {
                return Err(Error::InvalidHypergraph(format!("edge {vs:?} has non-finite weight")));
            }
            let vs = vs.into_boxed_slice();
            if !seen.insert(vs.clone()) {
                return Err(Error::InvalidHypergraph(format!("duplicate edge {vs:?}")));
            }
            if weight == 0.0 {
                continue;
            }
            out.push(Edge {
                vertices: vs,
                weight,
            });
        }
        let incidence = IncidenceIndex::build(n, &out);
        Ok(Self {
            n,
            m,
            edges: out,
            incidence,
        })
    }

    /// Hypergraph on `n` vertices with no edges.
    pub fn empty(n: usize, m: usize) -> Result<Self> {
        Self::new(n, m, std::iter::empty::<(Vec<usize>, f64)>())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> &Edge {
        &self.edges[id]
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn incidence(&self) -> &IncidenceIndex {
        &self.incidence
    }

    /// Identifiers of edges containing vertex `i`. Panics if `i >= n`.
    pub fn incident_edges(&self, i: usize) -> &[usize] {
        self.incidence.per_vertex(i)
    }

    /// Identifiers of edges containing both `i` and `j` (order irrelevant).
    pub fn edges_containing_pair(&self, i: usize, j: usize) -> &[usize] {
        let key = if i < j { (i, j) } else { (j, i) };
        self.incidence
            .per_pair(&self.edges)
            .get(&key)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn check_vertex(&self, i: usize) -> Result<()> {
        if i < self.n {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange { index: i, n: self.n })
        }
    }

    /// `Σ_{e ∋ i} |w_e|`.
    pub fn vertex_degree(&self, i: usize) -> Result<f64> {
        self.check_vertex(i)?;
        Ok(self.degree_unchecked(i))
    }

    fn degree_unchecked(&self, i: usize) -> f64 {
        self.incident_edges(i)
            .iter()
            .map(|&id| self.edges[id].weight.abs())
            .sum()
    }

    pub fn degrees(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.degree_unchecked(i)).collect()
    }

    pub fn max_degree(&self) -> f64 {
        self.degrees().into_iter().fold(0.0, f64::max)
    }

    /// `Σ_{|e| = m} w_e²`.
    pub fn top_mass(&self) -> f64 {
        self.top_edges().map(|e| e.weight * e.weight).sum()
    }

    /// Edges of cardinality exactly `m`.
    pub fn top_edges(&self) -> impl Iterator<Item = &Edge> + '_ {
        self.edges.iter().filter(move |e| e.len() == self.m)
    }

    /// Largest cardinality actually present, 0 for an empty edge set.
    pub fn max_edge_cardinality(&self) -> usize {
        self.edges.iter().map(Edge::len).max().unwrap_or(0)
    }

    /// Multiply every weight by `s`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(
            self.n,
            self.m,
            self.edges
                .iter()
                .map(|e| (e.vertices.to_vec(), e.weight * s)),
        )
    }

    /// Rescale all weights by `min(1, cap / max_degree)` so every vertex
    /// degree is at most `cap`.
    pub fn normalize_degrees(&self, cap: f64) -> Result<Self> {
        if !(cap > 0.0) || !cap.is_finite() {
            return Err(Error::InvalidParameter(format!("degree cap {cap} must be positive")));
        }
        let max = self.max_degree();
        if max <= cap {
            return Ok(self.clone());
        }
        self.scaled(cap / max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: usize, m: usize, edges: &[(&[usize], f64)]) -> WeightedHypergraph {
        WeightedHypergraph::new(n, m, edges.iter().map(|(v, w)| (v.to_vec(), *w))).unwrap()
    }

    #[test]
    fn degree_examples() {
        let a = g(3, 3, &[(&[0, 1, 2], 0.5)]);
        assert_eq!(a.vertex_degree(0).unwrap(), 0.5);
        let b = g(3, 2, &[(&[0, 1], 0.6), (&[0, 2], -0.6)]);
        assert!((b.vertex_degree(0).unwrap() - 1.2).abs() < 1e-15);
        let c = WeightedHypergraph::empty(3, 2).unwrap();
        assert_eq!(c.vertex_degree(0).unwrap(), 0.0);
        assert!(matches!(c.vertex_degree(3), Err(Error::VertexOutOfRange { .. })));
    }

    #[test]
    fn top_mass_examples() {
        assert_eq!(g(4, 3, &[(&[0, 1, 2], 1.0), (&[0, 1], 5.0)]).top_mass(), 1.0);
        assert_eq!(g(3, 2, &[(&[0, 1], 0.5), (&[1, 2], 0.5)]).top_mass(), 0.5);
        assert_eq!(WeightedHypergraph::empty(5, 3).unwrap().top_mass(), 0.0);
    }

    #[test]
    fn normalize_examples() {
        let h = g(3, 2, &[(&[0, 1], 1.0), (&[0, 2], 1.0)]);
        let s = h.normalize_degrees(1.0).unwrap();
        assert_eq!(s.edges()[0].weight(), 0.5);
        assert_eq!(s.edges()[1].weight(), 0.5);
        assert!((s.max_degree() - 1.0).abs() < 1e-15);

        let h = g(3, 2, &[(&[0, 1], 0.4), (&[0, 2], 0.4)]);
        let s = h.normalize_degrees(1.0).unwrap();
        assert_eq!(s.edges(), h.edges());

        let e = WeightedHypergraph::empty(4, 3).unwrap();
        assert_eq!(e.normalize_degrees(0.3).unwrap().num_edges(), 0);
        assert!(e.normalize_degrees(0.0).is_err());
    }

    #[test]
    fn construction_rejects_bad_edges() {
        let bad: Vec<Vec<(Vec<usize>, f64)>> = vec![
            vec![(vec![0], 1.0)],
            vec![(vec![0, 1, 2, 3], 1.0)],
            vec![(vec![1, 1], 1.0)],
            vec![(vec![0, 5], 1.0)],
            vec![(vec![0, 1], f64::NAN)],
            vec![(vec![0, 1], 1.0), (vec![1, 0], 2.0)],
        ];
        for edges in bad {
            assert!(WeightedHypergraph::new(4, 3, edges.clone()).is_err(), "{edges:?}");
        }
        assert!(WeightedHypergraph::new(0, 2, Vec::<(Vec<usize>, f64)>::new()).is_err());
        assert!(WeightedHypergraph::new(3, 1, Vec::<(Vec<usize>, f64)>::new()).is_err());
    }

    #[test]
    fn sorts_and_drops_zero_weights() {
        let h = g(4, 3, &[(&[2, 0, 1], 0.3), (&[1, 3], 0.0)]);
        assert_eq!(h.num_edges(), 1);
        assert_eq!(h.edges()[0].vertices(), &[0, 1, 2]);
        assert_eq!(h.incident_edges(3), &[] as &[usize]);
    }

    #[test]
    fn pair_index() {
        let h = g(4, 3, &[(&[0, 1, 2], 0.3), (&[1, 2], 0.2), (&[0, 3], 0.1)]);
        assert_eq!(h.edges_containing_pair(2, 1), &[0, 1]);
        assert_eq!(h.edges_containing_pair(0, 3), &[2]);
        assert!(h.edges_containing_pair(2, 3).is_empty());
    }

    #[test]
    fn handshake_identity() {
        let h = g(
            5,
            3,
            &[(&[0, 1, 2], 0.3), (&[1, 2], -0.2), (&[0, 3, 4], 0.1), (&[2, 4], 0.7)],
        );
        let total: f64 = h.degrees().iter().sum();
        let expected: f64 = h.edges().iter().map(|e| e.len() as f64 * e.weight().abs()).sum();
        assert!((total - expected).abs() < 1e-12);
    }
}
