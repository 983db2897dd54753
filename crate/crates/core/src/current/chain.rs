use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;

/// Smallest k-volume accepted for a simplex.
pub const MIN_SIMPLEX_VOLUME: f64 = 1e-14;

/// An oriented k-simplex given by indices into the vertex pool, with a signed integer
/// multiplicity (a negative multiplicity reverses the orientation).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Simplex {
    pub vertices: Vec<usize>,
    pub multiplicity: i64,
}

/// An integer-multiplicity simplicial k-chain in `R^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangulatedCurrent {
    dim: usize,
    degree: usize,
    vertices: Vec<Vec<f64>>,
    lookup: HashMap<Vec<u64>, usize>,
    simplices: Vec<Simplex>,
}

fn key(p: &[f64]) -> Vec<u64> {
    // +0.0 and -0.0 are the same vertex
    p.iter().map(|v| if *v == 0.0 { 0 } else { v.to_bits() }).collect()
}

/// Sign of the permutation sorting `v`, and the sorted copy; `None` on repeated entries.
fn sort_with_sign(v: &[usize]) -> Option<(Vec<usize>, i64)> {
    let mut sorted = v.to_vec();
    let mut sign = 1;
    for i in 1..sorted.len() {
        let mut j = i;
        while j > 0 && sorted[j - 1] > sorted[j] {
            sorted.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((sorted, sign))
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

impl TriangulatedCurrent {
    /// The zero k-chain in `R^dim`.
    pub fn new(dim: usize, degree: usize) -> Result<Self> {
        if degree > dim {
            return Err(Error::DegreeOverflow { left: degree, right: 0, dim });
        }
        Ok(Self { dim, degree, vertices: Vec::new(), lookup: HashMap::new(), simplices: Vec::new() })
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    /// Index of `p` in the vertex pool, inserting it if new (exact coordinate match).
    pub fn vertex_index(&mut self, p: &[f64]) -> Result<usize> {
        if p.len() != self.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: p.len() });
        }
        let k = key(p);
        if let Some(&i) = self.lookup.get(&k) {
            return Ok(i);
        }
        self.vertices.push(p.to_vec());
        self.lookup.insert(k, self.vertices.len() - 1);
        Ok(self.vertices.len() - 1)
    }

    /// Appends the simplex with corners `points` (in orientation order).
    pub fn add_simplex(&mut self, points: &[Vec<f64>], multiplicity: i64) -> Result<()> {
        if points.len() != self.degree + 1 {
            return Err(Error::InvalidArgument(format!(
                "a {}-simplex needs {} vertices, got {}",
                self.degree,
                self.degree + 1,
                points.len()
            )));
        }
        let ids = points.iter().map(|p| self.vertex_index(p)).collect::<Result<Vec<_>>>()?;
        self.add_indexed(ids, multiplicity)
    }

    /// Appends a simplex over existing vertex indices.
    pub fn add_indexed(&mut self, vertices: Vec<usize>, multiplicity: i64) -> Result<()> {
        if vertices.len() != self.degree + 1 || vertices.iter().any(|v| *v >= self.vertices.len()) {
            return Err(Error::InvalidArgument(format!("bad vertex list {vertices:?}")));
        }
        let volume = self.volume_of(&vertices);
        if self.degree > 0 && volume <= MIN_SIMPLEX_VOLUME {
            return Err(Error::DegenerateSimplex(volume));
        }
        self.simplices.push(Simplex { vertices, multiplicity });
        Ok(())
    }

    /// Edge vectors `v_i - v_0` as the columns of an `N x k` matrix.
    pub fn edges(&self, simplex: &Simplex) -> DMatrix<f64> {
        self.edges_of(&simplex.vertices)
    }

    fn edges_of(&self, ids: &[usize]) -> DMatrix<f64> {
        let v0 = &self.vertices[ids[0]];
        DMatrix::from_fn(self.dim, ids.len() - 1, |i, j| self.vertices[ids[j + 1]][i] - v0[i])
    }

    fn volume_of(&self, ids: &[usize]) -> f64 {
        if ids.len() == 1 {
            return 1.0;
        }
        let e = self.edges_of(ids);
        (e.transpose() * &e).determinant().max(0.0).sqrt() / factorial(ids.len() - 1)
    }

    /// k-volume from the Gram determinant of the edges.
    pub fn volume(&self, simplex: &Simplex) -> f64 {
        self.volume_of(&simplex.vertices)
    }

    /// `sum |m| vol`.
    pub fn mass(&self) -> f64 {
        let terms: Vec<f64> = self.simplices.iter().map(|s| s.multiplicity.unsigned_abs() as f64 * self.volume(s)).collect();
        pairwise_sum(&terms)
    }

    /// Merges simplices with the same vertex set (accounting for orientation) and drops
    /// zero multiplicities. Vertex lists come out sorted.
    pub fn canonical(&self) -> Self {
        let mut merged: BTreeMap<Vec<usize>, i64> = BTreeMap::new();
        for s in &self.simplices {
            if let Some((sorted, sign)) = sort_with_sign(&s.vertices) {
                *merged.entry(sorted).or_insert(0) += sign * s.multiplicity;
            }
        }
        let simplices = merged
            .into_iter()
            .filter(|(_, m)| *m != 0)
            .map(|(vertices, multiplicity)| Simplex { vertices, multiplicity })
            .collect();
        Self { simplices, ..self.clone() }
    }

    /// The chain as a map from oriented simplices, keyed by vertex coordinates, to
    /// multiplicities. Equal signatures mean equal chains independent of vertex numbering.
    pub fn geometric_signature(&self) -> BTreeMap<Vec<Vec<u64>>, i64> {
        let mut out: BTreeMap<Vec<Vec<u64>>, i64> = BTreeMap::new();
        for s in &self.simplices {
            let keys: Vec<Vec<u64>> = s.vertices.iter().map(|v| key(&self.vertices[*v])).collect();
            let mut order: Vec<usize> = (0..keys.len()).collect();
            order.sort_by(|a, b| keys[*a].cmp(&keys[*b]));
            // a permutation and its inverse have the same sign
            let (_, sign) = sort_with_sign(&order).expect("distinct");
            let sorted: Vec<Vec<u64>> = order.iter().map(|i| keys[*i].clone()).collect();
            *out.entry(sorted).or_insert(0) += sign * s.multiplicity;
        }
        out.retain(|_, m| *m != 0);
        out
    }

    /// True if the chain cancels to zero exactly.
    pub fn is_zero_chain(&self) -> bool {
        self.canonical().simplices.is_empty()
    }

    /// `sum_i (-1)^i [v_0 .. (omit v_i) .. v_k]`, with exact integer cancellation.
    pub fn boundary(&self) -> Result<Self> {
        if self.degree == 0 {
            return Err(Error::InvalidArgument("boundary of a 0-chain".into()));
        }
        let mut faces: BTreeMap<Vec<usize>, i64> = BTreeMap::new();
        for s in &self.simplices {
            for i in 0..s.vertices.len() {
                let face: Vec<usize> = s.vertices.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| *v).collect();
                let (sorted, sign) = sort_with_sign(&face).expect("simplex vertices are distinct");
                let alt = if i % 2 == 0 { 1 } else { -1 };
                *faces.entry(sorted).or_insert(0) += alt * sign * s.multiplicity;
            }
        }
        let simplices = faces
            .into_iter()
            .filter(|(_, m)| *m != 0)
            .map(|(vertices, multiplicity)| Simplex { vertices, multiplicity })
            .collect();
        Ok(Self { dim: self.dim, degree: self.degree - 1, vertices: self.vertices.clone(), lookup: self.lookup.clone(), simplices })
    }

    /// The same chain with every multiplicity multiplied by `factor`.
    pub fn scaled(&self, factor: i64) -> Self {
        let mut out = self.clone();
        for s in &mut out.simplices {
            s.multiplicity *= factor;
        }
        out
    }

    /// The chain with opposite orientation.
    pub fn reversed(&self) -> Self {
        self.scaled(-1)
    }

    /// Formal sum of two chains of the same shape.
    pub fn sum(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: other.dim });
        }
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch { expected: self.degree, found: other.degree });
        }
        let mut out = self.clone();
        for s in &other.simplices {
            let ids = s.vertices.iter().map(|v| out.vertex_index(&other.vertices[*v])).collect::<Result<Vec<_>>>()?;
            out.simplices.push(Simplex { vertices: ids, multiplicity: s.multiplicity });
        }
        Ok(out)
    }

    /// Pushes the chain forward by a vertex map `f: R^N -> R^M`, simplex by simplex.
    pub fn map_vertices<F: Fn(&[f64]) -> Vec<f64>>(&self, target_dim: usize, f: F) -> Result<Self> {
        let mut out = Self::new(target_dim, self.degree)?;
        let images: Vec<Vec<f64>> = self.vertices.iter().map(|v| f(v)).collect();
        for img in &images {
            out.vertex_index(img)?;
        }
        for s in &self.simplices {
            let ids = s.vertices.iter().map(|v| out.vertex_index(&images[*v])).collect::<Result<Vec<_>>>()?;
            out.add_indexed(ids, s.multiplicity)?;
        }
        Ok(out)
    }

    /// Linear embedding `p -> frame p (+ offset)` into `R^{frame.nrows()}`.
    pub fn embed(&self, frame: &DMatrix<f64>, offset: Option<&[f64]>) -> Result<Self> {
        if frame.ncols() != self.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: frame.ncols() });
        }
        let target = frame.nrows();
        self.map_vertices(target, |p| {
            (0..target)
                .map(|i| (0..p.len()).map(|j| frame[(i, j)] * p[j]).sum::<f64>() + offset.map_or(0.0, |o| o[i]))
                .collect()
        })
    }
}
