//! Dense d-mode tensors: inner products, Kronecker products, (partial)
//! symmetrization, contraction against vector powers, matrix slices, the
//! bridge to sparse polynomials, and alternating power-method estimates of
//! the spectral norm.
//!
//! Storage is row-major with the last index fastest. Everything here is
//! desk scale (n ≤ 10, d ≤ 6): permutation sums are exact and dense
//! materialization is cheap. The sparse high-degree path lives in
//! [`crate::poly`].

use rayon::prelude::*;
use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::poly::{multinomial_weight, HomoPoly, MultiIndex};
use crate::util::{
    dot, for_each_index, norm2, normalize, permutations, random_unit_vector, stream_rng, Accum,
};
use crate::{Error, Result};

/// Dense real tensor with explicit mode sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn new(dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::ShapeMismatch("a tensor needs at least one mode".into()));
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::ShapeMismatch("zero-sized mode".into()));
        }
        let len: usize = dims.iter().product();
        if data.len() != len {
            return Err(Error::ShapeMismatch(format!(
                "dims {:?} need {} entries, got {}",
                dims,
                len,
                data.len()
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        let len: usize = dims.iter().product();
        Self::new(dims, vec![0.0; len])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn modes(&self) -> usize {
        self.dims.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    fn flat(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dims.len());
        let mut f = 0;
        for (i, (&x, &d)) in idx.iter().zip(&self.dims).enumerate() {
            debug_assert!(x < d, "index {x} out of bounds at mode {i}");
            let _ = i;
            f = f * d + x;
        }
        f
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.flat(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let f = self.flat(idx);
        self.data[f] = v;
    }

    /// Euclidean norm of the entries, with compensated summation of squares.
    pub fn hs_norm(&self) -> f64 {
        let mut acc = Accum::new();
        for &v in &self.data {
            acc.add(v * v);
        }
        acc.value().max(0.0).sqrt()
    }

    pub fn inner(&self, other: &DenseTensor) -> Result<f64> {
        if self.dims != other.dims {
            return Err(Error::ShapeMismatch(format!(
                "inner product of {:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(dot(&self.data, &other.data))
    }

    /// Entrywise absolute value.
    pub fn abs(&self) -> DenseTensor {
        DenseTensor {
            dims: self.dims.clone(),
            data: self.data.iter().map(|v| v.abs()).collect(),
        }
    }

    /// Kronecker (outer) product; mode counts add and Hilbert-Schmidt norms
    /// multiply.
    pub fn kron(&self, other: &DenseTensor) -> DenseTensor {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        let mut data = Vec::with_capacity(self.data.len() * other.data.len());
        for &a in &self.data {
            data.extend(other.data.iter().map(|&b| a * b));
        }
        DenseTensor { dims, data }
    }

    fn require_equidimensional(&self) -> Result<usize> {
        let n = self.dims[0];
        if self.dims.iter().any(|&d| d != n) {
            return Err(Error::ShapeMismatch(format!(
                "expected equal mode sizes, got {:?}",
                self.dims
            )));
        }
        Ok(n)
    }

    /// Full symmetrization: average over all permutations of the modes. An
    /// orthogonal projection, so the norm never grows and the map is
    /// idempotent.
    pub fn symmetrize(&self) -> Result<DenseTensor> {
        self.require_equidimensional()?;
        let d = self.modes();
        let perms = permutations(d);
        let inv = 1.0 / perms.len() as f64;
        let mut out = DenseTensor::zeros(self.dims.clone())?;
        let mut flat = 0;
        let mut permuted = vec![0usize; d];
        for_each_index(&self.dims.clone(), |idx| {
            let mut acc = Accum::new();
            for sigma in &perms {
                for (k, &s) in sigma.iter().enumerate() {
                    permuted[k] = idx[s];
                }
                acc.add(self.data[self.flat(&permuted)]);
            }
            out.data[flat] = acc.value() * inv;
            flat += 1;
        });
        Ok(out)
    }

    /// Symmetrization over the trailing modes only (the first mode indexes
    /// map coordinates). Preserves contractions against vector powers.
    pub fn partial_symmetrize(&self) -> Result<DenseTensor> {
        if self.modes() < 2 {
            return Err(Error::ShapeMismatch(
                "partial symmetrization needs at least 2 modes".into(),
            ));
        }
        let t = self.dims[1];
        if self.dims[1..].iter().any(|&d| d != t) {
            return Err(Error::ShapeMismatch(format!(
                "trailing modes must agree, got {:?}",
                self.dims
            )));
        }
        let p = self.modes() - 1;
        let perms = permutations(p);
        let inv = 1.0 / perms.len() as f64;
        let mut out = DenseTensor::zeros(self.dims.clone())?;
        let mut flat = 0;
        let mut permuted = vec![0usize; self.modes()];
        for_each_index(&self.dims.clone(), |idx| {
            permuted[0] = idx[0];
            let mut acc = Accum::new();
            for sigma in &perms {
                for (k, &s) in sigma.iter().enumerate() {
                    permuted[k + 1] = idx[s + 1];
                }
                acc.add(self.data[self.flat(&permuted)]);
            }
            out.data[flat] = acc.value() * inv;
            flat += 1;
        });
        Ok(out)
    }

    /// Largest entrywise deviation from full symmetry, `max |t_idx −
    /// t_sorted(idx)|`. Zero exactly for symmetric tensors.
    pub fn max_asymmetry(&self) -> Result<f64> {
        self.require_equidimensional()?;
        let mut worst = 0.0f64;
        let mut sorted = vec![0usize; self.modes()];
        for_each_index(&self.dims.clone(), |idx| {
            sorted.copy_from_slice(idx);
            sorted.sort_unstable();
            let dev = (self.data[self.flat(idx)] - self.data[self.flat(&sorted)]).abs();
            worst = worst.max(dev);
        });
        Ok(worst)
    }

    /// Contracts one vector into the last mode, dropping it.
    fn contract_last(&self, x: &[f64]) -> Result<DenseTensor> {
        let d = self.modes();
        let last = self.dims[d - 1];
        if x.len() != last {
            return Err(Error::DimensionMismatch {
                expected: last,
                got: x.len(),
            });
        }
        if d == 1 {
            // scalar result, kept as a 1-mode singleton
            return DenseTensor::new(vec![1], vec![dot(&self.data, x)]);
        }
        let data: Vec<f64> = self.data.chunks(last).map(|chunk| dot(chunk, x)).collect();
        DenseTensor::new(self.dims[..d - 1].to_vec(), data)
    }

    /// `(T × ⊗ᵖ x)_i = Σ t_{i,i₂,…} x_{i₂} ⋯ x_{i_{p+1}}`: contracts `x`
    /// into every trailing mode, leaving the first mode as output. For the
    /// coefficient tensor of `f` this is the gradient map `(1/p)∇f`.
    pub fn contract_power(&self, x: &[f64]) -> Result<Vec<f64>> {
        for (k, &d) in self.dims.iter().enumerate().skip(1) {
            if d != x.len() {
                return Err(Error::ShapeMismatch(format!(
                    "trailing mode {k} has size {d}, vector has {}",
                    x.len()
                )));
            }
        }
        let mut cur = self.clone();
        while cur.modes() > 1 {
            cur = cur.contract_last(x)?;
        }
        Ok(cur.data)
    }

    /// Contracts the first mode with `y`, returning the trailing tensor.
    pub fn contract_mode0(&self, y: &[f64]) -> Result<DenseTensor> {
        if y.len() != self.dims[0] {
            return Err(Error::DimensionMismatch {
                expected: self.dims[0],
                got: y.len(),
            });
        }
        if self.modes() == 1 {
            return DenseTensor::new(vec![1], vec![dot(&self.data, y)]);
        }
        let block = self.data.len() / self.dims[0];
        let mut data = vec![0.0; block];
        for (i, chunk) in self.data.chunks(block).enumerate() {
            let w = y[i];
            if w != 0.0 {
                for (o, &v) in data.iter_mut().zip(chunk) {
                    *o += w * v;
                }
            }
        }
        DenseTensor::new(self.dims[1..].to_vec(), data)
    }

    /// `T(x₃,…,x_d)`: multilinear contraction over the trailing `d−2` modes,
    /// leaving an `n₁ × n₂` matrix.
    pub fn slice_matrix(&self, xs: &[&[f64]]) -> Result<DenseTensor> {
        let d = self.modes();
        if d < 3 {
            return Err(Error::ShapeMismatch(format!(
                "matrix slice needs d ≥ 3, got {d}"
            )));
        }
        if xs.len() != d - 2 {
            return Err(Error::ShapeMismatch(format!(
                "need {} contraction vectors, got {}",
                d - 2,
                xs.len()
            )));
        }
        let mut cur = self.clone();
        for x in xs.iter().rev() {
            cur = cur.contract_last(x)?;
        }
        Ok(cur)
    }

    /// Matrix product for 2-mode tensors.
    pub fn matmul(&self, other: &DenseTensor) -> Result<DenseTensor> {
        if self.modes() != 2 || other.modes() != 2 {
            return Err(Error::ShapeMismatch("matmul needs 2-mode tensors".into()));
        }
        let (r, k) = (self.dims[0], self.dims[1]);
        let (k2, c) = (other.dims[0], other.dims[1]);
        if k != k2 {
            return Err(Error::ShapeMismatch(format!(
                "matmul inner dims {k} vs {k2}"
            )));
        }
        let mut data = vec![0.0; r * c];
        for i in 0..r {
            for l in 0..k {
                let a = self.data[i * k + l];
                if a == 0.0 {
                    continue;
                }
                for j in 0..c {
                    data[i * c + j] += a * other.data[l * c + j];
                }
            }
        }
        DenseTensor::new(vec![r, c], data)
    }
}

// ---------------------------------------------------------------------------
// Polynomial bridge
// ---------------------------------------------------------------------------

/// Count vector of an index tuple: `j_k` = number of times variable `k`
/// appears.
pub(crate) fn count_vector(idx: &[usize], n: usize) -> MultiIndex {
    let mut j = vec![0u32; n];
    for &i in idx {
        j[i] += 1;
    }
    MultiIndex::new(j)
}

/// Materializes the symmetric coefficient tensor of `f`: the entry at
/// `(i₁,…,i_p)` is `φ_j = c_j · j!/p!` where `j` counts index occurrences.
/// Hilbert-Schmidt norms agree on both sides.
pub fn poly_to_tensor(f: &HomoPoly) -> Result<DenseTensor> {
    let n = f.dimension();
    let p = f.degree();
    if p == 0 {
        return Err(Error::InvalidInput(
            "degree-0 polynomials have no tensor bridge".to_string(),
        ));
    }
    let dims = vec![n; p as usize];
    let mut out = DenseTensor::zeros(dims.clone())?;
    let mut flat = 0;
    for_each_index(&dims, |idx| {
        let j = count_vector(idx, n);
        let c = f.coefficient(&j);
        if c != 0.0 {
            let w = multinomial_weight(&j, p).expect("count vector has degree p");
            out.data[flat] = c * w;
        }
        flat += 1;
    });
    Ok(out)
}

/// Inverse bridge for symmetric tensors (checked entrywise to `sym_tol`):
/// `c_j = φ_j · p!/j!` read at a canonical sorted index. Round trip with
/// [`poly_to_tensor`] is the identity.
pub fn tensor_to_poly(t: &DenseTensor, sym_tol: f64) -> Result<HomoPoly> {
    let n = t.require_equidimensional()?;
    let dev = t.max_asymmetry()?;
    if dev > sym_tol {
        return Err(Error::NotSymmetric { deviation: dev });
    }
    let p = t.modes() as u32;
    let mut terms: Vec<(Vec<u32>, f64)> = Vec::new();
    // nondecreasing index tuples enumerate each multi-index once
    let mut idx = vec![0usize; p as usize];
    loop {
        let phi = t.data[t.flat(&idx)];
        if phi != 0.0 {
            let j = count_vector(&idx, n);
            let w = multinomial_weight(&j, p)?;
            terms.push((j.exponents().to_vec(), phi / w));
        }
        // next nondecreasing tuple
        let mut pos = idx.len();
        loop {
            if pos == 0 {
                return HomoPoly::from_terms(n, p, terms);
            }
            pos -= 1;
            if idx[pos] + 1 < n {
                idx[pos] += 1;
                let v = idx[pos];
                for x in idx[pos + 1..].iter_mut() {
                    *x = v;
                }
                break;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Alternating power-method estimates
// ---------------------------------------------------------------------------

/// Options for the multistart alternating estimates.
#[derive(Debug, Clone, Serialize)]
pub struct HopmOptions {
    pub starts: u32,
    pub iters: u32,
    /// Stop an inner run once the objective improves by less than this.
    #[serde(serialize_with = "crate::serialize::ser_f17")]
    pub tol: f64,
    pub seed: u64,
}

impl Default for HopmOptions {
    fn default() -> Self {
        Self {
            starts: 32,
            iters: 200,
            tol: 1e-10,
            seed: 0,
        }
    }
}

/// Outcome of a multistart run. `value` is a certified *lower* bound on the
/// spectral norm: it is an attained value of the objective.
#[derive(Debug, Clone)]
pub struct HopmResult {
    pub value: f64,
    pub factors: Vec<Vec<f64>>,
    pub converged: bool,
    pub best_start: u32,
    /// Objective after each accepted sweep of the best start (nondecreasing).
    pub history: Vec<f64>,
}

/// Contraction of all modes except `skip`, weighting entry `t_idx` by
/// `Π_{k≠skip} x_k[idx_k]`.
fn contract_except(t: &DenseTensor, factors: &[Vec<f64>], skip: usize) -> Vec<f64> {
    let mut out = vec![0.0; t.dims()[skip]];
    let mut idx = vec![0usize; t.modes()];
    for &v in t.data() {
        if v != 0.0 {
            let mut w = v;
            for (k, f) in factors.iter().enumerate() {
                if k != skip {
                    w *= f[idx[k]];
                }
            }
            out[idx[skip]] += w;
        }
        // advance odometer
        let mut pos = t.modes();
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < t.dims()[pos] {
                break;
            }
            idx[pos] = 0;
        }
    }
    out
}

/// Best value of `|⟨T, x₁⊗…⊗x_d⟩|` over unit vectors, found by cyclic
/// alternating updates (each factor set to the normalized contraction
/// against the others) with seeded multistarts. A lower bound on the
/// spectral norm; the inner objective is monotone nondecreasing.
pub fn hopm_spectral_estimate(t: &DenseTensor, opts: &HopmOptions) -> HopmResult {
    let d = t.modes();
    if t.is_zero() {
        return HopmResult {
            value: 0.0,
            factors: t.dims().iter().map(|&n| vec![0.0; n]).collect(),
            converged: true,
            best_start: 0,
            history: vec![0.0],
        };
    }
    let runs: Vec<HopmResult> = (0..opts.starts.max(1))
        .into_par_iter()
        .map(|s| {
            let mut rng = stream_rng(opts.seed, s as u64);
            let mut factors: Vec<Vec<f64>> = t
                .dims()
                .iter()
                .map(|&n| random_unit_vector(&mut rng, n))
                .collect();
            let mut objective = 0.0f64;
            let mut history = Vec::new();
            let mut converged = false;
            for _ in 0..opts.iters {
                for j in 0..d {
                    let v = contract_except(t, &factors, j);
                    let norm = norm2(&v);
                    if norm > 0.0 {
                        factors[j] = v.iter().map(|x| x / norm).collect();
                    }
                }
                // after the last update the inner product is the norm of the
                // final contraction, hence nonnegative
                let v = contract_except(t, &factors, d - 1);
                let new = dot(&v, &factors[d - 1]).abs();
                history.push(new.max(objective));
                if (new - objective).abs() <= opts.tol * new.abs().max(1.0) {
                    objective = objective.max(new);
                    converged = true;
                    break;
                }
                objective = objective.max(new);
            }
            HopmResult {
                value: objective,
                factors,
                converged,
                best_start: s,
                history,
            }
        })
        .collect();
    // deterministic reduction: highest value, ties to the lowest start index
    runs.into_iter()
        .max_by(|a, b| {
            a.value
                .partial_cmp(&b.value)
                .unwrap()
                .then(b.best_start.cmp(&a.best_start))
        })
        .unwrap()
}

/// Two-block estimate for map-shaped tensors with dims `(m, n, …, n)`:
/// maximizes `|⟨T, y ⊗ x⊗…⊗x⟩|` with the trailing modes tied. This is the
/// spectral norm of the associated polynomial map `x ↦ T × ⊗ᵖx`.
pub fn two_block_sigma_estimate(t: &DenseTensor, opts: &HopmOptions) -> Result<HopmResult> {
    let d = t.modes();
    if d < 2 {
        return Err(Error::ShapeMismatch(
            "two-block estimate needs at least 2 modes".into(),
        ));
    }
    let n = t.dims()[1];
    if t.dims()[1..].iter().any(|&x| x != n) {
        return Err(Error::ShapeMismatch(format!(
            "trailing modes must agree, got {:?}",
            t.dims()
        )));
    }
    if t.is_zero() {
        return Ok(HopmResult {
            value: 0.0,
            factors: vec![vec![0.0; t.dims()[0]], vec![0.0; n]],
            converged: true,
            best_start: 0,
            history: vec![0.0],
        });
    }
    let p = d - 1;
    let damping = 0.9;
    let runs: Vec<HopmResult> = (0..opts.starts.max(1))
        .into_par_iter()
        .map(|s| {
            let mut rng = stream_rng(opts.seed, s as u64);
            let mut x = random_unit_vector(&mut rng, n);
            let mut y = vec![0.0; t.dims()[0]];
            let mut best = 0.0f64;
            let mut best_x = x.clone();
            let mut best_y = y.clone();
            let mut history = Vec::new();
            let mut converged = false;
            for _ in 0..opts.iters {
                let w = t.contract_power(&x).expect("shape checked");
                let wnorm = norm2(&w);
                if wnorm == 0.0 {
                    converged = true;
                    break;
                }
                y = w.iter().map(|v| v / wnorm).collect();
                if wnorm > best {
                    best = wnorm;
                    best_x = x.clone();
                    best_y = y.clone();
                }
                history.push(best);
                // tied damped update along the symmetrized y-contraction
                let s_y = t.contract_mode0(&y).expect("shape checked");
                let u = if p >= 2 {
                    s_y.symmetrize()
                        .expect("equidimensional")
                        .contract_power(&x)
                        .expect("shape checked")
                } else {
                    s_y.data().to_vec()
                };
                let unorm = norm2(&u);
                if unorm == 0.0 {
                    converged = true;
                    break;
                }
                let mut next: Vec<f64> = x
                    .iter()
                    .zip(&u)
                    .map(|(xi, ui)| (1.0 - damping) * xi + damping * ui / unorm)
                    .collect();
                if !normalize(&mut next) {
                    converged = true;
                    break;
                }
                let moved: f64 = next
                    .iter()
                    .zip(&x)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                x = next;
                if moved <= opts.tol {
                    converged = true;
                    break;
                }
            }
            HopmResult {
                value: best,
                factors: vec![best_y, best_x],
                converged,
                best_start: s,
                history,
            }
        })
        .collect();
    Ok(runs
        .into_iter()
        .max_by(|a, b| {
            a.value
                .partial_cmp(&b.value)
                .unwrap()
                .then(b.best_start.cmp(&a.best_start))
        })
        .unwrap())
}

// ---------------------------------------------------------------------------
// JSON format
//
// {"dims": [..], "entries": [{"idx": [1-based], "v": f}, ...]} (sparse) or
// {"dims": [..], "dense": [row-major floats]} — exactly one of the two.
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct EntryJson {
    idx: Vec<usize>,
    v: f64,
}

#[derive(Serialize, Deserialize)]
struct TensorJson {
    dims: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    entries: Option<Vec<EntryJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dense: Option<Vec<f64>>,
}

impl Serialize for DenseTensor {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        // sparse coordinate form keeps files readable at desk scale
        let mut entries = Vec::new();
        let mut flat = 0;
        for_each_index(&self.dims, |idx| {
            let v = self.data[flat];
            if v != 0.0 {
                entries.push(EntryJson {
                    idx: idx.iter().map(|&i| i + 1).collect(),
                    v,
                });
            }
            flat += 1;
        });
        TensorJson {
            dims: self.dims.clone(),
            entries: Some(entries),
            dense: None,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DenseTensor {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = TensorJson::deserialize(deserializer)?;
        match (raw.entries, raw.dense) {
            (Some(entries), None) => {
                let mut t = DenseTensor::zeros(raw.dims.clone()).map_err(D::Error::custom)?;
                let mut seen = std::collections::BTreeSet::new();
                for e in entries {
                    if e.idx.len() != raw.dims.len() {
                        return Err(D::Error::custom(format!(
                            "index {:?} has wrong length for dims {:?}",
                            e.idx, raw.dims
                        )));
                    }
                    if !e.v.is_finite() {
                        return Err(D::Error::custom(format!("non-finite entry {}", e.v)));
                    }
                    let zero_based: Vec<usize> = e
                        .idx
                        .iter()
                        .zip(&raw.dims)
                        .map(|(&i, &d)| {
                            if i == 0 || i > d {
                                Err(D::Error::custom(format!(
                                    "1-based index {:?} out of range for dims {:?}",
                                    e.idx, raw.dims
                                )))
                            } else {
                                Ok(i - 1)
                            }
                        })
                        .collect::<std::result::Result<_, D::Error>>()?;
                    if !seen.insert(zero_based.clone()) {
                        return Err(D::Error::custom(format!("duplicate index {:?}", e.idx)));
                    }
                    t.set(&zero_based, e.v);
                }
                Ok(t)
            }
            (None, Some(dense)) => {
                if dense.iter().any(|v| !v.is_finite()) {
                    return Err(D::Error::custom("non-finite entry in dense data"));
                }
                DenseTensor::new(raw.dims, dense).map_err(D::Error::custom)
            }
            (Some(_), Some(_)) => Err(D::Error::custom(
                "tensor JSON must have exactly one of \"entries\" or \"dense\", found both",
            )),
            (None, None) => Err(D::Error::custom(
                "tensor JSON must have exactly one of \"entries\" or \"dense\", found neither",
            )),
        }
    }
}
