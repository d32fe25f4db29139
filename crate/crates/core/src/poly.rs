//! Sparse homogeneous polynomials, weighted Hilbert-Schmidt norms, and
//! homogeneous polynomial maps.
//!
//! A degree-`p` homogeneous polynomial in `n` variables is stored as a
//! sparse map from exponent multi-indices `j = (j₁,…,jₙ)` with `|j| = p` to
//! the monomial coefficients `c_j`, so `f(x) = Σ_j c_j x₁^{j₁}⋯xₙ^{jₙ}`.
//! The symmetric coefficient tensor of `f` has entries
//! `φ_j = c_j · j₁!⋯jₙ!/p!`, and the Hilbert-Schmidt norm is the Euclidean
//! norm of that tensor:
//!
//! ```text
//! ‖f‖²_HS = Σ_j (j₁!⋯jₙ!/p!) c_j²
//! ```
//!
//! Products are plain coefficient convolutions (the weight only enters the
//! norm), and satisfy `‖fg‖_HS ≤ ‖f‖_HS ‖g‖_HS`, with equality exactly for
//! powers of a common linear form. Term maps are ordered by the graded
//! lexicographic key order, and every sum over terms runs in that order
//! with compensated accumulation, so results are reproducible bit for bit.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::util::{ln_factorial, Accum};
use crate::{Error, Result, DEFAULT_TERM_BUDGET};

/// Exponent vector of one monomial. Length is the ambient dimension; the
/// entry sum is the owning polynomial's degree.
///
/// Ordering is graded lexicographic (total degree first, then lexicographic
/// on the exponent vector), which fixes the canonical iteration and
/// serialization order everywhere.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Box<[u32]>);

impl MultiIndex {
    pub fn new(exponents: impl Into<Box<[u32]>>) -> Self {
        Self(exponents.into())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Sum of the exponents.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Reciprocal multinomial weight `j₁!⋯jₙ!/p!`, the Hilbert-Schmidt weight of
/// the monomial `x^j` in a degree-`p` polynomial.
///
/// Computed in log space with one exponentiation, so it stays accurate
/// (relative error ≲ 1e-13) for degrees in the hundreds where naive
/// factorials overflow.
pub fn multinomial_weight(j: &MultiIndex, p: u32) -> Result<f64> {
    let deg = j.degree();
    if deg != p {
        return Err(Error::DegreeMismatch {
            expected: p,
            got: deg,
        });
    }
    let mut ln = -ln_factorial(p);
    for &e in j.exponents() {
        ln += ln_factorial(e);
    }
    Ok(ln.exp())
}

/// Sparse homogeneous polynomial: dimension `n`, degree `p`, and nonzero
/// monomial coefficients keyed by multi-index. The zero polynomial keeps its
/// formal `(n, p)` with an empty term map.
#[derive(Debug, Clone, PartialEq)]
pub struct HomoPoly {
    n: usize,
    p: u32,
    terms: BTreeMap<MultiIndex, f64>,
}

impl HomoPoly {
    /// Zero polynomial with the given formal dimension and degree.
    pub fn zero(n: usize, p: u32) -> Self {
        Self {
            n,
            p,
            terms: BTreeMap::new(),
        }
    }

    /// Degree-0 constant polynomial in `n` variables.
    pub fn constant(n: usize, c: f64) -> Self {
        let mut poly = Self::zero(n, 0);
        if c != 0.0 {
            poly.terms.insert(MultiIndex::new(vec![0u32; n]), c);
        }
        poly
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs. Duplicate
    /// multi-indices accumulate; exact zeros are pruned.
    pub fn from_terms(
        n: usize,
        p: u32,
        terms: impl IntoIterator<Item = (Vec<u32>, f64)>,
    ) -> Result<Self> {
        let mut map: BTreeMap<MultiIndex, f64> = BTreeMap::new();
        for (exps, c) in terms {
            if exps.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: exps.len(),
                });
            }
            let j = MultiIndex::new(exps);
            let deg = j.degree();
            if deg != p {
                return Err(Error::DegreeMismatch {
                    expected: p,
                    got: deg,
                });
            }
            if !c.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "non-finite coefficient {c} at {j}"
                )));
            }
            *map.entry(j).or_insert(0.0) += c;
        }
        map.retain(|_, c| *c != 0.0);
        Ok(Self { n, p, terms: map })
    }

    /// Single monomial `c · x^j`.
    pub fn monomial(n: usize, exponents: Vec<u32>, c: f64) -> Result<Self> {
        let p = exponents.iter().sum();
        Self::from_terms(n, p, [(exponents, c)])
    }

    /// Linear form `c₁x₁ + … + cₙxₙ`.
    pub fn linear_form(coeffs: &[f64]) -> Result<Self> {
        let n = coeffs.len();
        Self::from_terms(
            n,
            1,
            coeffs.iter().enumerate().map(|(i, &c)| {
                let mut e = vec![0u32; n];
                e[i] = 1;
                (e, c)
            }),
        )
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> u32 {
        self.p
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.terms.iter().map(|(j, &c)| (j, c))
    }

    /// Monomial coefficient `c_j` (0 if absent).
    pub fn coefficient(&self, j: &MultiIndex) -> f64 {
        self.terms.get(j).copied().unwrap_or(0.0)
    }

    /// Symmetric-tensor entry `φ_j = c_j · j!/p!`.
    pub fn tensor_entry(&self, j: &MultiIndex) -> Result<f64> {
        Ok(self.coefficient(j) * multinomial_weight(j, self.p)?)
    }

    /// Weighted coefficient norm `√(Σ_j (j!/p!) c_j²)`, equal to the
    /// Euclidean norm of the symmetric coefficient tensor.
    pub fn hs_norm(&self) -> f64 {
        let mut acc = Accum::new();
        for (j, c) in self.terms() {
            let w = multinomial_weight(j, self.p).expect("stored keys match degree");
            acc.add(w * c * c);
        }
        acc.value().max(0.0).sqrt()
    }

    /// Evaluates at `x`, summing terms in graded-lex order with compensated
    /// accumulation.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        let mut acc = Accum::new();
        for (j, c) in self.terms() {
            let mut term = c;
            for (xi, &e) in x.iter().zip(j.exponents()) {
                if e > 0 {
                    term *= xi.powi(e as i32);
                }
            }
            acc.add(term);
        }
        Ok(acc.value())
    }

    /// Rescales every coefficient by `a`.
    pub fn scale(&self, a: f64) -> Self {
        let mut terms = BTreeMap::new();
        if a != 0.0 {
            for (j, c) in self.terms() {
                let v = c * a;
                if v != 0.0 {
                    terms.insert(j.clone(), v);
                }
            }
        }
        Self {
            n: self.n,
            p: self.p,
            terms,
        }
    }

    /// Sum of two polynomials of matching dimension and degree.
    pub fn add(&self, other: &HomoPoly) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        if self.p != other.p {
            return Err(Error::DegreeMismatch {
                expected: self.p,
                got: other.p,
            });
        }
        let mut terms = self.terms.clone();
        for (j, c) in other.terms() {
            *terms.entry(j.clone()).or_insert(0.0) += c;
        }
        terms.retain(|_, c| *c != 0.0);
        Ok(Self {
            n: self.n,
            p: self.p,
            terms,
        })
    }

    /// `Σ_i w_i · polys_i`; all inputs must share `(n, p)`.
    pub fn linear_combination(polys: &[HomoPoly], weights: &[f64]) -> Result<Self> {
        if polys.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: polys.len(),
                got: weights.len(),
            });
        }
        let first = polys.first().ok_or_else(|| {
            Error::InvalidInput("linear combination of an empty list".to_string())
        })?;
        let mut acc = HomoPoly::zero(first.n, first.p);
        for (poly, &w) in polys.iter().zip(weights) {
            acc = acc.add(&poly.scale(w))?;
        }
        Ok(acc)
    }

    /// Product by exact coefficient convolution.
    pub fn multiply(&self, other: &HomoPoly) -> Result<Self> {
        self.multiply_budgeted(other, DEFAULT_TERM_BUDGET)
    }

    pub fn multiply_budgeted(&self, other: &HomoPoly, budget: usize) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        let mut terms: BTreeMap<MultiIndex, f64> = BTreeMap::new();
        for (ja, ca) in self.terms() {
            for (jb, cb) in other.terms() {
                let j = ja.add(jb);
                *terms.entry(j).or_insert(0.0) += ca * cb;
                if terms.len() > budget {
                    return Err(Error::TermBudgetExceeded {
                        at_power: None,
                        budget,
                    });
                }
            }
        }
        terms.retain(|_, c| *c != 0.0);
        Ok(Self {
            n: self.n,
            p: self.p + other.p,
            terms,
        })
    }

    /// `f^k` by square-and-multiply over [`Self::multiply`]. Term count is
    /// bounded by C(n+kp-1, kp); exceeding the budget reports the requested
    /// power.
    pub fn power(&self, k: u32) -> Result<Self> {
        self.power_budgeted(k, DEFAULT_TERM_BUDGET)
    }

    pub fn power_budgeted(&self, k: u32, budget: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInput(
                "power requires a positive exponent".to_string(),
            ));
        }
        let tag = |e| match e {
            Error::TermBudgetExceeded { budget, .. } => Error::TermBudgetExceeded {
                at_power: Some(k),
                budget,
            },
            other => other,
        };
        let mut result: Option<HomoPoly> = None;
        let mut base = self.clone();
        let mut rem = k;
        loop {
            if rem & 1 == 1 {
                result = Some(match result {
                    None => base.clone(),
                    Some(r) => r.multiply_budgeted(&base, budget).map_err(tag)?,
                });
            }
            rem >>= 1;
            if rem == 0 {
                break;
            }
            base = base.multiply_budgeted(&base, budget).map_err(tag)?;
        }
        Ok(result.expect("k >= 1"))
    }

    /// Gradient map `F = (1/p)∇f`, a degree `p−1` map with
    /// `Σ_i x_i F_i(x) = f(x)` (Euler's identity). For a degree `p` input
    /// this is the map whose coefficient tensor is the one of `f`.
    pub fn gradient_map(&self) -> Result<PolyMap> {
        if self.p == 0 {
            return Err(Error::ConstantPolynomial);
        }
        let inv_p = 1.0 / self.p as f64;
        let mut coords = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let mut terms: BTreeMap<MultiIndex, f64> = BTreeMap::new();
            for (j, c) in self.terms() {
                let e = j.exponents()[i];
                if e == 0 {
                    continue;
                }
                let mut exps = j.exponents().to_vec();
                exps[i] -= 1;
                let v = c * e as f64 * inv_p;
                if v != 0.0 {
                    terms.insert(MultiIndex::new(exps), v);
                }
            }
            coords.push(HomoPoly {
                n: self.n,
                p: self.p - 1,
                terms,
            });
        }
        PolyMap::new(self.n, coords)
    }

    /// Substitutes the coordinates of `map` for the variables of `self`:
    /// `(f ∘ F)(x) = f(F(x))`, a polynomial of degree `f.p · F.p` in
    /// `F.n` variables. Satisfies `‖f∘F‖_HS ≤ ‖f‖_HS ‖F‖_HS^{f.p}`.
    pub fn compose(&self, map: &PolyMap) -> Result<Self> {
        self.compose_budgeted(map, DEFAULT_TERM_BUDGET)
    }

    pub fn compose_budgeted(&self, map: &PolyMap, budget: usize) -> Result<Self> {
        if self.n != map.output_dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: map.output_dimension(),
            });
        }
        let out_p = self
            .p
            .checked_mul(map.degree())
            .ok_or_else(|| Error::InvalidInput("composed degree overflows".to_string()))?;
        let out_n = map.input_dimension();

        // cache coordinate powers up to the largest exponent used per slot
        let mut max_exp = vec![0u32; self.n];
        for (j, _) in self.terms() {
            for (slot, &e) in max_exp.iter_mut().zip(j.exponents()) {
                *slot = (*slot).max(e);
            }
        }
        let mut powers: Vec<Vec<HomoPoly>> = Vec::with_capacity(self.n);
        for (i, cap) in max_exp.iter().enumerate() {
            let mut ladder = vec![HomoPoly::constant(out_n, 1.0)];
            for e in 1..=*cap {
                let next = ladder[(e - 1) as usize].multiply_budgeted(map.coord(i), budget)?;
                ladder.push(next);
            }
            powers.push(ladder);
        }

        let mut acc = HomoPoly::zero(out_n, out_p);
        for (j, c) in self.terms() {
            let mut prod = HomoPoly::constant(out_n, c);
            for (i, &e) in j.exponents().iter().enumerate() {
                if e > 0 {
                    prod = prod.multiply_budgeted(&powers[i][e as usize], budget)?;
                }
            }
            // every monomial of f has |j| = p, so prod has degree p·map.p
            acc = acc.add(&prod)?;
            if acc.term_count() > budget {
                return Err(Error::TermBudgetExceeded {
                    at_power: None,
                    budget,
                });
            }
        }
        Ok(acc)
    }

    /// `f(Qx)` for an orthogonal `Q` (row-major, checked to
    /// `‖QᵀQ − I‖_max ≤ 1e-10`). Preserves the Hilbert-Schmidt norm.
    pub fn rotate(&self, q_row_major: &[f64]) -> Result<Self> {
        let n = self.n;
        if q_row_major.len() != n * n {
            return Err(Error::ShapeMismatch(format!(
                "rotation matrix needs {}x{} = {} entries, got {}",
                n,
                n,
                n * n,
                q_row_major.len()
            )));
        }
        let mut deviation = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                let mut s = 0.0;
                for r in 0..n {
                    s += q_row_major[r * n + a] * q_row_major[r * n + b];
                }
                let target = if a == b { 1.0 } else { 0.0 };
                deviation = deviation.max((s - target).abs());
            }
        }
        if deviation > 1e-10 {
            return Err(Error::NotOrthogonal { deviation });
        }
        let map = PolyMap::from_matrix(n, q_row_major)?;
        self.compose(&map)
    }

    /// Entrywise majorization on the symmetric-tensor entries: true iff
    /// `φ_j(self) ≥ |φ_j(other)|` for every `j`. Requires all entries of
    /// `self` nonnegative. The multinomial weights cancel, so the comparison
    /// runs on the monomial coefficients directly.
    pub fn majorizes(&self, other: &HomoPoly) -> Result<bool> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        if self.p != other.p {
            return Err(Error::DegreeMismatch {
                expected: self.p,
                got: other.p,
            });
        }
        for (_, c) in self.terms() {
            if c < 0.0 {
                return Err(Error::NegativeEntry { value: c });
            }
        }
        for (j, cg) in other.terms() {
            if self.coefficient(j) < cg.abs() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl fmt::Display for HomoPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (idx, (j, c)) in self.terms().enumerate() {
            if idx > 0 {
                write!(f, " {} ", if c < 0.0 { "-" } else { "+" })?;
            } else if c < 0.0 {
                write!(f, "-")?;
            }
            let mag = c.abs();
            let mut wrote = false;
            if (mag - 1.0).abs() > f64::EPSILON || j.degree() == 0 {
                write!(f, "{mag}")?;
                wrote = true;
            }
            for (i, &e) in j.exponents().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if wrote {
                    write!(f, "*")?;
                }
                write!(f, "x{}", i + 1)?;
                if e > 1 {
                    write!(f, "^{e}")?;
                }
                wrote = true;
            }
        }
        Ok(())
    }
}

/// Map `ℝⁿ → ℝᵐ` with homogeneous polynomial coordinates of a common degree;
/// the vessel for coefficient tensors in `ℝᵐ ⊗ SᵖℝⁿS`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMap {
    n: usize,
    m: usize,
    p: u32,
    coords: Vec<HomoPoly>,
}

impl PolyMap {
    /// Builds a map from coordinate polynomials sharing dimension `n` and a
    /// common degree.
    pub fn new(n: usize, coords: Vec<HomoPoly>) -> Result<Self> {
        let first = coords.first().ok_or_else(|| {
            Error::InvalidInput("a polynomial map needs at least one coordinate".to_string())
        })?;
        let p = first.degree();
        for c in &coords {
            if c.dimension() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: c.dimension(),
                });
            }
            if c.degree() != p {
                return Err(Error::DegreeMismatch {
                    expected: p,
                    got: c.degree(),
                });
            }
        }
        Ok(Self {
            n,
            m: coords.len(),
            p,
            coords,
        })
    }

    /// Identity map on `ℝⁿ`.
    pub fn identity(n: usize) -> Self {
        let coords = (0..n)
            .map(|i| {
                let mut e = vec![0u32; n];
                e[i] = 1;
                HomoPoly::monomial(n, e, 1.0).expect("valid monomial")
            })
            .collect();
        Self {
            n,
            m: n,
            p: 1,
            coords,
        }
    }

    /// Linear map `x ↦ Qx` from a row-major square matrix.
    pub fn from_matrix(n: usize, q_row_major: &[f64]) -> Result<Self> {
        if q_row_major.len() != n * n {
            return Err(Error::ShapeMismatch(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                q_row_major.len()
            )));
        }
        let coords = (0..n)
            .map(|i| HomoPoly::linear_form(&q_row_major[i * n..(i + 1) * n]))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, coords)
    }

    pub fn input_dimension(&self) -> usize {
        self.n
    }

    pub fn output_dimension(&self) -> usize {
        self.m
    }

    pub fn degree(&self) -> u32 {
        self.p
    }

    pub fn coords(&self) -> &[HomoPoly] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> &HomoPoly {
        &self.coords[i]
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(HomoPoly::is_zero)
    }

    /// Total stored terms across coordinates.
    pub fn term_count(&self) -> usize {
        self.coords.iter().map(HomoPoly::term_count).sum()
    }

    /// Map-level Hilbert-Schmidt norm `√(Σ_i ‖F_i‖²_HS)`.
    pub fn hs_norm(&self) -> f64 {
        let mut acc = Accum::new();
        for c in &self.coords {
            let h = c.hs_norm();
            acc.add(h * h);
        }
        acc.value().max(0.0).sqrt()
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.coords.iter().map(|c| c.eval(x)).collect()
    }

    /// Composition `self ∘ inner` (apply `inner` first), coordinatewise via
    /// [`HomoPoly::compose`]. Associative up to floating-point reordering.
    pub fn compose(&self, inner: &PolyMap) -> Result<Self> {
        self.compose_budgeted(inner, DEFAULT_TERM_BUDGET)
    }

    pub fn compose_budgeted(&self, inner: &PolyMap, budget: usize) -> Result<Self> {
        if self.n != inner.m {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: inner.m,
            });
        }
        let coords = self
            .coords
            .iter()
            .map(|c| c.compose_budgeted(inner, budget))
            .collect::<Result<Vec<_>>>()?;
        Self::new(inner.n, coords)
    }
}

// ---------------------------------------------------------------------------
// JSON formats
//
// Polynomial: {"n": int, "p": int, "terms": [{"j": [int,...], "c": float}]}
// with terms graded-lex sorted on output. Map: {"n", "m", "p", "coords"}.
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct TermJson {
    j: Vec<u32>,
    c: f64,
}

#[derive(Serialize, Deserialize)]
struct PolyJson {
    n: usize,
    p: u32,
    terms: Vec<TermJson>,
}

impl Serialize for HomoPoly {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let terms = self
            .terms()
            .map(|(j, c)| TermJson {
                j: j.exponents().to_vec(),
                c,
            })
            .collect();
        PolyJson {
            n: self.n,
            p: self.p,
            terms,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for HomoPoly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = PolyJson::deserialize(deserializer)?;
        let mut seen = std::collections::BTreeSet::new();
        for t in &raw.terms {
            if !seen.insert(t.j.clone()) {
                return Err(D::Error::custom(format!(
                    "duplicate multi-index {:?}",
                    t.j
                )));
            }
        }
        HomoPoly::from_terms(raw.n, raw.p, raw.terms.into_iter().map(|t| (t.j, t.c)))
            .map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct PolyMapJson {
    n: usize,
    m: usize,
    p: u32,
    coords: Vec<HomoPoly>,
}

impl Serialize for PolyMap {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        PolyMapJson {
            n: self.n,
            m: self.m,
            p: self.p,
            coords: self.coords.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PolyMap {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = PolyMapJson::deserialize(deserializer)?;
        if raw.coords.len() != raw.m {
            return Err(D::Error::custom(format!(
                "map declares m={} but has {} coordinates",
                raw.m,
                raw.coords.len()
            )));
        }
        for c in &raw.coords {
            if c.degree() != raw.p {
                return Err(D::Error::custom(format!(
                    "coordinate degree {} does not match declared p={}",
                    c.degree(),
                    raw.p
                )));
            }
        }
        PolyMap::new(raw.n, raw.coords).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(n: usize, p: u32, terms: &[(&[u32], f64)]) -> HomoPoly {
        HomoPoly::from_terms(n, p, terms.iter().map(|(j, c)| (j.to_vec(), *c))).unwrap()
    }

    /// x₁² + 2x₁x₂ + x₂² = (x₁+x₂)²
    fn square_of_sum() -> HomoPoly {
        poly(2, 2, &[(&[2, 0], 1.0), (&[1, 1], 2.0), (&[0, 2], 1.0)])
    }

    /// x₁² + x₂²
    fn sum_of_squares() -> HomoPoly {
        poly(2, 2, &[(&[2, 0], 1.0), (&[0, 2], 1.0)])
    }

    #[test]
    fn multinomial_weight_values() {
        let w = |e: &[u32], p| multinomial_weight(&MultiIndex::new(e.to_vec()), p).unwrap();
        assert_eq!(w(&[2, 0], 2), 1.0);
        assert!((w(&[1, 1], 2) - 0.5).abs() < 1e-15);
        assert!((w(&[2, 2], 4) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn multinomial_weight_rejects_degree_mismatch() {
        let err = multinomial_weight(&MultiIndex::new(vec![2, 0]), 3).unwrap_err();
        assert!(matches!(err, Error::DegreeMismatch { .. }));
    }

    #[test]
    fn multinomial_weight_large_degree_matches_exact_rationals() {
        // against exact big-integer factorials: w = (j1)!(j2)!/p!
        use num_bigint::BigUint;
        let fact = |k: u32| -> BigUint {
            (1..=k).map(BigUint::from).product::<BigUint>().max(BigUint::from(1u32))
        };
        for (j1, j2) in [(100u32, 100u32), (17, 183), (1, 199)] {
            let p = j1 + j2;
            let num = fact(j1) * fact(j2);
            let den = fact(p);
            // weight as ratio of big ints via 300-digit scaling
            let scale = BigUint::from(10u32).pow(300);
            let q = (num * scale) / den;
            let exact = q
                .to_string()
                .parse::<f64>()
                .map(|v| v * 1e-300)
                .unwrap();
            let got = multinomial_weight(&MultiIndex::new(vec![j1, j2]), p).unwrap();
            assert!(
                (got - exact).abs() <= 1e-12 * exact,
                "weight({j1},{j2}) = {got}, exact {exact}"
            );
        }
    }

    #[test]
    fn hs_norm_matches_hand_values() {
        assert!((square_of_sum().hs_norm() - 2.0).abs() < 1e-14);
        assert_eq!(HomoPoly::zero(2, 2).hs_norm(), 0.0);
        // (x₁²+x₂²)² = x₁⁴ + 2x₁²x₂² + x₂⁴, ‖·‖² = 1 + 2/3 + 1 = 8/3
        let f = sum_of_squares().power(2).unwrap();
        assert!((f.hs_norm() - (8.0f64 / 3.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn eval_cases() {
        assert_eq!(sum_of_squares().eval(&[1.0, 0.0]).unwrap(), 1.0);
        let f = poly(2, 2, &[(&[1, 1], 1.0)]);
        assert_eq!(f.eval(&[3.0, 4.0]).unwrap(), 12.0);
        assert_eq!(square_of_sum().eval(&[0.0, 0.0]).unwrap(), 0.0);
        assert!(matches!(
            sum_of_squares().eval(&[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn multiply_cases() {
        let x1 = poly(2, 1, &[(&[1, 0], 1.0)]);
        let x2 = poly(2, 1, &[(&[0, 1], 1.0)]);
        let prod = x1.multiply(&x2).unwrap();
        assert_eq!(prod.term_count(), 1);
        assert!((prod.hs_norm() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(prod.hs_norm() < x1.hs_norm() * x2.hs_norm());

        let s = poly(2, 1, &[(&[1, 0], 1.0), (&[0, 1], 1.0)]);
        let sq = s.multiply(&s).unwrap();
        assert_eq!(sq, square_of_sum());
        assert!((sq.hs_norm() - s.hs_norm() * s.hs_norm()).abs() < 1e-14);

        let z = s.multiply(&HomoPoly::zero(2, 3)).unwrap();
        assert!(z.is_zero());
        assert_eq!(z.degree(), 4);
    }

    #[test]
    fn power_cases() {
        for k in 1..=6u32 {
            let f = square_of_sum().power(k).unwrap();
            assert!(
                (f.hs_norm() - 2f64.powi(k as i32)).abs() < 1e-9 * 2f64.powi(k as i32),
                "rank-one power norm at k={k}"
            );
        }
        assert_eq!(sum_of_squares().power(1).unwrap(), sum_of_squares());
        let err = sum_of_squares().power_budgeted(8, 3).unwrap_err();
        assert!(matches!(
            err,
            Error::TermBudgetExceeded {
                at_power: Some(8),
                ..
            }
        ));
    }

    #[test]
    fn gradient_map_cases() {
        // f = x₁³ + x₂³ -> (x₁², x₂²)
        let f = poly(2, 3, &[(&[3, 0], 1.0), (&[0, 3], 1.0)]);
        let g = f.gradient_map().unwrap();
        assert_eq!(g.coord(0), &poly(2, 2, &[(&[2, 0], 1.0)]));
        assert_eq!(g.coord(1), &poly(2, 2, &[(&[0, 2], 1.0)]));

        // quadratic form xᵀx -> identity map
        let q = sum_of_squares().gradient_map().unwrap();
        assert_eq!(q, PolyMap::identity(2));

        // f = x₁²x₂ -> ((2/3)x₁x₂, (1/3)x₁²), Euler identity holds
        let f = poly(2, 3, &[(&[2, 1], 1.0)]);
        let g = f.gradient_map().unwrap();
        assert_eq!(g.coord(0), &poly(2, 2, &[(&[1, 1], 2.0 / 3.0)]));
        assert_eq!(g.coord(1), &poly(2, 2, &[(&[2, 0], 1.0 / 3.0)]));
        let x = [0.3, -1.7];
        let fx = f.eval(&x).unwrap();
        let gx = g.eval(&x).unwrap();
        let euler = x[0] * gx[0] + x[1] * gx[1];
        assert!((euler - fx).abs() < 1e-12 * fx.abs().max(1.0));

        assert!(matches!(
            HomoPoly::constant(2, 3.0).gradient_map(),
            Err(Error::ConstantPolynomial)
        ));
    }

    #[test]
    fn compose_cases() {
        // linear ∘ linear = matrix product
        let g = PolyMap::from_matrix(2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let f = PolyMap::from_matrix(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let h = g.compose(&f).unwrap();
        let expect = PolyMap::from_matrix(2, &[2.0, 1.0, 4.0, 3.0]).unwrap();
        assert_eq!(h, expect);

        // g = y₁² over m=1, F = (x₁x₂): g∘F = x₁²x₂²
        let gp = poly(1, 2, &[(&[2], 1.0)]);
        let fmap = PolyMap::new(2, vec![poly(2, 2, &[(&[1, 1], 1.0)])]).unwrap();
        let comp = gp.compose(&fmap).unwrap();
        assert_eq!(comp, poly(2, 4, &[(&[2, 2], 1.0)]));

        // g = y₁+y₂, F = (x₁², x₂²): g∘F = x₁²+x₂², norm inequality
        let gp = poly(2, 1, &[(&[1, 0], 1.0), (&[0, 1], 1.0)]);
        let fmap = PolyMap::new(
            2,
            vec![poly(2, 2, &[(&[2, 0], 1.0)]), poly(2, 2, &[(&[0, 2], 1.0)])],
        )
        .unwrap();
        let comp = gp.compose(&fmap).unwrap();
        assert_eq!(comp, sum_of_squares());
        assert!(comp.hs_norm() <= gp.hs_norm() * fmap.hs_norm().powi(1) + 1e-12);
    }

    #[test]
    fn compose_map_cases() {
        let sq = PolyMap::new(
            2,
            vec![poly(2, 2, &[(&[2, 0], 1.0)]), poly(2, 2, &[(&[0, 2], 1.0)])],
        )
        .unwrap();
        let quad = sq.compose(&sq).unwrap();
        assert_eq!(quad.coord(0), &poly(2, 4, &[(&[4, 0], 1.0)]));
        assert_eq!(quad.coord(1), &poly(2, 4, &[(&[0, 4], 1.0)]));

        let id = PolyMap::identity(2);
        assert_eq!(sq.compose(&id).unwrap(), sq);
    }

    #[test]
    fn rotate_cases() {
        let f = sum_of_squares();
        let id = [1.0, 0.0, 0.0, 1.0];
        assert_eq!(f.rotate(&id).unwrap(), f);

        let c = std::f64::consts::FRAC_1_SQRT_2;
        let q45 = [c, -c, c, c];
        // radially symmetric quadratic is invariant
        let rot = f.rotate(&q45).unwrap();
        for (j, v) in rot.terms() {
            assert!((v - f.coefficient(j)).abs() < 1e-14, "coef at {j}");
        }

        // x₁² picks up cross terms but keeps its norm
        let g = poly(2, 2, &[(&[2, 0], 1.0)]);
        let gr = g.rotate(&q45).unwrap();
        assert!((gr.hs_norm() - 1.0).abs() < 1e-12);
        assert!((gr.coefficient(&MultiIndex::new(vec![1, 1])) - (-1.0)).abs() < 1e-12);

        let skew = [1.0, 0.5, 0.0, 1.0];
        assert!(matches!(
            f.rotate(&skew),
            Err(Error::NotOrthogonal { .. })
        ));
    }

    #[test]
    fn majorizes_cases() {
        let f = sum_of_squares();
        assert!(f.majorizes(&f).unwrap());
        let g = poly(2, 2, &[(&[2, 0], 1.0), (&[0, 2], -1.0)]);
        assert!(f.majorizes(&g).unwrap());
        let h = poly(2, 2, &[(&[2, 0], 1.0)]);
        let cross = poly(2, 2, &[(&[1, 1], 1.0)]);
        assert!(!h.majorizes(&cross).unwrap());
        assert!(matches!(
            g.majorizes(&f),
            Err(Error::NegativeEntry { .. })
        ));
    }

    #[test]
    fn json_round_trip_and_order() {
        let f = square_of_sum();
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(
            s,
            r#"{"n":2,"p":2,"terms":[{"j":[0,2],"c":1.0},{"j":[1,1],"c":2.0},{"j":[2,0],"c":1.0}]}"#
        );
        let back: HomoPoly = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);

        let dup = r#"{"n":2,"p":1,"terms":[{"j":[1,0],"c":1.0},{"j":[1,0],"c":2.0}]}"#;
        assert!(serde_json::from_str::<HomoPoly>(dup).is_err());
        let bad_degree = r#"{"n":2,"p":2,"terms":[{"j":[1,0],"c":1.0}]}"#;
        assert!(serde_json::from_str::<HomoPoly>(bad_degree).is_err());
    }

    #[test]
    fn map_json_round_trip() {
        let f = sum_of_squares().gradient_map().unwrap();
        let s = serde_json::to_string(&f).unwrap();
        let back: PolyMap = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn graded_lex_order_is_canonical() {
        let a = MultiIndex::new(vec![0, 2]);
        let b = MultiIndex::new(vec![1, 1]);
        let c = MultiIndex::new(vec![2, 0]);
        let d = MultiIndex::new(vec![3, 0]);
        assert!(a < b && b < c && c < d);
    }
}
