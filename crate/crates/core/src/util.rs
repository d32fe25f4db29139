//! Shared numeric helpers: compensated summation, cached log-factorials,
//! small vector operations, and seeded random directions.

use std::sync::Mutex;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Neumaier-compensated accumulator. Keeps the running error of a long f64
/// sum near one ulp of the result regardless of term ordering or magnitude
/// spread.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Accum {
    sum: f64,
    comp: f64,
}

impl Accum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

struct LnFactTable {
    // values[k] = ln(k!) snapshots of the running compensated sum
    values: Vec<f64>,
    sum: f64,
    comp: f64,
}

static LN_FACT: Mutex<LnFactTable> = Mutex::new(LnFactTable {
    values: Vec::new(),
    sum: 0.0,
    comp: 0.0,
});

/// ln(k!), built by compensated accumulation of ln(i) and cached. The
/// compensation keeps the absolute error of the logarithm near one ulp,
/// which after exponentiation gives relative errors well below 1e-12 for
/// arguments in the hundreds.
pub(crate) fn ln_factorial(k: u32) -> f64 {
    let k = k as usize;
    let mut table = LN_FACT.lock().unwrap();
    if table.values.is_empty() {
        table.values.push(0.0); // ln 0! = 0
    }
    while table.values.len() <= k {
        let i = table.values.len() as f64;
        let v = i.ln();
        let t = table.sum + v;
        if table.sum.abs() >= v.abs() {
            table.comp += (table.sum - t) + v;
        } else {
            table.comp += (v - t) + table.sum;
        }
        table.sum = t;
        let snapshot = table.sum + table.comp;
        table.values.push(snapshot);
    }
    table.values[k]
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = Accum::new();
    for (x, y) in a.iter().zip(b) {
        acc.add(x * y);
    }
    acc.value()
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    dot(v, v).max(0.0).sqrt()
}

/// Normalizes in place to unit Euclidean length; returns false for the zero
/// vector (left untouched).
pub(crate) fn normalize(v: &mut [f64]) -> bool {
    let n = norm2(v);
    if n == 0.0 || !n.is_finite() {
        return false;
    }
    for x in v.iter_mut() {
        *x /= n;
    }
    true
}

/// Deterministic per-start RNG: a counter-based generator seeded by the
/// report seed, with the start index as the stream counter. Independent of
/// thread count.
pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform random unit vector via normalized Gaussian coordinates
/// (Box-Muller).
pub(crate) fn random_unit_vector(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..n).map(|_| standard_normal(rng)).collect();
        if normalize(&mut v) {
            return v;
        }
    }
}

pub(crate) fn standard_normal(rng: &mut impl Rng) -> f64 {
    // Box-Muller on (0,1] uniforms
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// All permutations of 0..d in a fixed (lexicographic) order.
pub(crate) fn permutations(d: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..rest.len() {
            let x = rest.remove(i);
            prefix.push(x);
            rec(prefix, rest, out);
            prefix.pop();
            rest.insert(i, x);
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut (0..d).collect(), &mut out);
    out
}

/// Row-major odometer over a multi-dimensional index range, last index
/// fastest. Calls `f` with each index tuple.
pub(crate) fn for_each_index(dims: &[usize], mut f: impl FnMut(&[usize])) {
    if dims.iter().any(|&d| d == 0) {
        return;
    }
    let mut idx = vec![0usize; dims.len()];
    loop {
        f(&idx);
        // increment, last position fastest
        let mut pos = dims.len();
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < dims[pos] {
                break;
            }
            idx[pos] = 0;
        }
    }
}
