//! Exact RSA listeners and speakers over a boolean lexicon.
//!
//! A chain of depth `i` alternates column normalization (speaker) and row
//! normalization (listener) starting from the literal listener. Every
//! normalizer is recorded, so the same chain can be rebuilt as
//! `L_i = M * (r_0 ⋯ r_i ⊗ P ⋯ c_1 ⋯ c_i)`: the lexicon masked by the outer
//! product of a cumulative row vector and a cumulative column vector.

mod incremental;

pub use incremental::{incremental_pragmatic_listener, incremental_speaker, IncrementalRsa};

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lexicon::Lexicon;

/// Prior over hypotheses.
#[derive(Debug, Clone, PartialEq)]
pub struct Prior {
    weights: Vec<f64>,
    uniform: bool,
}

impl Prior {
    pub fn uniform(n: usize) -> Self {
        Self {
            weights: vec![1.0 / n as f64; n],
            uniform: true,
        }
    }

    /// Nonnegative weights summing to 1 (±1e-12).
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidArgument("prior weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("prior sums to {total}, expected 1")));
        }
        let uniform = weights.windows(2).all(|p| p[0] == p[1]);
        Ok(Self { weights, uniform })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    #[inline]
    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    #[inline]
    pub fn weight(&self, w: usize) -> f64 {
        self.weights[w]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub(crate) fn check(&self, lex: &Lexicon) -> Result<()> {
        if self.len() != lex.n() {
            return Err(Error::DimensionMismatch {
                expected: lex.n(),
                found: self.len(),
            });
        }
        Ok(())
    }
}

/// Row-stochastic listener `L_i(w | u)` stored densely, row-major `m × n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ListenerMatrix {
    pub depth: usize,
    m: usize,
    n: usize,
    data: Vec<f64>,
    undefined_rows: Vec<usize>,
}

impl ListenerMatrix {
    #[inline]
    pub fn get(&self, u: usize, w: usize) -> f64 {
        self.data[u * self.n + w]
    }

    pub fn row(&self, u: usize) -> &[f64] {
        &self.data[u * self.n..(u + 1) * self.n]
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    /// Rows whose consistent mass was zero, so no distribution is defined.
    pub fn undefined_rows(&self) -> &[usize] {
        &self.undefined_rows
    }

    pub fn is_row_defined(&self, u: usize) -> bool {
        !self.undefined_rows.contains(&u)
    }

    pub fn max_abs_diff(&self, other: &ListenerMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Argmax of a row with ascending-index tie-break.
    pub fn argmax(&self, u: usize) -> Option<usize> {
        crate::order::rank_descending(
            self.row(u)
                .iter()
                .enumerate()
                .filter(|(_, p)| **p > 0.0)
                .map(|(w, &score)| crate::Scored { hypothesis: w, score })
                .collect(),
        )
        .first()
        .map(|s| s.hypothesis)
    }
}

/// Column-stochastic speaker `S_i(u | w)`, row-major `m × n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeakerMatrix {
    pub depth: usize,
    m: usize,
    n: usize,
    data: Vec<f64>,
    undefined_columns: Vec<usize>,
}

impl SpeakerMatrix {
    #[inline]
    pub fn get(&self, u: usize, w: usize) -> f64 {
        self.data[u * self.n + w]
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn undefined_columns(&self) -> &[usize] {
        &self.undefined_columns
    }
}

/// Normalizers captured while running a chain to `depth`.
///
/// `rows[j]` is `r_j` (length `m`, `j = 0..=depth`), `columns[j - 1]` is `c_j`
/// (length `n`, `j = 1..=depth`). Undefined rows/columns carry a zero
/// normalizer.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationVectors {
    pub depth: usize,
    pub prior: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub columns: Vec<Vec<f64>>,
}

impl NormalizationVectors {
    /// `r_0 * ⋯ * r_depth`.
    pub fn row_product(&self, depth: usize) -> Vec<f64> {
        let mut acc = vec![1.0; self.rows.first().map_or(0, Vec::len)];
        for r in &self.rows[..=depth] {
            acc.iter_mut().zip(r).for_each(|(a, b)| *a *= b);
        }
        acc
    }

    /// `c_1 * ⋯ * c_depth` (all ones at depth 0).
    pub fn column_product(&self, depth: usize) -> Vec<f64> {
        let mut acc = vec![1.0; self.prior.len()];
        for c in &self.columns[..depth] {
            acc.iter_mut().zip(c).for_each(|(a, b)| *a *= b);
        }
        acc
    }

    /// Column factor of `L_depth`: the prior times `c_1 ⋯ c_depth`.
    pub fn column_factor(&self, depth: usize) -> Vec<f64> {
        let mut acc = self.column_product(depth);
        acc.iter_mut().zip(&self.prior).for_each(|(a, p)| *a *= p);
        acc
    }
}

/// `L_0(w|u) ∝ P(w) M[u,w]`.
pub fn literal_listener(lex: &Lexicon, prior: &Prior) -> Result<ListenerMatrix> {
    let mut listener = literal_listener_raw(lex, prior)?;
    normalize_rows(&mut listener, 0)?;
    Ok(listener)
}

fn check_normalizer(sum: f64, depth: usize) -> Result<f64> {
    let inv = 1.0 / sum;
    if !sum.is_normal() || !inv.is_normal() {
        return Err(Error::NumericalUnderflow { depth });
    }
    Ok(inv)
}

/// Normalizes rows in place and returns the normalizers (zero for undefined rows).
fn normalize_rows(l: &mut ListenerMatrix, depth: usize) -> Result<Vec<f64>> {
    let n = l.n;
    let mut r = vec![0.0; l.m];
    l.undefined_rows.clear();
    for u in 0..l.m {
        let row = &mut l.data[u * n..(u + 1) * n];
        let sum: f64 = row.iter().sum();
        if sum == 0.0 {
            l.undefined_rows.push(u);
            continue;
        }
        let inv = check_normalizer(sum, depth)?;
        row.iter_mut().for_each(|x| *x *= inv);
        r[u] = inv;
    }
    Ok(r)
}

fn normalize_columns(data: &mut [f64], m: usize, n: usize, depth: usize) -> Result<(Vec<f64>, Vec<usize>)> {
    let mut sums = vec![0.0; n];
    for u in 0..m {
        for (s, x) in sums.iter_mut().zip(&data[u * n..(u + 1) * n]) {
            *s += x;
        }
    }
    let mut c = vec![0.0; n];
    let mut undefined = Vec::new();
    for (w, &sum) in sums.iter().enumerate() {
        if sum == 0.0 {
            undefined.push(w);
        } else {
            c[w] = check_normalizer(sum, depth)?;
        }
    }
    for u in 0..m {
        for (x, f) in data[u * n..(u + 1) * n].iter_mut().zip(&c) {
            *x *= f;
        }
    }
    Ok((c, undefined))
}

/// `S_{i+1}` from `L_i` by column normalization.
pub fn speaker_from(listener: &ListenerMatrix) -> Result<SpeakerMatrix> {
    let mut data = listener.data.clone();
    let (_, undefined_columns) = normalize_columns(&mut data, listener.m, listener.n, listener.depth + 1)?;
    Ok(SpeakerMatrix {
        depth: listener.depth + 1,
        m: listener.m,
        n: listener.n,
        data,
        undefined_columns,
    })
}

/// Runs the alternating chain to `depth` and returns `L_depth` together with
/// every normalizer used along the way.
pub fn rsa_chain(lex: &Lexicon, prior: &Prior, depth: usize) -> Result<(ListenerMatrix, NormalizationVectors)> {
    rsa_chain_each(lex, prior, depth, |_, _| Ok(()))
}

/// As [`rsa_chain`], calling `visit` with `L_i` and the normalizers gathered so
/// far (`nv.depth == i`) after every step `i = 1..=depth`.
pub fn rsa_chain_each<F>(
    lex: &Lexicon,
    prior: &Prior,
    depth: usize,
    mut visit: F,
) -> Result<(ListenerMatrix, NormalizationVectors)>
where
    F: FnMut(&ListenerMatrix, &NormalizationVectors) -> Result<()>,
{
    let mut listener = literal_listener_raw(lex, prior)?;
    let r0 = normalize_rows(&mut listener, 0)?;
    let mut nv = NormalizationVectors {
        depth: 0,
        prior: prior.weights().to_vec(),
        rows: vec![r0],
        columns: Vec::with_capacity(depth),
    };
    for step in 1..=depth {
        let (c, _) = normalize_columns(&mut listener.data, listener.m, listener.n, step)?;
        let r = normalize_rows(&mut listener, step)?;
        listener.depth = step;
        nv.columns.push(c);
        nv.rows.push(r);
        nv.depth = step;
        visit(&listener, &nv)?;
    }
    Ok((listener, nv))
}

fn literal_listener_raw(lex: &Lexicon, prior: &Prior) -> Result<ListenerMatrix> {
    prior.check(lex)?;
    let (m, n) = (lex.m(), lex.n());
    let mut data = vec![0.0; m * n];
    for u in 0..m {
        for w in lex.row(u).iter() {
            data[u * n + w] = prior.weight(w);
        }
    }
    Ok(ListenerMatrix {
        depth: 0,
        m,
        n,
        data,
        undefined_rows: Vec::new(),
    })
}

/// Rebuilds `L_depth` as `M * (r_{0..depth} ⊗ P·c_{1..depth})`.
pub fn factorized_listener(lex: &Lexicon, nv: &NormalizationVectors) -> Result<ListenerMatrix> {
    let (m, n) = (lex.m(), lex.n());
    if nv.prior.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: nv.prior.len(),
        });
    }
    if let Some(bad) = nv.rows.iter().find(|r| r.len() != m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: bad.len(),
        });
    }
    if let Some(bad) = nv.columns.iter().find(|c| c.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: bad.len(),
        });
    }
    let depth = nv.depth;
    let rows = nv.row_product(depth);
    let cols = nv.column_factor(depth);
    let mut data = vec![0.0; m * n];
    let mut undefined_rows = Vec::new();
    for u in 0..m {
        if rows[u] == 0.0 {
            undefined_rows.push(u);
        }
        for w in lex.row(u).iter() {
            data[u * n + w] = rows[u] * cols[w];
        }
    }
    Ok(ListenerMatrix {
        depth,
        m,
        n,
        data,
        undefined_rows,
    })
}
