//! Sobol' low-discrepancy sequences and training-design construction.
//!
//! The generator uses the Joe–Kuo primitive polynomials and initial direction
//! numbers (first 64 dimensions, `data/joe_kuo_64.txt`), 32-bit integer
//! arithmetic and Gray-code ordering, so point `i` equals the unscrambled
//! output of other Joe–Kuo based generators bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::ParameterSpace;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

const BITS: usize = 32;
const TABLE: &str = include_str!("../data/joe_kuo_64.txt");

/// Default number of leading points dropped from every QMC design. Point 0 is
/// the origin, which maps to the lower support bound of every marginal.
pub const DEFAULT_SKIP: u64 = 1;

/// Largest dimension the embedded direction-number table supports.
pub fn max_dimension() -> usize {
    1 + TABLE.lines().skip(1).filter(|l| !l.trim().is_empty()).count()
}

fn direction_numbers(d: usize) -> Result<Vec<[u32; BITS]>> {
    let available = max_dimension();
    if d == 0 || d > available {
        return Err(Error::UnsupportedDimension {
            requested: d,
            available,
        });
    }
    let mut out = Vec::with_capacity(d);
    let mut first = [0u32; BITS];
    for (k, v) in first.iter_mut().enumerate() {
        *v = 1u32 << (BITS - 1 - k);
    }
    out.push(first);
    for line in TABLE.lines().skip(1).take(d - 1) {
        let fields: Vec<u32> = line
            .split_whitespace()
            .map(|t| t.parse().expect("embedded direction table is well formed"))
            .collect();
        let (s, a, m) = (fields[1] as usize, fields[2], &fields[3..]);
        let mut v = [0u32; BITS];
        for k in 0..s.min(BITS) {
            v[k] = m[k] << (BITS - 1 - k);
        }
        for k in s..BITS {
            let mut x = v[k - s] ^ (v[k - s] >> s);
            for i in 1..s {
                if (a >> (s - 1 - i)) & 1 == 1 {
                    x ^= v[k - i];
                }
            }
            v[k] = x;
        }
        out.push(v);
    }
    Ok(out)
}

/// Stateful Sobol' stream over `[0, 1)^d`.
#[derive(Debug, Clone)]
pub struct SobolGenerator {
    directions: Vec<[u32; BITS]>,
    state: Vec<u32>,
    index: u64,
}

impl SobolGenerator {
    pub fn new(dim: usize) -> Result<Self> {
        let directions = direction_numbers(dim)?;
        Ok(Self {
            state: vec![0; dim],
            directions,
            index: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.directions.len()
    }

    /// Index of the point the next call to [`Self::next_point`] returns.
    pub fn index(&self) -> u64 {
        self.index
    }

    /// Repositions the stream so the next point is point `index`.
    pub fn seek(&mut self, index: u64) {
        let gray = index ^ (index >> 1);
        for (x, v) in self.state.iter_mut().zip(&self.directions) {
            *x = 0;
            for (k, vk) in v.iter().enumerate() {
                if (gray >> k) & 1 == 1 {
                    *x ^= vk;
                }
            }
        }
        self.index = index;
    }

    /// Writes the current point into `out` and advances.
    pub fn next_point(&mut self, out: &mut [f64]) {
        const SCALE: f64 = 1.0 / 4_294_967_296.0;
        for (o, &x) in out.iter_mut().zip(&self.state) {
            *o = x as f64 * SCALE;
        }
        let c = (self.index + 1).trailing_zeros() as usize;
        // the sequence has 2^32 points; past that the state simply wraps
        if c < BITS {
            for (x, v) in self.state.iter_mut().zip(&self.directions) {
                *x ^= v[c];
            }
        }
        self.index += 1;
    }
}

/// Rows `skip..skip + n` of the canonical `d`-dimensional Sobol' sequence.
pub fn sobol_points(d: usize, n: usize, skip: u64) -> Result<Matrix> {
    let mut gen = SobolGenerator::new(d)?;
    gen.seek(skip);
    let mut m = Matrix::zeros(n, d);
    for i in 0..n {
        gen.next_point(m.row_mut(i));
    }
    Ok(m)
}

/// Reproducible pseudo-random uniforms: ChaCha8 seeded through
/// `seed_from_u64`, one `u64` per entry, row-major, converted with the
/// 53-bit `rand` float mapping.
pub fn mc_points(d: usize, n: usize, seed: u64) -> Matrix {
    mc_points_from(d, 0, n, seed)
}

/// Rows `first_row..first_row + n` of the stream [`mc_points`] draws from.
pub fn mc_points_from(d: usize, first_row: u64, n: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // every f64 consumes one u64, i.e. two 32-bit words of the block stream
    rng.set_word_pos(2 * d as u128 * first_row as u128);
    let mut m = Matrix::zeros(n, d);
    for i in 0..n {
        for x in m.row_mut(i) {
            *x = rng.random::<f64>();
        }
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Qmc { skip: u64 },
    Mc { seed: u64 },
    External,
}

/// Parameter samples (rows) over the dimensions of a [`ParameterSpace`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignMatrix {
    pub values: Matrix,
    pub names: Vec<String>,
    pub provenance: Provenance,
}

impl DesignMatrix {
    pub fn new(values: Matrix, names: Vec<String>, provenance: Provenance) -> Result<Self> {
        if names.len() != values.ncols() {
            return Err(Error::DimensionMismatch {
                expected: names.len(),
                actual: values.ncols(),
            });
        }
        Ok(Self {
            values,
            names,
            provenance,
        })
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn dim(&self) -> usize {
        self.values.ncols()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.values.row(i)
    }

    /// Rows that fall outside the support of `space`, as (row, column) pairs.
    pub fn out_of_support(&self, space: &ParameterSpace) -> Vec<(usize, usize)> {
        let mut bad = Vec::new();
        for (i, r) in self.values.rows().enumerate() {
            for (j, &x) in r.iter().enumerate() {
                let (lo, hi) = space.marginal(j).support();
                if !(x >= lo && x <= hi) {
                    bad.push((i, j));
                }
            }
        }
        bad
    }
}

/// Applies the marginal quantile of `space` column by column.
pub fn map_design(points: &Matrix, space: &ParameterSpace, provenance: Provenance) -> Result<DesignMatrix> {
    if points.ncols() != space.len() {
        return Err(Error::DimensionMismatch {
            expected: space.len(),
            actual: points.ncols(),
        });
    }
    let mut values = Matrix::zeros(points.nrows(), points.ncols());
    for i in 0..points.nrows() {
        for (j, (&u, x)) in points.row(i).iter().zip(values.row_mut(i)).enumerate() {
            *x = space.marginal(j).quantile(u)?;
        }
    }
    DesignMatrix::new(
        values,
        space.names().into_iter().map(String::from).collect(),
        provenance,
    )
}

/// Sobol' training design of `n` rows over `space`.
pub fn qmc_design(space: &ParameterSpace, n: usize, skip: u64) -> Result<DesignMatrix> {
    let pts = sobol_points(space.len(), n, skip)?;
    map_design(&pts, space, Provenance::Qmc { skip })
}

/// Pseudo-random design of `n` rows over `space`, starting at row `first_row`
/// of the seeded stream.
pub fn mc_design(space: &ParameterSpace, first_row: u64, n: usize, seed: u64) -> Result<DesignMatrix> {
    let pts = mc_points_from(space.len(), first_row, n, seed);
    map_design(&pts, space, Provenance::Mc { seed })
}
