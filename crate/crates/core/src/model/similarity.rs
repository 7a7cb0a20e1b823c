use std::io::{BufRead, Read, Write};

use crate::error::{Error, Result};

/// Smallest similarity the generators emit; keeps 0 free as the "unobserved" value.
pub const MIN_SIMILARITY: f64 = 1e-6;

const BINARY_MAGIC: &[u8; 4] = b"SPCL";

/// Dense symmetric matrix of pairwise similarities. The diagonal is stored as
/// zero and never consulted.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    n: usize,
    values: Vec<f64>,
}

impl SimilarityMatrix {
    /// Validates symmetry and strict positivity of every off-diagonal entry.
    pub fn new(n: usize, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::Parse(format!(
                "expected {} values for a {n}x{n} matrix, got {}",
                n * n,
                values.len()
            )));
        }
        for i in 0..n {
            values[i * n + i] = 0.0;
            for j in (i + 1)..n {
                let a = values[i * n + j];
                let b = values[j * n + i];
                if a != b {
                    return Err(Error::Asymmetric { i, j });
                }
                if !(a.is_finite() && a > 0.0) {
                    return Err(Error::NonPositiveSimilarity { i, j, value: a });
                }
            }
        }
        Ok(SimilarityMatrix { n, values })
    }

    /// Fills the upper triangle from `f(i, j)` (`i < j`) and mirrors it.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = f(i, j);
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        Self::new(n, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    /// Applies `perm` to item labels: entry `(perm[i], perm[j])` of the result
    /// equals entry `(i, j)` of `self`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: perm.len(),
            });
        }
        let n = self.n;
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                values[perm[i] * n + perm[j]] = self.get(i, j);
            }
        }
        Self::new(n, values)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for i in 0..self.n {
            let row: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut values = Vec::new();
        let mut rows = 0;
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            for field in line.split(',') {
                let v: f64 = field.trim().parse().map_err(|_| {
                    Error::Parse(format!("line {}: bad number {field:?}", lineno + 1))
                })?;
                values.push(v);
            }
            rows += 1;
        }
        Self::new(rows, values)
    }

    /// Binary layout: `b"SPCL"`, `u32` item count, then `n*n` row-major
    /// `f64`, all little-endian.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let n = u32::try_from(self.n)
            .map_err(|_| Error::InvalidParameter(format!("{} items exceed u32", self.n)))?;
        w.write_all(BINARY_MAGIC)?;
        w.write_all(&n.to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != BINARY_MAGIC {
            return Err(Error::Parse("missing SPCL magic".into()));
        }
        let mut word = [0u8; 4];
        r.read_exact(&mut word)?;
        let n = u32::from_le_bytes(word) as usize;
        let mut bytes = vec![0u8; n * n * 8];
        r.read_exact(&mut bytes)?;
        let values = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        Self::new(n, values)
    }
}
