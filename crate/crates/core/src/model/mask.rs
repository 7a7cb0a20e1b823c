use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Symmetric record of which pairwise similarities were observed.
///
/// Only the strict upper triangle is stored; `(i, j)` and `(j, i)` share a
/// slot and the diagonal has none.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationMask {
    n: usize,
    observed: Vec<bool>,
    p_nominal: f64,
}

#[inline]
fn slot(n: usize, i: usize, j: usize) -> usize {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    a * (2 * n - a - 1) / 2 + (b - a - 1)
}

pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

impl ObservationMask {
    pub fn empty(n: usize) -> Self {
        ObservationMask {
            n,
            observed: vec![false; pair_count(n)],
            p_nominal: 0.0,
        }
    }

    pub fn full(n: usize) -> Self {
        ObservationMask {
            n,
            observed: vec![true; pair_count(n)],
            p_nominal: 1.0,
        }
    }

    /// Builds a mask from `f(i, j)` evaluated once per unordered pair `i < j`.
    pub fn from_fn(n: usize, p_nominal: f64, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut observed = Vec::with_capacity(pair_count(n));
        for i in 0..n {
            for j in (i + 1)..n {
                observed.push(f(i, j));
            }
        }
        ObservationMask {
            n,
            observed,
            p_nominal,
        }
    }

    pub fn from_pairs(
        n: usize,
        p_nominal: f64,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut mask = Self::empty(n);
        mask.p_nominal = p_nominal;
        for (i, j) in pairs {
            mask.observe(i, j)?;
        }
        Ok(mask)
    }

    pub fn observe(&mut self, i: usize, j: usize) -> Result<()> {
        for item in [i, j] {
            if item >= self.n {
                return Err(Error::ItemOutOfRange { item, n: self.n });
            }
        }
        if i == j {
            return Err(Error::InvalidParameter(format!(
                "diagonal pair ({i}, {i}) cannot be observed"
            )));
        }
        let k = slot(self.n, i, j);
        self.observed[k] = true;
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p_nominal(&self) -> f64 {
        self.p_nominal
    }

    /// Always false on the diagonal.
    #[inline]
    pub fn is_observed(&self, i: usize, j: usize) -> bool {
        i != j && self.observed[slot(self.n, i, j)]
    }

    pub fn count(&self) -> usize {
        self.observed.iter().filter(|&&o| o).count()
    }

    /// Observed pairs `(i, j)` with `i < j`, in row-major order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n;
        (0..n)
            .flat_map(move |i| ((i + 1)..n).map(move |j| (i, j)))
            .zip(self.observed.iter())
            .filter_map(|(pair, &o)| o.then_some(pair))
    }

    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: perm.len(),
            });
        }
        Self::from_pairs(
            self.n,
            self.p_nominal,
            self.pairs().map(|(i, j)| (perm[i], perm[j])),
        )
    }

    /// Writes `# n=<n>,p=<p>`, an `i,j` header, then one observed pair per line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# n={},p={}", self.n, self.p_nominal)?;
        writeln!(w, "i,j")?;
        for (i, j) in self.pairs() {
            writeln!(w, "{i},{j}")?;
        }
        Ok(())
    }

    /// Reads a pair list. The item count comes from `n` when given, otherwise
    /// from the `# n=` comment line.
    pub fn read_csv<R: BufRead>(r: R, n: Option<usize>) -> Result<Self> {
        let mut header_n = None;
        let mut p_nominal = f64::NAN;
        let mut pairs = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                for kv in comment.split(',') {
                    match kv.trim().split_once('=') {
                        Some(("n", v)) => header_n = v.trim().parse().ok(),
                        Some(("p", v)) => p_nominal = v.trim().parse().unwrap_or(f64::NAN),
                        _ => {}
                    }
                }
                continue;
            }
            if line == "i,j" {
                continue;
            }
            let parse = |s: &str| -> Result<usize> {
                s.trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("line {}: bad index {s:?}", lineno + 1)))
            };
            let (a, b) = line
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("line {}: expected i,j", lineno + 1)))?;
            pairs.push((parse(a)?, parse(b)?));
        }
        let n = match (n, header_n) {
            (Some(n), Some(h)) if n != h => {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: h,
                })
            }
            (Some(n), _) | (None, Some(n)) => n,
            (None, None) => {
                return Err(Error::Parse(
                    "mask CSV has no `# n=` line and no item count was supplied".into(),
                ))
            }
        };
        Self::from_pairs(n, p_nominal, pairs)
    }
}
