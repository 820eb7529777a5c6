//! Fixed-particle-number Fock basis.
//!
//! Configurations of `n_bosons` bosons on `n_sites` modes are enumerated in
//! reverse-lexicographic order of their occupation tuples, so the monomodal
//! state `|N, 0, ..., 0>` is index 0 and `|0, ..., 0, N>` is the last index.
//! Positions are recovered by combinatorial ranking in `O(n_sites)`.

use std::collections::HashMap;
use std::fmt;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Default upper bound on the number of basis states a [`FockBasis`] may hold.
pub const DEFAULT_CAPACITY: usize = 10_000_000;

/// Occupation numbers `n_p` per mode.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Configuration(pub Vec<u32>);

impl Configuration {
    pub fn new(occupations: impl Into<Vec<u32>>) -> Self {
        Configuration(occupations.into())
    }

    pub fn occupations(&self) -> &[u32] {
        &self.0
    }

    pub fn n_modes(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&n| n as u64).sum()
    }
}

impl From<&[u32]> for Configuration {
    fn from(occ: &[u32]) -> Self {
        Configuration(occ.to_vec())
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ">")
    }
}

/// Number of ways to distribute `n_bosons` bosons over `n_sites` modes,
/// `(N_B + N_S - 1)! / (N_B! (N_S - 1)!)`.
pub fn dimension(n_sites: usize, n_bosons: usize) -> Result<usize> {
    if n_sites == 0 {
        return Err(domain("dimension requires at least one mode"));
    }
    // C(n_bosons + k, k) with k = n_sites - 1, built up as an exact running
    // binomial: after step i the accumulator holds C(n_bosons + i, i).
    let k = (n_sites - 1) as u128;
    let n = n_bosons as u128;
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc.checked_mul(n + i).ok_or_else(|| overflow(n_sites, n_bosons))? / i;
    }
    usize::try_from(acc).map_err(|_| overflow(n_sites, n_bosons))
}

fn overflow(n_sites: usize, n_bosons: usize) -> Error {
    Error::Capacity(format!("Fock dimension for {n_bosons} bosons on {n_sites} modes overflows"))
}

/// Ordered enumeration of all configurations with a fixed total boson number.
///
/// Immutable after construction.
#[derive(Clone, PartialEq, Eq)]
pub struct FockBasis {
    n_sites: usize,
    n_bosons: usize,
    /// Row-major occupations, `dim * n_sites` entries.
    occupations: Vec<u32>,
    /// `counts[m * (n_bosons + 1) + r]` = number of configurations of `r`
    /// bosons on `m` modes.
    counts: Vec<usize>,
}

impl fmt::Debug for FockBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FockBasis")
            .field("n_sites", &self.n_sites)
            .field("n_bosons", &self.n_bosons)
            .field("dim", &self.dim())
            .finish()
    }
}

impl FockBasis {
    pub fn new(n_sites: usize, n_bosons: usize) -> Result<Self> {
        Self::with_capacity_limit(n_sites, n_bosons, DEFAULT_CAPACITY)
    }

    pub fn with_capacity_limit(n_sites: usize, n_bosons: usize, limit: usize) -> Result<Self> {
        let dim = dimension(n_sites, n_bosons)?;
        if dim > limit {
            return Err(Error::Capacity(format!(
                "basis of {n_bosons} bosons on {n_sites} modes has {dim} states (limit {limit})"
            )));
        }
        let counts = count_table(n_sites, n_bosons)?;
        let mut occupations = Vec::with_capacity(dim * n_sites);
        let mut current = vec![0u32; n_sites];
        current[0] = n_bosons as u32;
        loop {
            occupations.extend_from_slice(&current);
            if !next_reverse_lex(&mut current) {
                break;
            }
        }
        debug_assert_eq!(occupations.len(), dim * n_sites);
        Ok(FockBasis { n_sites, n_bosons, occupations, counts })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_bosons(&self) -> usize {
        self.n_bosons
    }

    pub fn dim(&self) -> usize {
        self.occupations.len() / self.n_sites
    }

    /// Occupations of the configuration at `index`.
    pub fn config_of(&self, index: usize) -> &[u32] {
        &self.occupations[index * self.n_sites..(index + 1) * self.n_sites]
    }

    pub fn configuration(&self, index: usize) -> Configuration {
        Configuration::from(self.config_of(index))
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[u32]> + '_ {
        self.occupations.chunks_exact(self.n_sites)
    }

    /// Position of `occupations` in the enumeration.
    pub fn index_of(&self, occupations: &[u32]) -> Result<usize> {
        if occupations.len() != self.n_sites {
            return Err(domain(format!("configuration has {} modes, basis has {}", occupations.len(), self.n_sites)));
        }
        let total: u64 = occupations.iter().map(|&n| n as u64).sum();
        if total != self.n_bosons as u64 {
            return Err(domain(format!("configuration holds {total} bosons, basis holds {}", self.n_bosons)));
        }
        Ok(self.rank(occupations))
    }

    /// Ranking without validation; `occupations` must belong to the basis.
    #[inline]
    pub(crate) fn rank(&self, occupations: &[u32]) -> usize {
        let stride = self.n_bosons + 1;
        let mut remaining = self.n_bosons;
        let mut index = 0;
        for (i, &n) in occupations[..self.n_sites - 1].iter().enumerate() {
            let n = n as usize;
            if remaining > n {
                // configurations with a larger n_i come first: all ways to put
                // at most remaining - n - 1 bosons on the modes after i
                index += self.counts[(self.n_sites - i) * stride + remaining - n - 1];
            }
            remaining -= n;
        }
        index
    }

    /// Cross-checks the combinatorial ranking against a hash-map inverse of
    /// the enumeration.
    pub fn validate(&self) -> Result<()> {
        let mut seen: HashMap<&[u32], usize> = HashMap::with_capacity(self.dim());
        for (i, c) in self.iter().enumerate() {
            if seen.insert(c, i).is_some() {
                return Err(domain(format!("duplicate configuration at index {i}")));
            }
            if self.rank(c) != i {
                return Err(domain(format!("rank of configuration {i} is {}", self.rank(c))));
            }
        }
        if seen.len() != dimension(self.n_sites, self.n_bosons)? {
            return Err(domain("enumeration length differs from dimension"));
        }
        Ok(())
    }

    /// One configuration per line, space-separated occupations.
    pub fn write_text<W: Write>(&self, mut out: W) -> io::Result<()> {
        for c in self.iter() {
            let mut first = true;
            for n in c {
                if !first {
                    out.write_all(b" ")?;
                }
                write!(out, "{n}")?;
                first = false;
            }
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("ascii digits")
    }

    /// Parses the text format back into a list of configurations.
    pub fn read_text<R: BufRead>(input: R) -> Result<Vec<Configuration>> {
        let mut configs = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let occ = line
                .split_whitespace()
                .map(|tok| tok.parse::<u32>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| domain(format!("line {}: {e}", lineno + 1)))?;
            configs.push(Configuration(occ));
        }
        Ok(configs)
    }
}

fn count_table(n_sites: usize, n_bosons: usize) -> Result<Vec<usize>> {
    let stride = n_bosons + 1;
    let mut counts = vec![0usize; (n_sites + 1) * stride];
    counts[0] = 1;
    for m in 1..=n_sites {
        let mut running = 0usize;
        for r in 0..=n_bosons {
            // configs of r on m modes = sum_{s<=r} configs of s on m-1 modes
            running = running.checked_add(counts[(m - 1) * stride + r]).ok_or_else(|| overflow(n_sites, n_bosons))?;
            counts[m * stride + r] = running;
        }
    }
    Ok(counts)
}

/// Advances `c` to its reverse-lexicographic successor with the same total.
/// Returns false when `c` is the last configuration `(0, ..., 0, N)`.
fn next_reverse_lex(c: &mut [u32]) -> bool {
    let last = c.len() - 1;
    let Some(k) = (0..last).rev().find(|&k| c[k] > 0) else {
        return false;
    };
    let tail: u32 = c[k + 1..].iter().sum();
    c[k] -= 1;
    c[k + 1] = tail + 1;
    for x in &mut c[k + 2..] {
        *x = 0;
    }
    true
}
