//! The redundancy lattice over antichains of source subsets.
//!
//! An antichain `a` sits below `b` (`a ⪯ b`) when every subset in `b`
//! contains some subset of `a`. Equivalently the up-set generated by `b` is
//! contained in the up-set generated by `a`, which is how the lattice stores
//! the order: one `u32` per atom, bit `m` set when subset mask `m` lies in
//! the up-set.

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};

pub const MAX_SOURCES: usize = 5;

/// A nonempty set of source indices, as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourceSubset(u8);

impl SourceSubset {
    pub fn new(mask: u8, n_sources: usize) -> Result<Self> {
        if mask == 0 || (mask as usize) >= (1 << n_sources) {
            return Err(Error::InvalidArgument(format!(
                "subset mask {mask:#b} is not a nonempty subset of {n_sources} sources"
            )));
        }
        Ok(Self(mask))
    }

    pub fn mask(self) -> u8 {
        self.0
    }

    pub fn is_subset_of(self, other: SourceSubset) -> bool {
        self.0 & other.0 == self.0
    }

    pub fn sources(self) -> impl Iterator<Item = usize> {
        (0..8).filter(move |i| self.0 & (1 << i) != 0)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for SourceSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for s in self.sources() {
            write!(f, "{s}")?;
        }
        write!(f, "}}")
    }
}

/// Pairwise incomparable source subsets, sorted by mask.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Antichain(Vec<SourceSubset>);

impl Antichain {
    pub fn new(mut members: Vec<SourceSubset>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidArgument("antichain must be nonempty".into()));
        }
        members.sort_unstable();
        members.dedup();
        for (i, a) in members.iter().enumerate() {
            for b in &members[i + 1..] {
                if a.is_subset_of(*b) || b.is_subset_of(*a) {
                    return Err(Error::InvalidArgument(format!(
                        "{a} and {b} are comparable"
                    )));
                }
            }
        }
        Ok(Self(members))
    }

    /// Parses the canonical `{0}{12}` form.
    pub fn parse(s: &str, n_sources: usize) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("malformed antichain `{s}`"));
        let mut members = Vec::new();
        let mut rest = s.trim();
        while !rest.is_empty() {
            let body = rest.strip_prefix('{').ok_or_else(bad)?;
            let end = body.find('}').ok_or_else(bad)?;
            let mut mask = 0u8;
            for c in body[..end].chars() {
                let d = c.to_digit(10).ok_or_else(bad)? as usize;
                if d >= n_sources {
                    return Err(bad());
                }
                mask |= 1 << d;
            }
            members.push(SourceSubset::new(mask, n_sources)?);
            rest = &body[end + 1..];
        }
        Self::new(members)
    }

    pub fn members(&self) -> &[SourceSubset] {
        &self.0
    }

    /// Bitmask of all subset masks that contain some member.
    pub fn upset(&self, n_sources: usize) -> u32 {
        let mut up = 0u32;
        for m in 1..(1u32 << n_sources) {
            if self.0.iter().any(|t| (t.0 as u32) & m == t.0 as u32) {
                up |= 1 << m;
            }
        }
        up
    }
}

impl fmt::Display for Antichain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// `a ⪯ b`: every subset in `b` contains some subset in `a`.
pub fn precedes(a: &Antichain, b: &Antichain) -> bool {
    b.0.iter().all(|s| a.0.iter().any(|t| t.is_subset_of(*s)))
}

fn check_source_count(n_sources: usize) -> Result<()> {
    if (1..=MAX_SOURCES).contains(&n_sources) {
        Ok(())
    } else {
        Err(Error::SourceCount(n_sources))
    }
}

/// All antichains of nonempty subsets of `n_sources` sources, ordered bottom
/// first: by decreasing up-set size, then by member masks. The result is a
/// linear extension of `⪯`.
pub fn enumerate_atoms(n_sources: usize) -> Result<Vec<Antichain>> {
    check_source_count(n_sources)?;
    let full = (1u8 << n_sources) - 1;
    let mut out = Vec::new();
    let mut current = Vec::new();

    fn extend(next: u8, full: u8, current: &mut Vec<SourceSubset>, out: &mut Vec<Antichain>) {
        for m in next..=full {
            let s = SourceSubset(m);
            if current
                .iter()
                .any(|t: &SourceSubset| t.is_subset_of(s) || s.is_subset_of(*t))
            {
                continue;
            }
            current.push(s);
            out.push(Antichain(current.clone()));
            if m < full {
                extend(m + 1, full, current, out);
            }
            current.pop();
        }
    }
    extend(1, full, &mut current, &mut out);

    let mut keyed: Vec<(u32, Antichain)> = out
        .into_iter()
        .map(|a| (a.upset(n_sources).count_ones(), a))
        .collect();
    keyed.sort_by(|(ua, a), (ub, b)| ub.cmp(ua).then_with(|| a.cmp(b)));
    Ok(keyed.into_iter().map(|(_, a)| a).collect())
}

/// The partial-information lattice for a fixed number of sources.
#[derive(Debug)]
pub struct PiLattice {
    n_sources: usize,
    atoms: Vec<Antichain>,
    upsets: Vec<u32>,
    index: HashMap<Antichain, usize>,
    /// Strict down-set of each atom, as ascending atom indices.
    below: Vec<Vec<u32>>,
    ranks: Vec<usize>,
    height: usize,
}

impl PiLattice {
    pub fn new(n_sources: usize) -> Result<Self> {
        let atoms = enumerate_atoms(n_sources)?;
        let upsets: Vec<u32> = atoms.iter().map(|a| a.upset(n_sources)).collect();
        // Strict predecessors always come earlier in the linear extension.
        let below = (0..atoms.len())
            .map(|b| {
                let ub = upsets[b];
                (0..b)
                    .filter(|&a| upsets[a] & ub == ub && upsets[a] != ub)
                    .map(|a| a as u32)
                    .collect()
            })
            .collect();
        let index = atoms
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i))
            .collect();
        let mut lattice = Self {
            n_sources,
            atoms,
            upsets,
            index,
            below,
            ranks: Vec::new(),
            height: 0,
        };
        compute_ranks(&mut lattice)?;
        Ok(lattice)
    }

    /// Process-wide cached lattice.
    pub fn shared(n_sources: usize) -> Result<&'static PiLattice> {
        check_source_count(n_sources)?;
        static CACHE: [OnceLock<PiLattice>; MAX_SOURCES] = [const { OnceLock::new() }; MAX_SOURCES];
        let cell = &CACHE[n_sources - 1];
        if let Some(l) = cell.get() {
            return Ok(l);
        }
        let built = PiLattice::new(n_sources)?;
        Ok(cell.get_or_init(|| built))
    }

    pub fn n_sources(&self) -> usize {
        self.n_sources
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[Antichain] {
        &self.atoms
    }

    pub fn atom(&self, i: usize) -> &Antichain {
        &self.atoms[i]
    }

    pub fn index_of(&self, a: &Antichain) -> Option<usize> {
        self.index.get(a).copied()
    }

    pub fn bottom(&self) -> usize {
        0
    }

    pub fn top(&self) -> usize {
        self.atoms.len() - 1
    }

    /// `atoms[a] ⪯ atoms[b]`.
    pub fn precedes(&self, a: usize, b: usize) -> bool {
        self.upsets[a] & self.upsets[b] == self.upsets[b]
    }

    pub fn strictly_below(&self, i: usize) -> &[u32] {
        &self.below[i]
    }

    pub fn rank(&self, i: usize) -> usize {
        self.ranks[i]
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// One line per atom: the canonical string, a space, and the rank.
    pub fn dump(&self) -> String {
        self.atoms
            .iter()
            .zip(&self.ranks)
            .map(|(a, r)| format!("{a} {r}\n"))
            .collect()
    }
}

/// Fills in longest-chain ranks from the bottom atom and the lattice height.
pub fn compute_ranks(l: &mut PiLattice) -> Result<()> {
    let n = l.atoms.len();
    let mut ranks = vec![0usize; n];
    for b in 0..n {
        let below = &l.below[b];
        if below.is_empty() {
            if b != 0 {
                return Err(Error::Internal(format!(
                    "atom {} has no predecessor but is not the bottom",
                    l.atoms[b]
                )));
            }
            continue;
        }
        ranks[b] = below
            .iter()
            .map(|&a| ranks[a as usize] + 1)
            .max()
            .unwrap_or(0);
    }
    let bottom_ok = l.atoms[0].members().len() == l.n_sources
        && l.atoms[0].members().iter().all(|s| s.len() == 1);
    if !bottom_ok || l.below[n - 1].len() != n - 1 {
        return Err(Error::Internal("lattice is not bounded".into()));
    }
    l.height = ranks[n - 1];
    l.ranks = ranks;
    Ok(())
}
