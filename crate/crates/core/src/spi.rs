//! Shared pool of information: an immutable map of action distributions and
//! a per-step key that every agent reads identically.
//!
//! Maps are built one quad at a time. A quad starts from four probabilities
//! over the effective push directions `[+x, +y, -x, -y]`, the first capped at
//! `cap` and separated from its opposite by at least `margin`. The four
//! cyclic shifts of that vector give four rows, and each row is expanded to
//! six actions by splitting the two shared-direction columns in half.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::world::{ActionId, N_ACTIONS};

pub const PDL_TOLERANCE: f64 = 1e-9;
pub const MAX_QUAD_ATTEMPTS: u64 = 1_000_000;

pub const DEFAULT_N_PDLS: usize = 4000;
pub const DEFAULT_CAP: f64 = 0.1;
pub const DEFAULT_MARGIN: f64 = 0.3;

/// A probability distribution over the six push actions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pdl([f64; N_ACTIONS]);

#[derive(Debug, Clone, PartialEq)]
pub enum PdlViolation {
    WrongLength(usize),
    Negative { index: usize, value: f64 },
    NotFinite { index: usize },
    BadSum(f64),
}

impl std::fmt::Display for PdlViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PdlViolation::WrongLength(n) => write!(f, "expected 6 entries, got {n}"),
            PdlViolation::Negative { index, value } => {
                write!(f, "entry {index} is negative ({value})")
            }
            PdlViolation::NotFinite { index } => write!(f, "entry {index} is not finite"),
            PdlViolation::BadSum(s) => write!(f, "entries sum to {s}, not 1"),
        }
    }
}

/// Classifies a candidate distribution.
pub fn validate_pdl(candidate: &[f64]) -> std::result::Result<(), PdlViolation> {
    if candidate.len() != N_ACTIONS {
        return Err(PdlViolation::WrongLength(candidate.len()));
    }
    for (index, &value) in candidate.iter().enumerate() {
        if !value.is_finite() {
            return Err(PdlViolation::NotFinite { index });
        }
        if value < 0.0 {
            return Err(PdlViolation::Negative { index, value });
        }
    }
    let sum: f64 = candidate.iter().sum();
    if (sum - 1.0).abs() > PDL_TOLERANCE {
        return Err(PdlViolation::BadSum(sum));
    }
    Ok(())
}

impl Pdl {
    pub fn new(p: [f64; N_ACTIONS]) -> Result<Self> {
        validate_pdl(&p).map_err(|v| Error::invalid(format!("invalid PDL: {v}")))?;
        Ok(Pdl(p))
    }

    pub fn uniform() -> Self {
        Pdl([1.0 / 6.0; N_ACTIONS])
    }

    pub fn probs(&self) -> &[f64; N_ACTIONS] {
        &self.0
    }

    pub fn prob(&self, action: ActionId) -> f64 {
        self.0[action.index()]
    }

    /// Draws an action with probability equal to its entry. Zero entries are
    /// never returned.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ActionId {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut last_nonzero = 0;
        for (i, &p) in self.0.iter().enumerate() {
            if p > 0.0 {
                acc += p;
                last_nonzero = i;
                if u < acc {
                    return ActionId::ALL[i];
                }
            }
        }
        // rounding left u above the accumulated total
        ActionId::ALL[last_nonzero]
    }
}

pub fn sample_action<R: Rng + ?Sized>(pdl: &Pdl, rng: &mut R) -> ActionId {
    pdl.sample(rng)
}

fn check_feasible(cap: f64, margin: f64) -> Result<()> {
    let ok = cap > 0.0 && cap <= 1.0 && (0.0..1.0).contains(&margin) && cap + margin <= 1.0;
    if ok {
        Ok(())
    } else {
        Err(Error::InfeasibleParameters { cap, margin })
    }
}

pub fn is_feasible(cap: f64, margin: f64) -> bool {
    check_feasible(cap, margin).is_ok()
}

/// Draws the base 4-vector and returns its cyclic 4x4 matrix, where row `i`
/// is the base vector shifted right by `i` (`m[i][j] = base[(j - i) mod 4]`).
pub fn generate_quad<R: Rng + ?Sized>(cap: f64, margin: f64, rng: &mut R) -> Result<[[f64; 4]; 4]> {
    check_feasible(cap, margin)?;
    let mut attempts = 0u64;
    let base = loop {
        if attempts >= MAX_QUAD_ATTEMPTS {
            return Err(Error::GenerationStall { attempts });
        }
        attempts += 1;
        let first = rng.random::<f64>() * cap;
        let rest: [f64; 3] = [rng.random(), rng.random(), rng.random()];
        let total: f64 = rest.iter().sum();
        if total <= 0.0 {
            continue;
        }
        let remaining = 1.0 - first;
        let scaled = rest.map(|v| v / total * remaining);
        // opposing direction of the first entry is the third value
        if (first - scaled[1]).abs() >= margin {
            break [first, scaled[0], scaled[1], scaled[2]];
        }
    };
    Ok(cyclic_matrix(base))
}

pub fn cyclic_matrix(base: [f64; 4]) -> [[f64; 4]; 4] {
    let mut m = [[0.0; 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = base[(j + 4 - i) % 4];
        }
    }
    m
}

/// Splits the two shared-direction columns and renormalizes.
pub fn expand_4_to_6(row4: [f64; 4]) -> Result<Pdl> {
    if row4.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::invalid(format!("row entries must be >= 0: {row4:?}")));
    }
    let [v0, v1, v2, v3] = row4;
    let row6 = [v0, v1 / 2.0, v1 / 2.0, v2, v3 / 2.0, v3 / 2.0];
    let sum: f64 = row6.iter().sum();
    if sum <= 0.0 {
        return Err(Error::invalid("row sums to zero"));
    }
    Pdl::new(row6.map(|v| v / sum))
}

/// Immutable collection of distributions plus the parameters that built it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpiMap {
    pdls: Vec<Pdl>,
    pub cap: f64,
    pub margin: f64,
    pub seed: u64,
}

/// Uniform index into a map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Key(pub usize);

pub fn draw_key<R: Rng + ?Sized>(map_size: usize, rng: &mut R) -> Result<Key> {
    if map_size == 0 {
        return Err(Error::invalid("map_size must be at least 1"));
    }
    Ok(Key(rng.random_range(0..map_size)))
}

impl SpiMap {
    pub fn build(n_pdls: usize, cap: f64, margin: f64, seed: u64) -> Result<Self> {
        if n_pdls == 0 || !n_pdls.is_multiple_of(4) {
            return Err(Error::invalid(format!(
                "n_pdls must be a positive multiple of 4, got {n_pdls}"
            )));
        }
        check_feasible(cap, margin)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pdls = Vec::with_capacity(n_pdls);
        for _ in 0..n_pdls / 4 {
            for row in generate_quad(cap, margin, &mut rng)? {
                pdls.push(expand_4_to_6(row)?);
            }
        }
        Ok(Self {
            pdls,
            cap,
            margin,
            seed,
        })
    }

    /// Wraps explicit distributions, e.g. degenerate maps for testing.
    pub fn from_pdls(pdls: Vec<Pdl>, cap: f64, margin: f64, seed: u64) -> Result<Self> {
        if pdls.is_empty() {
            return Err(Error::invalid("map needs at least one PDL"));
        }
        Ok(Self {
            pdls,
            cap,
            margin,
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.pdls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pdls.is_empty()
    }

    pub fn pdls(&self) -> &[Pdl] {
        &self.pdls
    }

    pub fn lookup(&self, key: Key) -> Result<&Pdl> {
        self.pdls
            .get(key.0)
            .ok_or_else(|| Error::invalid(format!("key {} outside map of {}", key.0, self.len())))
    }

    pub fn draw_key<R: Rng + ?Sized>(&self, rng: &mut R) -> Key {
        Key(rng.random_range(0..self.pdls.len()))
    }

    /// Header line followed by one comma-separated distribution per line.
    /// Floats use shortest round-trip formatting so a reload is bit-exact.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "# spi-map n_pdls={} cap={} margin={} seed={}\n",
            self.len(),
            self.cap,
            self.margin,
            self.seed
        );
        for pdl in &self.pdls {
            let p = pdl.probs();
            let _ = writeln!(out, "{},{},{},{},{},{}", p[0], p[1], p[2], p[3], p[4], p[5]);
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::EmptyInput("map file is empty".into()))?;
        let fields = header
            .strip_prefix("# spi-map ")
            .ok_or_else(|| Error::parse(1, "missing '# spi-map' header"))?;
        let (mut n, mut cap, mut margin, mut seed) = (None, None, None, None);
        for kv in fields.split_whitespace() {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::parse(1, format!("bad header field {kv:?}")))?;
            let bad = |e: &dyn std::fmt::Display| Error::parse(1, format!("{k}: {e}"));
            match k {
                "n_pdls" => n = Some(v.parse::<usize>().map_err(|e| bad(&e))?),
                "cap" => cap = Some(v.parse::<f64>().map_err(|e| bad(&e))?),
                "margin" => margin = Some(v.parse::<f64>().map_err(|e| bad(&e))?),
                "seed" => seed = Some(v.parse::<u64>().map_err(|e| bad(&e))?),
                other => return Err(Error::parse(1, format!("unknown header field {other:?}"))),
            }
        }
        let missing = |f: &str| Error::parse(1, format!("header missing {f}"));
        let n = n.ok_or_else(|| missing("n_pdls"))?;
        let mut pdls = Vec::with_capacity(n);
        for (i, line) in lines {
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let vals = line
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::parse(line_no, e.to_string()))
                })
                .collect::<Result<Vec<_>>>()?;
            validate_pdl(&vals).map_err(|v| Error::parse(line_no, v.to_string()))?;
            let mut p = [0.0; N_ACTIONS];
            p.copy_from_slice(&vals);
            pdls.push(Pdl(p));
        }
        if pdls.len() != n {
            return Err(Error::parse(
                0,
                format!("header says {n} PDLs, found {}", pdls.len()),
            ));
        }
        Self::from_pdls(
            pdls,
            cap.ok_or_else(|| missing("cap"))?,
            margin.ok_or_else(|| missing("margin"))?,
            seed.ok_or_else(|| missing("seed"))?,
        )
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Checks every invariant a generated map must satisfy; returns the
    /// first problem found.
    pub fn check_structure(&self) -> Result<()> {
        for (i, pdl) in self.pdls.iter().enumerate() {
            validate_pdl(pdl.probs())
                .map_err(|v| Error::invalid(format!("PDL {i}: {v}")))?;
            let p = pdl.probs();
            if p[1] != p[2] || p[4] != p[5] {
                return Err(Error::invalid(format!("PDL {i}: split columns differ")));
            }
        }
        if !self.pdls.len().is_multiple_of(4) {
            return Err(Error::invalid("map length is not a multiple of 4"));
        }
        for (q, quad) in self.pdls.chunks(4).enumerate() {
            let collapsed: Vec<[f64; 4]> = quad.iter().map(collapse).collect();
            for (i, row) in collapsed.iter().enumerate() {
                for j in 0..4 {
                    let expected = collapsed[0][(j + 4 - i) % 4];
                    if (row[j] - expected).abs() > PDL_TOLERANCE {
                        return Err(Error::invalid(format!(
                            "quad {q}: row {i} is not a cyclic shift of row 0"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Where the exploration branch of an agent draws its action from.
#[derive(Debug, Clone, Copy)]
pub enum Exploration<'a> {
    /// Uniform over the six actions, independently per agent.
    Random,
    /// The distribution selected by the shared per-step key.
    Spi(&'a SpiMap),
}

impl Exploration<'_> {
    pub fn label(&self) -> &'static str {
        match self {
            Exploration::Random => "random",
            Exploration::Spi(_) => "spi",
        }
    }
}

/// Merges the split columns back into the four effective directions.
pub fn collapse(pdl: &Pdl) -> [f64; 4] {
    let p = pdl.probs();
    [p[0], p[1] + p[2], p[3], p[4] + p[5]]
}
