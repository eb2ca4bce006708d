//! Deformed oscillator families and Fock-space bookkeeping.
//!
//! * Three oscillator families act on the Fock spaces: `a^1..a^{M+1}` and
//!   `c^1..c^{N+1}` with metric `+1`, `b^1..b^{N+1}` with metric `-1`. The
//!   nonzero commutators are `[x_m, x_{-m}] = g [m]^2 / m` within a family
//!   member, and the zero mode acts on a weight `lambda` by `g lambda`.
//! * [`FockState`]: a weight vector together with a canonical creation
//!   monomial, the basis elements of every computation here.
//! * [`FockVector`] and [`ZVector`]: exact linear combinations of states,
//!   the latter graded by an ambient power of the spectral variable `z`.
//! * [`SpaceSpec`]: the weight lattices of the three module families at
//!   `(M,N) = (1,0)`, with degree operator eigenvalues and parity anchoring.
//! * Enumerators for raw oscillator monomials and for the module basis
//!   monomials in the currents `h^1_{-n}`, `h^2_{-n}`, `c_{-n}`.

use crate::coeff::{rat, ratio, Coeff, LaurentQ, Rat, RatQ};

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::sync::{Arc, Mutex, OnceLock};
use thiserror::Error;

/// Oscillator family tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Fam {
    /// `a`-family, metric `+1`, one member per even node plus one.
    A,
    /// `b`-family, metric `-1`.
    B,
    /// `c`-family, metric `+1`, paired with the `b`-family.
    C,
}

/// Rank data `(M, N)` of the superalgebra; fixes the oscillator species list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OscConfig {
    /// Number of `a`-species minus one (`a^1..a^{M+1}`).
    pub m: usize,
    /// Number of `b`- and `c`-species minus one (`b^1..b^{N+1}`, `c^1..c^{N+1}`).
    pub n: usize,
}

/// Errors from Fock-space bookkeeping.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum BosonError {
    /// A parity or projector query needs an integer c-charge offset.
    #[error("c-weight offset {0} is not an integer")]
    NonIntegerParity(String),
}

impl OscConfig {
    /// The configuration used by the Fock-module computations.
    pub fn one_zero() -> Self {
        OscConfig { m: 1, n: 0 }
    }

    /// Total number of oscillator species: `(M+1) + 2(N+1)`.
    pub fn nspecies(&self) -> usize {
        self.m + 1 + 2 * (self.n + 1)
    }

    /// Flat species index of `a^k` (1-based `k`).
    pub fn a(&self, k: usize) -> usize {
        assert!(k >= 1 && k <= self.m + 1);
        k - 1
    }

    /// Flat species index of `b^k` (1-based `k`).
    pub fn b(&self, k: usize) -> usize {
        assert!(k >= 1 && k <= self.n + 1);
        self.m + 1 + (k - 1)
    }

    /// Flat species index of `c^k` (1-based `k`).
    pub fn c(&self, k: usize) -> usize {
        assert!(k >= 1 && k <= self.n + 1);
        self.m + 1 + self.n + 1 + (k - 1)
    }

    /// Family and 1-based member index of a flat species id.
    pub fn species(&self, s: usize) -> (Fam, usize) {
        if s <= self.m {
            (Fam::A, s + 1)
        } else if s <= self.m + 1 + self.n {
            (Fam::B, s - self.m)
        } else {
            (Fam::C, s - self.m - 1 - self.n)
        }
    }

    /// Metric sign `g_s` of a species: `+1` for `a`/`c`, `-1` for `b`.
    pub fn metric(&self, s: usize) -> i64 {
        match self.species(s).0 {
            Fam::A | Fam::C => 1,
            Fam::B => -1,
        }
    }

    /// Display name of a species, e.g. `a1`, `b1`, `c2`.
    pub fn species_name(&self, s: usize) -> String {
        let (fam, k) = self.species(s);
        let tag = match fam {
            Fam::A => 'a',
            Fam::B => 'b',
            Fam::C => 'c',
        };
        format!("{tag}{k}")
    }

    /// The commutator value `[x_{s,n}, x_{s,-n}] = g_s [n]^2 / n` for `n > 0`.
    pub fn contraction(&self, s: usize, n: u32) -> RatQ {
        let nn = n as i64;
        let sq = crate::coeff::qint(nn).mul(&crate::coeff::qint(nn));
        RatQ::from_laurent(sq).scale(&ratio(self.metric(s), nn))
    }

    /// Zero-mode eigenvalue of `x_{s,0}` on a weight: `g_s lambda_s`.
    pub fn zero_mode(&self, s: usize, weight: &[Rat]) -> Rat {
        let g = rat(self.metric(s));
        &weight[s] * g
    }
}

/// A Fock basis state: weight vector plus a canonical creation monomial.
///
/// Modes are stored as `(species, n, multiplicity)` with `n > 0` standing for
/// the creation operator `x_{s,-n}`, sorted by species then by `n`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FockState {
    /// Zero-mode weight, one entry per species in flat order.
    pub weight: Vec<Rat>,
    /// Creation monomial in canonical order.
    pub modes: Vec<(usize, u32, u32)>,
}

impl FockState {
    /// Pure momentum state of the given weight.
    pub fn vacuum(weight: Vec<Rat>) -> Self {
        FockState { weight, modes: Vec::new() }
    }

    /// Total oscillator degree `sum n * mult`.
    pub fn degree(&self) -> u32 {
        self.modes.iter().map(|&(_, n, m)| n * m).sum()
    }

    /// Multiplicity of the creation mode `x_{s,-n}`.
    pub fn mult_of(&self, s: usize, n: u32) -> u32 {
        self.modes
            .iter()
            .find(|&&(s2, n2, _)| s2 == s && n2 == n)
            .map(|&(_, _, m)| m)
            .unwrap_or(0)
    }

    /// New state with the multiplicity of `x_{s,-n}` changed by `delta`.
    pub fn with_mode_delta(&self, s: usize, n: u32, delta: i64) -> Self {
        let mut modes = self.modes.clone();
        match modes.iter().position(|&(s2, n2, _)| s2 == s && n2 == n) {
            Some(idx) => {
                let cur = modes[idx].2 as i64 + delta;
                assert!(cur >= 0, "negative multiplicity");
                if cur == 0 {
                    modes.remove(idx);
                } else {
                    modes[idx].2 = cur as u32;
                }
            }
            None => {
                assert!(delta > 0, "removing absent mode");
                modes.push((s, n, delta as u32));
                modes.sort_unstable();
            }
        }
        FockState { weight: self.weight.clone(), modes }
    }

    /// New state with the weight shifted by `delta` (componentwise).
    pub fn with_weight_shift(&self, delta: &[Rat]) -> Self {
        let weight = self
            .weight
            .iter()
            .zip(delta.iter())
            .map(|(w, d)| w + d)
            .collect();
        FockState { weight, modes: self.modes.clone() }
    }

    /// Render as `|l1,l2,...>` optionally followed by ` * s[-n]^m` factors.
    pub fn render(&self, cfg: &OscConfig) -> String {
        let mut out = String::from("|");
        for (i, w) in self.weight.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{w}");
        }
        out.push('>');
        for (idx, &(s, n, m)) in self.modes.iter().enumerate() {
            let sep = if idx == 0 { " * " } else { " " };
            let _ = write!(out, "{sep}{}[-{}]^{}", cfg.species_name(s), n, m);
        }
        out
    }
}

/// Integer handle of an interned [`FockState`].
///
/// States are deduplicated in a process-wide table so that vectors and memo
/// tables can work with cheap integer keys instead of deep structural
/// comparisons.
pub type StateId = u32;

struct Interner {
    ids: HashMap<Arc<FockState>, StateId>,
    states: Vec<Arc<FockState>>,
}

static INTERNER: OnceLock<Mutex<Interner>> = OnceLock::new();

fn interner() -> &'static Mutex<Interner> {
    INTERNER.get_or_init(|| {
        Mutex::new(Interner { ids: HashMap::new(), states: Vec::new() })
    })
}

/// Intern a state, returning its stable handle.
pub fn intern_state(state: &FockState) -> StateId {
    let mut tab = interner().lock().unwrap();
    if let Some(&id) = tab.ids.get(state) {
        return id;
    }
    let id = tab.states.len() as StateId;
    let arc = Arc::new(state.clone());
    tab.states.push(arc.clone());
    tab.ids.insert(arc, id);
    id
}

/// Resolve a handle back to its state.
pub fn resolve_state(id: StateId) -> Arc<FockState> {
    interner().lock().unwrap().states[id as usize].clone()
}

/// Exact linear combination of Fock basis states, stored as interned state
/// handles with nonzero coefficients, sorted by handle.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FockVector {
    terms: Vec<(StateId, Coeff)>,
}

impl FockVector {
    /// The zero vector.
    pub fn zero() -> Self {
        FockVector { terms: Vec::new() }
    }

    /// A single basis state with coefficient `1`.
    pub fn from_state(state: FockState) -> Self {
        FockVector { terms: vec![(intern_state(&state), Coeff::one())] }
    }

    /// Canonicalize a raw list of `(handle, coefficient)` terms: sort by
    /// handle, combine duplicates, drop zeros.
    pub fn from_raw(mut raw: Vec<(StateId, Coeff)>) -> Self {
        raw.sort_unstable_by_key(|&(id, _)| id);
        let mut terms: Vec<(StateId, Coeff)> = Vec::with_capacity(raw.len());
        for (id, c) in raw {
            match terms.last_mut() {
                Some((last, acc)) if *last == id => *acc = acc.add(&c),
                _ => terms.push((id, c)),
            }
        }
        terms.retain(|(_, c)| !c.is_zero());
        FockVector { terms }
    }

    /// Whether all coefficients vanish.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of stored basis terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// Whether the vector stores no terms.
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Iterator over `(handle, coefficient)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (StateId, &Coeff)> {
        self.terms.iter().map(|(id, c)| (*id, c))
    }

    /// Iterator over `(state, coefficient)` pairs, resolving handles.
    pub fn states(&self) -> impl Iterator<Item = (Arc<FockState>, &Coeff)> {
        self.terms.iter().map(|(id, c)| (resolve_state(*id), c))
    }

    /// Add `coeff * state` into the vector.
    pub fn insert_add(&mut self, state: FockState, coeff: Coeff) {
        self.insert_add_id(intern_state(&state), coeff);
    }

    /// Add `coeff * state` by handle.
    pub fn insert_add_id(&mut self, id: StateId, coeff: Coeff) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.binary_search_by_key(&id, |&(i, _)| i) {
            Ok(idx) => {
                let next = self.terms[idx].1.add(&coeff);
                if next.is_zero() {
                    self.terms.remove(idx);
                } else {
                    self.terms[idx].1 = next;
                }
            }
            Err(idx) => self.terms.insert(idx, (id, coeff)),
        }
    }

    fn merged(&self, other: &Self, negate_other: bool) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < other.terms.len() {
            let (ia, ca) = &self.terms[i];
            let (ib, cb) = &other.terms[j];
            match ia.cmp(ib) {
                std::cmp::Ordering::Less => {
                    terms.push((*ia, ca.clone()));
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    let c = if negate_other { cb.neg() } else { cb.clone() };
                    terms.push((*ib, c));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let c = if negate_other { ca.sub(cb) } else { ca.add(cb) };
                    if !c.is_zero() {
                        terms.push((*ia, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        terms.extend(self.terms[i..].iter().cloned());
        for (id, c) in &other.terms[j..] {
            let c = if negate_other { c.neg() } else { c.clone() };
            terms.push((*id, c));
        }
        FockVector { terms }
    }

    /// Sum of two vectors.
    pub fn add(&self, other: &Self) -> Self {
        self.merged(other, false)
    }

    /// Difference of two vectors.
    pub fn sub(&self, other: &Self) -> Self {
        self.merged(other, true)
    }

    /// Scale every coefficient.
    pub fn scale(&self, c: &Coeff) -> Self {
        if c.is_zero() {
            return FockVector::zero();
        }
        FockVector {
            terms: self
                .terms
                .iter()
                .map(|(id, k)| (*id, k.mul(c)))
                .collect(),
        }
    }

    /// Coefficient of a state (zero if absent).
    pub fn coeff_of(&self, state: &FockState) -> Coeff {
        let id = intern_state(state);
        match self.terms.binary_search_by_key(&id, |&(i, _)| i) {
            Ok(idx) => self.terms[idx].1.clone(),
            Err(_) => Coeff::zero(),
        }
    }
}

/// A [`FockVector`] graded by an ambient power of the spectral variable.
///
/// Mode extraction never touches the ambient grading; applying a full
/// current merges its spectral powers into it.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ZVector {
    slices: BTreeMap<Rat, FockVector>,
}

impl ZVector {
    /// The zero vector.
    pub fn zero() -> Self {
        ZVector { slices: BTreeMap::new() }
    }

    /// A single state at ambient power `z^0`.
    pub fn from_state(state: FockState) -> Self {
        let mut slices = BTreeMap::new();
        slices.insert(Rat::zero(), FockVector::from_state(state));
        ZVector { slices }
    }

    /// Whether all slices vanish.
    pub fn is_zero(&self) -> bool {
        self.slices.is_empty()
    }

    /// Iterator over `(z-exponent, slice)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (&Rat, &FockVector)> {
        self.slices.iter()
    }

    /// Add `coeff * state` at ambient exponent `zexp`.
    pub fn insert_add(&mut self, zexp: Rat, state: FockState, coeff: Coeff) {
        self.insert_add_id(zexp, intern_state(&state), coeff);
    }

    /// Add `coeff * state` at ambient exponent `zexp`, by handle.
    pub fn insert_add_id(&mut self, zexp: Rat, id: StateId, coeff: Coeff) {
        if coeff.is_zero() {
            return;
        }
        let slice = self.slices.entry(zexp.clone()).or_default();
        slice.insert_add_id(id, coeff);
        if slice.is_zero() {
            self.slices.remove(&zexp);
        }
    }

    /// Merge a whole slice at ambient exponent `zexp`.
    pub fn insert_slice(&mut self, zexp: Rat, slice: FockVector) {
        if slice.is_zero() {
            return;
        }
        match self.slices.entry(zexp) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(slice);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let merged = e.get().add(&slice);
                if merged.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = merged;
                }
            }
        }
    }

    /// Sum.
    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (z, slice) in &other.slices {
            out.insert_slice(z.clone(), slice.clone());
        }
        out
    }

    /// Difference.
    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&Coeff::int(-1)))
    }

    /// Scale every coefficient.
    pub fn scale(&self, c: &Coeff) -> Self {
        if c.is_zero() {
            return ZVector::zero();
        }
        ZVector {
            slices: self
                .slices
                .iter()
                .map(|(z, v)| (z.clone(), v.scale(c)))
                .filter(|(_, v)| !v.is_zero())
                .collect(),
        }
    }

    /// Shift every ambient exponent by `delta`.
    pub fn shift_z(&self, delta: &Rat) -> Self {
        ZVector {
            slices: self
                .slices
                .iter()
                .map(|(z, v)| (z + delta, v.clone()))
                .collect(),
        }
    }

    /// First nonzero `(z-exponent, state, coefficient)` triple, if any.
    pub fn first_term(&self) -> Option<(&Rat, Arc<FockState>, &Coeff)> {
        self.slices
            .iter()
            .flat_map(|(z, v)| v.states().map(move |(st, c)| (z, st, c)))
            .next()
    }
}

// ---------------------------------------------------------------------------
// Weight lattices of the module families at (M, N) = (1, 0).
// ---------------------------------------------------------------------------

/// The three families of Fock modules at `(M,N) = (1,0)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Family {
    /// One-parameter family labelled by a rational `alpha`.
    Alpha(Rat),
    /// The module whose ground states carry weight `(0,1,0)`.
    OneZero,
    /// The module whose ground states carry weight `(0,0,1)`.
    ZeroOne,
}

/// A direct sum of weight lattices: one of the three families plus the
/// translation parameter `beta`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpaceSpec {
    /// Which family.
    pub family: Family,
    /// Translation parameter; shifts all `a`- and `b`-weights.
    pub beta: Rat,
}

impl SpaceSpec {
    /// The family labelled by `alpha`, at translation `beta`.
    pub fn alpha(alpha: Rat, beta: Rat) -> Self {
        SpaceSpec { family: Family::Alpha(alpha), beta }
    }

    /// Weight at lattice point `(i, j)`, in species order `a1, a2, b1, c1`.
    pub fn weight_at(&self, i: i64, j: i64) -> Vec<Rat> {
        let b = &self.beta;
        let (i, j) = (rat(i), rat(j));
        match &self.family {
            Family::Alpha(al) => vec![
                b + &i,
                b - &i + &j,
                b - al + &j,
                -al + &j,
            ],
            Family::OneZero => vec![b + rat(1) + &i, b - &i + &j, b + &j, j],
            Family::ZeroOne => vec![
                b + rat(1) + &i,
                b + rat(1) - &i + &j,
                b + &j,
                j,
            ],
        }
    }

    /// Base point of the c-weight used to anchor parity.
    pub fn base_c(&self) -> Rat {
        match &self.family {
            Family::Alpha(al) => -al.clone(),
            Family::OneZero | Family::ZeroOne => Rat::zero(),
        }
    }

    /// Parity of a state from its c-weight: `(lambda_c - base_c) mod 2`.
    pub fn parity_of_c(&self, lc: &Rat) -> Result<u8, BosonError> {
        let off = lc - self.base_c();
        if !off.is_integer() {
            return Err(BosonError::NonIntegerParity(off.to_string()));
        }
        let r = off.to_integer().rem_euclid(2);
        Ok(if r == 0 { 0 } else { 1 })
    }

    /// Parity of a Fock state of this space (its c-weight decides).
    pub fn parity_of_state(&self, cfg: &OscConfig, state: &FockState) -> Result<u8, BosonError> {
        self.parity_of_c(&state.weight[cfg.c(1)])
    }
}

/// Degree-operator eigenvalue on a pure momentum state at `(M,N) = (1,0)`.
///
/// On a state with creation monomial of degree `d`, the full eigenvalue is
/// `d0(weight) - d`.
pub fn d0_eigenvalue(cfg: &OscConfig, weight: &[Rat]) -> Rat {
    assert_eq!((cfg.m, cfg.n), (1, 0), "degree operator is defined at (M,N)=(1,0)");
    let a1 = &weight[cfg.a(1)];
    let a2 = &weight[cfg.a(2)];
    let b = &weight[cfg.b(1)];
    let c = &weight[cfg.c(1)];
    let s = a1 + a2 - b;
    let half = ratio(-1, 2);
    (a1 * a1 + a2 * a2 - b * b + c * (c + rat(1)) - &s * &s) * half
}

/// Eigenvalues `(h^1_0, h^2_0)` of the Cartan zero modes on a weight.
pub fn cartan_weights(cfg: &OscConfig, weight: &[Rat]) -> (Rat, Rat) {
    assert_eq!((cfg.m, cfg.n), (1, 0));
    let a1 = &weight[cfg.a(1)];
    let a2 = &weight[cfg.a(2)];
    let b = &weight[cfg.b(1)];
    (a1 - a2, a2 - b)
}

/// A lattice point of a [`SpaceSpec`] together with its grading data.
#[derive(Debug, Clone)]
pub struct LatticePoint {
    /// Lattice coordinates.
    pub i: i64,
    /// Lattice coordinates.
    pub j: i64,
    /// Weight vector at this point.
    pub weight: Vec<Rat>,
    /// `(-d0) - min(-d0)`: the ground degree of this point relative to the
    /// lowest one in the space (always a nonnegative integer).
    pub reldeg: u32,
}

/// The finite window of a space needed up to relative degree `cut`.
#[derive(Debug, Clone)]
pub struct LatticeWindow {
    /// Minimal value of `-d0` over the whole space.
    pub min_neg_d0: Rat,
    /// All lattice points whose ground degree is at most `cut`.
    pub points: Vec<LatticePoint>,
}

/// Enumerate all lattice points of `space` with relative ground degree at
/// most `cut`.
///
/// The search box grows until the entire boundary ring lies strictly above
/// the window, which certifies both the global minimum of `-d0` and the
/// completeness of the returned set.
pub fn lattice_window(cfg: &OscConfig, space: &SpaceSpec, cut: u32) -> LatticeWindow {
    let mut radius: i64 = 4;
    loop {
        let mut min: Option<Rat> = None;
        let mut vals: Vec<(i64, i64, Rat)> = Vec::new();
        for i in -radius..=radius {
            for j in -radius..=radius {
                let nd0 = -d0_eigenvalue(cfg, &space.weight_at(i, j));
                if min.as_ref().map(|m| &nd0 < m).unwrap_or(true) {
                    min = Some(nd0.clone());
                }
                vals.push((i, j, nd0));
            }
        }
        let min = min.unwrap();
        let ceiling = &min + rat(cut as i64);
        let boundary_clear = vals
            .iter()
            .filter(|(i, j, _)| i.abs() == radius || j.abs() == radius)
            .all(|(_, _, v)| v > &ceiling);
        if boundary_clear {
            let mut points = Vec::new();
            for (i, j, v) in vals {
                let rel = &v - &min;
                assert!(rel.is_integer() && !rel.is_negative(), "relative ground degree must be a nonnegative integer");
                let rel: i64 = rel.to_integer().try_into().unwrap();
                if rel as u32 <= cut {
                    points.push(LatticePoint {
                        i,
                        j,
                        weight: space.weight_at(i, j),
                        reldeg: rel as u32,
                    });
                }
            }
            points.sort_by_key(|p| (p.reldeg, p.i, p.j));
            return LatticeWindow { min_neg_d0: min, points };
        }
        radius *= 2;
        assert!(radius <= 1 << 20, "lattice window failed to close");
    }
}

// ---------------------------------------------------------------------------
// Monomial enumeration.
// ---------------------------------------------------------------------------

/// All colored creation monomials of exact degree `d` in `ncolors` colors:
/// each monomial is a canonical list `(color, n, mult)` with `sum n*mult = d`.
pub fn colored_monomials(ncolors: usize, d: u32) -> Vec<Vec<(usize, u32, u32)>> {
    // Slots are (color, n) pairs ordered lexicographically; choose
    // multiplicities along them recursively.
    let mut out = Vec::new();
    let mut cur: Vec<(usize, u32, u32)> = Vec::new();
    fn rec(
        ncolors: usize,
        remaining: u32,
        slot: (usize, u32),
        cur: &mut Vec<(usize, u32, u32)>,
        out: &mut Vec<Vec<(usize, u32, u32)>>,
    ) {
        if remaining == 0 {
            out.push(cur.clone());
            return;
        }
        let (color, n) = slot;
        if color >= ncolors {
            return;
        }
        let next = if n >= remaining.max(1) {
            (color + 1, 1)
        } else {
            (color, n + 1)
        };
        // Skip modes larger than what remains.
        if n > remaining {
            rec(ncolors, remaining, (color + 1, 1), cur, out);
            return;
        }
        let maxm = remaining / n;
        for m in 0..=maxm {
            if m > 0 {
                cur.push((color, n, m));
            }
            rec(ncolors, remaining - n * m, next, cur, out);
            if m > 0 {
                cur.pop();
            }
        }
    }
    rec(ncolors, d, (0, 1), &mut cur, &mut out);
    for mono in &mut out {
        mono.sort_unstable();
    }
    out.sort();
    out.dedup();
    out
}

/// Raw oscillator basis states of exact degree `d` on a fixed weight.
pub fn raw_states_of_degree(cfg: &OscConfig, weight: &[Rat], d: u32) -> Vec<FockState> {
    colored_monomials(cfg.nspecies(), d)
        .into_iter()
        .map(|modes| FockState { weight: weight.to_vec(), modes })
        .collect()
}

/// Raw oscillator basis states of degree at most `cut` on a fixed weight.
pub fn raw_states_up_to(cfg: &OscConfig, weight: &[Rat], cut: u32) -> Vec<FockState> {
    (0..=cut)
        .flat_map(|d| raw_states_of_degree(cfg, weight, d))
        .collect()
}

/// Module generator colors at `(1,0)`: the currents spanning each module.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModColor {
    /// `h^1_{-n} = a^1_{-n} q^{-n/2} - a^2_{-n} q^{n/2}`.
    H1,
    /// `h^2_{-n} = (a^2_{-n} + b_{-n}) q^{-n/2}`.
    H2,
    /// `c_{-n}`.
    C,
}

/// Raw-species expansion of a module generator `color_{-n}`.
pub fn module_creation_combo(cfg: &OscConfig, color: ModColor, n: u32) -> Vec<(usize, LaurentQ)> {
    assert_eq!((cfg.m, cfg.n), (1, 0));
    let half = ratio(n as i64, 2);
    match color {
        ModColor::H1 => vec![
            (cfg.a(1), LaurentQ::qpow(-half.clone())),
            (cfg.a(2), LaurentQ::qpow(half).neg()),
        ],
        ModColor::H2 => vec![
            (cfg.a(2), LaurentQ::qpow(-half.clone())),
            (cfg.b(1), LaurentQ::qpow(-half)),
        ],
        ModColor::C => vec![(cfg.c(1), LaurentQ::one())],
    }
}

const MOD_COLORS: [ModColor; 3] = [ModColor::H1, ModColor::H2, ModColor::C];

/// Expand a module monomial (colored list over `h^1, h^2, c`) applied to a
/// pure momentum state into the raw oscillator basis.
pub fn expand_module_monomial(
    cfg: &OscConfig,
    weight: &[Rat],
    mono: &[(usize, u32, u32)],
) -> FockVector {
    let mut vec = FockVector::from_state(FockState::vacuum(weight.to_vec()));
    for &(color, n, mult) in mono {
        let combo = module_creation_combo(cfg, MOD_COLORS[color], n);
        for _ in 0..mult {
            let mut raw = Vec::new();
            for (st, c) in vec.states() {
                for (s, k) in &combo {
                    let image = st.with_mode_delta(*s, n, 1);
                    raw.push((
                        intern_state(&image),
                        c.mul(&Coeff::from_laurent(k.clone())),
                    ));
                }
            }
            vec = FockVector::from_raw(raw);
        }
    }
    vec
}

/// Number of module basis monomials of exact degree `d` (three colors).
pub fn module_dimension(d: u32) -> u64 {
    colored_monomials(3, d).len() as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::qint;

    fn cfg() -> OscConfig {
        OscConfig::one_zero()
    }

    #[test]
    fn species_layout_one_zero() {
        let c = cfg();
        assert_eq!(c.nspecies(), 4);
        assert_eq!(c.species_name(c.a(1)), "a1");
        assert_eq!(c.species_name(c.a(2)), "a2");
        assert_eq!(c.species_name(c.b(1)), "b1");
        assert_eq!(c.species_name(c.c(1)), "c1");
        assert_eq!(c.metric(c.a(2)), 1);
        assert_eq!(c.metric(c.b(1)), -1);
        assert_eq!(c.metric(c.c(1)), 1);
    }

    #[test]
    fn contraction_values() {
        let c = cfg();
        // [2]^2 / 2 with metric signs.
        let expect = RatQ::from_laurent(qint(2).mul(&qint(2))).scale(&ratio(1, 2));
        assert_eq!(c.contraction(c.a(1), 2), expect);
        assert_eq!(c.contraction(c.b(1), 2), expect.neg());
    }

    #[test]
    fn zero_mode_uses_metric() {
        let c = cfg();
        let w = vec![rat(3), rat(0), rat(5), rat(-2)];
        assert_eq!(c.zero_mode(c.a(1), &w), rat(3));
        assert_eq!(c.zero_mode(c.b(1), &w), rat(-5));
        assert_eq!(c.zero_mode(c.c(1), &w), rat(-2));
    }

    #[test]
    fn state_mode_edits_are_canonical() {
        let st = FockState::vacuum(vec![rat(0); 4]);
        let st2 = st.with_mode_delta(2, 1, 2).with_mode_delta(0, 3, 1);
        assert_eq!(st2.modes, vec![(0, 3, 1), (2, 1, 2)]);
        assert_eq!(st2.degree(), 5);
        let st3 = st2.with_mode_delta(2, 1, -1);
        assert_eq!(st3.mult_of(2, 1), 1);
        let st4 = st3.with_mode_delta(2, 1, -1);
        assert_eq!(st4.mult_of(2, 1), 0);
        assert_eq!(st4.modes, vec![(0, 3, 1)]);
    }

    #[test]
    fn state_render_contract() {
        let c = cfg();
        let st = FockState::vacuum(vec![rat(1), rat(0), rat(0), ratio(-1, 2)])
            .with_mode_delta(c.a(1), 2, 1)
            .with_mode_delta(c.c(1), 1, 2);
        assert_eq!(st.render(&c), "|1,0,0,-1/2> * a1[-2]^1 c1[-1]^2");
        let vac = FockState::vacuum(vec![rat(0); 4]);
        assert_eq!(vac.render(&c), "|0,0,0,0>");
    }

    #[test]
    fn lattice_weights_match_family_tables() {
        let s = SpaceSpec::alpha(rat(2), rat(0));
        assert_eq!(s.weight_at(0, 0), vec![rat(0), rat(0), rat(-2), rat(-2)]);
        assert_eq!(s.weight_at(1, -1), vec![rat(1), rat(-2), rat(-3), rat(-3)]);
        let oz = SpaceSpec { family: Family::OneZero, beta: rat(0) };
        assert_eq!(oz.weight_at(0, 0), vec![rat(1), rat(0), rat(0), rat(0)]);
        let zo = SpaceSpec { family: Family::ZeroOne, beta: rat(0) };
        assert_eq!(zo.weight_at(0, 0), vec![rat(1), rat(1), rat(0), rat(0)]);
    }

    #[test]
    fn ground_degree_quadratic_form() {
        // For the alpha family at beta = 0 the ground degree of (i,j) above
        // the minimum is (2i^2 - 2ij + j^2 + j)/2, independently of beta.
        let c = cfg();
        for al in [rat(0), rat(1), ratio(1, 2), rat(-1)] {
            for beta in [rat(0), rat(2), ratio(-1, 3)] {
                let s = SpaceSpec::alpha(al.clone(), beta);
                for i in -3..=3 {
                    for j in -3..=3 {
                        let nd0 = -d0_eigenvalue(&c, &s.weight_at(i, j));
                        let qf = ratio(2 * i * i - 2 * i * j + j * j + j, 2);
                        let prefactor = -(&al * (&al + rat(1))) / rat(2);
                        assert_eq!(nd0, qf + prefactor);
                    }
                }
            }
        }
    }

    #[test]
    fn lattice_window_alpha_zero() {
        let c = cfg();
        let s = SpaceSpec::alpha(rat(0), rat(0));
        let w = lattice_window(&c, &s, 2);
        assert_eq!(w.min_neg_d0, rat(0));
        // Four ground points, as the quadratic form vanishes exactly there.
        let ground: Vec<_> = w.points.iter().filter(|p| p.reldeg == 0).map(|p| (p.i, p.j)).collect();
        assert_eq!(ground, vec![(-1, -2), (-1, -1), (0, -1), (0, 0)]);
    }

    #[test]
    fn cartan_weights_on_families() {
        let c = cfg();
        // Alpha family ground states carry (h1, h2) = (0, alpha).
        for al in [rat(0), rat(3), ratio(1, 2)] {
            let s = SpaceSpec::alpha(al.clone(), rat(5));
            let (h1, h2) = cartan_weights(&c, &s.weight_at(0, 0));
            assert_eq!((h1, h2), (rat(0), al));
        }
        // The (0,1,0)-family ground state carries (1, 0).
        let oz = SpaceSpec { family: Family::OneZero, beta: rat(0) };
        assert_eq!(cartan_weights(&c, &oz.weight_at(0, 0)), (rat(1), rat(0)));
        // The (0,0,1)-family ground state carries (0, 1).
        let zo = SpaceSpec { family: Family::ZeroOne, beta: rat(0) };
        assert_eq!(cartan_weights(&c, &zo.weight_at(0, 0)), (rat(0), rat(1)));
    }

    #[test]
    fn parity_anchoring() {
        let c = cfg();
        let s = SpaceSpec::alpha(rat(1), rat(0));
        // Ground state: c-weight -alpha, parity 0.
        let st = FockState::vacuum(s.weight_at(0, 0));
        assert_eq!(s.parity_of_state(&c, &st).unwrap(), 0);
        // One step in j flips the c-weight parity.
        let st = FockState::vacuum(s.weight_at(0, 1));
        assert_eq!(s.parity_of_state(&c, &st).unwrap(), 1);
        // Half-integer offsets are rejected.
        let bad = SpaceSpec::alpha(ratio(1, 2), rat(0));
        let st = FockState::vacuum(bad.weight_at(0, 0));
        let shifted = FockState {
            weight: {
                let mut w = st.weight.clone();
                w[c.c(1)] += ratio(1, 2);
                w
            },
            modes: vec![],
        };
        assert!(bad.parity_of_state(&c, &shifted).is_err());
    }

    #[test]
    fn colored_monomial_counts_match_partitions() {
        // One color: ordinary partitions 1, 1, 2, 3, 5, 7, 11.
        let p1: Vec<usize> = (0..7).map(|d| colored_monomials(1, d).len()).collect();
        assert_eq!(p1, vec![1, 1, 2, 3, 5, 7, 11]);
        // Three colors: 1, 3, 9, 22, 51, 108, 221.
        let p3: Vec<usize> = (0..7).map(|d| colored_monomials(3, d).len()).collect();
        assert_eq!(p3, vec![1, 3, 9, 22, 51, 108, 221]);
        // Four colors at low degree: 1, 4, 14, 40.
        let p4: Vec<usize> = (0..4).map(|d| colored_monomials(4, d).len()).collect();
        assert_eq!(p4, vec![1, 4, 14, 40]);
    }

    #[test]
    fn module_monomial_expansion_is_independent() {
        // Exact rank check: expanded module monomials of degree <= 3 are
        // linearly independent in the raw basis.
        let c = cfg();
        let weight = vec![rat(0); 4];
        let mut vectors: Vec<FockVector> = Vec::new();
        for d in 0..=3 {
            for mono in colored_monomials(3, d) {
                vectors.push(expand_module_monomial(&c, &weight, &mono));
            }
        }
        // Collect the raw support.
        let mut support: Vec<FockState> = Vec::new();
        for v in &vectors {
            for (st, _) in v.states() {
                if !support.contains(&*st) {
                    support.push((*st).clone());
                }
            }
        }
        // Gaussian elimination over the exact coefficient field.
        let mut rows: Vec<Vec<RatQ>> = vectors
            .iter()
            .map(|v| {
                support
                    .iter()
                    .map(|st| {
                        let c = v.coeff_of(st);
                        // All coefficients here are phase-free.
                        let mut out = RatQ::zero();
                        for (g, r) in c.iter() {
                            assert!(g.is_zero());
                            out = out.add(r);
                        }
                        out
                    })
                    .collect()
            })
            .collect();
        let mut rank = 0;
        for col in 0..support.len() {
            if let Some(pivot) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) {
                rows.swap(rank, pivot);
                let inv = rows[rank][col].inv().unwrap();
                for r in 0..rows.len() {
                    if r != rank && !rows[r][col].is_zero() {
                        let f = rows[r][col].mul(&inv);
                        for cc in 0..support.len() {
                            let delta = rows[rank][cc].mul(&f);
                            rows[r][cc] = rows[r][cc].sub(&delta);
                        }
                    }
                }
                rank += 1;
            }
        }
        assert_eq!(rank, vectors.len());
    }

    #[test]
    fn zvector_grading_ops() {
        let st = FockState::vacuum(vec![rat(0); 4]);
        let v = ZVector::from_state(st.clone());
        let w = v.shift_z(&ratio(3, 2));
        let (z, s, c) = w.first_term().unwrap();
        assert_eq!(z, &ratio(3, 2));
        assert_eq!(*s, st);
        assert_eq!(c, &Coeff::one());
        assert!(w.sub(&w).is_zero());
    }
}
