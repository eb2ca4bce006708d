//! Normal-ordered exponentials of oscillator fields and their modes.
//!
//! * [`FieldSpec`]: a free field as a list of dressed oscillator couplings
//!   `kappa_s(m) = scale * q^{u|m| + v m}` plus a momentum charge vector.
//! * [`PureExp`]: a normal-ordered product `pref * :exp(sum of fields):`
//!   with per-factor argument shifts `q^rho z` and ordering parameters
//!   `sigma`, an explicit power `z^zoffset`, and a cocycle phase.
//! * [`VOp`]: a finite sum of [`PureExp`] terms with a fixed conformal
//!   weight `Delta`, so modes are `O_m = [z^{-m-Delta}] O(z)`.
//! * [`apply_mode`]: exact action of one mode on a [`ZVector`]; the ambient
//!   spectral grading of the input is never touched.
//! * [`apply_full`]: action of the whole current, merging its spectral
//!   powers into the ambient grading, truncated at an output degree.
//! * Constructors for the raising and lowering currents, the fermionic
//!   pair `eta`/`xi`, and the q-difference expansion used by both.

use crate::boson::{FockState, FockVector, OscConfig, ZVector};
use crate::coeff::{qint, rat, ratio, Coeff, LaurentQ, Rat, RatQ};

/// One oscillator coupling inside a field: contributes
/// `scale * q^{upow |m| + vpow m} x_{s,m}` to the field mode `m`.
#[derive(Debug, Clone)]
pub struct FieldMode {
    /// Flat species index.
    pub species: usize,
    /// Constant scale.
    pub scale: Rat,
    /// Coefficient of `|m|` in the q-exponent.
    pub upow: Rat,
    /// Coefficient of `m` in the q-exponent.
    pub vpow: Rat,
}

/// A free field: oscillator couplings plus a momentum charge vector. The
/// zero-mode vector of the field coincides with its charge vector.
#[derive(Debug, Clone)]
pub struct FieldSpec {
    /// Oscillator couplings.
    pub modes: Vec<FieldMode>,
    /// Momentum charge, one entry per species.
    pub charge: Vec<Rat>,
}

impl FieldSpec {
    fn empty(cfg: &OscConfig) -> Self {
        FieldSpec { modes: Vec::new(), charge: vec![Rat::zero(); cfg.nspecies()] }
    }

    /// The coupling `kappa_s(m)` of species `s` at mode `m != 0`.
    pub fn kappa(&self, s: usize, m: i64) -> LaurentQ {
        let mut out = LaurentQ::zero();
        for fm in &self.modes {
            if fm.species == s {
                let e = &fm.upow * rat(m.abs()) + &fm.vpow * rat(m);
                out = out.add(&LaurentQ::monomial(fm.scale.clone(), e));
            }
        }
        out
    }

    /// Sum of two fields.
    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.modes.extend(other.modes.iter().cloned());
        for (a, b) in out.charge.iter_mut().zip(other.charge.iter()) {
            *a += b;
        }
        out
    }

    /// Negation.
    pub fn neg(&self) -> Self {
        FieldSpec {
            modes: self
                .modes
                .iter()
                .map(|fm| FieldMode { scale: -fm.scale.clone(), ..fm.clone() })
                .collect(),
            charge: self.charge.iter().map(|c| -c.clone()).collect(),
        }
    }

    /// Multiply mode-wise by `q^{u|m| + v m}`, scaling the zero-mode sector
    /// by the value of that dressing at `m = 0`, i.e. by `1`.
    pub fn dressed(&self, u: &Rat, v: &Rat) -> Self {
        FieldSpec {
            modes: self
                .modes
                .iter()
                .map(|fm| FieldMode {
                    species: fm.species,
                    scale: fm.scale.clone(),
                    upow: &fm.upow + u,
                    vpow: &fm.vpow + v,
                })
                .collect(),
            charge: self.charge.clone(),
        }
    }
}

/// The Cartan field `h^i` for `i = 1..M+N+1`.
pub fn h_field(cfg: &OscConfig, i: usize) -> FieldSpec {
    assert!(i >= 1 && i <= cfg.m + cfg.n + 1);
    let mut f = FieldSpec::empty(cfg);
    let half = ratio(1, 2);
    if i <= cfg.m {
        f.modes.push(FieldMode { species: cfg.a(i), scale: rat(1), upow: -half.clone(), vpow: Rat::zero() });
        f.modes.push(FieldMode { species: cfg.a(i + 1), scale: rat(-1), upow: half, vpow: Rat::zero() });
        f.charge[cfg.a(i)] = rat(1);
        f.charge[cfg.a(i + 1)] = rat(-1);
    } else if i == cfg.m + 1 {
        f.modes.push(FieldMode { species: cfg.a(cfg.m + 1), scale: rat(1), upow: -half.clone(), vpow: Rat::zero() });
        f.modes.push(FieldMode { species: cfg.b(1), scale: rat(1), upow: -half, vpow: Rat::zero() });
        f.charge[cfg.a(cfg.m + 1)] = rat(1);
        f.charge[cfg.b(1)] = rat(1);
    } else {
        let j = i - cfg.m - 1;
        f.modes.push(FieldMode { species: cfg.b(j), scale: rat(-1), upow: half.clone(), vpow: Rat::zero() });
        f.modes.push(FieldMode { species: cfg.b(j + 1), scale: rat(1), upow: -half, vpow: Rat::zero() });
        f.charge[cfg.b(j)] = rat(-1);
        f.charge[cfg.b(j + 1)] = rat(1);
    }
    f
}

/// The fermion-pair boson `c^j`.
pub fn c_field(cfg: &OscConfig, j: usize) -> FieldSpec {
    let mut f = FieldSpec::empty(cfg);
    f.modes.push(FieldMode { species: cfg.c(j), scale: rat(1), upow: Rat::zero(), vpow: Rat::zero() });
    f.charge[cfg.c(j)] = rat(1);
    f
}

/// One exponential factor: the field evaluated at `q^rho z` with ordering
/// parameter `sigma`.
#[derive(Debug, Clone)]
pub struct VOFactor {
    /// The field inside the exponential (sign included via [`FieldSpec::neg`]).
    pub field: FieldSpec,
    /// Ordering parameter of the field.
    pub sigma: Rat,
    /// Argument shift: the factor is evaluated at `q^rho z`.
    pub rho: Rat,
}

/// A single normal-ordered exponential term.
#[derive(Debug, Clone)]
pub struct PureExp {
    /// Scalar prefactor.
    pub pref: Coeff,
    /// Explicit power of `z` multiplying the exponential.
    pub zoffset: Rat,
    /// Exponential factors, jointly normal ordered.
    pub factors: Vec<VOFactor>,
    /// Cocycle exponent vector: the phase `p^{sum_s t_s x_{s,0}}`.
    pub cocycle: Vec<Rat>,
}

impl PureExp {
    /// Coefficient of the creation operator `x_{s,-n}` (times `z^n`) in the
    /// exponent, `n > 0`.
    pub fn cre_coeff(&self, s: usize, n: u32) -> RatQ {
        let nn = n as i64;
        let mut num = LaurentQ::zero();
        for f in &self.factors {
            let kappa = f.field.kappa(s, -nn);
            if !kappa.is_zero() {
                let e = (&f.rho - &f.sigma) * rat(nn);
                num = num.add(&kappa.mul(&LaurentQ::qpow(e)));
            }
        }
        if num.is_zero() {
            return RatQ::zero();
        }
        RatQ::new(num, qint(nn))
    }

    /// Coefficient of the annihilation operator `x_{s,n}` (times `z^-n`) in
    /// the exponent, `n > 0`.
    pub fn ann_coeff(&self, s: usize, n: u32) -> RatQ {
        let nn = n as i64;
        let mut num = LaurentQ::zero();
        for f in &self.factors {
            let kappa = f.field.kappa(s, nn);
            if !kappa.is_zero() {
                let e = -(&f.rho + &f.sigma) * rat(nn);
                num = num.add(&kappa.mul(&LaurentQ::qpow(e)));
            }
        }
        if num.is_zero() {
            return RatQ::zero();
        }
        RatQ::new(num.neg(), qint(nn))
    }

    /// Total momentum charge vector.
    pub fn charge(&self, cfg: &OscConfig) -> Vec<Rat> {
        let mut out = vec![Rat::zero(); cfg.nspecies()];
        for f in &self.factors {
            for (a, b) in out.iter_mut().zip(f.field.charge.iter()) {
                *a += b;
            }
        }
        out
    }

    /// Exponent vector of the `q^{..x_0}` dressing accumulated from the
    /// argument shifts.
    pub fn u0(&self, cfg: &OscConfig) -> Vec<Rat> {
        let mut out = vec![Rat::zero(); cfg.nspecies()];
        for f in &self.factors {
            for (a, b) in out.iter_mut().zip(f.field.charge.iter()) {
                *a += &f.rho * b;
            }
        }
        out
    }
}

/// A finite sum of normal-ordered exponentials with a fixed mode convention:
/// `O(z) = sum_m O_m z^{-m-delta}`.
#[derive(Debug, Clone)]
pub struct VOp {
    /// The terms.
    pub terms: Vec<PureExp>,
    /// Conformal weight fixing the mode convention.
    pub delta: Rat,
    /// Declared parity (0 even, 1 odd) for graded brackets and signs.
    pub parity: u8,
}

impl VOp {
    /// Scale the whole operator.
    pub fn scale(&self, c: &Coeff) -> Self {
        VOp {
            terms: self
                .terms
                .iter()
                .map(|t| PureExp { pref: t.pref.mul(c), ..t.clone() })
                .collect(),
            delta: self.delta.clone(),
            parity: self.parity,
        }
    }
}

fn binom(n: u32, k: u32) -> Rat {
    let mut out = Rat::one();
    for i in 0..k {
        out = out * rat((n - i) as i64) / rat((i + 1) as i64);
    }
    out
}

/// Contraction options for the modes of one state: for each present creation
/// mode with a matching annihilation coupling, choose how many quanta to
/// absorb. Returns `(removal degree, coefficient, surviving state)` terms.
fn contraction_terms(
    cfg: &OscConfig,
    pexp: &PureExp,
    state: &FockState,
) -> Vec<(u32, RatQ, FockState)> {
    let mut acc: Vec<(u32, RatQ, FockState)> = vec![(0, RatQ::one(), state.clone())];
    for &(s, n, mult) in &state.modes {
        let a = pexp.ann_coeff(s, n);
        if a.is_zero() {
            continue;
        }
        let hit = a.mul(&cfg.contraction(s, n));
        let mut next = Vec::new();
        for (deg, coeff, st) in &acc {
            let mut power = RatQ::one();
            for k in 0..=mult {
                if k > 0 {
                    power = power.mul(&hit);
                }
                let c = coeff.mul(&power).scale(&binom(mult, k));
                next.push((deg + n * k, c, st.with_mode_delta(s, n, -(k as i64))));
            }
        }
        acc = next;
    }
    acc
}

/// Creation monomials of exact degree `d` over the active creation slots of
/// `pexp`, as `(coefficient, list of (species, n, mult))`.
fn creation_terms(cfg: &OscConfig, pexp: &PureExp, d: u32) -> Vec<(RatQ, Vec<(usize, u32, u32)>)> {
    // Active species: those with any creation coupling.
    let active: Vec<usize> = (0..cfg.nspecies())
        .filter(|&s| !pexp.cre_coeff(s, 1).is_zero() || !pexp.cre_coeff(s, 2).is_zero())
        .collect();
    let mut out = Vec::new();
    // Recursive choice over slots (species index into `active`, mode n).
    fn rec(
        cfg: &OscConfig,
        pexp: &PureExp,
        active: &[usize],
        remaining: u32,
        slot: (usize, u32),
        coeff: RatQ,
        cur: &mut Vec<(usize, u32, u32)>,
        out: &mut Vec<(RatQ, Vec<(usize, u32, u32)>)>,
    ) {
        if remaining == 0 {
            out.push((coeff, cur.clone()));
            return;
        }
        let (ai, n) = slot;
        if ai >= active.len() {
            return;
        }
        if n > remaining {
            rec(cfg, pexp, active, remaining, (ai + 1, 1), coeff, cur, out);
            return;
        }
        let next = if n >= remaining { (ai + 1, 1) } else { (ai, n + 1) };
        let s = active[ai];
        let b = pexp.cre_coeff(s, n);
        if b.is_zero() {
            rec(cfg, pexp, active, remaining, next, coeff, cur, out);
            return;
        }
        let maxm = remaining / n;
        let mut power = RatQ::one();
        let mut fact = Rat::one();
        for m in 0..=maxm {
            if m > 0 {
                power = power.mul(&b);
                fact = fact * rat(m as i64);
            }
            let c = coeff.mul(&power).scale(&(Rat::one() / &fact));
            if m > 0 {
                cur.push((s, n, m));
            }
            rec(cfg, pexp, active, remaining - n * m, next, c, cur, out);
            if m > 0 {
                cur.pop();
            }
        }
    }
    let mut cur = Vec::new();
    rec(cfg, pexp, &active, d, (0, 1), RatQ::one(), &mut cur, &mut out);
    out
}

/// `creation_terms` probes low modes to detect active species; every
/// coupling used here is supported on all positive modes or on none, which
/// this predicate guards in debug builds.
fn creation_active_consistent(pexp: &PureExp, s: usize) -> bool {
    let c1 = pexp.cre_coeff(s, 1).is_zero();
    let c2 = pexp.cre_coeff(s, 2).is_zero();
    let c3 = pexp.cre_coeff(s, 3).is_zero();
    c1 == c2 && c2 == c3
}

/// Zero-mode scalar picked up on the input weight: the `q`- and phase
/// dressings (the `z` power is handled by the caller through the exponent
/// bookkeeping).
fn zero_mode_scalar(cfg: &OscConfig, pexp: &PureExp, weight: &[Rat]) -> Coeff {
    let mut qexp = Rat::zero();
    for (s, u) in pexp.u0(cfg).iter().enumerate() {
        if !u.is_zero() {
            qexp += u * cfg.zero_mode(s, weight);
        }
    }
    let mut phase = Rat::zero();
    for (s, t) in pexp.cocycle.iter().enumerate() {
        if !t.is_zero() {
            phase += t * cfg.zero_mode(s, weight);
        }
    }
    Coeff::qpow(qexp).mul(&Coeff::phase(&phase))
}

/// Spectral exponent of the zero modes on the input weight.
fn zero_mode_zexp(cfg: &OscConfig, pexp: &PureExp, weight: &[Rat]) -> Rat {
    let mut v = Rat::zero();
    let charge = pexp.charge(cfg);
    for (s, c) in charge.iter().enumerate() {
        if !c.is_zero() {
            v += c * cfg.zero_mode(s, weight);
        }
    }
    v
}

/// Apply one term of a current to one state, selecting the output degree
/// `d_out` exactly; returns the resulting vector (no ambient shift applied).
fn apply_pure_at(
    cfg: &OscConfig,
    pexp: &PureExp,
    state: &FockState,
    d_out: u32,
) -> FockVector {
    debug_assert!((0..cfg.nspecies()).all(|s| creation_active_consistent(pexp, s)));
    let d_in = state.degree();
    let base = pexp.pref.mul(&zero_mode_scalar(cfg, pexp, &state.weight));
    let charge = pexp.charge(cfg);
    let mut out = FockVector::zero();
    if base.is_zero() {
        return out;
    }
    for (removed, ccoeff, survivor) in contraction_terms(cfg, pexp, state) {
        let mid = d_in - removed;
        if d_out < mid {
            continue;
        }
        let need = d_out - mid;
        let shifted = survivor.with_weight_shift(&charge);
        for (bcoeff, created) in creation_terms(cfg, pexp, need) {
            let mut st = shifted.clone();
            for (s, n, m) in created {
                st = st.with_mode_delta(s, n, m as i64);
            }
            out.insert_add(st, base.mul_ratq(&ccoeff.mul(&bcoeff)));
        }
    }
    out
}

/// Apply the mode `O_m` of a current to a vector. The ambient spectral
/// grading of the input is preserved untouched; the mode index selects the
/// output oscillator degree through exact exponent bookkeeping.
pub fn apply_mode(cfg: &OscConfig, vop: &VOp, m: &Rat, input: &ZVector) -> ZVector {
    let target = -m - &vop.delta;
    let mut out = ZVector::zero();
    for (zexp, slice) in input.iter() {
        let mut raw = Vec::new();
        for (state, coeff) in slice.states() {
            for pexp in &vop.terms {
                let v0 = zero_mode_zexp(cfg, pexp, &state.weight);
                // e = zoffset + v0 + (d_out - d_in) must equal the target.
                let want = &target - &pexp.zoffset - &v0 + rat(state.degree() as i64);
                if !want.is_integer() || want.is_negative() {
                    continue;
                }
                let d_out: i64 = want.to_integer().try_into().unwrap();
                let piece = apply_pure_at(cfg, pexp, &state, d_out as u32);
                for (id, c) in piece.iter() {
                    raw.push((id, c.mul(coeff)));
                }
            }
        }
        out.insert_slice(zexp.clone(), FockVector::from_raw(raw));
    }
    out
}

/// Apply the full current `O(z)` to a vector, merging the spectral powers of
/// the current into the ambient grading. Exact for all output oscillator
/// degrees up to `cut` inclusive.
pub fn apply_full(cfg: &OscConfig, vop: &VOp, input: &ZVector, cut: u32) -> ZVector {
    let mut out = ZVector::zero();
    for (zexp, slice) in input.iter() {
        for (state, coeff) in slice.states() {
            for pexp in &vop.terms {
                let v0 = zero_mode_zexp(cfg, pexp, &state.weight);
                for d_out in 0..=cut {
                    let e = &pexp.zoffset + &v0 + rat(d_out as i64) - rat(state.degree() as i64);
                    let piece = apply_pure_at(cfg, pexp, &state, d_out);
                    for (id, c) in piece.iter() {
                        out.insert_add_id(zexp + &e, id, c.mul(coeff));
                    }
                }
            }
        }
    }
    out
}

/// Expand `[d_q f](z) = (f(qz) - f(q^-1 z)) / ((q - q^-1) z)` of a single
/// exponential factor into the two-term sum, to be merged into a larger
/// normal-ordered product.
pub(crate) fn qdiff_pair(field: FieldSpec, sigma: Rat) -> Vec<(Coeff, VOFactor)> {
    let denom = RatQ::new(LaurentQ::one(), crate::coeff::qpow_diff(1));
    let plus = VOFactor { field: field.clone(), sigma: sigma.clone(), rho: rat(1) };
    let minus = VOFactor { field, sigma, rho: rat(-1) };
    vec![
        (Coeff::from_ratq(denom.clone()), plus),
        (Coeff::from_ratq(denom.neg()), minus),
    ]
}

/// The raising current `X^{+,i}(z)`, conformal weight 1.
pub fn x_plus(cfg: &OscConfig, i: usize) -> VOp {
    assert!(i >= 1 && i <= cfg.m + cfg.n + 1);
    let ns = cfg.nspecies();
    let mut cocycle = vec![Rat::zero(); ns];
    if i <= cfg.m {
        cocycle[cfg.a(i)] = rat(1);
        let term = PureExp {
            pref: Coeff::one(),
            zoffset: Rat::zero(),
            factors: vec![VOFactor { field: h_field(cfg, i), sigma: ratio(1, 2), rho: Rat::zero() }],
            cocycle,
        };
        VOp { terms: vec![term], delta: rat(1), parity: 0 }
    } else if i == cfg.m + 1 {
        for k in 1..=cfg.m {
            cocycle[cfg.a(k)] = rat(-1);
        }
        let term = PureExp {
            pref: Coeff::one(),
            zoffset: Rat::zero(),
            factors: vec![
                VOFactor { field: h_field(cfg, i), sigma: ratio(1, 2), rho: Rat::zero() },
                VOFactor { field: c_field(cfg, 1), sigma: Rat::zero(), rho: Rat::zero() },
            ],
            cocycle,
        };
        VOp { terms: vec![term], delta: rat(1), parity: 1 }
    } else {
        let j = i - cfg.m - 1;
        let mut terms = Vec::new();
        for (pref, dfac) in qdiff_pair(c_field(cfg, j).neg(), Rat::zero()) {
            terms.push(PureExp {
                pref,
                zoffset: rat(-1),
                factors: vec![
                    VOFactor { field: h_field(cfg, i), sigma: ratio(1, 2), rho: Rat::zero() },
                    dfac,
                    VOFactor { field: c_field(cfg, j + 1), sigma: Rat::zero(), rho: Rat::zero() },
                ],
                cocycle: cocycle.clone(),
            });
        }
        VOp { terms, delta: rat(1), parity: 0 }
    }
}

/// The lowering current `X^{-,i}(z)`, conformal weight 1.
pub fn x_minus(cfg: &OscConfig, i: usize) -> VOp {
    assert!(i >= 1 && i <= cfg.m + cfg.n + 1);
    let ns = cfg.nspecies();
    let mut cocycle = vec![Rat::zero(); ns];
    if i <= cfg.m {
        cocycle[cfg.a(i)] = rat(-1);
        let term = PureExp {
            pref: Coeff::int(-1),
            zoffset: Rat::zero(),
            factors: vec![VOFactor { field: h_field(cfg, i).neg(), sigma: ratio(-1, 2), rho: Rat::zero() }],
            cocycle,
        };
        VOp { terms: vec![term], delta: rat(1), parity: 0 }
    } else if i == cfg.m + 1 {
        for k in 1..=cfg.m {
            cocycle[cfg.a(k)] = rat(1);
        }
        let mut terms = Vec::new();
        for (pref, dfac) in qdiff_pair(c_field(cfg, 1).neg(), Rat::zero()) {
            terms.push(PureExp {
                pref,
                zoffset: rat(-1),
                factors: vec![
                    VOFactor { field: h_field(cfg, i).neg(), sigma: ratio(-1, 2), rho: Rat::zero() },
                    dfac,
                ],
                cocycle: cocycle.clone(),
            });
        }
        VOp { terms, delta: rat(1), parity: 1 }
    } else {
        let j = i - cfg.m - 1;
        let mut terms = Vec::new();
        for (pref, dfac) in qdiff_pair(c_field(cfg, j + 1).neg(), Rat::zero()) {
            terms.push(PureExp {
                pref: pref.neg(),
                zoffset: rat(-1),
                factors: vec![
                    VOFactor { field: h_field(cfg, i).neg(), sigma: ratio(-1, 2), rho: Rat::zero() },
                    VOFactor { field: c_field(cfg, j), sigma: Rat::zero(), rho: Rat::zero() },
                    dfac,
                ],
                cocycle: cocycle.clone(),
            });
        }
        VOp { terms, delta: rat(1), parity: 0 }
    }
}

/// The fermion current `eta(z) = :exp(c(z;0)): = sum_n eta_n z^{-n-1}`.
pub fn eta(cfg: &OscConfig) -> VOp {
    let term = PureExp {
        pref: Coeff::one(),
        zoffset: Rat::zero(),
        factors: vec![VOFactor { field: c_field(cfg, 1), sigma: Rat::zero(), rho: Rat::zero() }],
        cocycle: vec![Rat::zero(); cfg.nspecies()],
    };
    VOp { terms: vec![term], delta: rat(1), parity: 1 }
}

/// The fermion current `xi(z) = :exp(-c(z;0)): = sum_n xi_n z^{-n}`.
pub fn xi(cfg: &OscConfig) -> VOp {
    let term = PureExp {
        pref: Coeff::one(),
        zoffset: Rat::zero(),
        factors: vec![VOFactor { field: c_field(cfg, 1).neg(), sigma: Rat::zero(), rho: Rat::zero() }],
        cocycle: vec![Rat::zero(); cfg.nspecies()],
    };
    VOp { terms: vec![term], delta: rat(0), parity: 1 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boson::SpaceSpec;
    use crate::coeff::qpow_diff;

    fn cfg() -> OscConfig {
        OscConfig::one_zero()
    }

    fn vac(weight: Vec<Rat>) -> ZVector {
        ZVector::from_state(FockState::vacuum(weight))
    }

    #[test]
    fn raising_current_modes_on_vacuum() {
        let c = cfg();
        let v = vac(vec![rat(0); 4]);
        let xp = x_plus(&c, 1);
        // The zero mode annihilates the ground state of the alpha family.
        assert!(apply_mode(&c, &xp, &rat(0), &v).is_zero());
        // Mode -1 is a pure momentum shift with unit coefficient.
        let w = apply_mode(&c, &xp, &rat(-1), &v);
        let (z, st, co) = w.first_term().unwrap();
        assert_eq!(z, &rat(0));
        assert_eq!(st.weight, vec![rat(1), rat(-1), rat(0), rat(0)]);
        assert!(st.modes.is_empty());
        assert_eq!(co, &Coeff::one());
        // Mode -2 creates one quantum: q^-1 a1[-1] - a2[-1].
        let w = apply_mode(&c, &xp, &rat(-2), &v);
        let mut terms: Vec<(String, Coeff)> = w
            .iter()
            .flat_map(|(_, s)| s.states().map(|(st, co)| (st.render(&c), co.clone())))
            .collect();
        terms.sort();
        assert_eq!(terms.len(), 2);
        assert_eq!(terms[0].0, "|1,-1,0,0> * a1[-1]^1");
        assert_eq!(terms[0].1, Coeff::qpow(rat(-1)));
        assert_eq!(terms[1].0, "|1,-1,0,0> * a2[-1]^1");
        assert_eq!(terms[1].1, Coeff::int(-1));
    }

    #[test]
    fn cocycle_phases_flip_sign_on_odd_weights() {
        let c = cfg();
        let xp = x_plus(&c, 1);
        // On weight with la1 = 1 the cocycle exp(i pi a1_0) contributes -1.
        let v = vac(vec![rat(1), rat(1), rat(0), rat(0)]);
        let w = apply_mode(&c, &xp, &rat(-1), &v);
        let (_, _, co) = w.first_term().unwrap();
        assert_eq!(co, &Coeff::int(-1));
    }

    #[test]
    fn full_and_mode_application_agree() {
        let c = cfg();
        let space = SpaceSpec::alpha(rat(1), rat(0));
        let st = FockState::vacuum(space.weight_at(0, 0)).with_mode_delta(c.a(2), 1, 1);
        let v = ZVector::from_state(st);
        for op in [x_plus(&c, 1), x_minus(&c, 1), x_plus(&c, 2), x_minus(&c, 2)] {
            let full = apply_full(&c, &op, &v, 4);
            // Reassemble each ambient slice from single-mode applications.
            for (zexp, slice) in full.iter() {
                let m = -zexp - &op.delta;
                let single = apply_mode(&c, &op, &m, &v);
                let expect: Vec<_> = single
                    .iter()
                    .filter(|(z, _)| *z == &Rat::zero())
                    .flat_map(|(_, s)| s.states())
                    .filter(|(st, _)| st.degree() <= 4)
                    .map(|(st, co)| ((*st).clone(), co.clone()))
                    .collect();
                let got: Vec<_> = slice
                    .states()
                    .filter(|(st, _)| st.degree() <= 4)
                    .map(|(st, co)| ((*st).clone(), co.clone()))
                    .collect();
                assert_eq!(got, expect, "slice z^{zexp}");
            }
        }
    }

    #[test]
    fn fermion_pair_anticommutator() {
        // {xi_r, eta_s} = delta_{r+s,0} on states of degree <= 2 for
        // |r|, |s| <= 2, on weights with integer and shifted c-charge.
        let c = cfg();
        for lc in [rat(0), rat(-1), rat(2)] {
            let weight = vec![rat(0), rat(0), rat(0), lc];
            for st in crate::boson::raw_states_up_to(&c, &weight, 2) {
                let v = ZVector::from_state(st);
                for r in -2..=2i64 {
                    for s in -2..=2i64 {
                        let ev = apply_mode(&c, &eta(&c), &rat(s), &v);
                        let xe = apply_mode(&c, &xi(&c), &rat(r), &ev);
                        let xv = apply_mode(&c, &xi(&c), &rat(r), &v);
                        let ex = apply_mode(&c, &eta(&c), &rat(s), &xv);
                        let anti = xe.add(&ex);
                        if r + s == 0 {
                            assert_eq!(anti, v.clone(), "r={r} s={s}");
                        } else {
                            assert!(anti.is_zero(), "r={r} s={s}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn fermion_zero_modes_detect_charge_sign() {
        let c = cfg();
        // On a pure momentum state, eta_0 acts nontrivially iff lc <= -1
        // and xi_0 acts nontrivially iff lc >= 0.
        for lc in -3..=3i64 {
            let v = vac(vec![rat(0), rat(0), rat(0), rat(lc)]);
            let ev = apply_mode(&c, &eta(&c), &rat(0), &v);
            let xv = apply_mode(&c, &xi(&c), &rat(0), &v);
            assert_eq!(ev.is_zero(), lc >= 0, "eta_0 at lc={lc}");
            assert_eq!(xv.is_zero(), lc <= -1, "xi_0 at lc={lc}");
        }
    }

    #[test]
    fn qdiff_terms_carry_inverse_of_q_minus_qinv() {
        let c = cfg();
        let op = x_minus(&c, 2);
        assert_eq!(op.terms.len(), 2);
        let got = op.terms[0].pref.clone();
        let expect = Coeff::from_ratq(RatQ::new(LaurentQ::one(), qpow_diff(1)));
        assert_eq!(got, expect);
        assert_eq!(op.terms[1].pref, expect.neg());
        assert_eq!(op.terms[0].zoffset, rat(-1));
    }

    #[test]
    fn lowering_current_dresses_momentum_with_q() {
        let c = cfg();
        // X^{-,2} has a q^{rho h_0} dressing from the shifted argument; on a
        // weight with la2 - lb + lc != 0 the two q-difference terms pick up
        // different q-powers through the c-charge only (rho multiplies the
        // c-field charge alone).
        let xm = x_minus(&c, 2);
        let u0 = xm.terms[0].u0(&c);
        assert_eq!(u0[c.a(2)], rat(0));
        assert_eq!(u0[c.c(1)], rat(-1));
        let u1 = xm.terms[1].u0(&c);
        assert_eq!(u1[c.c(1)], rat(1));
    }
}
