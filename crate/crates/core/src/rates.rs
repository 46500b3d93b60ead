//! One-, two- and three-phonon transition rates `R^(2)`, `R^(4)`, `R^(6)`
//! between system eigenstates, resolved by channel.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::amplitudes::{regularized_inverse, PERMUTATIONS_3};
use crate::channel::{Phonon, SignPattern};
use crate::error::{Error, Result};
use crate::lineshape::Lineshape;
use crate::reduce::{ordered_map, ordered_sum};
use crate::system::{CouplingSet, Model, PhononBath, SpinSystem};
use crate::thermal::{occupations, Temperature};
use crate::units::rate_to_per_second;

pub use crate::reduce::Reduction;

/// Perturbative order of the rate (twice the number of phonons).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Order {
    Two,
    Four,
    Six,
}

impl Order {
    pub const ALL: [Order; 3] = [Order::Two, Order::Four, Order::Six];

    pub fn value(self) -> u8 {
        match self {
            Order::Two => 2,
            Order::Four => 4,
            Order::Six => 6,
        }
    }

    pub fn phonons(self) -> usize {
        self.value() as usize / 2
    }

    pub fn from_value(v: u8) -> Result<Self> {
        match v {
            2 => Ok(Order::Two),
            4 => Ok(Order::Four),
            6 => Ok(Order::Six),
            _ => Err(Error::invalid(format!("order must be 2, 4 or 6, got {v}"))),
        }
    }

    /// Parse a comma-separated list such as `2,4,6`.
    pub fn parse_list(s: &str) -> Result<Vec<Order>> {
        let mut out: Vec<Order> = s
            .split(',')
            .map(|t| {
                let t = t.trim();
                t.parse::<u8>()
                    .map_err(|_| Error::invalid(format!("bad order '{t}'")))
                    .and_then(Order::from_value)
            })
            .collect::<Result<_>>()?;
        out.sort();
        out.dedup();
        Ok(out)
    }
}

impl TryFrom<u8> for Order {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self> {
        Order::from_value(v)
    }
}

impl From<Order> for u8 {
    fn from(o: Order) -> u8 {
        o.value()
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// Rate of one transition `a → b` at one order, split by channel. All
/// rates in s⁻¹.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateBreakdown {
    pub order: Order,
    pub per_channel: BTreeMap<SignPattern, f64>,
    pub total: f64,
}

impl RateBreakdown {
    fn from_channels(order: Order, channels: Vec<(SignPattern, f64)>) -> Self {
        let total = ordered_sum(&channels.iter().map(|c| c.1).collect::<Vec<_>>());
        Self {
            order,
            per_channel: channels.into_iter().collect(),
            total,
        }
    }

    /// Every channel of `order` present with rate zero.
    pub fn zero(order: Order) -> Self {
        let ch = SignPattern::channels(order.phonons())
            .iter()
            .map(|&p| (p, 0.0))
            .collect();
        Self::from_channels(order, ch)
    }

    pub fn channel(&self, p: SignPattern) -> f64 {
        self.per_channel.get(&p).copied().unwrap_or(0.0)
    }
}

/// Ordered mode triple `α < β < γ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TripleIndex {
    pub alpha: usize,
    pub beta: usize,
    pub gamma: usize,
}

/// Indices `j` in `lo_index..` with `freqs[j]` inside `center ± half`, widened
/// by a relative slack; callers re-test each candidate exactly.
fn window_range(freqs: &[f64], lo_index: usize, center: f64, half: f64) -> std::ops::Range<usize> {
    if lo_index >= freqs.len() {
        return lo_index..lo_index;
    }
    let slack = 1e-9 * (center.abs() + half) + 1e-300;
    let tail = &freqs[lo_index..];
    let lo = tail.partition_point(|&w| w < center - half - slack);
    let hi = tail.partition_point(|&w| w <= center + half + slack);
    lo_index + lo..lo_index + hi.max(lo)
}

/// Mode indices `γ > β` whose frequency can close `pattern` within the
/// lineshape window, given `(α, β)`; exact membership is decided by
/// [`SignPattern::detuning`].
#[inline]
fn gamma_candidates(
    freqs: &[f64],
    omega_ba: f64,
    pattern: SignPattern,
    alpha: usize,
    beta: usize,
    cutoff: f64,
) -> std::ops::Range<usize> {
    let partial = pattern.detuning(omega_ba, &[freqs[alpha], freqs[beta]]);
    let center = -pattern.get(2).sign() * partial;
    window_range(freqs, beta + 1, center, cutoff)
}

/// Visit every triple of `pattern` with `α` fixed whose energy mismatch lies
/// inside the window, passing the triple and its detuning.
#[inline]
fn for_each_triple_from<F: FnMut(usize, usize, f64)>(
    freqs: &[f64],
    omega_ba: f64,
    pattern: SignPattern,
    cutoff: f64,
    alpha: usize,
    mut f: F,
) {
    let n = freqs.len();
    for beta in alpha + 1..n {
        for gamma in gamma_candidates(freqs, omega_ba, pattern, alpha, beta, cutoff) {
            let d = pattern.detuning(omega_ba, &[freqs[alpha], freqs[beta], freqs[gamma]]);
            if d.abs() <= cutoff {
                f(beta, gamma, d);
            }
        }
    }
}

/// All triples `α < β < γ` with `|ω_ba + s_α ω_α + s_β ω_β + s_γ ω_γ| ≤ w·σ`,
/// enumerated in lexicographic order by a binary search for the γ window
/// of each `(α, β)`.
pub fn prune_triples(
    omega_ba: f64,
    pattern: SignPattern,
    bath: &PhononBath,
    shape: &Lineshape,
) -> Result<Vec<TripleIndex>> {
    if pattern.len() != 3 {
        return Err(Error::Shape(format!(
            "pattern {pattern} is not a three-phonon channel"
        )));
    }
    let freqs = bath.frequencies();
    let mut out = Vec::new();
    for alpha in 0..freqs.len() {
        for_each_triple_from(
            freqs,
            omega_ba,
            pattern,
            shape.cutoff(),
            alpha,
            |beta, gamma, _| out.push(TripleIndex { alpha, beta, gamma }),
        );
    }
    Ok(out)
}

/// Intermediate sums `Σ_d V^ν_cd V^ξ_da / (E_d - E_a + s_ξ ω_ξ + iη)` for a
/// fixed initial state `a`, indexed by `(s_ξ, ν, ξ, c)`.
pub(crate) struct PairTable {
    a: usize,
    n_modes: usize,
    n_states: usize,
    data: Vec<Complex64>,
}

impl PairTable {
    #[inline]
    fn get(&self, s: Phonon, nu: usize, xi: usize) -> &[Complex64] {
        let si = usize::from(s == Phonon::Absorb);
        let start = ((si * self.n_modes + nu) * self.n_modes + xi) * self.n_states;
        &self.data[start..start + self.n_states]
    }
}

/// Precomputed inputs shared by all rate evaluations of one model at one
/// temperature.
pub(crate) struct Kernel<'m> {
    energies: &'m [f64],
    freqs: &'m [f64],
    occ: Vec<f64>,
    shape: Lineshape,
    /// `λ V^α_bc` at `(α·N_s + b)·N_s + c`.
    v: Vec<Complex64>,
    ns: usize,
    reduction: Reduction,
}

impl<'m> Kernel<'m> {
    pub(crate) fn new(
        sys: &'m SpinSystem,
        bath: &'m PhononBath,
        cpl: &CouplingSet,
        t: Temperature,
        shape: &Lineshape,
        reduction: Reduction,
    ) -> Result<Self> {
        if cpl.len() != bath.len() {
            return Err(Error::Shape(format!(
                "{} couplings for {} modes",
                cpl.len(),
                bath.len()
            )));
        }
        let ns = sys.dim();
        let lam = cpl.scale();
        let mut v = Vec::with_capacity(bath.len() * ns * ns);
        for m in cpl.matrices() {
            if m.nrows() != ns {
                return Err(Error::Shape(format!(
                    "coupling dimension {} does not match {ns} states",
                    m.nrows()
                )));
            }
            for b in 0..ns {
                for c in 0..ns {
                    v.push(m[(b, c)] * lam);
                }
            }
        }
        Ok(Self {
            energies: sys.energies(),
            freqs: bath.frequencies(),
            occ: occupations(bath.frequencies(), t),
            shape: *shape,
            v,
            ns,
            reduction,
        })
    }

    #[inline]
    fn row(&self, alpha: usize, b: usize) -> &[Complex64] {
        let start = (alpha * self.ns + b) * self.ns;
        &self.v[start..start + self.ns]
    }

    #[inline]
    fn elem(&self, alpha: usize, b: usize, c: usize) -> Complex64 {
        self.v[(alpha * self.ns + b) * self.ns + c]
    }

    fn prefactor() -> f64 {
        rate_to_per_second(2.0 * PI)
    }

    fn check_pair(&self, b: usize, a: usize) -> Result<()> {
        for (i, name) in [(b, "b"), (a, "a")] {
            if i >= self.ns {
                return Err(Error::IndexOutOfRange(format!(
                    "{name} = {i} with {} states",
                    self.ns
                )));
            }
        }
        if b == a {
            return Err(Error::invalid(
                "b = a: the diagonal is not a population-transfer rate",
            ));
        }
        Ok(())
    }

    pub(crate) fn one_phonon(&self, b: usize, a: usize) -> Result<RateBreakdown> {
        self.check_pair(b, a)?;
        let omega_ba = self.energies[b] - self.energies[a];
        let channels = SignPattern::ONE_PHONON
            .iter()
            .map(|&p| {
                let mut acc = 0.0;
                for (alpha, &w) in self.freqs.iter().enumerate() {
                    let weight =
                        p.weight_with(omega_ba, &[w], &self.occ[alpha..=alpha], &self.shape);
                    if weight != 0.0 {
                        acc += self.elem(alpha, b, a).norm_sqr() * weight;
                    }
                }
                (p, Self::prefactor() * acc)
            })
            .collect();
        Ok(RateBreakdown::from_channels(Order::Two, channels))
    }

    /// `Σ_c λV^μ_bc λV^ν_ca / (E_c - E_a + s ω_ν + iη)`.
    #[inline]
    fn amp2(&self, b: usize, a: usize, mu: usize, nu: usize, s: Phonon) -> Complex64 {
        let shift = s.sign() * self.freqs[nu] - self.energies[a];
        let eta = self.shape.eta();
        let row = self.row(mu, b);
        let mut acc = Complex64::new(0.0, 0.0);
        for c in 0..self.ns {
            acc +=
                row[c] * self.elem(nu, c, a) * regularized_inverse(self.energies[c] + shift, eta);
        }
        acc
    }

    pub(crate) fn two_phonon(&self, b: usize, a: usize) -> Result<RateBreakdown> {
        self.check_pair(b, a)?;
        let omega_ba = self.energies[b] - self.energies[a];
        let freqs = self.freqs;
        let cutoff = self.shape.cutoff();
        let channels = SignPattern::TWO_PHONON
            .iter()
            .map(|&p| {
                let partials = ordered_map(freqs.len(), self.reduction, |alpha| {
                    let center = -p.get(1).sign() * p.detuning(omega_ba, &freqs[alpha..=alpha]);
                    let mut acc = 0.0;
                    for beta in window_range(freqs, alpha + 1, center, cutoff) {
                        let f = [freqs[alpha], freqs[beta]];
                        let weight = p.weight_with(
                            omega_ba,
                            &f,
                            &[self.occ[alpha], self.occ[beta]],
                            &self.shape,
                        );
                        if weight == 0.0 {
                            continue;
                        }
                        let amp = self.amp2(b, a, beta, alpha, p.get(0))
                            + self.amp2(b, a, alpha, beta, p.get(1));
                        acc += amp.norm_sqr() * weight;
                    }
                    acc
                });
                (p, Self::prefactor() * ordered_sum(&partials))
            })
            .collect();
        Ok(RateBreakdown::from_channels(Order::Four, channels))
    }

    pub(crate) fn pair_table(&self, a: usize) -> PairTable {
        let (n, ns, eta) = (self.freqs.len(), self.ns, self.shape.eta());
        let ea = self.energies[a];
        let mut data = vec![Complex64::new(0.0, 0.0); 2 * n * n * ns];
        for (si, s) in [Phonon::Emit, Phonon::Absorb].into_iter().enumerate() {
            for xi in 0..n {
                let inv: Vec<Complex64> = (0..ns)
                    .map(|d| {
                        self.elem(xi, d, a)
                            * regularized_inverse(
                                self.energies[d] - ea + s.sign() * self.freqs[xi],
                                eta,
                            )
                    })
                    .collect();
                for nu in 0..n {
                    let start = ((si * n + nu) * n + xi) * ns;
                    for c in 0..ns {
                        let row = self.row(nu, c);
                        let mut acc = Complex64::new(0.0, 0.0);
                        for d in 0..ns {
                            acc += row[d] * inv[d];
                        }
                        data[start + c] = acc;
                    }
                }
            }
        }
        PairTable {
            a,
            n_modes: n,
            n_states: ns,
            data,
        }
    }

    #[inline]
    fn amp3_full(
        &self,
        b: usize,
        table: &PairTable,
        triple: [usize; 3],
        p: SignPattern,
    ) -> Complex64 {
        let ea = self.energies[table.a];
        let eta = self.shape.eta();
        let mut total = Complex64::new(0.0, 0.0);
        for perm in PERMUTATIONS_3 {
            let (mu, nu, xi) = (triple[perm[0]], triple[perm[1]], triple[perm[2]]);
            let (s_nu, s_xi) = (p.get(perm[1]), p.get(perm[2]));
            let shift = s_nu.sign() * self.freqs[nu] + s_xi.sign() * self.freqs[xi] - ea;
            let inner = table.get(s_xi, nu, xi);
            let row = self.row(mu, b);
            let mut acc = Complex64::new(0.0, 0.0);
            for c in 0..self.ns {
                acc += row[c] * inner[c] * regularized_inverse(self.energies[c] + shift, eta);
            }
            total += acc;
        }
        total
    }

    pub(crate) fn three_phonon(&self, b: usize, table: &PairTable) -> Result<RateBreakdown> {
        let a = table.a;
        self.check_pair(b, a)?;
        let omega_ba = self.energies[b] - self.energies[a];
        let freqs = self.freqs;
        let cutoff = self.shape.cutoff();
        let channels = SignPattern::THREE_PHONON
            .iter()
            .map(|&p| {
                let partials = ordered_map(freqs.len(), self.reduction, |alpha| {
                    let mut acc = 0.0;
                    for_each_triple_from(freqs, omega_ba, p, cutoff, alpha, |beta, gamma, d| {
                        let thermal =
                            p.thermal_factor(&[self.occ[alpha], self.occ[beta], self.occ[gamma]]);
                        let weight = thermal * self.shape.weight(d);
                        if weight != 0.0 {
                            acc += self.amp3_full(b, table, [alpha, beta, gamma], p).norm_sqr()
                                * weight;
                        }
                    });
                    acc
                });
                (p, Self::prefactor() * ordered_sum(&partials))
            })
            .collect();
        Ok(RateBreakdown::from_channels(Order::Six, channels))
    }

    pub(crate) fn three_phonon_pair(&self, b: usize, a: usize) -> Result<RateBreakdown> {
        self.check_pair(b, a)?;
        if self.freqs.len() < 3 {
            return Ok(RateBreakdown::zero(Order::Six));
        }
        let table = self.pair_table(a);
        self.three_phonon(b, &table)
    }

    pub(crate) fn rate(&self, order: Order, b: usize, a: usize) -> Result<RateBreakdown> {
        match order {
            Order::Two => self.one_phonon(b, a),
            Order::Four => self.two_phonon(b, a),
            Order::Six => self.three_phonon_pair(b, a),
        }
    }
}

/// One-phonon (direct) rate `a → b`, channels `+` (emission) and `-`
/// (absorption).
pub fn rate_one_phonon(
    b: usize,
    a: usize,
    sys: &SpinSystem,
    bath: &PhononBath,
    cpl: &CouplingSet,
    t: Temperature,
    shape: &Lineshape,
) -> Result<RateBreakdown> {
    Kernel::new(sys, bath, cpl, t, shape, Reduction::Sequential)?.one_phonon(b, a)
}

/// Two-phonon (Raman) rate `a → b` over mode pairs `α < β`, channels
/// `++ -- +- -+`.
pub fn rate_two_phonon(
    b: usize,
    a: usize,
    sys: &SpinSystem,
    bath: &PhononBath,
    cpl: &CouplingSet,
    t: Temperature,
    shape: &Lineshape,
) -> Result<RateBreakdown> {
    rate_two_phonon_with(b, a, sys, bath, cpl, t, shape, Reduction::Parallel)
}

#[allow(clippy::too_many_arguments)]
pub fn rate_two_phonon_with(
    b: usize,
    a: usize,
    sys: &SpinSystem,
    bath: &PhononBath,
    cpl: &CouplingSet,
    t: Temperature,
    shape: &Lineshape,
    reduction: Reduction,
) -> Result<RateBreakdown> {
    Kernel::new(sys, bath, cpl, t, shape, reduction)?.two_phonon(b, a)
}

/// Three-phonon rate `a → b` over resonance-pruned triples `α < β < γ`,
/// all eight channels.
pub fn rate_three_phonon(
    b: usize,
    a: usize,
    sys: &SpinSystem,
    bath: &PhononBath,
    cpl: &CouplingSet,
    t: Temperature,
    shape: &Lineshape,
) -> Result<RateBreakdown> {
    rate_three_phonon_with(b, a, sys, bath, cpl, t, shape, Reduction::Parallel)
}

#[allow(clippy::too_many_arguments)]
pub fn rate_three_phonon_with(
    b: usize,
    a: usize,
    sys: &SpinSystem,
    bath: &PhononBath,
    cpl: &CouplingSet,
    t: Temperature,
    shape: &Lineshape,
    reduction: Reduction,
) -> Result<RateBreakdown> {
    Kernel::new(sys, bath, cpl, t, shape, reduction)?.three_phonon_pair(b, a)
}

/// Rate `a → b` at `order` for a whole model.
pub fn rate(
    order: Order,
    b: usize,
    a: usize,
    model: &Model,
    t: Temperature,
    shape: &Lineshape,
) -> Result<RateBreakdown> {
    Kernel::new(
        &model.system,
        &model.bath,
        &model.couplings,
        t,
        shape,
        Reduction::Parallel,
    )?
    .rate(order, b, a)
}
