//! Exact algebra over finite quasi-periodic trigonometric sums.
//!
//! A [`QPSeries`] is a finite sum `sum_j c_j * exp(i*(k_j*omega + n_j*nu)*t)`
//! where `omega` is the drive fundamental and `nu` is an auxiliary base
//! frequency (the quasienergy of a solved system). Frequencies are keyed by
//! the exact integer pair `(n, k)` rather than by floating-point value, so
//! products like `exp(+i*nu*t) * exp(-i*nu*t)` cancel to the zero frequency
//! exactly even when `nu` is irrational relative to `omega`. Closure under
//! products, derivatives and (up to one secular term) antiderivatives is what
//! keeps long-horizon phase integrals free of quadrature error.

use alloc::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::C64;

#[allow(unused_imports)]
use num_traits::Float;

/// Relative coefficient magnitude below which a term is dropped during
/// canonicalization. Keeps series sizes bounded after repeated products.
pub const DROP_TOL: f64 = 1e-14;

/// Default threshold below which a frequency is treated as exactly zero when
/// antidifferentiating, avoiding catastrophic cancellation in `c/(i*lambda)`.
pub const ZERO_FREQ_TOL: f64 = 1e-12;

/// Exact frequency key: `n` counts multiples of the auxiliary base `nu`,
/// `k` counts drive harmonics.
pub type FreqKey = (i32, i32);

/// Finite sum of complex-coefficient exponentials `c * exp(i*(k*omega + n*nu)*t)`.
///
/// Immutable after construction; every operation returns a new canonical
/// series (no duplicate keys, no sub-threshold coefficients).
#[derive(Debug, Clone, PartialEq)]
pub struct QPSeries {
    omega: f64,
    nu_base: f64,
    cutoff: i32,
    terms: BTreeMap<FreqKey, C64>,
    truncation_residual: f64,
}

impl QPSeries {
    /// Empty series.
    pub fn zero(omega: f64, nu_base: f64, cutoff: i32) -> Self {
        QPSeries { omega, nu_base, cutoff, terms: BTreeMap::new(), truncation_residual: 0.0 }
    }

    /// Canonicalized series from raw `(n, k, c)` triples. Terms with
    /// `|k| > cutoff` are folded into the truncation residual.
    pub fn from_terms<I>(omega: f64, nu_base: f64, cutoff: i32, terms: I) -> Self
    where
        I: IntoIterator<Item = (i32, i32, C64)>,
    {
        let mut s = Self::zero(omega, nu_base, cutoff);
        for (n, k, c) in terms {
            s.accumulate((n, k), c);
        }
        s.canonicalize();
        s
    }

    /// Single-term series.
    pub fn term(omega: f64, nu_base: f64, cutoff: i32, n: i32, k: i32, c: C64) -> Self {
        Self::from_terms(omega, nu_base, cutoff, [(n, k, c)])
    }

    /// Constant (zero-frequency) series.
    pub fn constant(omega: f64, nu_base: f64, cutoff: i32, c: C64) -> Self {
        Self::term(omega, nu_base, cutoff, 0, 0, c)
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn nu_base(&self) -> f64 {
        self.nu_base
    }

    pub fn cutoff(&self) -> i32 {
        self.cutoff
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// Total coefficient magnitude discarded by harmonic truncation in the
    /// history of this series.
    pub fn truncation_residual(&self) -> f64 {
        self.truncation_residual
    }

    pub fn terms(&self) -> impl Iterator<Item = (FreqKey, C64)> + '_ {
        self.terms.iter().map(|(&k, &c)| (k, c))
    }

    /// Numeric angular frequency of a key.
    pub fn frequency(&self, key: FreqKey) -> f64 {
        key.1 as f64 * self.omega + key.0 as f64 * self.nu_base
    }

    /// Evaluate the sum at time `t`.
    pub fn eval(&self, t: f64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (&key, &c) in &self.terms {
            acc += c * C64::cis(self.frequency(key) * t);
        }
        acc
    }

    /// Complex conjugate series: `(n, k, c) -> (-n, -k, conj(c))`.
    pub fn conj(&self) -> Self {
        let mut out = Self::zero(self.omega, self.nu_base, self.cutoff);
        out.truncation_residual = self.truncation_residual;
        for (&(n, k), &c) in &self.terms {
            out.accumulate((-n, -k), c.conj());
        }
        out.canonicalize();
        out
    }

    /// Analytic time derivative: each term picks up `i*lambda`.
    pub fn derivative(&self) -> Self {
        let mut out = Self::zero(self.omega, self.nu_base, self.cutoff);
        out.truncation_residual = self.truncation_residual;
        for (&key, &c) in &self.terms {
            let lambda = self.frequency(key);
            out.accumulate(key, c * C64::new(0.0, lambda));
        }
        out.canonicalize();
        out
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v *= c;
        }
        out.canonicalize();
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(C64::new(-1.0, 0.0))
    }

    /// Pointwise sum. Fails on mismatched fundamentals or incompatible
    /// auxiliary bases.
    pub fn add(&self, other: &Self) -> Result<Self> {
        let (omega, nu) = self.merged_base(other)?;
        let mut out = Self::zero(omega, nu, self.cutoff.max(other.cutoff));
        out.truncation_residual = self.truncation_residual + other.truncation_residual;
        for (&key, &c) in &self.terms {
            out.accumulate(key, c);
        }
        for (&key, &c) in &other.terms {
            out.accumulate(key, c);
        }
        out.canonicalize();
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// Pointwise product. The harmonic index grows to the combined cutoff and
    /// is then re-truncated to `max(M_a, M_b)`; the dropped coefficient mass
    /// is recorded on the result.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let (omega, nu) = self.merged_base(other)?;
        let cutoff = self.cutoff.max(other.cutoff);
        let mut out = Self::zero(omega, nu, cutoff);
        let mut dropped = 0.0;
        for (&(na, ka), &ca) in &self.terms {
            for (&(nb, kb), &cb) in &other.terms {
                let key = (na + nb, ka + kb);
                let c = ca * cb;
                if key.1.abs() > cutoff {
                    dropped += c.norm();
                } else {
                    out.accumulate(key, c);
                }
            }
        }
        out.truncation_residual =
            self.truncation_residual + other.truncation_residual + dropped;
        out.canonicalize();
        Ok(out)
    }

    /// Analytic antiderivative with `F(0) = 0`. Terms whose frequency
    /// magnitude is at most `zero_threshold` accumulate into the secular
    /// (linear-in-t) coefficient instead of dividing by a tiny `i*lambda`.
    pub fn antiderivative(&self, zero_threshold: f64) -> SecularSeries {
        let mut osc = Self::zero(self.omega, self.nu_base, self.cutoff);
        osc.truncation_residual = self.truncation_residual;
        let mut secular = C64::new(0.0, 0.0);
        let mut at_zero = C64::new(0.0, 0.0);
        for (&key, &c) in &self.terms {
            let lambda = self.frequency(key);
            if lambda.abs() <= zero_threshold {
                secular += c;
            } else {
                let a = c / C64::new(0.0, lambda);
                osc.accumulate(key, a);
                at_zero += a;
            }
        }
        // subtract F_osc(0) so the antiderivative vanishes at t = 0
        osc.accumulate((0, 0), -at_zero);
        osc.canonicalize();
        SecularSeries { oscillatory: osc, secular }
    }

    fn merged_base(&self, other: &Self) -> Result<(f64, f64)> {
        if self.omega != other.omega {
            return Err(Error::FrequencyMismatch { lhs: self.omega, rhs: other.omega });
        }
        if self.nu_base == other.nu_base {
            return Ok((self.omega, self.nu_base));
        }
        // a side that never uses nu tags is compatible with any base
        if !self.uses_nu() {
            return Ok((self.omega, other.nu_base));
        }
        if !other.uses_nu() {
            return Ok((self.omega, self.nu_base));
        }
        Err(Error::FrequencyMismatch { lhs: self.nu_base, rhs: other.nu_base })
    }

    fn uses_nu(&self) -> bool {
        self.terms.keys().any(|&(n, _)| n != 0)
    }

    fn accumulate(&mut self, key: FreqKey, c: C64) {
        if key.1.abs() > self.cutoff {
            self.truncation_residual += c.norm();
            return;
        }
        *self.terms.entry(key).or_insert_with(|| C64::new(0.0, 0.0)) += c;
    }

    fn canonicalize(&mut self) {
        let max = self
            .terms
            .values()
            .map(|c| c.norm())
            .fold(0.0_f64, f64::max);
        if max == 0.0 {
            self.terms.clear();
            return;
        }
        let floor = DROP_TOL * max;
        self.terms.retain(|_, c| c.norm() > floor);
    }
}

/// Antiderivative of a [`QPSeries`]: an oscillatory part plus one secular
/// linear-in-t term collecting the zero-frequency input coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SecularSeries {
    oscillatory: QPSeries,
    secular: C64,
}

impl SecularSeries {
    pub fn oscillatory(&self) -> &QPSeries {
        &self.oscillatory
    }

    /// Coefficient of the linear-in-t term.
    pub fn secular_coefficient(&self) -> C64 {
        self.secular
    }

    pub fn eval(&self, t: f64) -> C64 {
        self.oscillatory.eval(t) + self.secular * t
    }

    /// Definite integral of the original series over `[t0, t1]`.
    pub fn definite(&self, t0: f64, t1: f64) -> C64 {
        self.eval(t1) - self.eval(t0)
    }

    /// Analytic derivative; reproduces the integrand up to the
    /// zero-threshold reclassification.
    pub fn derivative(&self) -> QPSeries {
        let d = self.oscillatory.derivative();
        let c = QPSeries::constant(
            self.oscillatory.omega(),
            self.oscillatory.nu_base(),
            self.oscillatory.cutoff(),
            self.secular,
        );
        d.add(&c).expect("same base by construction")
    }
}
