//! Bivariate copula families, rank transforms and parameter fitting.
//!
//! Edge potentials of the forest models are bivariate copula densities
//! evaluated at pseudo-observations, so everything here works on the unit
//! square.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{asin, exp, expm1, fabs, lgamma, log, log1p, pow, sin, sqrt};
use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Exp1, StandardNormal};

use crate::data::DataMatrix;
use crate::error::CopulaError;
use crate::special::{
    bvn_cdf, bvt_cdf, debye1, gauss_legendre, norm_cdf, norm_quantile, t_cdf, t_quantile,
    t_tail,
};

/// Density arguments are clipped to `[CLIP, 1 - CLIP]`.
pub const CLIP: f64 = 1e-6;

/// Degrees of freedom considered when fitting a Student's t copula.
pub const T_DF_GRID: [f64; 4] = [1.0, 2.0, 4.0, 8.0];

const RHO_MAX: f64 = 0.999;
const CLAYTON_MIN: f64 = 1e-6;
const CLAYTON_MAX: f64 = 50.0;
const GUMBEL_MAX: f64 = 50.0;
const FRANK_MAX: f64 = 50.0;
const FRANK_MIN_ABS: f64 = 1e-8;
const GOLDEN_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CopulaFamily {
    Gaussian,
    StudentT,
    Clayton,
    Gumbel,
    Frank,
    Independence,
}

impl CopulaFamily {
    /// The parametric candidates (everything but the independence fallback).
    pub const CANDIDATES: [CopulaFamily; 5] = [
        CopulaFamily::Gaussian,
        CopulaFamily::StudentT,
        CopulaFamily::Clayton,
        CopulaFamily::Gumbel,
        CopulaFamily::Frank,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CopulaFamily::Gaussian => "gaussian",
            CopulaFamily::StudentT => "student-t",
            CopulaFamily::Clayton => "clayton",
            CopulaFamily::Gumbel => "gumbel",
            CopulaFamily::Frank => "frank",
            CopulaFamily::Independence => "independence",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        let lower = name.trim();
        [
            CopulaFamily::Gaussian,
            CopulaFamily::StudentT,
            CopulaFamily::Clayton,
            CopulaFamily::Gumbel,
            CopulaFamily::Frank,
            CopulaFamily::Independence,
        ]
        .into_iter()
        .find(|f| f.name().eq_ignore_ascii_case(lower))
        .or(["t", "studentt", "student_t"]
            .iter()
            .any(|alias| alias.eq_ignore_ascii_case(lower))
            .then_some(CopulaFamily::StudentT))
    }
}

/// A copula family with its dependence parameter. `df` is only meaningful for
/// the Student's t family.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CopulaSpec {
    pub family: CopulaFamily,
    pub theta: f64,
    pub df: f64,
}

impl CopulaSpec {
    pub const INDEPENDENCE: CopulaSpec =
        CopulaSpec { family: CopulaFamily::Independence, theta: 0.0, df: 0.0 };

    pub fn new(family: CopulaFamily, theta: f64, df: f64) -> Result<Self, CopulaError> {
        let spec = Self { family, theta, df };
        spec.validate()?;
        Ok(spec)
    }

    pub fn gaussian(rho: f64) -> Result<Self, CopulaError> {
        Self::new(CopulaFamily::Gaussian, rho, 0.0)
    }

    pub fn student_t(rho: f64, df: f64) -> Result<Self, CopulaError> {
        Self::new(CopulaFamily::StudentT, rho, df)
    }

    pub fn clayton(theta: f64) -> Result<Self, CopulaError> {
        Self::new(CopulaFamily::Clayton, theta, 0.0)
    }

    pub fn gumbel(theta: f64) -> Result<Self, CopulaError> {
        Self::new(CopulaFamily::Gumbel, theta, 0.0)
    }

    pub fn frank(theta: f64) -> Result<Self, CopulaError> {
        Self::new(CopulaFamily::Frank, theta, 0.0)
    }

    pub fn validate(&self) -> Result<(), CopulaError> {
        let t = self.theta;
        let ok = match self.family {
            CopulaFamily::Gaussian => t > -1.0 && t < 1.0,
            CopulaFamily::StudentT => {
                if !(self.df > 0.0 && self.df.is_finite()) {
                    return Err(CopulaError::ParameterOutOfDomain("student-t df must be positive"));
                }
                t > -1.0 && t < 1.0
            }
            CopulaFamily::Clayton => t > 0.0 && t.is_finite(),
            CopulaFamily::Gumbel => t >= 1.0 && t.is_finite(),
            CopulaFamily::Frank => t != 0.0 && t.is_finite(),
            CopulaFamily::Independence => true,
        };
        if ok {
            Ok(())
        } else {
            Err(CopulaError::ParameterOutOfDomain(self.family.name()))
        }
    }

    /// Log density at interior arguments; no clipping or validation.
    pub fn log_density_unchecked(&self, u: f64, v: f64) -> f64 {
        match self.family {
            CopulaFamily::Independence => 0.0,
            CopulaFamily::Gaussian => {
                gaussian_log_density(self.theta, norm_quantile(u), norm_quantile(v))
            }
            CopulaFamily::StudentT => {
                let c = TConstants::new(self.df);
                c.log_density(self.theta, t_quantile(u, self.df), t_quantile(v, self.df))
            }
            CopulaFamily::Clayton => clayton_log_density(self.theta, log(u), log(v)),
            CopulaFamily::Gumbel => gumbel_log_density(self.theta, -log(u), -log(v)),
            CopulaFamily::Frank => frank_log_density(self.theta, u, v),
        }
    }

    /// Kendall's tau implied by the parameter.
    pub fn kendall_tau(&self) -> f64 {
        match self.family {
            CopulaFamily::Gaussian | CopulaFamily::StudentT => 2.0 / PI * asin(self.theta),
            CopulaFamily::Clayton => self.theta / (self.theta + 2.0),
            CopulaFamily::Gumbel => 1.0 - 1.0 / self.theta,
            CopulaFamily::Frank => frank_tau(self.theta),
            CopulaFamily::Independence => 0.0,
        }
    }
}

fn check_unit(u: f64) -> Result<(), CopulaError> {
    if (0.0..=1.0).contains(&u) {
        Ok(())
    } else {
        Err(CopulaError::ArgumentOutOfRange)
    }
}

#[inline]
fn clip(u: f64) -> f64 {
    u.clamp(CLIP, 1.0 - CLIP)
}

/// Copula density `c(u, v)`; arguments are clipped away from the boundary.
pub fn copula_density(spec: &CopulaSpec, u: f64, v: f64) -> Result<f64, CopulaError> {
    spec.validate()?;
    if !(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0) {
        return Err(CopulaError::ArgumentOutOfRange);
    }
    Ok(exp(spec.log_density_unchecked(clip(u), clip(v))))
}

/// Copula distribution function `C(u, v)` on the closed unit square.
pub fn copula_cdf(spec: &CopulaSpec, u: f64, v: f64) -> Result<f64, CopulaError> {
    spec.validate()?;
    check_unit(u)?;
    check_unit(v)?;
    if u == 0.0 || v == 0.0 {
        return Ok(0.0);
    }
    if u == 1.0 {
        return Ok(v);
    }
    if v == 1.0 {
        return Ok(u);
    }
    let t = spec.theta;
    let value = match spec.family {
        CopulaFamily::Independence => u * v,
        CopulaFamily::Gaussian => bvn_cdf(norm_quantile(u), norm_quantile(v), t),
        CopulaFamily::StudentT => {
            let df = spec.df;
            let x = t_quantile(u, df);
            let y = t_quantile(v, df);
            if fabs(df - libm::round(df)) < 1e-12 && df <= 1000.0 {
                bvt_cdf(df as u32, x, y, t)
            } else {
                student_t_cdf_quadrature(t, df, u, v)
            }
        }
        CopulaFamily::Clayton => {
            let s = pow(u, -t) + pow(v, -t) - 1.0;
            pow(s, -1.0 / t)
        }
        CopulaFamily::Gumbel => {
            let x = -log(u);
            let y = -log(v);
            exp(-pow(pow(x, t) + pow(y, t), 1.0 / t))
        }
        CopulaFamily::Frank => -log1p(expm1(-t * u) * expm1(-t * v) / expm1(-t)) / t,
    };
    Ok(value.clamp(0.0, u.min(v)))
}

// C(u, v) = int_0^u h(v | s) ds with the t conditional distribution.
fn student_t_cdf_quadrature(rho: f64, df: f64, u: f64, v: f64) -> f64 {
    let y = t_quantile(v, df);
    let scale = sqrt((1.0 - rho * rho) / (df + 1.0));
    let h = |s: f64| {
        if s <= 0.0 {
            return if rho >= 0.0 { 0.0 } else { 1.0 };
        }
        let x = t_quantile(s, df);
        let z = (y - rho * x) / (scale * sqrt(df + x * x));
        t_cdf(z, df + 1.0)
    };
    gauss_legendre(h, 0.0, u, 64)
}

fn gaussian_log_density(rho: f64, x: f64, y: f64) -> f64 {
    let one_m = 1.0 - rho * rho;
    -0.5 * log(one_m) - (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * one_m)
}

/// Constants of the bivariate/univariate t log densities for one `df`.
#[derive(Debug, Clone, Copy)]
struct TConstants {
    df: f64,
    // lgamma((df+2)/2) - lgamma(df/2) - log(df*pi) - 2*[univariate constant]
    offset: f64,
}

impl TConstants {
    fn new(df: f64) -> Self {
        let biv = lgamma(0.5 * (df + 2.0)) - lgamma(0.5 * df) - log(df * PI);
        let uni = lgamma(0.5 * (df + 1.0)) - lgamma(0.5 * df) - 0.5 * log(df * PI);
        Self { df, offset: biv - 2.0 * uni }
    }

    fn log_density(&self, rho: f64, x: f64, y: f64) -> f64 {
        let df = self.df;
        let one_m = 1.0 - rho * rho;
        let quad = (x * x - 2.0 * rho * x * y + y * y) / (df * one_m);
        self.offset - 0.5 * log(one_m) - 0.5 * (df + 2.0) * log1p(quad)
            + 0.5 * (df + 1.0) * (log1p(x * x / df) + log1p(y * y / df))
    }
}

// ln(e^a + e^b - 1) for a, b >= 0.
fn log_sum_exp_minus_one(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    m + log(exp(a - m) + exp(b - m) - exp(-m))
}

fn clayton_log_density(theta: f64, ln_u: f64, ln_v: f64) -> f64 {
    let s = log_sum_exp_minus_one(-theta * ln_u, -theta * ln_v);
    log1p(theta) - (1.0 + theta) * (ln_u + ln_v) - (2.0 + 1.0 / theta) * s
}

// x = -ln u, y = -ln v.
fn gumbel_log_density(theta: f64, x: f64, y: f64) -> f64 {
    let lx = log(x);
    let ly = log(y);
    let a = theta * lx;
    let b = theta * ly;
    let m = a.max(b);
    let ln_s = m + log(exp(a - m) + exp(b - m));
    let big_a = exp(ln_s / theta);
    -big_a + x + y + (theta - 1.0) * (lx + ly) + (1.0 / theta - 2.0) * ln_s + log(big_a + theta - 1.0)
}

fn frank_log_density(theta: f64, u: f64, v: f64) -> f64 {
    if fabs(theta) < FRANK_MIN_ABS {
        return 0.0;
    }
    if theta < 0.0 {
        // Rotation: c_{-t}(u, v) = c_t(u, 1 - v).
        return frank_log_density(-theta, u, 1.0 - v);
    }
    let t = theta;
    let eu = exp(-t * u);
    let ev = exp(-t * v);
    let denom = eu + ev - eu * ev - exp(-t);
    log(t) + log(-expm1(-t)) - t * (u + v) - 2.0 * log(denom)
}

fn frank_tau(theta: f64) -> f64 {
    if fabs(theta) < 1e-6 {
        return theta / 9.0;
    }
    1.0 - 4.0 / theta + 4.0 * debye1(theta) / theta
}

/// Empirical distribution function of one variable with the `rank / (n + 1)`
/// scaling and averaged ties.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalModel {
    sorted: Vec<f64>,
}

impl MarginalModel {
    pub fn fit(values: &[f64]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Self { sorted }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// `(#{x_i < x} + (#{x_i = x} + 1) / 2) / (n + 1)`.
    pub fn cdf(&self, x: f64) -> f64 {
        let below = self.sorted.partition_point(|&s| s < x);
        let upto = self.sorted.partition_point(|&s| s <= x);
        let ties = (upto - below) as f64;
        (below as f64 + 0.5 * (ties + 1.0)) / (self.sorted.len() as f64 + 1.0)
    }
}

/// `n x d` matrix of values strictly inside the unit interval, stored by column.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PseudoObservations {
    rows: usize,
    cols: usize,
    columns: Vec<Vec<f64>>,
}

impl PseudoObservations {
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self, CopulaError> {
        let rows = columns.first().map_or(0, Vec::len);
        if columns.is_empty() || columns.iter().any(|c| c.len() != rows) {
            return Err(CopulaError::BadShape);
        }
        if columns.iter().flatten().any(|&x| !(x > 0.0 && x < 1.0)) {
            return Err(CopulaError::ArgumentOutOfRange);
        }
        Ok(Self { rows, cols: columns.len(), columns })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.columns[i]
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.columns[col][row]
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let columns = self
            .columns
            .iter()
            .map(|c| rows.iter().map(|&r| c[r]).collect())
            .collect();
        Self { rows: rows.len(), cols: self.cols, columns }
    }
}

/// Rank-transforms every column to `rank / (n + 1)` with averaged ties.
pub fn to_pseudoobservations(data: &DataMatrix) -> Result<PseudoObservations, CopulaError> {
    let n = data.rows();
    if n < 2 {
        return Err(CopulaError::TooFewObservations { needed: 2, got: n });
    }
    let mut columns = Vec::with_capacity(data.cols());
    for i in 0..data.cols() {
        let col = data.column(i);
        let ranks = average_ranks(&col);
        if ranks.iter().all(|&r| r == ranks[0]) {
            return Err(CopulaError::ConstantColumn(i));
        }
        let scale = 1.0 / (n as f64 + 1.0);
        columns.push(ranks.into_iter().map(|r| r * scale).collect());
    }
    Ok(PseudoObservations { rows: n, cols: data.cols(), columns })
}

/// One-based ranks, ties sharing the average of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let avg = 0.5 * ((i + 1) + j) as f64;
        for &k in &order[i..j] {
            ranks[k] = avg;
        }
        i = j;
    }
    ranks
}

/// Kendall's tau-b in `O(n log n)` (Knight's algorithm).
pub fn kendall_tau(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len());
    if n < 2 {
        return 0.0;
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(y[a].total_cmp(&y[b])));
    let pairs = |len: u64| len * len.saturating_sub(1) / 2;
    let n0 = pairs(n as u64);

    let mut tied_x = 0u64;
    let mut tied_xy = 0u64;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && x[idx[j]] == x[idx[i]] {
            j += 1;
        }
        tied_x += pairs((j - i) as u64);
        let mut k = i;
        while k < j {
            let mut l = k + 1;
            while l < j && y[idx[l]] == y[idx[k]] {
                l += 1;
            }
            tied_xy += pairs((l - k) as u64);
            k = l;
        }
        i = j;
    }

    let mut ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    let mut buf = vec![0.0; n];
    let swaps = merge_count(&mut ys, &mut buf);

    let mut tied_y = 0u64;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && ys[j] == ys[i] {
            j += 1;
        }
        tied_y += pairs((j - i) as u64);
        i = j;
    }
    let denom = ((n0 - tied_x) as f64) * ((n0 - tied_y) as f64);
    if denom <= 0.0 {
        return 0.0;
    }
    let concordant_minus_discordant =
        n0 as f64 - tied_x as f64 - tied_y as f64 + tied_xy as f64 - 2.0 * swaps as f64;
    concordant_minus_discordant / sqrt(denom)
}

// Sorts `v` ascending and returns the number of strict inversions.
fn merge_count(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let (left, right) = v.split_at_mut(mid);
    let mut swaps = merge_count(left, &mut buf[..mid]) + merge_count(right, &mut buf[mid..]);
    let (mut i, mut j, mut k) = (0, 0, 0);
    while i < left.len() && j < right.len() {
        if right[j] < left[i] {
            buf[k] = right[j];
            swaps += (left.len() - i) as u64;
            j += 1;
        } else {
            buf[k] = left[i];
            i += 1;
        }
        k += 1;
    }
    while i < left.len() {
        buf[k] = left[i];
        i += 1;
        k += 1;
    }
    while j < right.len() {
        buf[k] = right[j];
        j += 1;
        k += 1;
    }
    v.copy_from_slice(&buf[..n]);
    swaps
}

/// Draws `n` pairs from the copula. Deterministic in `seed`.
pub fn sample_copula(spec: &CopulaSpec, n: usize, seed: u64) -> Result<PseudoObservations, CopulaError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut us = Vec::with_capacity(n);
    let mut vs = Vec::with_capacity(n);
    for _ in 0..n {
        let (u, v) = sample_pair(spec, &mut rng);
        us.push(keep_interior(u));
        vs.push(keep_interior(v));
    }
    Ok(PseudoObservations { rows: n, cols: 2, columns: vec![us, vs] })
}

fn keep_interior(u: f64) -> f64 {
    const EDGE: f64 = 1e-16;
    u.clamp(EDGE, 1.0 - EDGE)
}

/// Upper-tail-safe `T_df(x)`.
pub(crate) fn t_cdf_interior(x: f64, df: f64) -> f64 {
    let tail = t_tail(x, df);
    if x > 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

fn sample_pair<R: Rng + ?Sized>(spec: &CopulaSpec, rng: &mut R) -> (f64, f64) {
    let t = spec.theta;
    match spec.family {
        CopulaFamily::Independence => (rng.sample(Open01), rng.sample(Open01)),
        CopulaFamily::Gaussian => {
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            let y = t * z1 + sqrt(1.0 - t * t) * z2;
            (norm_cdf(z1), norm_cdf(y))
        }
        CopulaFamily::StudentT => {
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            let y = t * z1 + sqrt(1.0 - t * t) * z2;
            let chi = ChiSquared::new(spec.df).expect("validated df");
            let s: f64 = rng.sample(chi);
            let scale = 1.0 / sqrt(s / spec.df);
            (t_cdf_interior(z1 * scale, spec.df), t_cdf_interior(y * scale, spec.df))
        }
        CopulaFamily::Clayton => {
            let u: f64 = rng.sample(Open01);
            let w: f64 = rng.sample(Open01);
            let v = pow(pow(u, -t) * (pow(w, -t / (1.0 + t)) - 1.0) + 1.0, -1.0 / t);
            (u, v)
        }
        CopulaFamily::Gumbel => {
            if t == 1.0 {
                return (rng.sample(Open01), rng.sample(Open01));
            }
            // Marshall–Olkin with a positive stable mixing variable (Kanter).
            let alpha = 1.0 / t;
            let angle = PI * rng.sample::<f64, _>(Open01);
            let e: f64 = rng.sample(Exp1);
            let stable = sin(alpha * angle) / pow(sin(angle), 1.0 / alpha)
                * pow(sin((1.0 - alpha) * angle) / e, (1.0 - alpha) / alpha);
            let e1: f64 = rng.sample(Exp1);
            let e2: f64 = rng.sample(Exp1);
            (exp(-pow(e1 / stable, alpha)), exp(-pow(e2 / stable, alpha)))
        }
        CopulaFamily::Frank => {
            let u: f64 = rng.sample(Open01);
            let w: f64 = rng.sample(Open01);
            let a = exp(-t * u);
            let v = -log1p(w * expm1(-t) / (w + (1.0 - w) * a)) / t;
            (u, v)
        }
    }
}

/// Result of moment-based fitting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauFit {
    pub spec: CopulaSpec,
    pub tau: f64,
    /// True when the family could not represent the sample tau and the
    /// independence copula was substituted.
    pub fell_back: bool,
}

/// Inverts the family's tau relation at the sample Kendall's tau.
pub fn fit_copula_tau(family: CopulaFamily, u: &[f64], v: &[f64]) -> Result<TauFit, CopulaError> {
    check_pair_sample(u, v)?;
    let tau = kendall_tau(u, v);
    Ok(copula_from_tau(family, tau))
}

/// Moment estimate from a given Kendall's tau.
pub fn copula_from_tau(family: CopulaFamily, tau: f64) -> TauFit {
    let fallback = TauFit { spec: CopulaSpec::INDEPENDENCE, tau, fell_back: true };
    let spec = match family {
        CopulaFamily::Independence => {
            return TauFit { spec: CopulaSpec::INDEPENDENCE, tau, fell_back: false }
        }
        CopulaFamily::Gaussian => CopulaSpec {
            family,
            theta: sin(PI * tau / 2.0).clamp(-RHO_MAX, RHO_MAX),
            df: 0.0,
        },
        CopulaFamily::StudentT => CopulaSpec {
            family,
            theta: sin(PI * tau / 2.0).clamp(-RHO_MAX, RHO_MAX),
            df: T_DF_GRID[T_DF_GRID.len() - 1],
        },
        CopulaFamily::Clayton => {
            if tau <= 0.0 {
                return fallback;
            }
            CopulaSpec { family, theta: (2.0 * tau / (1.0 - tau)).clamp(CLAYTON_MIN, CLAYTON_MAX), df: 0.0 }
        }
        CopulaFamily::Gumbel => {
            if tau < 0.0 {
                return fallback;
            }
            CopulaSpec { family, theta: (1.0 / (1.0 - tau)).clamp(1.0, GUMBEL_MAX), df: 0.0 }
        }
        CopulaFamily::Frank => {
            if tau == 0.0 {
                return fallback;
            }
            CopulaSpec { family, theta: frank_theta_from_tau(tau), df: 0.0 }
        }
    };
    TauFit { spec, tau, fell_back: false }
}

/// Bisection on the Debye-function tau relation of the Frank family.
pub fn frank_theta_from_tau(tau: f64) -> f64 {
    let (mut lo, mut hi) = (-FRANK_MAX, FRANK_MAX);
    if tau <= frank_tau(lo) {
        return lo;
    }
    if tau >= frank_tau(hi) {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if frank_tau(mid) < tau {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    let theta = 0.5 * (lo + hi);
    if fabs(theta) < FRANK_MIN_ABS {
        FRANK_MIN_ABS.copysign(tau)
    } else {
        theta
    }
}

fn check_pair_sample(u: &[f64], v: &[f64]) -> Result<(), CopulaError> {
    if u.len() != v.len() {
        return Err(CopulaError::BadShape);
    }
    if u.len() < 10 {
        return Err(CopulaError::TooFewObservations { needed: 10, got: u.len() });
    }
    if u.iter().chain(v).any(|&x| !(x > 0.0 && x < 1.0)) {
        return Err(CopulaError::ArgumentOutOfRange);
    }
    Ok(())
}

/// A pair sample with the transforms the log-likelihoods need precomputed.
#[derive(Debug, Clone)]
pub struct PairSample {
    u: Vec<f64>,
    v: Vec<f64>,
    ln_u: Vec<f64>,
    ln_v: Vec<f64>,
    normal: Option<(Vec<f64>, Vec<f64>)>,
    // (sum x^2 + y^2, sum x y) of the normal scores.
    normal_sums: Option<(f64, f64)>,
    student: [Option<(Vec<f64>, Vec<f64>)>; 4],
}

impl PairSample {
    /// Clips the arguments to the density domain and caches logs.
    pub fn new(u: &[f64], v: &[f64]) -> Self {
        let u: Vec<f64> = u.iter().map(|&x| clip(x)).collect();
        let v: Vec<f64> = v.iter().map(|&x| clip(x)).collect();
        let ln_u = u.iter().map(|&x| log(x)).collect();
        let ln_v = v.iter().map(|&x| log(x)).collect();
        Self { u, v, ln_u, ln_v, normal: None, normal_sums: None, student: [None, None, None, None] }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    fn normal_scores(&mut self) -> &(Vec<f64>, Vec<f64>) {
        let (u, v) = (&self.u, &self.v);
        self.normal.get_or_insert_with(|| {
            (u.iter().map(|&x| norm_quantile(x)).collect(), v.iter().map(|&x| norm_quantile(x)).collect())
        })
    }

    fn t_scores(&mut self, df: f64) -> Option<&(Vec<f64>, Vec<f64>)> {
        let slot = T_DF_GRID.iter().position(|&g| g == df)?;
        let (u, v) = (&self.u, &self.v);
        Some(self.student[slot].get_or_insert_with(|| {
            (u.iter().map(|&x| t_quantile(x, df)).collect(), v.iter().map(|&x| t_quantile(x, df)).collect())
        }))
    }

    /// `sum_j log c(u_j, v_j)`.
    pub fn log_likelihood(&mut self, spec: &CopulaSpec) -> f64 {
        let t = spec.theta;
        match spec.family {
            CopulaFamily::Independence => 0.0,
            CopulaFamily::Gaussian => {
                let (squares, cross) = match self.normal_sums {
                    Some(sums) => sums,
                    None => {
                        let (x, y) = self.normal_scores();
                        let squares = x.iter().zip(y).map(|(&a, &b)| a * a + b * b).sum();
                        let cross = x.iter().zip(y).map(|(&a, &b)| a * b).sum();
                        *self.normal_sums.insert((squares, cross))
                    }
                };
                let one_m = 1.0 - t * t;
                -0.5 * self.u.len() as f64 * log(one_m) - (t * t * squares - 2.0 * t * cross) / (2.0 * one_m)
            }
            CopulaFamily::StudentT => {
                let consts = TConstants::new(spec.df);
                if let Some((x, y)) = self.t_scores(spec.df) {
                    x.iter().zip(y).map(|(&a, &b)| consts.log_density(t, a, b)).sum()
                } else {
                    self.u
                        .iter()
                        .zip(&self.v)
                        .map(|(&a, &b)| spec.log_density_unchecked(a, b))
                        .sum()
                }
            }
            CopulaFamily::Clayton => self
                .ln_u
                .iter()
                .zip(&self.ln_v)
                .map(|(&a, &b)| clayton_log_density(t, a, b))
                .sum(),
            CopulaFamily::Gumbel => self
                .ln_u
                .iter()
                .zip(&self.ln_v)
                .map(|(&a, &b)| gumbel_log_density(t, -a, -b))
                .sum(),
            CopulaFamily::Frank => self
                .u
                .iter()
                .zip(&self.v)
                .map(|(&a, &b)| frank_log_density(t, a, b))
                .sum(),
        }
    }
}

/// Result of maximum pseudo-likelihood fitting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MplFit {
    pub spec: CopulaSpec,
    pub log_likelihood: f64,
}

fn family_bounds(family: CopulaFamily) -> (f64, f64) {
    match family {
        CopulaFamily::Gaussian | CopulaFamily::StudentT => (-RHO_MAX, RHO_MAX),
        CopulaFamily::Clayton => (CLAYTON_MIN, CLAYTON_MAX),
        CopulaFamily::Gumbel => (1.0, GUMBEL_MAX),
        CopulaFamily::Frank => (-FRANK_MAX, FRANK_MAX),
        CopulaFamily::Independence => (0.0, 0.0),
    }
}

/// Golden-section maximization of `f` on `[lo, hi]` to tolerance `tol`.
fn golden_max(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

fn finite_or_neg_inf(x: f64) -> f64 {
    if x.is_finite() {
        x
    } else {
        f64::NEG_INFINITY
    }
}

/// Maximum pseudo-likelihood over the dependence parameter (and the df grid
/// for Student's t). Never returns a lower likelihood than `init`.
pub fn fit_copula_mpl(
    family: CopulaFamily,
    sample: &mut PairSample,
    init: &CopulaSpec,
) -> Result<MplFit, CopulaError> {
    if sample.len() < 10 {
        return Err(CopulaError::TooFewObservations { needed: 10, got: sample.len() });
    }
    let init_ll = if init.validate().is_ok() {
        finite_or_neg_inf(sample.log_likelihood(init))
    } else {
        f64::NEG_INFINITY
    };
    let mut best = MplFit { spec: *init, log_likelihood: init_ll };
    if family == CopulaFamily::Independence {
        let ll = 0.0;
        if ll >= best.log_likelihood {
            best = MplFit { spec: CopulaSpec::INDEPENDENCE, log_likelihood: ll };
        }
        return Ok(best);
    }
    let (lo, hi) = family_bounds(family);
    let dfs: &[f64] = if family == CopulaFamily::StudentT { &T_DF_GRID } else { &[0.0] };
    for &df in dfs {
        let (theta, ll) = golden_max(
            |theta| {
                let spec = CopulaSpec { family, theta, df };
                finite_or_neg_inf(sample.log_likelihood(&spec))
            },
            lo,
            hi,
            GOLDEN_TOL,
        );
        let mut spec = CopulaSpec { family, theta, df };
        if family == CopulaFamily::Frank && fabs(theta) < FRANK_MIN_ABS {
            spec.theta = FRANK_MIN_ABS;
        }
        if ll > best.log_likelihood && spec.validate().is_ok() {
            best = MplFit { spec, log_likelihood: ll };
        }
    }
    if !best.log_likelihood.is_finite() {
        return Ok(MplFit { spec: *init, log_likelihood: init_ll });
    }
    Ok(best)
}

/// Tau initialization followed by pseudo-likelihood refinement.
pub fn fit_copula(family: CopulaFamily, sample: &mut PairSample) -> Result<MplFit, CopulaError> {
    check_pair_sample(&sample.u, &sample.v)?;
    let init = copula_from_tau(family, kendall_tau(&sample.u, &sample.v));
    if init.fell_back {
        return Ok(MplFit { spec: CopulaSpec::INDEPENDENCE, log_likelihood: 0.0 });
    }
    fit_copula_mpl(family, sample, &init.spec)
}
