//! Adaptive Gauss-Kronrod quadrature used as the reference oracle for the
//! integral identities checked elsewhere in the crate.
//!
//! Each integration range is mapped onto `[0, 1]`: semi-infinite ranges via
//! `x = lo + t / (1 - t)`, and endpoints carrying a declared algebraic
//! singularity `(x - lo)^beta` via `t = u^(1 / (1 + beta))`. The mapped
//! integrand is then integrated with a 21-point Kronrod rule and global
//! adaptive bisection.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Outcome of one adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

// 21-point Kronrod abscissae and weights with the embedded 10-point Gauss rule.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_067_876_736,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Maximum bisection depth of any subinterval.
pub const MAX_DEPTH: u32 = 60;

/// An integration range with optional algebraic endpoint singularities and
/// interior break points.
#[derive(Debug, Clone, PartialEq)]
pub struct Interval {
    pub lo: f64,
    /// Finite upper limit or `f64::INFINITY`.
    pub hi: f64,
    /// Exponent `beta > -1` of a `(x - lo)^beta` singularity at `lo`.
    pub lo_exponent: Option<f64>,
    /// Exponent `beta > -1` of a `(hi - x)^beta` singularity at `hi` (finite `hi` only).
    ///
    /// Points within one ulp of a nonzero endpoint cannot be represented, so
    /// strong singularities are best moved to an endpoint at zero by the caller.
    pub hi_exponent: Option<f64>,
    /// Interior points where the integrand changes character.
    pub breaks: Vec<f64>,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi, lo_exponent: None, hi_exponent: None, breaks: Vec::new() }
    }

    pub fn singular_lo(mut self, beta: f64) -> Self {
        self.lo_exponent = Some(beta);
        self
    }

    pub fn singular_hi(mut self, beta: f64) -> Self {
        self.hi_exponent = Some(beta);
        self
    }

    pub fn with_breaks(mut self, breaks: impl IntoIterator<Item = f64>) -> Self {
        self.breaks.extend(breaks);
        self
    }

    fn validate(&self) -> Result<()> {
        if !self.lo.is_finite() || self.hi.is_nan() || self.hi == f64::NEG_INFINITY || !(self.hi > self.lo) {
            return Err(Error::domain("integrate_1d", format!("invalid range [{}, {}]", self.lo, self.hi)));
        }
        for beta in [self.lo_exponent, self.hi_exponent].into_iter().flatten() {
            if !(beta > -1.0) {
                return Err(Error::domain("integrate_1d", format!("endpoint exponent {beta} must exceed -1")));
            }
        }
        if self.hi_exponent.is_some() && self.hi.is_infinite() {
            return Err(Error::domain("integrate_1d", "singular exponent declared at an infinite endpoint"));
        }
        Ok(())
    }

    /// Splits the range into pieces, each carrying its own map onto `[0, 1]`.
    fn pieces(&self) -> Vec<Piece> {
        let mut cuts: Vec<f64> = self
            .breaks
            .iter()
            .copied()
            .filter(|b| b.is_finite() && *b > self.lo && *b < self.hi)
            .collect();
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
        cuts.dedup();
        // A piece singular at both ends is split so each half has one singular end.
        if cuts.is_empty() && self.lo_exponent.is_some() && self.hi_exponent.is_some() {
            cuts.push(0.5 * (self.lo + self.hi));
        }
        let mut points = Vec::with_capacity(cuts.len() + 2);
        points.push(self.lo);
        points.extend(cuts);
        points.push(self.hi);
        let last = points.len() - 2;
        (0..=last)
            .map(|i| Piece {
                a: points[i],
                b: points[i + 1],
                lo_exp: if i == 0 { self.lo_exponent } else { None },
                hi_exp: if i == last { self.hi_exponent } else { None },
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    lo_exp: Option<f64>,
    hi_exp: Option<f64>,
}

impl Piece {
    /// Maps `u` in `(0, 1)` to `(x, dx/du)`.
    fn map(&self, u: f64) -> (f64, f64) {
        if self.b.is_infinite() {
            let (t, dt) = match self.lo_exp {
                Some(beta) => power_map(u, beta),
                None => (u, 1.0),
            };
            let one_minus = 1.0 - t;
            (self.a + t / one_minus, dt / (one_minus * one_minus))
        } else {
            let w = self.b - self.a;
            // A node that rounds onto a singular endpoint is dropped; its
            // share of the integral is far below the rounding level.
            if let Some(beta) = self.lo_exp {
                let (t, dt) = power_map(u, beta);
                let x = self.a + w * t;
                (x, if x == self.a { 0.0 } else { w * dt })
            } else if let Some(beta) = self.hi_exp {
                let (t, dt) = power_map(1.0 - u, beta);
                let x = self.b - w * t;
                (x, if x == self.b { 0.0 } else { w * dt })
            } else {
                (self.a + w * u, w)
            }
        }
    }
}

fn power_map(u: f64, beta: f64) -> (f64, f64) {
    let k = 1.0 / (1.0 + beta);
    if k == 1.0 {
        return (u, 1.0);
    }
    (u.powf(k), k * u.powf(k - 1.0))
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    piece: usize,
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
    depth: u32,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Adaptive integrator settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integrator {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for Integrator {
    fn default() -> Self {
        Integrator { abs_tol: 1e-10, rel_tol: 0.0, max_subdivisions: 4000 }
    }
}

impl Integrator {
    pub fn absolute(tol: f64) -> Self {
        Integrator { abs_tol: tol, rel_tol: 0.0, ..Default::default() }
    }

    pub fn relative(tol: f64) -> Self {
        Integrator { abs_tol: 0.0, rel_tol: tol, ..Default::default() }
    }

    /// Integrates `f` over `range`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, range: &Interval) -> Result<QuadResult> {
        range.validate()?;
        if !(self.abs_tol >= 0.0 && self.rel_tol >= 0.0 && (self.abs_tol > 0.0 || self.rel_tol > 0.0)) {
            return Err(Error::domain("integrate_1d", "tolerances must be non-negative and not both zero"));
        }
        let pieces = range.pieces();
        let mut evaluations = 0usize;
        let mut heap = BinaryHeap::new();
        let mut frozen: Vec<Segment> = Vec::new();
        for (i, piece) in pieces.iter().enumerate() {
            let (value, error) = kronrod21(&f, piece, 0.0, 1.0);
            evaluations += 21;
            heap.push(Segment { piece: i, lo: 0.0, hi: 1.0, value, error, depth: 0 });
        }

        let mut subdivisions = 0usize;
        loop {
            let (total, err) = totals(&heap, &frozen);
            if !total.is_finite() || !err.is_finite() {
                return Err(Error::numerical("integrate_1d", "integrand produced a non-finite value"));
            }
            let target = self.abs_tol.max(self.rel_tol * total.abs());
            if err <= target {
                return Ok(QuadResult { value: total, abs_error_estimate: err, evaluations });
            }
            let Some(worst) = heap.pop() else {
                return Err(Error::numerical(
                    "integrate_1d",
                    format!("maximum depth {MAX_DEPTH} reached with error {err:.3e} > {target:.3e}"),
                )
                .with_partial(total));
            };
            if worst.depth >= MAX_DEPTH {
                frozen.push(worst);
                continue;
            }
            if subdivisions >= self.max_subdivisions {
                heap.push(worst);
                return Err(Error::numerical(
                    "integrate_1d",
                    format!("subdivision limit {} reached with error {err:.3e} > {target:.3e}", self.max_subdivisions),
                )
                .with_partial(total));
            }
            subdivisions += 1;
            let mid = 0.5 * (worst.lo + worst.hi);
            let piece = &pieces[worst.piece];
            for (lo, hi) in [(worst.lo, mid), (mid, worst.hi)] {
                let (value, error) = kronrod21(&f, piece, lo, hi);
                evaluations += 21;
                heap.push(Segment { piece: worst.piece, lo, hi, value, error, depth: worst.depth + 1 });
            }
        }
    }
}

fn totals(heap: &BinaryHeap<Segment>, frozen: &[Segment]) -> (f64, f64) {
    // Sum in a fixed order so results do not depend on heap layout.
    let mut segs: Vec<&Segment> = heap.iter().chain(frozen.iter()).collect();
    segs.sort_by(|a, b| (a.piece, a.lo).partial_cmp(&(b.piece, b.lo)).unwrap_or(Ordering::Equal));
    let mut value = 0.0;
    let mut comp = 0.0;
    let mut error = 0.0;
    for s in segs {
        let y = s.value - comp;
        let t = value + y;
        comp = (t - value) - y;
        value = t;
        error += s.error;
    }
    (value, error)
}

fn kronrod21<F: Fn(f64) -> f64>(f: &F, piece: &Piece, lo: f64, hi: f64) -> (f64, f64) {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let eval = |u: f64| -> f64 {
        let (x, jac) = piece.map(u);
        if jac == 0.0 || x.is_infinite() || !jac.is_finite() {
            return 0.0;
        }
        f(x) * jac
    };

    let fc = eval(center);
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv = [(0.0, 0.0); 10];
    for (j, slot) in fv.iter_mut().enumerate() {
        let dx = half * XGK[j];
        let f1 = eval(center - dx);
        let f2 = eval(center + dx);
        *slot = (f1, f2);
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for (j, (f1, f2)) in fv.iter().enumerate() {
        res_asc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let result = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (result, err)
}

/// Integrates `f` over `[lo, hi]` (with `hi` possibly `+inf`) to absolute
/// accuracy `tol`.
pub fn integrate_1d<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<QuadResult> {
    Integrator::absolute(tol).integrate(f, &Interval::new(lo, hi))
}

/// Rectangle `x_range × y_range`; either range may be semi-infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct Rect {
    pub x: Interval,
    pub y: Interval,
}

/// Iterated integral `∫ dx ∫ dy f(x, y)` over `region` to absolute accuracy
/// `tol`; inner integrals are computed to `tol / 10`.
pub fn integrate_2d<F: Fn(f64, f64) -> f64>(f: F, region: &Rect, tol: f64) -> Result<QuadResult> {
    integrate_2d_with(f, region, tol, |_| Vec::new())
}

/// As [`integrate_2d`], with extra break points for the inner integral that
/// may depend on the outer variable (e.g. the location of a moving peak).
pub fn integrate_2d_with<F, B>(f: F, region: &Rect, tol: f64, inner_breaks: B) -> Result<QuadResult>
where
    F: Fn(f64, f64) -> f64,
    B: Fn(f64) -> Vec<f64>,
{
    let inner = Integrator::absolute(tol / 10.0);
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let evals = RefCell::new(0usize);
    let outer = |x: f64| -> f64 {
        if failure.borrow().is_some() {
            return 0.0;
        }
        let range = region.y.clone().with_breaks(inner_breaks(x));
        match inner.integrate(|y| f(x, y), &range) {
            Ok(r) => {
                *evals.borrow_mut() += r.evaluations;
                r.value
            }
            Err(e) => {
                *failure.borrow_mut() = Some(e);
                0.0
            }
        }
    };
    let result = Integrator::absolute(tol).integrate(outer, &region.x);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let mut r = result?;
    r.evaluations = evals.into_inner();
    Ok(r)
}
