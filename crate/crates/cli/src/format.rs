//! CSV serialization: numbers with 17 significant digits, the sweep-row
//! schema, and the other one-line reports.

use fbmsup::Horizon;

/// `%.17g`: enough digits to round-trip any `f64`, fixed notation for
/// exponents in `[-4, 17)` and scientific otherwise, trailing zeros dropped.
pub fn g17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&exp) {
        let fixed = format!("{:.*}", (16 - exp) as usize, x);
        trim_zeros(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn horizon(t: Horizon) -> String {
    match t {
        Horizon::Finite(t) => g17(t),
        Horizon::Infinite => "inf".into(),
    }
}

pub const SWEEP_HEADER: &str = "H,T,a,bound,m_value,mc_mean,mc_stderr,mc_n,mc_paths,rel_err,rho_star";

/// One row of a figure sweep; simulation fields are absent when no
/// simulation was run.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub h: f64,
    pub t: Horizon,
    pub a: f64,
    /// Absent when the optimizer found no interior maximum.
    pub bound: Option<f64>,
    pub m_value: f64,
    pub mc_mean: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub mc_n: Option<usize>,
    pub mc_paths: Option<usize>,
    pub rho_star: Option<f64>,
}

impl SweepRow {
    /// `(bound - mc_mean) / mc_mean`, only for a positive simulated mean.
    pub fn rel_err(&self) -> Option<f64> {
        let m = self.mc_mean.filter(|&m| m > 0.0)?;
        self.bound.map(|b| (b - m) / m)
    }

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(g17).unwrap_or_default();
        let count = |v: Option<usize>| v.map(|n| n.to_string()).unwrap_or_default();
        [
            g17(self.h),
            horizon(self.t),
            g17(self.a),
            opt(self.bound),
            g17(self.m_value),
            opt(self.mc_mean),
            opt(self.mc_stderr),
            count(self.mc_n),
            count(self.mc_paths),
            opt(self.rel_err()),
            opt(self.rho_star),
        ]
        .join(",")
    }
}
