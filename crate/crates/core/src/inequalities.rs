//! Numerical checkers for five real-analysis inequalities and the associated
//! small-x limit, returning signed margins for property-based testing and
//! adversarial scanning.
//!
//! The five inequalities, all for x >= 0:
//!
//! ```text
//! log1:  0 <= log(1+λx) - λ log(1+x)                <= λ(1-λ)x²/2,   0<=λ<=1
//! log2:  0 <= a log(1+x) - log(1+ax)                <= a(a-1)x²/2,   a>=1
//! pred1: 0 <= (1+λx) - (1+x)^λ                      <= λ(1-λ)x²/2,   0<=λ<=1
//! pred2: 0 <= (1+x)^a - (1+ax)                      <= a(a-1)x²/2,   1<=a<=2
//! alpha: 0 <= log((λ(1-β)x + (1+βx)^λ)/(1+x)^λ)     <= αλ(1-λ)x²/2,  β=sqrt(1-α)
//! ```
//!
//! Every middle is an equality to O(x³) near zero, so naive evaluation there
//! reports spurious negative margins; middles switch to fourth-order series
//! kernels below a small-x cutoff and to log1p/expm1 kernels elsewhere.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Relative tolerance for "the inequality holds at this point":
/// margins are compared against `-tol * max(1, |middle|)`.
pub const DEFAULT_REL_TOL: f64 = 1e-9;

/// Below this value of x (rescaled by the power parameter where one applies)
/// middles are evaluated by their series expansion.
const SERIES_CUTOFF: f64 = 1e-4;

/// Parameter point of one margin evaluation. Fields not used by a lemma stay
/// `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarginPoint {
    pub x: f64,
    pub lambda: Option<f64>,
    pub a: Option<f64>,
    pub alpha: Option<f64>,
}

/// Signed margins of one inequality at one point: the lemma holds iff both
/// margins are above `-tol * max(1, |middle|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InequalityMargin {
    pub point: MarginPoint,
    /// The inequality's central expression.
    pub middle: f64,
    /// `middle - lower bound` (lower bound is 0 for all five lemmas).
    pub lower_margin: f64,
    /// `upper bound - middle`.
    pub upper_margin: f64,
}

impl InequalityMargin {
    pub fn holds(&self, rel_tol: f64) -> bool {
        let tol = rel_tol * self.middle.abs().max(1.0);
        self.lower_margin >= -tol && self.upper_margin >= -tol
    }

    /// The smaller margin, normalized the way `holds` normalizes.
    pub fn rel_worst(&self) -> f64 {
        self.lower_margin.min(self.upper_margin) / self.middle.abs().max(1.0)
    }

    fn with_bounds(point: MarginPoint, middle: f64, upper_bound: f64) -> Self {
        InequalityMargin {
            point,
            middle,
            lower_margin: middle,
            upper_margin: upper_bound - middle,
        }
    }
}

fn check_x(x: f64) -> Result<()> {
    if !(x >= 0.0 && x.is_finite()) {
        return Err(Error::Domain(format!("x must be nonnegative, got {x}")));
    }
    Ok(())
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::Domain(format!("{name} must be in [0,1], got {v}")));
    }
    Ok(())
}

/// `log(1+λx) - λ log(1+x)` with bounds `[0, λ(1-λ)x²/2]`.
pub fn margin_log1(x: f64, lambda: f64) -> Result<InequalityMargin> {
    check_x(x)?;
    check_unit("lambda", lambda)?;
    let middle = if x < SERIES_CUTOFF {
        // λ(1-λ) [x²/2 - (1+λ)x³/3 + (1+λ+λ²)x⁴/4]
        lambda
            * (1.0 - lambda)
            * x
            * x
            * (0.5 - x * ((1.0 + lambda) / 3.0 - x * (1.0 + lambda + lambda * lambda) / 4.0))
    } else {
        (lambda * x).ln_1p() - lambda * x.ln_1p()
    };
    let upper = 0.5 * lambda * (1.0 - lambda) * x * x;
    Ok(InequalityMargin::with_bounds(
        MarginPoint {
            x,
            lambda: Some(lambda),
            a: None,
            alpha: None,
        },
        middle,
        upper,
    ))
}

/// `a log(1+x) - log(1+ax)` with bounds `[0, a(a-1)x²/2]`, for a >= 1.
pub fn margin_log2(x: f64, a: f64) -> Result<InequalityMargin> {
    check_x(x)?;
    if !(a >= 1.0 && a.is_finite()) {
        return Err(Error::Domain(format!("a must be >= 1, got {a}")));
    }
    let middle = if a == 1.0 {
        0.0
    } else if a * x < SERIES_CUTOFF {
        // a(a-1) [x²/2 - (a+1)x³/3 + (a²+a+1)x⁴/4]
        a * (a - 1.0) * x * x * (0.5 - x * ((a + 1.0) / 3.0 - x * (a * a + a + 1.0) / 4.0))
    } else {
        a * x.ln_1p() - (a * x).ln_1p()
    };
    let upper = 0.5 * a * (a - 1.0) * x * x;
    Ok(InequalityMargin::with_bounds(
        MarginPoint {
            x,
            lambda: None,
            a: Some(a),
            alpha: None,
        },
        middle,
        upper,
    ))
}

/// `(1+λx) - (1+x)^λ` with bounds `[0, λ(1-λ)x²/2]`.
pub fn margin_pred1(x: f64, lambda: f64) -> Result<InequalityMargin> {
    check_x(x)?;
    check_unit("lambda", lambda)?;
    let middle = if lambda == 1.0 {
        0.0
    } else if x < SERIES_CUTOFF {
        // λ(1-λ) [x²/2 - (2-λ)x³/6 + (2-λ)(3-λ)x⁴/24]
        lambda
            * (1.0 - lambda)
            * x
            * x
            * (0.5 - x * ((2.0 - lambda) / 6.0 - x * (2.0 - lambda) * (3.0 - lambda) / 24.0))
    } else {
        lambda * x - f64::exp_m1(lambda * x.ln_1p())
    };
    let upper = 0.5 * lambda * (1.0 - lambda) * x * x;
    Ok(InequalityMargin::with_bounds(
        MarginPoint {
            x,
            lambda: Some(lambda),
            a: None,
            alpha: None,
        },
        middle,
        upper,
    ))
}

/// `(1+x)^a - (1+ax)` with bounds `[0, a(a-1)x²/2]`, stated only for
/// 1 <= a <= 2; a > 2 is refused rather than extrapolated.
pub fn margin_pred2(x: f64, a: f64) -> Result<InequalityMargin> {
    check_x(x)?;
    if !(1.0..=2.0).contains(&a) {
        return Err(Error::Domain(format!("a must be in [1,2], got {a}")));
    }
    let middle = if a == 1.0 {
        0.0
    } else if a == 2.0 {
        x * x
    } else if x < SERIES_CUTOFF {
        // a(a-1) [x²/2 - (2-a)x³/6 + (2-a)(3-a)x⁴/24]
        a * (a - 1.0)
            * x
            * x
            * (0.5 - x * ((2.0 - a) / 6.0 - x * (2.0 - a) * (3.0 - a) / 24.0))
    } else {
        f64::exp_m1(a * x.ln_1p()) - a * x
    };
    let upper = 0.5 * a * (a - 1.0) * x * x;
    Ok(InequalityMargin::with_bounds(
        MarginPoint {
            x,
            lambda: None,
            a: Some(a),
            alpha: None,
        },
        middle,
        upper,
    ))
}

fn alpha_lambda_middle(x: f64, lambda: f64, alpha: f64) -> f64 {
    if alpha == 0.0 {
        // β = 1: the numerator is exactly (1+x)^λ.
        return 0.0;
    }
    let beta = (1.0 - alpha).sqrt();
    if x < SERIES_CUTOFF {
        // Expansion of log((λ(1-β)x + (1+βx)^λ)/(1+x)^λ) to fourth order,
        // written with the binomial coefficients C_k = binom(λ, k) β^k.
        let c2b = lambda * (lambda - 1.0) / 2.0 * beta * beta;
        let c3b = lambda * (lambda - 1.0) * (lambda - 2.0) / 6.0 * beta * beta * beta;
        let c4b =
            lambda * (lambda - 1.0) * (lambda - 2.0) * (lambda - 3.0) / 24.0 * beta.powi(4);
        let l = lambda;
        let k2 = c2b + l * (1.0 - l) / 2.0;
        let k3 = c3b - l * c2b + (l * l * l - l) / 3.0;
        let k4 = c4b - 0.5 * c2b * c2b - l * c3b + l * l * c2b - (l * l * l * l - l) / 4.0;
        x * x * (k2 + x * (k3 + x * k4))
    } else {
        let numer_m1 = lambda * (1.0 - beta) * x + f64::exp_m1(lambda * (beta * x).ln_1p());
        numer_m1.ln_1p() - lambda * x.ln_1p()
    }
}

/// `log((λ(1-β)x + (1+βx)^λ)/(1+x)^λ)` with `β = sqrt(1-α)` and bounds
/// `[0, αλ(1-λ)x²/2]`. At α = 1 this is exactly [`margin_log1`].
pub fn margin_alpha_lambda(x: f64, lambda: f64, alpha: f64) -> Result<InequalityMargin> {
    check_x(x)?;
    check_unit("lambda", lambda)?;
    check_unit("alpha", alpha)?;
    let middle = alpha_lambda_middle(x, lambda, alpha);
    let upper = alpha * 0.5 * lambda * (1.0 - lambda) * x * x;
    Ok(InequalityMargin::with_bounds(
        MarginPoint {
            x,
            lambda: Some(lambda),
            a: None,
            alpha: Some(alpha),
        },
        middle,
        upper,
    ))
}

/// `middle(x, λ, α) / x²`; converges to `αλ(1-λ)/2` as x -> 0.
pub fn limit_ratio(x: f64, lambda: f64, alpha: f64) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Domain(format!(
            "x must be strictly positive, got {x}; use the analytic limit at 0"
        )));
    }
    check_unit("lambda", lambda)?;
    check_unit("alpha", alpha)?;
    Ok(alpha_lambda_middle(x, lambda, alpha) / (x * x))
}

/// Analytic value of the limit above.
pub fn limit_ratio_analytic(lambda: f64, alpha: f64) -> f64 {
    alpha * lambda * (1.0 - lambda) / 2.0
}

// ---------------------------------------------------------------------------
// Adversarial scan
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Lemma {
    Log1,
    Log2,
    Pred1,
    Pred2,
    AlphaLambda,
}

impl Lemma {
    pub const ALL: [Lemma; 5] = [
        Lemma::Log1,
        Lemma::Log2,
        Lemma::Pred1,
        Lemma::Pred2,
        Lemma::AlphaLambda,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Lemma::Log1 => "log1",
            Lemma::Log2 => "log2",
            Lemma::Pred1 => "pred1",
            Lemma::Pred2 => "pred2",
            Lemma::AlphaLambda => "alpha_lambda",
        }
    }

    fn dims(&self) -> usize {
        match self {
            Lemma::AlphaLambda => 3,
            _ => 2,
        }
    }

    /// Map a quasi-random unit-cube point into the lemma's box and evaluate.
    /// x is log-uniform over [1e-8, 100]; power parameters cover their
    /// stated ranges (a in [1,100] for log2, [1,2] for pred2).
    fn eval_unit(&self, u: [f64; 3]) -> InequalityMargin {
        let x = 10f64.powf(-8.0 + 10.0 * u[0]);
        match self {
            Lemma::Log1 => margin_log1(x, u[1]),
            Lemma::Log2 => margin_log2(x, 10f64.powf(2.0 * u[1])),
            Lemma::Pred1 => margin_pred1(x, u[1]),
            Lemma::Pred2 => margin_pred2(x, 1.0 + u[1]),
            Lemma::AlphaLambda => margin_alpha_lambda(x, u[1], u[2]),
        }
        .expect("scan points are inside the lemma domain")
    }

    /// Boundary points checked in addition to the quasi-random fill.
    fn boundary_points(&self) -> Vec<InequalityMargin> {
        let xs = [0.0, 1.0, 100.0];
        let mut out = Vec::new();
        for &x in &xs {
            match self {
                Lemma::Log1 => {
                    for lam in [0.0, 0.5, 1.0] {
                        out.push(margin_log1(x, lam).unwrap());
                    }
                }
                Lemma::Log2 => {
                    for a in [1.0, 2.0, 100.0] {
                        out.push(margin_log2(x, a).unwrap());
                    }
                }
                Lemma::Pred1 => {
                    for lam in [0.0, 0.5, 1.0] {
                        out.push(margin_pred1(x, lam).unwrap());
                    }
                }
                Lemma::Pred2 => {
                    for a in [1.0, 1.5, 2.0] {
                        out.push(margin_pred2(x, a).unwrap());
                    }
                }
                Lemma::AlphaLambda => {
                    for lam in [0.0, 0.5, 1.0] {
                        for alpha in [0.0, 0.5, 1.0] {
                            out.push(margin_alpha_lambda(x, lam, alpha).unwrap());
                        }
                    }
                }
            }
        }
        out
    }
}

/// Additive quasi-random sequence (the R_d generalized golden-ratio
/// recurrence) in fixed-point arithmetic; deterministic and even-filling.
struct RdSeq {
    alphas: [u64; 3],
    offset: u64,
}

impl RdSeq {
    fn new(dims: usize, offset: u64) -> Self {
        // phi_d is the positive root of x^(d+1) = x + 1.
        let mut phi = 2.0f64;
        for _ in 0..128 {
            phi = (1.0 + phi).powf(1.0 / (dims as f64 + 1.0));
        }
        let mut alphas = [0u64; 3];
        for (j, slot) in alphas.iter_mut().enumerate().take(dims) {
            let frac = phi.powi(-(j as i32 + 1));
            *slot = (frac * 2f64.powi(64)) as u64;
        }
        RdSeq { alphas, offset }
    }

    fn point(&self, i: u64) -> [f64; 3] {
        let n = i.wrapping_add(self.offset).wrapping_add(1);
        self.alphas
            .map(|a| (n.wrapping_mul(a) >> 11) as f64 * (1.0 / (1u64 << 53) as f64))
    }
}

/// The worst point found for one lemma over a scan.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WorstCase {
    pub lemma: Lemma,
    pub margin: InequalityMargin,
    pub holds: bool,
}

/// Scan one lemma over `n_points` quasi-random points (plus fixed boundary
/// points) and report the point with the smallest normalized margin.
/// Block-structured so the result is identical for any thread count.
pub fn scan_lemma(lemma: Lemma, n_points: u64, seed: u64, rel_tol: f64) -> WorstCase {
    const BLOCK: u64 = 65_536;
    let seq = RdSeq::new(lemma.dims(), seed.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let n_blocks = n_points.div_ceil(BLOCK);
    let block_worst: Vec<(f64, u64, InequalityMargin)> = (0..n_blocks)
        .into_par_iter()
        .map(|blk| {
            let lo = blk * BLOCK;
            let hi = (lo + BLOCK).min(n_points);
            let mut best: Option<(f64, u64, InequalityMargin)> = None;
            for i in lo..hi {
                let m = lemma.eval_unit(seq.point(i));
                let key = m.rel_worst();
                if best.is_none_or(|(bk, _, _)| key < bk) {
                    best = Some((key, i, m));
                }
            }
            best.expect("non-empty block")
        })
        .collect();
    let mut worst: Option<(f64, u64, InequalityMargin)> = None;
    for (idx, m) in lemma.boundary_points().into_iter().enumerate() {
        let cand = (m.rel_worst(), idx as u64, m);
        if worst.is_none_or(|(bk, _, _)| cand.0 < bk) {
            worst = Some(cand);
        }
    }
    for cand in block_worst {
        let (bk, _, _) = worst.expect("seeded with boundary points");
        if cand.0 < bk {
            worst = Some(cand);
        }
    }
    let (_, _, margin) = worst.expect("at least one point scanned");
    WorstCase {
        lemma,
        margin,
        holds: margin.holds(rel_tol),
    }
}

/// Scan all five lemmas.
pub fn scan_all(n_points: u64, seed: u64, rel_tol: f64) -> Vec<WorstCase> {
    Lemma::ALL
        .iter()
        .map(|&l| scan_lemma(l, n_points, seed, rel_tol))
        .collect()
}

/// One CSV row per worst case: `lemma,x,lambda,a,alpha,middle,lower_margin,upper_margin`.
pub fn worst_case_csv(cases: &[WorstCase]) -> String {
    let mut out = String::from("lemma,x,lambda,a,alpha,middle,lower_margin,upper_margin\n");
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    for c in cases {
        let p = c.margin.point;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            c.lemma.name(),
            p.x,
            opt(p.lambda),
            opt(p.a),
            opt(p.alpha),
            c.margin.middle,
            c.margin.lower_margin,
            c.margin.upper_margin
        ));
    }
    out
}
