//! Piecewise-linear expected conversion curves `V_j(rho)` and their Lagrangians.

use std::fmt::Write as _;

use thiserror::Error;

use crate::channel_oracle::budget_only_totals;
use crate::instance::ChannelSupport;

/// Adjacent slopes closer than this are merged into one segment.
pub const SLOPE_MERGE_TOL: f64 = 1e-10;
/// Continuity tolerance at turning points.
pub const CONTINUITY_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum PwlError {
    #[error("budget must be positive and finite, got {0}")]
    InvalidBudget(f64),
    #[error("{0} is outside the domain [0, {1}]")]
    OutOfDomain(f64, f64),
    #[error("malformed curve: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    turning_points: Vec<f64>,
    slopes: Vec<f64>,
    intercepts: Vec<f64>,
}

impl PiecewiseLinear {
    /// `turning_points` has one more entry than `slopes` and `intercepts`,
    /// starts at 0 and is strictly increasing.
    pub fn new(
        turning_points: Vec<f64>,
        slopes: Vec<f64>,
        intercepts: Vec<f64>,
    ) -> Result<Self, PwlError> {
        if slopes.is_empty()
            || slopes.len() != intercepts.len()
            || turning_points.len() != slopes.len() + 1
        {
            return Err(PwlError::Malformed("inconsistent lengths".into()));
        }
        if turning_points[0] != 0.0 {
            return Err(PwlError::Malformed("first turning point must be 0".into()));
        }
        if turning_points.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(PwlError::Malformed(
                "turning points must strictly increase".into(),
            ));
        }
        Ok(Self {
            turning_points,
            slopes,
            intercepts,
        })
    }

    pub fn turning_points(&self) -> &[f64] {
        &self.turning_points
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn intercepts(&self) -> &[f64] {
        &self.intercepts
    }

    pub fn num_segments(&self) -> usize {
        self.slopes.len()
    }

    pub fn domain_end(&self) -> f64 {
        *self.turning_points.last().expect("non-empty")
    }

    /// Index of the segment containing `x` (left-closed, last segment closed).
    fn segment_of(&self, x: f64) -> usize {
        let k = self.turning_points[1..].partition_point(|&r| r <= x);
        k.min(self.slopes.len() - 1)
    }

    pub fn eval(&self, x: f64) -> Result<f64, PwlError> {
        let end = self.domain_end();
        let tol = 1e-12 * end.max(1.0);
        if !(x >= -tol && x <= end + tol) {
            return Err(PwlError::OutOfDomain(x, end));
        }
        let x = x.clamp(0.0, end);
        let n = self.segment_of(x);
        Ok(self.slopes[n] * x + self.intercepts[n])
    }

    /// Violations of continuity, strict concavity and strict increase.
    pub fn invariant_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for n in 0..self.slopes.len().saturating_sub(1) {
            let r = self.turning_points[n + 1];
            let left = self.slopes[n] * r + self.intercepts[n];
            let right = self.slopes[n + 1] * r + self.intercepts[n + 1];
            if (left - right).abs() > CONTINUITY_TOL * left.abs().max(1.0) {
                out.push(format!("discontinuity at r={r}: {left} vs {right}"));
            }
            if !(self.slopes[n] > self.slopes[n + 1]) {
                out.push(format!("slope {} does not decrease", n + 2));
            }
        }
        for (n, &s) in self.slopes.iter().enumerate() {
            if !(s > 0.0) {
                out.push(format!("slope {} is not positive: {s}", n + 1));
            }
        }
        if self.intercepts[0] < 0.0 {
            out.push("value at zero budget is negative".into());
        }
        out
    }

    /// One row per segment: `segment,r_start,r_end,slope,intercept`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("segment,r_start,r_end,slope,intercept\n");
        for n in 0..self.slopes.len() {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                n + 1,
                self.turning_points[n],
                self.turning_points[n + 1],
                self.slopes[n],
                self.intercepts[n]
            );
        }
        s
    }
}

/// Dual variables: `lambda` prices the ROI constraint, `mu` the budget.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DualContext {
    pub lambda: f64,
    pub mu: f64,
}

impl DualContext {
    pub fn new(lambda: f64, mu: f64) -> Self {
        Self { lambda, mu }
    }

    /// Slope of the Lagrangian `(1+lambda) V - (mu + gamma lambda) rho` on a
    /// segment whose conversion slope is `slope`.
    pub fn sigma(&self, slope: f64, gamma: f64) -> f64 {
        (1.0 + self.lambda) * slope - (self.mu + gamma * self.lambda)
    }
}

pub fn lagrangian_value(
    pwl: &PiecewiseLinear,
    ctx: DualContext,
    gamma: f64,
    rho: f64,
) -> Result<f64, PwlError> {
    Ok((1.0 + ctx.lambda) * pwl.eval(rho)? - (ctx.mu + gamma * ctx.lambda) * rho)
}

/// Maximizer of the Lagrangian: the last turning point whose incoming slope
/// is nonnegative (zero if none).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagrangianArgmax {
    pub index: usize,
    pub budget: f64,
}

pub fn lagrangian_argmax(pwl: &PiecewiseLinear, ctx: DualContext, gamma: f64) -> LagrangianArgmax {
    let index = pwl
        .slopes
        .iter()
        .take_while(|&&s| ctx.sigma(s, gamma) >= 0.0)
        .count();
    LagrangianArgmax {
        index,
        budget: pwl.turning_points[index],
    }
}

/// Lagrangian slopes on either side of the argmax.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AdjacentSlopes {
    Interior {
        minus: f64,
        plus: f64,
    },
    /// Argmax at zero budget; only the outgoing slope exists.
    AtZero {
        plus: f64,
    },
    /// Argmax at the domain end; only the incoming slope exists.
    AtEnd {
        minus: f64,
    },
}

pub fn adjacent_slopes(pwl: &PiecewiseLinear, ctx: DualContext, gamma: f64) -> AdjacentSlopes {
    let n = lagrangian_argmax(pwl, ctx, gamma).index;
    let sigma = |k: usize| ctx.sigma(pwl.slopes[k - 1], gamma);
    if n == 0 {
        AdjacentSlopes::AtZero { plus: sigma(1) }
    } else if n == pwl.num_segments() {
        AdjacentSlopes::AtEnd { minus: sigma(n) }
    } else {
        AdjacentSlopes::Interior {
            minus: sigma(n),
            plus: sigma(n + 1),
        }
    }
}

/// Linear piece of the expected curves between consecutive breakpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    /// Derivative of expected conversion.
    pub value_slope: f64,
    /// Derivative of expected spend (1 while every outcome is still buying).
    pub spend_slope: f64,
}

impl Segment {
    pub fn len(&self) -> f64 {
        self.end - self.start
    }
}

/// Expected conversion and spend on `[0, cap]` as consecutive linear pieces,
/// unmerged, breakpoints at every per-outcome cost prefix sum below `cap`.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentTable {
    /// Expected conversion at zero budget (zero-cost auctions).
    pub base_value: f64,
    pub segments: Vec<Segment>,
}

pub fn expected_segments(support: &ChannelSupport, cap: f64) -> SegmentTable {
    // Per outcome: (start, end, ratio) of each priced auction along the spend axis.
    let pieces: Vec<Vec<(f64, f64, f64)>> = support
        .outcomes
        .iter()
        .map(|o| {
            let mut acc = 0.0;
            o.auctions
                .iter()
                .filter(|a| a.cost > 0.0)
                .map(|a| {
                    let start = acc;
                    acc += a.cost;
                    (start, acc, a.value / a.cost)
                })
                .collect()
        })
        .collect();
    let base_value: f64 = support
        .iter()
        .map(|(p, o)| {
            p * o
                .auctions
                .iter()
                .filter(|a| a.cost == 0.0)
                .map(|a| a.value)
                .sum::<f64>()
        })
        .sum();
    if !(cap > 0.0) {
        return SegmentTable {
            base_value,
            segments: Vec::new(),
        };
    }
    let mut points: Vec<f64> = pieces
        .iter()
        .flat_map(|ps| ps.iter().map(|&(_, end, _)| end))
        .filter(|&r| r > 0.0 && r < cap)
        .collect();
    points.push(0.0);
    points.push(cap);
    points.sort_by(f64::total_cmp);
    let tol = 1e-12 * cap.max(1.0);
    let mut dedup: Vec<f64> = Vec::with_capacity(points.len());
    for r in points {
        match dedup.last() {
            Some(&last) if r - last <= tol => {}
            _ => dedup.push(r),
        }
    }
    if let Some(last) = dedup.last_mut() {
        *last = cap;
    }
    let segments = dedup
        .windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            let mut value_slope = 0.0;
            let mut spend_slope = 0.0;
            for (p, ps) in support.probs.iter().zip(&pieces) {
                if let Some(&(_, _, ratio)) = ps.iter().find(|&&(s, e, _)| s <= mid && mid < e) {
                    value_slope += p * ratio;
                    spend_slope += p;
                }
            }
            Segment {
                start: w[0],
                end: w[1],
                value_slope,
                spend_slope,
            }
        })
        .collect();
    SegmentTable {
        base_value,
        segments,
    }
}

/// Expected objective `E[v^T x - alpha d^T x]` of the budget-only channel
/// solution at budget `rho`.
pub fn expected_objective(support: &ChannelSupport, rho: f64, alpha: f64) -> f64 {
    support
        .iter()
        .map(|(p, o)| {
            let (v, d) = budget_only_totals(&o.auctions, rho);
            p * (v - alpha * d)
        })
        .sum()
}

/// Builds the expected (private-cost adjusted) conversion curve on `[0, rho]`.
pub fn build_expected_conversion(
    support: &ChannelSupport,
    rho: f64,
    alpha: f64,
) -> Result<PiecewiseLinear, PwlError> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(PwlError::InvalidBudget(rho));
    }
    let table = expected_segments(support, rho);
    let mut points = vec![0.0];
    let mut slopes: Vec<f64> = Vec::new();
    for seg in &table.segments {
        let s = seg.value_slope - alpha * seg.spend_slope;
        match slopes.last() {
            Some(&prev) if (prev - s).abs() < SLOPE_MERGE_TOL => {
                *points.last_mut().expect("non-empty") = seg.end;
            }
            _ => {
                slopes.push(s);
                points.push(seg.end);
            }
        }
    }
    let intercepts = slopes
        .iter()
        .zip(&points)
        .map(|(&s, &r)| expected_objective(support, r, alpha) - s * r)
        .collect();
    PiecewiseLinear::new(points, slopes, intercepts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel_oracle::{solve_sequence, Lever};
    use crate::instance::{illustration_support, Outcome};

    fn figure() -> PiecewiseLinear {
        build_expected_conversion(&illustration_support(), 6.0, 0.0).unwrap()
    }

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn illustration_structure() {
        let f = figure();
        assert_eq!(f.num_segments(), 5);
        assert!(close(f.turning_points(), &[0.0, 1.0, 2.0, 4.0, 5.0, 6.0]));
        assert!(close(
            f.slopes(),
            &[3.0, 7.0 / 3.0, 11.0 / 9.0, 13.0 / 18.0, 1.0 / 6.0]
        ));
        assert!(f.invariant_violations().is_empty());
    }

    #[test]
    fn eval_matches_oracle() {
        let f = figure();
        assert!((f.eval(2.0).unwrap() - 16.0 / 3.0).abs() < 1e-12);
        assert_eq!(f.eval(0.0).unwrap(), 0.0);
        let full = solve_sequence(&illustration_support(), Lever::budget_only(6.0)).conversion;
        assert!((f.eval(6.0).unwrap() - full).abs() < 1e-12);
        assert!(f.eval(6.5).is_err());
        assert!(f.eval(-1.0).is_err());
    }

    #[test]
    fn lagrangian_argmax_examples() {
        let f = figure();
        let ctx = DualContext::new(4.0, 2.0);
        let arg = lagrangian_argmax(&f, ctx, 2.0);
        assert_eq!((arg.index, arg.budget), (2, 2.0));
        match adjacent_slopes(&f, ctx, 2.0) {
            AdjacentSlopes::Interior { minus, plus } => {
                assert!((minus - 5.0 / 3.0).abs() < 1e-12);
                assert!((plus + 35.0 / 9.0).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(
            lagrangian_argmax(&f, DualContext::default(), 2.0).budget,
            6.0
        );
        assert!(matches!(
            adjacent_slopes(&f, DualContext::default(), 2.0),
            AdjacentSlopes::AtEnd { .. }
        ));
        let huge = DualContext::new(0.0, 100.0);
        assert_eq!(lagrangian_argmax(&f, huge, 2.0).budget, 0.0);
        assert!(matches!(
            adjacent_slopes(&f, huge, 2.0),
            AdjacentSlopes::AtZero { .. }
        ));
    }

    #[test]
    fn two_segment_adjacent() {
        let f = PiecewiseLinear::new(vec![0.0, 1.0, 2.0], vec![2.0, 1.0], vec![0.0, 1.0]).unwrap();
        let ctx = DualContext::new(0.0, 1.5);
        assert_eq!(
            adjacent_slopes(&f, ctx, 1.0),
            AdjacentSlopes::Interior {
                minus: 0.5,
                plus: -0.5
            }
        );
    }

    #[test]
    fn zero_cost_items_give_intercept() {
        let support = ChannelSupport::deterministic(Outcome::from_pairs(&[1.0, 3.0], &[0.0, 1.0]));
        let f = build_expected_conversion(&support, 1.0, 0.0).unwrap();
        assert_eq!(f.eval(0.0).unwrap(), 1.0);
        assert_eq!(f.num_segments(), 1);
    }

    #[test]
    fn private_cost_shifts_slopes() {
        let f = build_expected_conversion(&illustration_support(), 4.0, 0.5).unwrap();
        assert!(close(f.slopes(), &[2.5, 7.0 / 3.0 - 0.5, 11.0 / 9.0 - 0.5]));
        assert!((f.eval(2.0).unwrap() - (16.0 / 3.0 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn equal_slopes_merge() {
        // Tied ratios put a breakpoint at 1 with the same slope on both sides.
        let tied =
            ChannelSupport::deterministic(Outcome::from_pairs(&[2.0, 4.0, 1.0], &[1.0, 2.0, 4.0]));
        let f = build_expected_conversion(&tied, 5.0, 0.0).unwrap();
        assert!(close(f.turning_points(), &[0.0, 3.0, 5.0]));
        assert!(close(f.slopes(), &[2.0, 0.25]));
        assert!(f.invariant_violations().is_empty());
    }

    #[test]
    fn rejects_infinite_budget() {
        assert_eq!(
            build_expected_conversion(&illustration_support(), f64::INFINITY, 0.0),
            Err(PwlError::InvalidBudget(f64::INFINITY))
        );
    }

    #[test]
    fn csv_has_one_row_per_segment() {
        assert_eq!(figure().to_csv().lines().count(), 6);
    }
}
