//! The two restricted masters and their shared column-generation machinery:
//! dual smoothing, iteration accounting and the loop configuration.

pub mod af;
pub mod dw;

use crate::cuts::SrcParams;
use crate::dag::CompileOverflow;
use crate::pricing::DualValues;
use crate::simplex::LpError;
use std::time::Duration;

/// Which engine prices the subproblem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PricerKind {
    /// Heuristic labeling (memory condition dropped) with exact labeling as
    /// the fallback certificate.
    Labeling,
    /// Exact shortest path over the explicit DAG every round.
    Dag,
    /// Beam search over the explicit DAG, exact shortest path as fallback.
    Beam,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutMode {
    None,
    Src3,
}

#[derive(Debug, Clone)]
pub struct CgConfig {
    pub delta: usize,
    /// Initial smoothing factor; 0 turns smoothing off.
    pub smoothing_alpha: f64,
    /// Multiplier applied to alpha on a misprice.
    pub misprice_factor: f64,
    pub pricer: PricerKind,
    pub cut_mode: CutMode,
    pub src_params: SrcParams,
    /// Columns or paths transferred to the master per pricing round.
    pub columns_per_round: usize,
    pub beam_width: usize,
    pub time_limit: Duration,
    pub arc_cap: usize,
}

impl CgConfig {
    /// Route-master defaults.
    pub fn dw(delta: usize) -> CgConfig {
        CgConfig {
            delta,
            smoothing_alpha: 0.65,
            misprice_factor: 0.8,
            pricer: PricerKind::Labeling,
            cut_mode: CutMode::None,
            src_params: SrcParams::default(),
            columns_per_round: 200,
            beam_width: 3,
            time_limit: Duration::from_secs(600),
            arc_cap: crate::dag::DEFAULT_ARC_CAP,
        }
    }

    /// Arc-master defaults.
    pub fn af(delta: usize) -> CgConfig {
        CgConfig {
            smoothing_alpha: 0.50,
            ..CgConfig::dw(delta)
        }
    }
}

/// One bound-trace sample per master iteration.
#[derive(Debug, Clone, serde::Serialize)]
pub struct IterTrace {
    pub iteration: usize,
    /// Master objective (descaled); big-M inflated until feasibility.
    pub rmp_objective: f64,
    /// Best valid Lagrangian lower bound known so far.
    pub lower_bound: f64,
}

#[derive(Debug, Clone)]
pub struct CgStats {
    pub lb: f64,
    pub iterations: usize,
    pub rmp_seconds: f64,
    pub pp_seconds: f64,
    pub total_seconds: f64,
    pub cuts_added: usize,
    /// Structural master variables at the end (columns or arc variables).
    pub variables: usize,
    pub misprices: usize,
    /// False when the time budget ran out before exact certification.
    pub certified: bool,
    /// True when the final separation round still saw violated subset-row
    /// cuts that the caps refused; the two forms need not agree then.
    pub cuts_saturated: bool,
    pub trace: Vec<IterTrace>,
}

impl CgStats {
    pub(crate) fn fresh() -> CgStats {
        CgStats {
            lb: f64::NEG_INFINITY,
            iterations: 0,
            rmp_seconds: 0.0,
            pp_seconds: 0.0,
            total_seconds: 0.0,
            cuts_added: 0,
            variables: 0,
            misprices: 0,
            certified: false,
            cuts_saturated: false,
            trace: Vec::new(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Overflow(#[from] CompileOverflow),
    #[error("master is infeasible: artificials remain at certified optimum")]
    Infeasible,
    #[error("master LP reported unbounded; the formulation forbids this")]
    Unbounded,
}

/// Wentges dual-price smoothing with a misprice schedule: the stabilized
/// duals are `alpha * best + (1 - alpha) * current`, the stabilizer being
/// the duals of the best Lagrangian bound seen so far.
#[derive(Debug, Clone)]
pub struct SmoothingState {
    pub alpha: f64,
    pub misprice_factor: f64,
    best: Option<DualValues>,
    best_bound: f64,
    pub misprices: usize,
}

impl SmoothingState {
    pub fn new(alpha: f64, misprice_factor: f64) -> SmoothingState {
        assert!(
            (0.0..1.0).contains(&alpha),
            "smoothing factor must be in [0, 1)"
        );
        SmoothingState {
            alpha,
            misprice_factor,
            best: None,
            best_bound: f64::NEG_INFINITY,
            misprices: 0,
        }
    }

    /// Stabilized duals for the next pricing round.
    pub fn smoothed(&mut self, current: &DualValues) -> DualValues {
        if self.alpha == 0.0 {
            return current.clone();
        }
        match &self.best {
            Some(best) if best.same_shape(current) => {
                let mix = |b: f64, c: f64| self.alpha * b + (1.0 - self.alpha) * c;
                DualValues {
                    depot: mix(best.depot, current.depot),
                    customer: best
                        .customer
                        .iter()
                        .zip(&current.customer)
                        .map(|(&b, &c)| mix(b, c))
                        .collect(),
                    gsec: best
                        .gsec
                        .iter()
                        .zip(&current.gsec)
                        .map(|(&b, &c)| mix(b, c))
                        .collect(),
                    src: best
                        .src
                        .iter()
                        .zip(&current.src)
                        .map(|(&b, &c)| mix(b, c))
                        .collect(),
                }
            }
            _ => {
                // first call, or the cut dimensions changed
                self.best = Some(current.clone());
                current.clone()
            }
        }
    }

    /// Shrink alpha after pricing found nothing at stabilized duals.
    pub fn note_misprice(&mut self) {
        self.misprices += 1;
        self.alpha *= self.misprice_factor;
        if self.alpha < 1e-3 {
            self.alpha = 0.0;
        }
    }

    /// Move the stabilizer whenever the Lagrangian bound improves.
    pub fn update_best(&mut self, duals: &DualValues, bound: f64) {
        if bound > self.best_bound {
            self.best_bound = bound;
            self.best = Some(duals.clone());
        }
    }

    pub fn best_bound(&self) -> f64 {
        self.best_bound
    }
}

/// True when the stabilized duals coincide with the actual ones, i.e. an
/// empty exact pricing round is a genuine optimality certificate.
pub fn duals_coincide(a: &DualValues, b: &DualValues) -> bool {
    a.same_shape(b)
        && a.depot == b.depot
        && a.customer == b.customer
        && a.gsec == b.gsec
        && a.src == b.src
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothing_identity_at_zero_alpha() {
        let mut s = SmoothingState::new(0.0, 0.8);
        let d = DualValues {
            depot: 2.0,
            customer: vec![0.0, 1.0],
            gsec: vec![],
            src: vec![],
        };
        assert!(duals_coincide(&s.smoothed(&d), &d));
    }

    #[test]
    fn smoothing_mixes_towards_best() {
        let mut s = SmoothingState::new(0.65, 0.8);
        let d1 = DualValues {
            depot: 0.0,
            customer: vec![0.0, 10.0],
            gsec: vec![],
            src: vec![],
        };
        // first call initializes the stabilizer
        assert!(duals_coincide(&s.smoothed(&d1), &d1));
        s.update_best(&d1, 1.0);
        let d2 = DualValues {
            depot: 0.0,
            customer: vec![0.0, 20.0],
            gsec: vec![],
            src: vec![],
        };
        let mixed = s.smoothed(&d2);
        assert!((mixed.customer[1] - (0.65 * 10.0 + 0.35 * 20.0)).abs() < 1e-12);
    }

    #[test]
    fn misprices_drive_alpha_to_zero() {
        let mut s = SmoothingState::new(0.65, 0.8);
        for _ in 0..40 {
            s.note_misprice();
        }
        assert_eq!(s.alpha, 0.0);
        assert_eq!(s.misprices, 40);
    }

    #[test]
    #[should_panic]
    fn alpha_one_is_rejected() {
        let _ = SmoothingState::new(1.0, 0.8);
    }
}
