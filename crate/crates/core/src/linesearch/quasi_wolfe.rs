use super::interp::safeguarded_cubic;
use super::{
    is_quasi_wolfe, AuxOmega, CFlags, LineSearchOutcome, SearchParams, SearchStatus, Trial,
    TrialKind,
};
use crate::error::Result;
use crate::path::{eval_path, PathPoint, SearchPath};
use crate::problem::{EvalCounter, Objective};

struct Search<'a> {
    path: &'a SearchPath,
    objective: &'a dyn Objective,
    base: &'a PathPoint,
    params: &'a SearchParams,
    start: EvalCounter,
    trials: Vec<Trial>,
    brackets: Vec<(f64, f64)>,
}

impl Search<'_> {
    fn omega(&self, p: &PathPoint) -> AuxOmega {
        AuxOmega::at(p, self.base, self.params.eta_a)
    }

    fn eval(&mut self, alpha: f64, kind: TrialKind, counter: &mut EvalCounter) -> Result<(PathPoint, CFlags)> {
        self.trials.push(Trial { alpha, kind });
        let p = eval_path(self.path, alpha, self.objective, counter)?;
        let flags = is_quasi_wolfe(&p, self.base, self.params);
        Ok((p, flags))
    }

    fn finish(self, point: PathPoint, status: SearchStatus, counter: &EvalCounter) -> LineSearchOutcome {
        let flags = if point.alpha > 0.0 {
            is_quasi_wolfe(&point, self.base, self.params)
        } else {
            CFlags::default()
        };
        LineSearchOutcome {
            alpha: point.alpha,
            point,
            status,
            flags,
            evals: counter.since(&self.start),
            trials: self.trials,
            brackets: self.brackets,
        }
    }

    fn check_bracket(&self, low: &PathPoint, high: &PathPoint) {
        if cfg!(debug_assertions) {
            let wl = self.omega(low);
            let wh = self.omega(high);
            debug_assert!(wl.value <= 0.0, "omega(low) > 0");
            debug_assert!(wl.value <= wh.value, "omega(low) > omega(high)");
            if low.alpha < high.alpha {
                debug_assert!(wl.d_plus < 0.0, "omega'_+(low) >= 0 with low < high");
            } else {
                debug_assert!(wl.d_left() > 0.0, "omega'_-(low) <= 0 with low > high");
            }
        }
    }

    fn stage_one(mut self, counter: &mut EvalCounter) -> Result<LineSearchOutcome> {
        let mut prev = self.base.clone();
        let mut alpha = self.params.alpha_init.min(self.params.alpha_max);
        loop {
            if self.trials.len() >= self.params.max_evals {
                return Ok(self.finish(prev, SearchStatus::Failure, counter));
            }
            let (pt, flags) = self.eval(alpha, TrialKind::StageOne, counter)?;
            if flags.is_quasi_wolfe() {
                return Ok(self.finish(pt, SearchStatus::QuasiWolfe, counter));
            }
            let w = self.omega(&pt);
            if w.value >= self.omega(&prev).value {
                return self.stage_two(prev, pt, counter);
            }
            if w.d_left() >= 0.0 {
                return self.stage_two(pt, prev, counter);
            }
            if alpha >= self.params.alpha_max {
                return Ok(self.finish(pt, SearchStatus::HitAlphaMax, counter));
            }
            prev = pt;
            alpha = (self.params.gamma_e * alpha).min(self.params.alpha_max);
        }
    }

    /// Next trial inside the open bracket, and how it was chosen.
    fn propose(&self, low: &PathPoint, high: &PathPoint, kink_run: &mut usize) -> (f64, TrialKind) {
        let (a, b) = (low.alpha, high.alpha);
        let mid = a + 0.5 * (b - a);
        let kinks = self.path.kinks_between(a, b);
        if !kinks.is_empty() {
            if *kink_run < self.params.max_consecutive_kinks {
                *kink_run += 1;
                let k = if a < b { kinks[0] } else { kinks[kinks.len() - 1] };
                return (k.step, TrialKind::Kink);
            }
            *kink_run = 0;
            return (mid, TrialKind::Bisection);
        }
        *kink_run = 0;
        let (s, l) = if a < b { (low, high) } else { (high, low) };
        let (t, bisected) = safeguarded_cubic(s.alpha, s.psi, s.dpsi_plus, l.alpha, l.psi, l.dpsi_left());
        if bisected {
            (t, TrialKind::Bisection)
        } else {
            (t, TrialKind::Cubic)
        }
    }

    fn stage_two(mut self, mut low: PathPoint, mut high: PathPoint, counter: &mut EvalCounter) -> Result<LineSearchOutcome> {
        let mut kink_run = 0usize;
        loop {
            self.brackets.push((low.alpha, high.alpha));
            self.check_bracket(&low, &high);
            let width = (high.alpha - low.alpha).abs();
            if width <= f64::EPSILON * low.alpha.max(1.0) || self.trials.len() >= self.params.max_evals {
                return Ok(self.fail_with_better(low, high, counter));
            }
            let (alpha, kind) = self.propose(&low, &high, &mut kink_run);
            let (lo, hi) = if low.alpha < high.alpha { (low.alpha, high.alpha) } else { (high.alpha, low.alpha) };
            if !(alpha > lo && alpha < hi) {
                return Ok(self.fail_with_better(low, high, counter));
            }
            let (new, flags) = self.eval(alpha, kind, counter)?;
            if flags.is_quasi_wolfe() {
                return Ok(self.finish(new, SearchStatus::QuasiWolfe, counter));
            }
            let wn = self.omega(&new);
            if wn.value >= self.omega(&low).value {
                high = new;
            } else if (low.alpha < high.alpha && wn.d_plus < 0.0)
                || (low.alpha > high.alpha && wn.d_left() > 0.0)
            {
                low = new;
            } else {
                high = std::mem::replace(&mut low, new);
            }
        }
    }

    fn fail_with_better(self, low: PathPoint, high: PathPoint, counter: &EvalCounter) -> LineSearchOutcome {
        let pick = if high.psi < low.psi && high.alpha > 0.0 { high } else { low };
        self.finish(pick, SearchStatus::Failure, counter)
    }
}

/// Two-stage quasi-Wolfe search along `path` starting from the `alpha = 0`
/// point `base`.
///
/// Stage one expands the step by `gamma_e` until it is acceptable or a
/// bracket is found. Stage two shrinks the bracket, trying the kink nearest
/// `alpha_low` first and falling back to bisection after
/// `max_consecutive_kinks` kink trials in a row; a kink-free bracket is
/// shrunk by safeguarded cubic interpolation.
pub fn quasi_wolfe(
    path: &SearchPath,
    objective: &dyn Objective,
    base: &PathPoint,
    params: &SearchParams,
    counter: &mut EvalCounter,
) -> Result<LineSearchOutcome> {
    params.validate()?;
    let search = Search {
        path,
        objective,
        base,
        params,
        start: *counter,
        trials: Vec::new(),
        brackets: Vec::new(),
    };
    if !(base.dpsi_plus < 0.0) {
        return Ok(search.finish(base.clone(), SearchStatus::Failure, counter));
    }
    search.stage_one(counter)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{Bounds, FnObjective};

    fn run(obj: &FnObjective, x: f64, p: f64, bounds: Bounds) -> LineSearchOutcome {
        let path = SearchPath::new(vec![x], vec![p], bounds).unwrap();
        let mut c = EvalCounter::new();
        let base = eval_path(&path, 0.0, obj, &mut c).unwrap();
        let before = c;
        let out = quasi_wolfe(&path, obj, &base, &SearchParams::default(), &mut c).unwrap();
        assert_eq!(out.evals, c.since(&before));
        out
    }

    fn lower_zero() -> Bounds {
        Bounds::new(vec![0.0], vec![f64::INFINITY]).unwrap()
    }

    #[test]
    fn smooth_quadratic_accepts_first_trial() {
        let obj = FnObjective::new(|x| 0.5 * x[0] * x[0], |x, g| g[0] = x[0]);
        let out = run(&obj, 1.0, -1.0, Bounds::unbounded(1));
        assert_eq!(out.status, SearchStatus::QuasiWolfe);
        assert_eq!(out.alpha, 1.0);
        assert_eq!(out.flags, CFlags { c1: true, c2: true, c3: true, c4: false });
        assert_eq!(out.trials.len(), 1);
    }

    #[test]
    fn full_step_landing_on_bound_is_accepted() {
        // x(1) = 0 sits on the bound; psi'_+(1) = 0 grants C3 immediately
        let obj = FnObjective::new(|x| (x[0] + 1.0).powi(2), |x, g| g[0] = 2.0 * (x[0] + 1.0));
        let out = run(&obj, 1.0, -2.0, lower_zero());
        assert_eq!(out.status, SearchStatus::QuasiWolfe);
        assert_eq!(out.alpha, 1.0);
        assert_eq!(out.flags, CFlags { c1: true, c2: true, c3: true, c4: false });
    }

    #[test]
    fn stage_two_tries_kink_then_interpolates() {
        // psi(a) = (0.2 - 2a)^2 up to the kink at 0.5, constant 0.64 after
        let obj = FnObjective::new(|x| (x[0] - 0.8).powi(2), |x, g| g[0] = 2.0 * (x[0] - 0.8));
        let out = run(&obj, 1.0, -2.0, lower_zero());
        assert_eq!(out.status, SearchStatus::QuasiWolfe);
        let kinds: Vec<TrialKind> = out.trials.iter().map(|t| t.kind).collect();
        assert_eq!(kinds, vec![TrialKind::StageOne, TrialKind::Kink, TrialKind::Cubic]);
        assert_eq!(out.trials[1].alpha, 0.5);
        assert!((out.alpha - 0.1).abs() < 1e-12);
        assert!(out.point.psi < 1e-20);
        assert_eq!(out.brackets, vec![(0.0, 1.0), (0.0, 0.5)]);
    }

    #[test]
    fn unbounded_ray_hits_alpha_max() {
        let obj = FnObjective::new(|x| -x[0], |_, g| g[0] = -1.0);
        let out = run(&obj, 0.0, 1.0, Bounds::unbounded(1));
        assert_eq!(out.status, SearchStatus::HitAlphaMax);
        assert_eq!(out.alpha, 1e8);
        assert!(out.flags.c1);
    }

    #[test]
    fn ascent_direction_fails_without_evaluating() {
        let obj = FnObjective::new(|x| x[0], |_, g| g[0] = 1.0);
        let out = run(&obj, 0.0, 1.0, Bounds::unbounded(1));
        assert_eq!(out.status, SearchStatus::Failure);
        assert!(out.trials.is_empty());
    }

    #[test]
    fn expands_until_bracket() {
        let obj = FnObjective::new(|x| (x[0] - 100.0).powi(2), |x, g| g[0] = 2.0 * (x[0] - 100.0));
        let out = run(&obj, 0.0, 1.0, Bounds::unbounded(1));
        assert_eq!(out.status, SearchStatus::QuasiWolfe);
        let stage_one: Vec<f64> = out
            .trials
            .iter()
            .filter(|t| t.kind == TrialKind::StageOne)
            .map(|t| t.alpha)
            .collect();
        // |psi'| first drops below 0.9 * 200 at alpha = 16
        assert_eq!(stage_one, vec![1.0, 2.0, 4.0, 8.0, 16.0]);
        assert_eq!(out.alpha, 16.0);
        assert!(out.flags.c3);
    }

    #[test]
    fn many_kinks_fall_back_to_bisection() {
        // staircase of upper bounds: every coordinate kinks in turn
        let n = 12;
        let upper: Vec<f64> = (1..=n).map(|i| i as f64 * 0.01).collect();
        let bounds = Bounds::new(vec![0.0; n], upper).unwrap();
        // f pulls every coordinate far past its bound, then rises steeply in
        // the last one so stage one overshoots
        let obj = FnObjective::new(
            move |x: &[f64]| -x.iter().sum::<f64>() + 1e4 * x[n - 1].powi(4),
            move |x: &[f64], g: &mut [f64]| {
                g.fill(-1.0);
                g[n - 1] += 4e4 * x[n - 1].powi(3);
            },
        );
        let path = SearchPath::new(vec![0.0; n], vec![1.0; n], bounds).unwrap();
        let mut c = EvalCounter::new();
        let base = eval_path(&path, 0.0, &obj, &mut c).unwrap();
        let out = quasi_wolfe(&path, &obj, &base, &SearchParams::default(), &mut c).unwrap();
        assert!(out.flags.is_quasi_wolfe() || out.status == SearchStatus::HitAlphaMax);
        let mut run = 0;
        for t in &out.trials {
            if t.kind == TrialKind::Kink {
                run += 1;
                assert!(run <= 3);
            } else {
                run = 0;
            }
        }
    }
}
