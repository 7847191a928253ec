use super::{is_quasi_wolfe, LineSearchOutcome, SearchParams, SearchStatus, Trial, TrialKind};
use crate::error::Result;
use crate::path::{complete_point, tag_alpha, PathPoint, SearchPath};
use crate::problem::{dot, EvalCounter, Objective};

/// Backtracking along the path: the first `alpha_init * sigma_back^t`
/// giving `f(x(alpha)) <= f(x) + alpha * eta_a * grad^T p`.
///
/// Trials evaluate `f` only; the gradient is computed once at the accepted
/// step. A non-descent direction or exhausted budget yields `Failure` at
/// `alpha = 0`.
pub fn quasi_armijo(
    path: &SearchPath,
    objective: &dyn Objective,
    base: &PathPoint,
    params: &SearchParams,
    counter: &mut EvalCounter,
) -> Result<LineSearchOutcome> {
    params.validate()?;
    let start = *counter;
    let d0 = dot(&base.grad, path.direction());
    let mut trials = Vec::new();
    let fail = |counter: &EvalCounter, trials: Vec<Trial>| LineSearchOutcome {
        alpha: 0.0,
        point: base.clone(),
        status: SearchStatus::Failure,
        flags: Default::default(),
        evals: counter.since(&start),
        trials,
        brackets: Vec::new(),
    };
    if !(d0 < 0.0) {
        return Ok(fail(counter, trials));
    }
    let mut alpha = params.alpha_init.min(params.alpha_max);
    for _ in 0..params.max_evals {
        trials.push(Trial {
            alpha,
            kind: TrialKind::Backtrack,
        });
        let x = path.point(alpha);
        let f = counter
            .value(objective, &x)
            .map_err(|e| tag_alpha(e, alpha))?;
        if f <= base.psi + alpha * (params.eta_a * d0) {
            let g = counter
                .gradient(objective, &x)
                .map_err(|e| tag_alpha(e, alpha))?;
            let point = complete_point(path, alpha, x, f, g);
            let flags = is_quasi_wolfe(&point, base, params);
            return Ok(LineSearchOutcome {
                alpha,
                point,
                status: SearchStatus::Armijo,
                flags,
                evals: counter.since(&start),
                trials,
                brackets: Vec::new(),
            });
        }
        alpha *= params.sigma_back;
    }
    Ok(fail(counter, trials))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::eval_path;
    use crate::problem::{Bounds, FnObjective};

    fn half_square() -> FnObjective {
        FnObjective::new(
            |x| 0.5 * x.iter().map(|v| v * v).sum::<f64>(),
            |x, g| g.copy_from_slice(x),
        )
    }

    fn run(path: &SearchPath, obj: &FnObjective, params: &SearchParams) -> LineSearchOutcome {
        let mut c = EvalCounter::new();
        let base = eval_path(path, 0.0, obj, &mut c).unwrap();
        quasi_armijo(path, obj, &base, params, &mut c).unwrap()
    }

    #[test]
    fn full_step_accepted() {
        let obj = half_square();
        let path = SearchPath::new(vec![1.0, 1.0], vec![-1.0, -1.0], Bounds::unbounded(2)).unwrap();
        let out = run(&path, &obj, &SearchParams::quasi_armijo());
        assert_eq!(out.status, SearchStatus::Armijo);
        assert_eq!(out.alpha, 1.0);
        assert_eq!(out.point.psi, 0.0);
        assert_eq!(out.evals.n_f, 1);
        assert_eq!(out.evals.n_g, 1);
    }

    #[test]
    fn tiny_initial_step_accepted() {
        let obj = half_square();
        let path = SearchPath::new(vec![1.0, 1.0], vec![-1.0, -1.0], Bounds::unbounded(2)).unwrap();
        let params = SearchParams {
            alpha_init: 1e-6,
            ..SearchParams::quasi_armijo()
        };
        let out = run(&path, &obj, &params);
        assert_eq!(out.alpha, 1e-6);
        assert_eq!(out.trials.len(), 1);
    }

    #[test]
    fn backtracks_from_long_step() {
        let obj = half_square();
        let path = SearchPath::new(vec![1.0], vec![-8.0], Bounds::unbounded(1)).unwrap();
        let out = run(&path, &obj, &SearchParams::quasi_armijo());
        // (1 - 8a)^2 / 2 <= 1/2 - 2.4a holds first at a = 1/8
        assert_eq!(out.alpha, 0.125);
        assert_eq!(out.evals.n_f, 4);
        assert_eq!(out.evals.n_g, 1);
    }

    #[test]
    fn ascent_direction_fails() {
        let obj = half_square();
        let path = SearchPath::new(vec![1.0], vec![1.0], Bounds::unbounded(1)).unwrap();
        let out = run(&path, &obj, &SearchParams::quasi_armijo());
        assert_eq!(out.status, SearchStatus::Failure);
        assert_eq!(out.alpha, 0.0);
        assert_eq!(out.evals.n_f, 0);
    }
}
