use crate::broyden::{coefficients, UpdateRule, DEFAULT_DEGENERACY_TOL};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{axpy, dot, sub};
use crate::objectives::Objective;
use crate::operator::SpdState;

use super::{check_finite_point, Recorder, RunOptions, SolveResult};

fn check_scale(lipschitz: f64) -> Result<()> {
    if lipschitz > 0.0 && lipschitz.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveScale(lipschitz))
    }
}

/// Gradient descent with step `1/L`.
pub fn gradient_method<O: Objective + ?Sized>(
    oracle: &O,
    x0: &[f64],
    lipschitz: f64,
    options: &RunOptions,
) -> Result<SolveResult> {
    options.validate()?;
    check_scale(lipschitz)?;
    check_dim(oracle.dim(), x0.len())?;
    let mut x = x0.to_vec();
    let mut f = oracle.value(&x)?;
    let mut grad = oracle.gradient(&x)?;
    let mut rec = Recorder::new(oracle, options, oracle.self_concordance(), f);
    if let Err(e) = check_finite_point(f, &grad) {
        rec.fail(e);
    } else {
        for k in 0.. {
            if rec.record(k, &x, f, &grad, None) || k >= options.max_iter {
                break;
            }
            axpy(-1.0 / lipschitz, &grad, &mut x);
            let next = oracle.value(&x).and_then(|f| Ok((f, oracle.gradient(&x)?)));
            match next.and_then(|(f, g)| check_finite_point(f, &g).map(|_| (f, g))) {
                Ok((fv, g)) => {
                    f = fv;
                    grad = g;
                }
                Err(e) => {
                    rec.fail(e);
                    break;
                }
            }
        }
    }
    Ok(SolveResult {
        x,
        trace: rec.finish(),
        approximation: None,
    })
}

/// Textbook secant quasi-Newton method (`u = s`, `∇²f·u` replaced by `y`).
///
/// SR1 skips when `|⟨Gs − y, s⟩| ≤ 1e-12 |⟨y, s⟩|`; DFP and BFGS skip when
/// `⟨y, s⟩ ≤ 0`.
pub fn classical_qn<O: Objective + ?Sized>(
    oracle: &O,
    x0: &[f64],
    rule: UpdateRule,
    lipschitz: f64,
    options: &RunOptions,
) -> Result<SolveResult> {
    options.validate()?;
    check_scale(lipschitz)?;
    check_dim(oracle.dim(), x0.len())?;
    if let UpdateRule::FixedTau(t) = rule {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidTau(t));
        }
    }
    let n = oracle.dim();
    let mut state = SpdState::scaled_identity(n, lipschitz)?;
    let mut x = x0.to_vec();
    let mut f = oracle.value(&x)?;
    let mut grad = oracle.gradient(&x)?;
    let mut rec = Recorder::new(oracle, options, oracle.self_concordance(), f);

    let step = |state: &mut SpdState, x: &mut Vec<f64>, grad: &mut Vec<f64>| -> Result<f64> {
        let d = state.solve(grad)?;
        axpy(-1.0, &d, x);
        let f_next = oracle.value(x)?;
        let g_next = oracle.gradient(x)?;
        check_finite_point(f_next, &g_next)?;
        // s = −d
        let y = sub(&g_next, grad);
        let s: Vec<f64> = d.iter().map(|v| -v).collect();
        let ys = dot(&y, &s);
        let gs = state.g().apply(&s)?;
        let sgs = dot(&gs, &s);
        let r = sub(&gs, &y);
        let excess = dot(&r, &s);
        let skip = match rule {
            UpdateRule::Sr1 => excess.abs() <= DEFAULT_DEGENERACY_TOL * ys.abs(),
            UpdateRule::Dfp | UpdateRule::Bfgs => ys <= 0.0,
            UpdateRule::FixedTau(t) => ys <= 0.0 || (t < 1.0 && excess.abs() <= DEFAULT_DEGENERACY_TOL * ys.abs()),
        };
        if !skip {
            let (c11, c12, c22) = coefficients(rule, ys, sgs, excess);
            match state.rank2_update(&y, &r, c11, c12, c22) {
                // SR1 may leave the positive definite cone; such updates are skipped.
                Err(Error::SingularCapacitance { .. }) if rule == UpdateRule::Sr1 => {}
                other => other?,
            }
        }
        *grad = g_next;
        Ok(f_next)
    };

    if let Err(e) = check_finite_point(f, &grad) {
        rec.fail(e);
    } else {
        for k in 0.. {
            if rec.record(k, &x, f, &grad, Some(state.g())) || k >= options.max_iter {
                break;
            }
            match step(&mut state, &mut x, &mut grad) {
                Ok(fv) => f = fv,
                Err(e) => {
                    rec.fail(e);
                    break;
                }
            }
        }
    }
    Ok(SolveResult {
        x,
        trace: rec.finish(),
        approximation: Some(state.g().clone()),
    })
}
