//! Broyden-family updates, greedy direction selection and progress measures.
//!
//! For a target operator `A` and approximation `G ⪰ A`, the family
//! `Broyd_τ(G, A, u) = τ·DFP(G, A, u) + (1 − τ)·SR1(G, A, u)` is a rank-two
//! modification lying in `span{Au, Gu}`. With `α = ⟨Au,u⟩`, `β = ⟨Gu,u⟩`,
//! `δ = ⟨(G − A)u, u⟩` and the residual `r = Gu − Au`, the coefficients on
//! `Au·Auᵀ`, `Au·rᵀ + r·Auᵀ` and `r·rᵀ` are
//!
//! ```text
//! c11 = τδ/α²
//! c12 = −τ/α
//! c22 = −(1 − τ)/δ
//! ```
//!
//! Written on `(Au, Gu)` instead, the SR1 part carries `±1/δ` on every term
//! and cancels catastrophically once `G` is close to `A`. BFGS (`τ = α/β`)
//! uses the closed form `(δ/(αβ), −1/β, −1/β)`.

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, symmetric_eigenvalues};
use crate::operator::{factorize, DenseSymmetric, SpdState};

/// Default relative curvature threshold of the degeneracy test.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UpdateRule {
    Sr1,
    Dfp,
    Bfgs,
    FixedTau(f64),
}

impl UpdateRule {
    pub fn fixed_tau(tau: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&tau) {
            Ok(Self::FixedTau(tau))
        } else {
            Err(Error::InvalidTau(tau))
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::Sr1 => "SR1".into(),
            Self::Dfp => "DFP".into(),
            Self::Bfgs => "BFGS".into(),
            Self::FixedTau(t) => format!("Tau{t}"),
        }
    }
}

/// Quantities entering one update along direction `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdatePair {
    pub u: Vec<f64>,
    /// `A·u`
    pub au: Vec<f64>,
    /// `⟨Au, u⟩`
    pub auu: f64,
    /// `G·u`
    pub gu: Vec<f64>,
    /// `⟨Gu, u⟩`
    pub guu: f64,
}

impl UpdatePair {
    /// Builds the pair from the current approximation and the target action.
    pub fn new(state: &SpdState, u: Vec<f64>, au: Vec<f64>) -> Result<Self> {
        check_dim(state.dim(), u.len())?;
        check_dim(state.dim(), au.len())?;
        let gu = state.g().apply(&u)?;
        Ok(Self::from_parts(u, au, gu))
    }

    /// Coordinate direction `e_i`; `G·e_i` is read off as a row of `G`.
    pub fn coordinate(state: &SpdState, index: usize, au: Vec<f64>) -> Result<Self> {
        let n = state.dim();
        check_dim(n, au.len())?;
        if index >= n {
            return Err(Error::InvalidArgument(format!("coordinate {index} out of range for n = {n}")));
        }
        let mut u = vec![0.0; n];
        u[index] = 1.0;
        let gu = state.g().row(index).to_vec();
        Ok(Self::from_parts(u, au, gu))
    }

    pub fn from_parts(u: Vec<f64>, au: Vec<f64>, gu: Vec<f64>) -> Self {
        let auu = dot(&au, &u);
        let guu = dot(&gu, &u);
        Self { u, au, auu, gu, guu }
    }

    /// `r = Gu − Au`
    pub fn residual(&self) -> Vec<f64> {
        self.gu.iter().zip(&self.au).map(|(g, a)| g - a).collect()
    }

    /// `⟨(G − A)u, u⟩`, formed from the difference vector.
    pub fn excess(&self) -> f64 {
        dot(&self.residual(), &self.u)
    }
}

/// τ selected by the rule for this pair.
pub fn tau_for(rule: UpdateRule, pair: &UpdatePair) -> Result<f64> {
    if !(pair.auu > 0.0 && pair.guu > 0.0) {
        return Err(Error::NonPositiveCurvature {
            auu: pair.auu,
            guu: pair.guu,
        });
    }
    Ok(match rule {
        UpdateRule::Sr1 => 0.0,
        UpdateRule::Dfp => 1.0,
        UpdateRule::Bfgs => pair.auu / pair.guu,
        UpdateRule::FixedTau(t) => t,
    })
}

/// Rank-two coefficients `(c11, c12, c22)` on `(Au, r)`; `excess` is `δ`.
pub(crate) fn coefficients(rule: UpdateRule, auu: f64, guu: f64, excess: f64) -> (f64, f64, f64) {
    let tau = match rule {
        UpdateRule::Bfgs => return (excess / (auu * guu), -1.0 / guu, -1.0 / guu),
        UpdateRule::Sr1 => 0.0,
        UpdateRule::Dfp => 1.0,
        UpdateRule::FixedTau(t) => t,
    };
    let sr1 = if tau == 1.0 { 0.0 } else { (1.0 - tau) / excess };
    (tau * excess / (auu * auu), -tau / auu, -sr1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UpdateOutcome {
    Applied { tau: f64 },
    /// The degeneracy test fired (`Gu ≈ Au`); `G` is unchanged.
    Skipped,
}

/// Replaces `state` by `Broyd_τ(G, A, u)` with τ chosen by `rule`.
///
/// The update is skipped when `⟨(G − A)u, u⟩ ≤ tol·⟨Au, u⟩`.
pub fn broyd_update(state: &mut SpdState, pair: &UpdatePair, rule: UpdateRule, tol: f64) -> Result<UpdateOutcome> {
    check_dim(state.dim(), pair.u.len())?;
    let mut tau = tau_for(rule, pair)?;
    let excess = pair.excess();
    if excess <= tol * pair.auu {
        return Ok(UpdateOutcome::Skipped);
    }
    if rule == UpdateRule::Bfgs {
        // `⟨Au,u⟩/⟨Gu,u⟩` can round past 1 when the excess is barely above tolerance.
        tau = tau.min(1.0);
    }
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::InvalidTau(tau));
    }
    let (c11, c12, c22) = coefficients(rule, pair.auu, pair.guu, excess);
    state.rank2_update(&pair.au, &pair.residual(), c11, c12, c22)?;
    Ok(UpdateOutcome::Applied { tau })
}

/// Smallest index maximizing `diag_g[i] / diag_a[i]`.
pub fn greedy_direction(diag_g: &[f64], diag_a: &[f64]) -> Result<usize> {
    check_dim(diag_g.len(), diag_a.len())?;
    if diag_g.is_empty() {
        return Err(Error::InvalidArgument("empty diagonal".into()));
    }
    let mut best = 0;
    let mut best_ratio = f64::NEG_INFINITY;
    for (i, (g, a)) in diag_g.iter().zip(diag_a).enumerate() {
        if !(*a > 0.0) {
            return Err(Error::NonPositiveHessianDiagonal { index: i, value: *a });
        }
        let ratio = g / a;
        if ratio > best_ratio {
            best = i;
            best_ratio = ratio;
        }
    }
    Ok(best)
}

/// `σ_A(G) = tr(A⁻¹G) − n`. O(n³).
pub fn sigma(a: &DenseSymmetric, g: &DenseSymmetric) -> Result<f64> {
    check_dim(a.dim(), g.dim())?;
    let n = a.dim();
    let factor = factorize(a)?;
    let mut trace = 0.0;
    let mut col = vec![0.0; n];
    for j in 0..n {
        for i in 0..n {
            col[i] = g.get(i, j);
        }
        let x = factor.solve(&col)?;
        trace += x[j];
    }
    Ok(trace - n as f64)
}

/// Largest `|λ|` of `L⁻¹(G − H)L⁻ᵀ` with `H = L·Lᵀ`: the operator norm of
/// `G − H` measured relative to `H`. O(n³).
pub fn relative_op_error(g: &DenseSymmetric, hess: &DenseSymmetric) -> Result<f64> {
    check_dim(hess.dim(), g.dim())?;
    let factor = factorize(hess)?;
    let scaled = factor.congruence(&g.sub(hess)?)?;
    let eig = symmetric_eigenvalues(&scaled);
    Ok(eig[0].abs().max(eig[eig.len() - 1].abs()))
}
