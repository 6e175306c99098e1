//! Greedy quasi-Newton methods built on the Broyden family of updates.
//!
//! The crate is layered bottom-up:
//!
//! - [`operator`]: dense symmetric matrices, Cholesky factors, and an SPD
//!   approximation with an O(n²) maintained inverse.
//! - [`broyden`]: the Broyden-family update (SR1, DFP, BFGS and fixed-τ
//!   blends), greedy coordinate selection and the σ progress measure.
//! - [`objectives`]: quadratic, regularized log-sum-exp and ℓ2-regularized
//!   logistic regression oracles.
//! - [`solvers`]: the quadratic scheme, the general local scheme with
//!   Hessian correction, and gradient-method / secant baselines.
//! - [`data`]: LIBSVM ingestion, synthetic problem generation and seeded
//!   random streams.
//!
//! ```
//! use greedy_qn::broyden::UpdateRule;
//! use greedy_qn::objectives::QuadraticProblem;
//! use greedy_qn::operator::DenseSymmetric;
//! use greedy_qn::solvers::{solve_quadratic, DirectionStrategy, SolverConfig, Termination};
//!
//! let a = DenseSymmetric::from_diagonal(&[1.0, 2.0, 3.0]).unwrap();
//! let problem = QuadraticProblem::new(a, vec![1.0, 1.0, 1.0]).unwrap();
//! let config = SolverConfig::new(UpdateRule::Sr1, DirectionStrategy::GreedyCoordinate)
//!     .with_termination(Termination::GradientNorm { epsilon: 1e-12 })
//!     .with_max_iter(50);
//! let result = solve_quadratic(&problem, &[0.0, 0.0, 0.0], &config).unwrap();
//! assert!(result.trace.outcome.is_converged());
//! ```

pub mod broyden;
pub mod data;
mod error;
pub mod linalg;
pub mod objectives;
pub mod operator;
pub mod solvers;

pub use error::{Error, Result};
