//! The two-player game whose value solves the backward saddle equation.
//!
//! The maximizer picks `α`, the minimizer `β`, both with values in `[-1, 1]`.
//! The payoff is `|x(T) − y(T)| + Θ(x(T), y(T))`.

mod control;
mod dp;
mod play;
mod search;

pub use control::{control_levels, delta_eps, PiecewiseControl, Rule, Strategy};
pub use dp::{dp_value, isaacs_identity, GameConfig, IsaacsGap, ValueTable};
pub use play::{induction_check, payoff, simulate, terminal_payoff, InductionOutcome, Trajectory};
pub use search::{adversary_search, ControlFamily, SearchOutcome, EXHAUSTIVE_CAP};
