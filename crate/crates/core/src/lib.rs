//! Symbolic and numeric toolkit for the Miura transformation of sl(n).
//!
//! * [`diffalg`]: exact differential polynomials in jet variables.
//! * [`gauge`]: companion and diagonal gauges, triangular gauge changes and
//!   the elimination producing `w_i(a)` and `N₋`.
//! * [`foliation`]: the forms `ω⁻` on the big cell, their vector field and
//!   the graph check of the Miura solution.
//! * [`numeric`]: flat sections, Gauss factorization, free fields along a
//!   path, numeric Miura residuals and monodromy.
//! * [`cocycle`]: rank-2 and rank-3 transition matrices over Möbius charts.
//! * [`cli`]: the command-line front end.

pub mod diffalg;
pub mod gauge;
pub mod foliation;
pub mod numeric;
pub mod cocycle;
pub mod cli;
