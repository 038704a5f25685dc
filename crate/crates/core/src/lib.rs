//! Equilibrium engine and Monte Carlo simulator for two-tier supply chain
//! network formation under Bernoulli yield uncertainty, market-clearing
//! prices and quadratic congestion.

pub mod analytic;
pub mod equilibrium;
pub mod error;
pub mod io;
pub mod model;
pub mod montecarlo;
pub mod phase;
pub mod roots;

pub use analytic::{
    candidate_payoff, congestion, payoff_congestion, payoff_hetero_retailer, payoff_hetero_supplier,
    payoff_no_congestion, regime_quantities, rho, thresholds_2x2, Candidate, GammaHat, RegimeQuantities, Thresholds2x2,
};
pub use equilibrium::{
    best_responses, br_dynamics, enumerate_equilibria, nash_check, DeviationCertificate, EnumerateOptions,
    EquilibriumReport, NashVerdict, RetailerPayoff, Trajectory,
};
pub use error::{Result, ScnError};
pub use model::{build_network, classify, classify_2x2, ClassLabel, HeteroParams, ModelParams, Network, NetworkClass};
pub use montecarlo::{estimate_payoffs, realize, realize_with, PayoffEstimate, Realization};
pub use phase::{predict_2x2, reconcile, sweep, GammaAxis, GridSpec, PhaseCell, ReconcileReport};
