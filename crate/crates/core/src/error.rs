use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is out of range, expected {expected}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("{name} must be finite, got {value}")]
    NotFinite { name: &'static str, value: f64 },

    #[error("probability {value} outside the domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("root finding failed: {0}")]
    ConvergenceFailure(String),

    #[error("infeasible problem: {0}")]
    Infeasible(String),

    #[error("distribution is infeasible: {0}")]
    InfeasibleDistribution(String),

    #[error("priority {index} is {value}, priorities must be strictly positive")]
    NonPositivePriority { index: usize, value: f64 },

    #[error("budget {budget} outside the admissible interval [{lo}, {hi}]")]
    BudgetOutOfRange { budget: f64, lo: f64, hi: f64 },

    #[error("enumeration needs {count} points, cap is {cap}; shrink n or coarsen the grid")]
    TooLarge { count: f64, cap: f64 },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}
