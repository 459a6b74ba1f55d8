use thiserror::Error;

/// Errors raised by the state kernel, the SLD builders and the bound assemblers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    /// n̄ = 0: no boson ever arrives (q = 1/2, γ_R = -1, c = 1).
    #[error("degenerate state: normalisation 1 + 2cγ_R√(q(1-q)) = {denominator:e}")]
    DegenerateState { denominator: f64 },

    #[error("degenerate overlap: c = {c} is too close to 1 (s = {s})")]
    DegenerateOverlap { s: f64, c: f64 },

    /// ρ⁽¹⁾ is (numerically) pure, so the SLD equations divide by zero.
    #[error("singular state: purity r = {purity} is within tolerance of 1")]
    SingularState { purity: f64 },

    #[error("boundary error: {0}")]
    Boundary(String),

    #[error("undefined direction: purity r = {purity} is too close to 0")]
    UndefinedDirection { purity: f64 },

    #[error("numeric degeneracy: {what} = {value:e} at {params}")]
    NumericDegeneracy {
        what: &'static str,
        value: f64,
        params: String,
    },

    #[error("degenerate prior: n̄ = {nbar}")]
    DegeneratePrior { nbar: f64 },

    #[error("non-bijective purity map: γ_R < 0, purity minimum at s0 = {s0}")]
    NonBijective { s0: f64 },

    #[error("singular Jacobian: ∂r/∂s = {dr_ds:e}")]
    SingularJacobian { dr_ds: f64 },

    #[error("degenerate measurement probabilities p0 = {p0:e} at {params}")]
    DegenerateProbabilities { p0: f64, params: String },

    #[error("estimation error: {0}")]
    Estimation(String),

    #[error("input error: {0}")]
    Input(String),

    #[error("finite-difference step error: Richardson disagreement {disagreement:e} at h = {h:e}")]
    Step { h: f64, disagreement: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
