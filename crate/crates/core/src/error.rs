use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not quaternionic (commutator defect {defect:.3e})")]
    NotQuaternionic { defect: f64 },

    #[error("matrix is not antisymmetric (defect {defect:.3e})")]
    NotAntisymmetric { defect: f64 },

    #[error("generator {index} is not anti-Hermitian (defect {defect:.3e})")]
    NotAntiHermitian { index: usize, defect: f64 },

    #[error("generators {a} and {b} do not commute (defect {defect:.3e})")]
    NonCommuting { a: usize, b: usize, defect: f64 },

    #[error("frame is singular")]
    SingularFrame,

    #[error("point is off the level set (|mu - zeta| = {residual:.3e})")]
    OffLevelSet { residual: f64 },

    #[error("moment map differential is rank deficient (singular value ratio {ratio:.3e})")]
    NotRegular { ratio: f64 },

    #[error("action is not free at this point (fundamental field singular value ratio {ratio:.3e})")]
    NotFree { ratio: f64 },

    #[error("Gram-Schmidt breakdown: residual norm {residual:.3e}")]
    GramSchmidtBreakdown { residual: f64 },

    #[error("Newton retraction did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("vector is not tangent to the level set (defect {defect:.3e})")]
    NotTangent { defect: f64 },

    #[error("vector is not horizontal (defect {defect:.3e})")]
    NotHorizontal { defect: f64 },

    #[error("vector is not vertical (defect {defect:.3e})")]
    NotVertical { defect: f64 },

    #[error("finite-difference step {0:e} is too small")]
    StepUnderflow(f64),

    #[error("no admissible level-set point after {attempts} attempts")]
    SamplingExhausted { attempts: usize },

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
