use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("region error: {0}")]
    Region(String),

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("parameter dimension mismatch: family expects {expected}, got {got}")]
    ParamDim { expected: usize, got: usize },

    #[error("point {0:?} outside every chart domain")]
    OutsideDomain([f64; 2]),

    #[error("section not transversal at seed: |v.n| = {normal:.3e} < {floor:.3e} * |v|")]
    NotTransversal { normal: f64, floor: f64 },

    #[error("no return to section: {0}")]
    NoReturn(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("fewer than {required} sweep shells contributed (got {got})")]
    InsufficientShells { required: usize, got: usize },

    #[error("unresolvable: {0}")]
    Unresolvable(String),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
