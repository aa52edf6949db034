use thiserror::Error;

#[derive(Debug, Error)]
pub enum CnfError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("missing `p cnf <vars> <clauses>` header")]
    MissingHeader,
    #[error("clause {clause} references variable {var} but the formula has {num_vars}")]
    VarOutOfRange { clause: usize, var: u32, num_vars: u32 },
    #[error("assignment leaves {missing} variable(s) unassigned")]
    IncompleteAssignment { missing: u32 },
    #[error("formula has {num_vars} variables, above the enumeration cap of {cap}")]
    TooManyVars { num_vars: u32, cap: u32 },
}

#[derive(Debug, Error)]
pub enum CircuitError {
    #[error("factor widths must be at least 2 bits (got {0} and {1})")]
    FactorTooNarrow(usize, usize),
    #[error("product {product} does not fit in {bits} output bits")]
    ProductTooWide { product: u64, bits: usize },
    #[error("bit width {0} outside the supported range 4..=16")]
    UnsupportedWidth(usize),
}

#[derive(Debug, Error)]
pub enum QuboError {
    #[error("clause {clause} has width {width}; gadgets exist for widths 1 to 3")]
    UnsupportedWidth { clause: usize, width: usize },
    #[error("model needs {spins} spins but the chip has {budget}")]
    TooManySpins { spins: usize, budget: usize },
}

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("reduced assignment has no value for variable {0}")]
    MissingValue(u32),
    #[error("condition list refers to variable {var} outside 1..={num_vars}")]
    BadCondition { var: u32, num_vars: u32 },
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("model has {spins} spins; the emulated chip holds {capacity}")]
    Capacity { spins: usize, capacity: usize },
    #[error("coefficient {value} at {site} is not an integer in [{min}, {max}]")]
    CoefficientRange {
        site: String,
        value: f64,
        min: i32,
        max: i32,
    },
    #[error("invalid anneal schedule: {0}")]
    Schedule(String),
}

#[derive(Debug, Error)]
pub enum DecomposeError {
    #[error(transparent)]
    Qubo(#[from] QuboError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error(transparent)]
    Cnf(#[from] CnfError),
    #[error("subproblem spin cost {cost} exceeds budget {budget}")]
    OverBudget { cost: usize, budget: usize },
    #[error("empty variable selection")]
    EmptySelection,
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("no run records")]
    NoRecords,
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error("backbone instance n={n} m={m} b={pct}% is outside the controlled-backbone grid")]
    OffGrid { n: u32, m: usize, pct: u32 },
    #[error("could not plant the requested backbone within {0} attempts")]
    BackboneInfeasible(usize),
    #[error("instance file {path}: {source}")]
    Instance {
        path: String,
        #[source]
        source: CnfError,
    },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}
