use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ray id {0} out of range 1..=120")]
    RayOutOfRange(u32),
    #[error("ray {ray} has {degree} orthogonal neighbours, expected {expected}")]
    DegreeAnomaly { ray: u8, degree: u32, expected: u32 },
    #[error("symbol double count mismatch: rays give {ray_slots}, bases give {basis_slots}")]
    InconsistentCount { ray_slots: u64, basis_slots: u64 },
    #[error("fixture `{name}` is corrupt: {reason}")]
    FixtureCorrupt { name: String, reason: String },
    #[error("labels {first} and {second} generate the same basis")]
    Collision { first: String, second: String },
    #[error("image of ray {ray} under {generator} is {distance:.3e} away from the ray set")]
    RealizationMismatch {
        generator: String,
        ray: u8,
        distance: f64,
    },
    #[error("{0}")]
    Mismatch(String),
    #[error("solver gave up after {nodes} nodes")]
    TimeoutExceeded { nodes: u64 },
    #[error("rays {0} and {1} are orthogonal; a non-orthogonal pair is required")]
    NonOrthogonalRequired(u8, u8),
    #[error("only {found} complementary pairs available, 10 needed")]
    InsufficientPairs { found: usize },
    #[error("pair selection {selection:#012b} admits no parity-restoring seed subset")]
    ExtensionFailure { selection: u32 },
    #[error("ray {ray} co-occurs with several rays in exactly the same bases: {classes:?}")]
    AmbiguousPairing { ray: u8, classes: Vec<Vec<u8>> },
    #[error("not a basis-critical parity proof")]
    NotCritical,
    #[error("unknown family selector `{0}`")]
    UnknownSelector(String),
    #[error("enumeration budget exceeded: kernel dimension {dimension} > cap {cap}")]
    BudgetExceeded { dimension: usize, cap: usize },
    #[error("malformed input at line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("line {line}: rays {rays:?} are not mutually orthogonal")]
    NotABasis { line: usize, rays: Vec<u8> },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
