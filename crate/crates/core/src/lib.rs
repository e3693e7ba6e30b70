//! Genuine-multipartite-nonlocality witnesses from bipartite chained Bell
//! games played in parallel on network graphs.
//!
//! Numeric code is generic over [`Real`] (`f32`/`f64`); the aliases below fix
//! the scalar to `f64`. Bounds that are integers (the foil bound and the
//! brute-force oracle) can be evaluated exactly with [`ExactBounds`].

pub mod boxworld;
pub mod chained;
pub mod error;
pub mod linalg;
pub mod lp;
pub mod network;
pub mod oracle;
pub mod quantum;
pub mod scalar;

pub use error::{Error, Result};
pub use network::NetworkGraph;
pub use oracle::{ExpressionTable, OracleResult};
pub use quantum::{BellLabel, Plane};
pub use scalar::Real;

pub type DensityMatrix = quantum::DensityMatrix<f64>;
pub type DensityMatrix32 = quantum::DensityMatrix<f32>;
pub type Observable = quantum::Observable<f64>;
pub type NoisyStateParams = quantum::NoisyStateParams<f64>;
pub type ChainedGameSpec = chained::ChainedGameSpec<f64>;
pub type GameBounds = chained::GameBounds<f64>;
pub type GameBounds32 = chained::GameBounds<f32>;
pub type PayoffReport = network::PayoffReport<f64>;
pub type BipartiteBox = boxworld::BipartiteBox<f64>;
pub type NetworkDistribution = boxworld::NetworkDistribution<f64>;
pub type DecompositionCertificate = boxworld::DecompositionCertificate<f64>;

/// Exact rational scalar for integer-valued bounds.
pub type Rational = num_rational::Ratio<i64>;
/// Game bounds over [`Rational`]; `B_Q` is irrational for chained games, so
/// only `local` and `svetlichny` are meaningful here.
pub type ExactBounds = chained::GameBounds<Rational>;

/// `B_L` and `B_S` of the chained game as exact rationals (`B_Q` left at 0).
pub fn chained_exact_bounds(k: usize) -> Result<ExactBounds> {
    let (local, svetlichny) = chained::chained_integer_bounds(k)?;
    Ok(chained::GameBounds {
        local: Rational::from_integer(local),
        svetlichny: Rational::from_integer(svetlichny),
        quantum: Rational::from_integer(0),
        noise: Rational::from_integer(0),
    })
}
