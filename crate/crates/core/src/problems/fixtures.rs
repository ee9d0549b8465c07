//! Bundled benchmark instances.
//!
//! The portfolio instance is derived from `portfolio_returns.csv`, a seeded
//! synthetic return series produced by [`synthetic_returns`]. Regenerate the
//! CSV and JSON with `cargo run -p ansatz-forge --example regen_fixtures`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{PortfolioSpec, ProblemError, ProblemFile, ProblemSpec};

pub const PORTFOLIO_JSON: &str = include_str!("../../fixtures/portfolio.json");
pub const PORTFOLIO_RETURNS_CSV: &str = include_str!("../../fixtures/portfolio_returns.csv");
pub const MAXCUT_JSON: &str = include_str!("../../fixtures/maxcut5.json");
pub const TSP_JSON: &str = include_str!("../../fixtures/tsp3.json");
pub const H2_JSON: &str = include_str!("../../fixtures/h2.json");
pub const HUBBARD_JSON: &str = include_str!("../../fixtures/hubbard_dimer.json");
/// Two-term Hamiltonian file used by the CLI `exact` example.
pub const TWO_TERM_HAMILTONIAN: &str = include_str!("../../fixtures/two_term.txt");

pub const PORTFOLIO_SEED: u64 = 20_240_117;
pub const PORTFOLIO_ASSETS: usize = 4;
pub const PORTFOLIO_PERIODS: usize = 60;
pub const PORTFOLIO_RISK_FACTOR: f64 = 0.5;
pub const PORTFOLIO_BUDGET: usize = 2;
pub const PORTFOLIO_PENALTY: f64 = 4.0;

fn load(text: &str) -> ProblemFile {
    ProblemFile::from_json(text).expect("bundled fixture parses")
}

pub fn portfolio() -> ProblemFile {
    load(PORTFOLIO_JSON)
}

pub fn maxcut() -> ProblemFile {
    load(MAXCUT_JSON)
}

pub fn tsp() -> ProblemFile {
    load(TSP_JSON)
}

pub fn h2() -> ProblemFile {
    load(H2_JSON)
}

pub fn hubbard_dimer() -> ProblemFile {
    load(HUBBARD_JSON)
}

/// The three QUBO benchmarks in table order.
pub fn qubo_benchmarks() -> Vec<ProblemFile> {
    vec![portfolio(), maxcut(), tsp()]
}

/// Daily-scale returns from a one-factor model: each asset gets its own
/// drift and market beta plus idiosyncratic noise. Rows are periods.
pub fn synthetic_returns(seed: u64, n_assets: usize, periods: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let drift: Vec<f64> = (0..n_assets).map(|_| 0.01 * unit.sample(&mut rng)).collect();
    let beta: Vec<f64> = (0..n_assets).map(|_| 0.8 + 0.4 * unit.sample(&mut rng).abs()).collect();
    let vol: Vec<f64> = (0..n_assets).map(|_| 0.02 + 0.02 * unit.sample(&mut rng).abs()).collect();
    (0..periods)
        .map(|_| {
            let market = 0.015 * unit.sample(&mut rng);
            (0..n_assets)
                .map(|a| drift[a] + beta[a] * market + vol[a] * unit.sample(&mut rng))
                .collect()
        })
        .collect()
}

pub fn returns_to_csv(series: &[Vec<f64>]) -> String {
    let n = series.first().map_or(0, Vec::len);
    let mut out = (0..n).map(|a| format!("asset{a}")).collect::<Vec<_>>().join(",");
    out.push('\n');
    for row in series {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_returns_csv(text: &str) -> Result<Vec<Vec<f64>>, ProblemError> {
    text.lines()
        .enumerate()
        .skip(1)
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(idx, line)| {
            line.split(',')
                .map(|cell| {
                    cell.trim().parse::<f64>().map_err(|_| ProblemError::Parse {
                        line: idx + 1,
                        message: format!("bad return `{cell}`"),
                    })
                })
                .collect()
        })
        .collect()
}

/// The portfolio problem file as derived from the shipped return series.
pub fn portfolio_from_returns(series: &[Vec<f64>]) -> Result<ProblemFile, ProblemError> {
    let spec = PortfolioSpec::from_returns(
        series,
        PORTFOLIO_RISK_FACTOR,
        PORTFOLIO_BUDGET,
        PORTFOLIO_PENALTY,
    )?;
    Ok(ProblemFile { name: Some("portfolio".into()), spec: ProblemSpec::Portfolio(spec) })
}
