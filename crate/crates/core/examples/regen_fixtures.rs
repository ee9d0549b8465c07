//! Rewrites fixtures/portfolio_returns.csv and fixtures/portfolio.json.

use ansatz_forge::problems::fixtures::{
    portfolio_from_returns, returns_to_csv, synthetic_returns, PORTFOLIO_ASSETS,
    PORTFOLIO_PERIODS, PORTFOLIO_SEED,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let series = synthetic_returns(PORTFOLIO_SEED, PORTFOLIO_ASSETS, PORTFOLIO_PERIODS);
    std::fs::write(dir.join("portfolio_returns.csv"), returns_to_csv(&series))?;
    let mut json = portfolio_from_returns(&series)?.to_json();
    json.push('\n');
    std::fs::write(dir.join("portfolio.json"), json)?;
    Ok(())
}
