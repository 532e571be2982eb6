//! Regenerate the committed reference dispersion table.
//!
//! ```text
//! cargo run --example generate_default_tables -- [output.csv]
//! ```
//! The default output is `data/tfln_default_dispersion.csv` at the workspace
//! root. The table is a pure function of the built-in Sellmeier reference and
//! the default thermo-optic coefficient, and a test checks the committed copy.

use std::path::PathBuf;

use rmzi::dispersion::{tfln_reference_table, ThermoOptic, TFLN_DEFAULT_WIDTHS};

fn main() -> std::io::Result<()> {
    let path = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/tfln_default_dispersion.csv")
    });
    let table = tfln_reference_table(&TFLN_DEFAULT_WIDTHS, &ThermoOptic::default());
    std::fs::write(&path, table.to_csv())?;
    println!("{} rows -> {}", table.rows().len(), path.display());
    Ok(())
}
