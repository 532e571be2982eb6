//! Fit the built-in reference effective-index table at several polynomial
//! orders and print the fit residual together with n_eff and n_g at the three
//! carrier wavelengths.
//!
//! ```text
//! cargo run --example dispersion_fit
//! ```

use rmzi::dispersion::{tfln_reference_table, FitOptions, ThermoOptic, TFLN_DEFAULT_WIDTHS};

fn main() -> rmzi::Result<()> {
    let table = tfln_reference_table(&TFLN_DEFAULT_WIDTHS, &ThermoOptic::default());
    println!("order  width  max|residual|");
    for order in [3, 4, 5, 6, 7] {
        let model = table.fit(&FitOptions {
            order,
            max_residual: f64::INFINITY,
            ..FitOptions::default()
        })?;
        for w in model.widths() {
            println!("{order:>5}  {w:>5}  {:.3e}", model.width_data(w)?.fit_residual);
        }
    }

    let model = table.fit(&FitOptions::default())?;
    println!("\nwidth  lambda_nm  T_K    n_eff      n_g        FSR(800um)_GHz");
    for w in model.widths() {
        for lambda in [737.0, 1350.0, 1623.0] {
            for t in [300.0, 370.0] {
                println!(
                    "{w:>5}  {lambda:>9}  {t:>5}  {:.6}  {:.6}  {:.3}",
                    model.n_eff(lambda, t, w)?,
                    model.group_index(lambda, t, w)?,
                    model.fsr(lambda, t, w, 800e-6)? * 1e-9
                );
            }
        }
    }
    println!("\nfingerprint {}", model.fingerprint());
    Ok(())
}
