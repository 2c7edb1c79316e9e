//! Write simulated data to headered CSV, read it back by column name and
//! estimate on it.

use nonstat::io::{write_columns, Table};
use nonstat::lrv::KernelSpec;
use nonstat::series::{simulate_predictive_system, LurSpec, SystemSpec};
use nonstat::RngSpec;

fn main() -> nonstat::Result<()> {
    let sys = SystemSpec::scalar(0.0, LurSpec::unit_root(), 0.5);
    let (y, x) = simulate_predictive_system(&sys, 250, RngSpec::new(40, 0))?;
    let mut buf = Vec::new();
    write_columns(&mut buf, "example", &["returns", "dividend_yield"], &[y.values(), x.column(0).values()])?;
    let text = String::from_utf8(buf).expect("utf-8");
    println!("{}", text.lines().take(4).collect::<Vec<_>>().join("\n"));

    let table = Table::read(text.as_bytes())?;
    let dy = table.series(Some("dividend_yield"))?;
    let omega = nonstat::lrv::hac_lrv_scalar(&dy.diff(), &KernelSpec::bartlett_default(dy.len()), true)?;
    println!("columns {:?}; long-run variance of the differenced regressor {omega:.3}", table.names);
    Ok(())
}
