//! Run experiments from config files: a single run with CSV output and a
//! size/power grid. Replications are split across threads without
//! changing results.

use nonstat::mc::{parse_grid, run_experiment, size_power_grid, ExperimentConfig};

fn main() -> nonstat::Result<()> {
    let dir = std::env::temp_dir().join("nonstat-example");
    let mut cfg = ExperimentConfig::parse(include_str!("configs/ivx_size.conf"))?;
    cfg.reps = 200;
    cfg.output = Some(dir.join("ivx_size.csv"));
    let out = run_experiment(&cfg, None)?;
    for b in &out.blocks {
        let j = out.column_index("reject").expect("ivx-null reports reject");
        println!("ivx-null n={}: size {:.3} (mc se {:.3})", b.n, b.summary[j].mean, b.summary[j].mc_se);
    }
    println!("wrote {}", dir.display());

    let mut grid = parse_grid(include_str!("configs/adf_power_grid.conf"))?;
    for c in &mut grid {
        c.reps = 200;
    }
    let table = size_power_grid(&grid, None)?;
    table.write_csv(std::io::stdout().lock())?;

    let built = ExperimentConfig::new("ar1-clt", 2000, 500, 1).with_dgp("phi", 0.9);
    let out = run_experiment(&built, Some(1))?;
    let z = out.summary("z").expect("ar1-clt reports z");
    println!("ar1-clt phi=0.9: mean z {:.3}, var z {:.3}", z.mean, z.variance);
    Ok(())
}
