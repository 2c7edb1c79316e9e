use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::experiments::prepare;
use crate::error::{Error, Result};
use crate::stats;

/// Quantile levels reported in summaries.
pub const SUMMARY_PROBS: [f64; 5] = [0.01, 0.05, 0.5, 0.95, 0.99];

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnSummary {
    pub column: String,
    pub mean: f64,
    /// Divisor `reps - 1`; NaN for a single replication.
    pub variance: f64,
    /// `sqrt(variance / reps)`.
    pub mc_se: f64,
    pub quantiles: Vec<f64>,
}

/// Replications at one sample size.
#[derive(Debug, Clone, PartialEq)]
pub struct RunBlock {
    pub n: usize,
    pub rows: Vec<Vec<f64>>,
    pub summary: Vec<ColumnSummary>,
}

impl RunBlock {
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub experiment: String,
    pub columns: Vec<String>,
    pub blocks: Vec<RunBlock>,
}

impl ExperimentOutput {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Replications of column `name` at the first sample size.
    pub fn values(&self, name: &str) -> Option<Vec<f64>> {
        self.column_index(name).map(|j| self.blocks[0].column(j))
    }

    /// Summary of column `name` at the first sample size.
    pub fn summary(&self, name: &str) -> Option<&ColumnSummary> {
        self.column_index(name).map(|j| &self.blocks[0].summary[j])
    }

    /// Mean of the `reject` indicator at the first sample size.
    pub fn rejection_rate(&self) -> Option<f64> {
        self.summary("reject").map(|s| s.mean)
    }

    pub fn write_replications<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "#schema={}/v1", self.experiment)?;
        writeln!(w, "n,rep,{}", self.columns.join(","))?;
        for b in &self.blocks {
            for (r, row) in b.rows.iter().enumerate() {
                write!(w, "{},{r}", b.n)?;
                for v in row {
                    write!(w, ",{v}")?;
                }
                writeln!(w)?;
            }
        }
        Ok(())
    }

    pub fn write_summary<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "#schema={}-summary/v1", self.experiment)?;
        write!(w, "n,column,mean,variance,mc_se")?;
        for p in SUMMARY_PROBS {
            write!(w, ",q{p}")?;
        }
        writeln!(w)?;
        for b in &self.blocks {
            for s in &b.summary {
                write!(w, "{},{},{},{},{}", b.n, s.column, s.mean, s.variance, s.mc_se)?;
                for q in &s.quantiles {
                    write!(w, ",{q}")?;
                }
                writeln!(w)?;
            }
        }
        Ok(())
    }

    /// Write `path` and `<stem>.summary.csv` beside it.
    pub fn write_files(&self, path: &Path) -> Result<(PathBuf, PathBuf)> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let summary = summary_path(path);
        let mut f = BufWriter::new(File::create(path)?);
        self.write_replications(&mut f)?;
        f.flush()?;
        let mut f = BufWriter::new(File::create(&summary)?);
        self.write_summary(&mut f)?;
        f.flush()?;
        Ok((path.to_path_buf(), summary))
    }
}

/// `dir/name.csv -> dir/name.summary.csv`.
pub fn summary_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.summary.csv"))
}

/// Summaries of each column of `rows`.
pub fn summarize(columns: &[String], rows: &[Vec<f64>]) -> Vec<ColumnSummary> {
    columns
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let x: Vec<f64> = rows.iter().map(|r| r[j]).collect();
            let reps = x.len() as f64;
            let variance = if x.len() > 1 { stats::variance(&x) } else { f64::NAN };
            let mut s = x.clone();
            s.sort_by(f64::total_cmp);
            ColumnSummary {
                column: name.clone(),
                mean: stats::mean(&x),
                variance,
                mc_se: (variance / reps).sqrt(),
                quantiles: SUMMARY_PROBS.iter().map(|p| stats::quantile_sorted(&s, *p)).collect(),
            }
        })
        .collect()
}

/// Read back a replication CSV as `(columns, [(n, rows)])`.
pub fn read_replications(text: &str) -> Result<(Vec<String>, Vec<(usize, Vec<Vec<f64>>)>)> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = rdr.headers()?.clone();
    if header.len() < 2 || &header[0] != "n" || &header[1] != "rep" {
        return Err(Error::Parse("expected `n,rep,...` header".into()));
    }
    let columns: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
    let mut blocks: Vec<(usize, Vec<Vec<f64>>)> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let n: usize = rec[0].parse().map_err(|_| Error::Parse(format!("bad n `{}`", &rec[0])))?;
        let row = rec
            .iter()
            .skip(2)
            .map(|v| v.parse::<f64>().map_err(|_| Error::Parse(format!("bad value `{v}`"))))
            .collect::<Result<Vec<_>>>()?;
        match blocks.last_mut() {
            Some((bn, rows)) if *bn == n => rows.push(row),
            _ => blocks.push((n, vec![row])),
        }
    }
    Ok((columns, blocks))
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j.max(1))
                .build()
                .map_err(|e| Error::Io(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Run every replication without touching the filesystem. Replication
/// `r` draws from stream `seed.stream + r`, so the result does not depend
/// on `jobs`.
pub fn simulate_experiment(config: &ExperimentConfig, jobs: Option<usize>) -> Result<ExperimentOutput> {
    config.validate()?;
    let mut columns = Vec::new();
    let mut blocks = Vec::new();
    for &n in &config.n {
        let prep = prepare(config, n)?;
        columns = prep.columns.iter().map(|c| c.to_string()).collect();
        let rows: Vec<Vec<f64>> = with_pool(jobs, || {
            (0..config.reps)
                .into_par_iter()
                .map(|r| (prep.run)(config.seed.offset(r as u64)))
                .collect::<Result<Vec<_>>>()
        })??;
        let summary = summarize(&columns, &rows);
        blocks.push(RunBlock { n, rows, summary });
    }
    Ok(ExperimentOutput { experiment: config.experiment.clone(), columns, blocks })
}

/// [`simulate_experiment`], then write the replication and summary CSVs
/// when the config names an output path.
pub fn run_experiment(config: &ExperimentConfig, jobs: Option<usize>) -> Result<ExperimentOutput> {
    let out = simulate_experiment(config, jobs)?;
    if let Some(path) = &config.output {
        out.write_files(path)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub label: String,
    pub experiment: String,
    pub n: usize,
    pub column: String,
    pub value: f64,
    pub mc_se: f64,
    pub reps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridTable {
    pub rows: Vec<GridRow>,
}

impl GridTable {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "#schema=grid/v1")?;
        writeln!(w, "label,experiment,n,column,value,mc_se,reps")?;
        for r in &self.rows {
            writeln!(w, "{},{},{},{},{},{},{}", r.label, r.experiment, r.n, r.column, r.value, r.mc_se, r.reps)?;
        }
        Ok(())
    }
}

fn report_column(cfg: &ExperimentConfig, columns: &[String]) -> Result<String> {
    if let Some(c) = &cfg.report {
        if !columns.contains(c) {
            return Err(Error::config("report", format!("`{}` has no column `{c}`", cfg.experiment)));
        }
        return Ok(c.clone());
    }
    ["reject", "mse"]
        .iter()
        .find(|c| columns.iter().any(|x| x == *c))
        .map(|c| c.to_string())
        .ok_or_else(|| Error::config("report", format!("`{}` needs an explicit report column", cfg.experiment)))
}

/// One row per `(config, n)` holding the MC mean of the reported column
/// (a rejection rate or a forecast MSE) and its standard error. Every
/// config must report the same column.
pub fn size_power_grid(configs: &[ExperimentConfig], jobs: Option<usize>) -> Result<GridTable> {
    if configs.is_empty() {
        return Err(Error::config("grid", "no configurations"));
    }
    let mut rows = Vec::new();
    let mut reported: Option<String> = None;
    for cfg in configs {
        let out = simulate_experiment(cfg, jobs)?;
        let col = report_column(cfg, &out.columns)?;
        match &reported {
            Some(r) if *r != col => {
                return Err(Error::config("report", format!("grid mixes `{r}` and `{col}`")));
            }
            _ => reported = Some(col.clone()),
        }
        let j = out.column_index(&col).expect("checked above");
        for b in &out.blocks {
            let s = &b.summary[j];
            rows.push(GridRow {
                label: cfg.label.clone(),
                experiment: cfg.experiment.clone(),
                n: b.n,
                column: col.clone(),
                value: s.mean,
                mc_se: s.mc_se,
                reps: b.rows.len(),
            });
        }
    }
    Ok(GridTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_rep_gives_one_row() {
        let cfg = ExperimentConfig::new("ar1-clt", 50, 1, 3);
        let out = simulate_experiment(&cfg, None).unwrap();
        assert_eq!(out.blocks[0].rows.len(), 1);
        assert!(out.summary("z").unwrap().variance.is_nan());
    }

    #[test]
    fn unknown_names_are_config_errors() {
        let e = simulate_experiment(&ExperimentConfig::new("nope", 50, 1, 0), None).unwrap_err();
        assert!(matches!(e, Error::Config { ref key, .. } if key == "experiment"));
        let cfg = ExperimentConfig::new("ar1-clt", 50, 1, 0).with_method("kernel", "bartlett");
        let e = simulate_experiment(&cfg, None).unwrap_err();
        assert!(matches!(e, Error::Config { ref key, .. } if key == "method.kernel"));
        let cfg = ExperimentConfig::new("lrv-ar1", 50, 1, 0).with_method("kernel", "gauss");
        assert!(matches!(simulate_experiment(&cfg, None), Err(Error::Config { .. })));
    }

    #[test]
    fn grid_rejects_empty_and_mixed() {
        assert!(matches!(size_power_grid(&[], None), Err(Error::Config { .. })));
        let a = ExperimentConfig::new("ivx-null", 60, 3, 0);
        let b = ExperimentConfig::new("forecast-mse", 60, 3, 0);
        assert!(matches!(size_power_grid(&[a, b], None), Err(Error::Config { ref key, .. }) if key == "report"));
    }
}
