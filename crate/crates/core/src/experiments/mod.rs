//! Statistical and numerical checks, each producing an [`ExperimentReport`].
//!
//! Every experiment takes a serde config whose defaults are the acceptance
//! settings. Replicates run in parallel on per-replicate RNG streams and are
//! collected in replicate order, so a report depends only on its config.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::rng::{LabRng, RngState, ALGORITHM};
use crate::sampler::laws::{OffspringLaws, TruncationInfo};

pub mod convolution;
pub mod maps;
pub mod walks;

pub use maps::{
    contour_label_scaling, one_point_law_cross_check, rerooting_invariance_check, vertex_count_check,
    ContourLabelConfig, OnePointConfig, RerootingConfig, VertexCountConfig,
};
pub use walks::{
    kemperman_check, ladder_height_check, local_limit_check, moderate_deviation_check, phi_density_check,
    population_asymptotics_check, KempermanConfig, LadderConfig, LocalLimitConfig, ModerateDeviationConfig,
    PhiDensityConfig, PopulationConfig,
};

/// Names accepted by [`run_named`].
pub const EXPERIMENTS: [&str; 10] = [
    "kemperman",
    "ladder_height",
    "local_limit",
    "population_asymptotics",
    "phi_density",
    "moderate_deviation",
    "contour_label_scaling",
    "one_point_law",
    "rerooting_invariance",
    "vertex_count",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    AtMost,
    AtLeast,
}

/// One thresholded verdict.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub relation: Relation,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReplicateRow {
    pub replicate: usize,
    pub statistic: String,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub name: String,
    /// Size parameter used in output file names.
    pub n: usize,
    pub seed: u64,
    pub rng_algorithm: String,
    pub config: Value,
    pub truncation: TruncationInfo,
    pub statistics: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub passed: bool,
    #[serde(skip)]
    pub replicates: Vec<ReplicateRow>,
    pub replicate_csv: Option<String>,
}

impl ExperimentReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn statistic(&self, name: &str) -> Option<f64> {
        self.statistics.get(name).copied()
    }

    pub fn file_stem(&self) -> String {
        format!("{}_n{}_seed{}", self.name, self.n, self.seed)
    }

    pub fn write_replicates_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "replicate,statistic,value")?;
        for r in &self.replicates {
            writeln!(w, "{},{},{}", r.replicate, r.statistic, r.value)?;
        }
        Ok(())
    }

    /// Writes `<stem>.json` and, when there are replicate rows, `<stem>.csv`.
    pub fn write_to_dir(&mut self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let stem = self.file_stem();
        let mut written = Vec::new();
        if !self.replicates.is_empty() {
            let path = dir.join(format!("{stem}.csv"));
            let mut w = BufWriter::new(File::create(&path)?);
            self.write_replicates_csv(&mut w)?;
            w.flush()?;
            self.replicate_csv = Some(format!("{stem}.csv"));
            written.push(path);
        }
        let path = dir.join(format!("{stem}.json"));
        let mut w = BufWriter::new(File::create(&path)?);
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w)?;
        w.flush()?;
        written.push(path);
        Ok(written)
    }

    /// One line per check.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let op = match c.relation {
                Relation::AtMost => "<=",
                Relation::AtLeast => ">=",
            };
            s.push_str(&format!(
                "{} {}: {} = {:.6e} {} {:.6e}\n",
                if c.passed { "PASS" } else { "FAIL" },
                self.name,
                c.name,
                c.value,
                op,
                c.threshold
            ));
        }
        s
    }
}

pub(crate) struct ReportBuilder {
    report: ExperimentReport,
}

impl ReportBuilder {
    pub fn new<C: Serialize>(name: &str, n: usize, seed: u64, config: &C, laws: &OffspringLaws) -> Self {
        ReportBuilder {
            report: ExperimentReport {
                name: name.to_string(),
                n,
                seed,
                rng_algorithm: ALGORITHM.to_string(),
                config: serde_json::to_value(config).unwrap_or(Value::Null),
                truncation: laws.info(),
                statistics: BTreeMap::new(),
                checks: Vec::new(),
                passed: true,
                replicates: Vec::new(),
                replicate_csv: None,
            },
        }
    }

    pub fn stat(&mut self, name: impl Into<String>, value: f64) {
        self.report.statistics.insert(name.into(), value);
    }

    fn push(&mut self, name: impl Into<String>, value: f64, threshold: f64, relation: Relation) {
        let passed = match relation {
            Relation::AtMost => value <= threshold,
            Relation::AtLeast => value >= threshold,
        };
        self.report.checks.push(Check { name: name.into(), value, threshold, relation, passed });
    }

    pub fn at_most(&mut self, name: impl Into<String>, value: f64, threshold: f64) {
        self.push(name, value, threshold, Relation::AtMost);
    }

    pub fn at_least(&mut self, name: impl Into<String>, value: f64, threshold: f64) {
        self.push(name, value, threshold, Relation::AtLeast);
    }

    /// Zero-tolerance count check.
    pub fn zero(&mut self, name: impl Into<String>, count: usize) {
        self.push(name, count as f64, 0.0, Relation::AtMost);
    }

    /// `values` strictly decreasing.
    pub fn decreasing(&mut self, name: impl Into<String>, values: &[f64]) {
        let bad = values.windows(2).filter(|w| w[1] >= w[0]).count();
        self.zero(name, bad);
    }

    pub fn rows(&mut self, statistic: &str, values: &[f64]) {
        self.report.replicates.extend(values.iter().enumerate().map(|(i, &v)| ReplicateRow {
            replicate: i,
            statistic: statistic.to_string(),
            value: v,
        }));
    }

    pub fn finish(mut self) -> ExperimentReport {
        self.report.passed = self.report.checks.iter().all(|c| c.passed);
        self.report
    }
}

/// Runs `f` once per replicate on stream `tag << 32 | i`, collecting in order.
pub(crate) fn replicates<T, F>(seed: u64, tag: u64, count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &mut LabRng) -> Result<T> + Sync,
{
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngState::new(seed).with_stream((tag << 32) | i as u64).rng();
            f(i, &mut rng)
        })
        .collect()
}

/// Parses a config, filling missing fields with their defaults.
pub fn parse_config<C: DeserializeOwned + Default>(value: Option<&Value>) -> Result<C> {
    match value {
        None => Ok(C::default()),
        Some(v) => serde_json::from_value(v.clone()).map_err(|e| Error::InvalidConfig(e.to_string())),
    }
}

fn resolve<C: DeserializeOwned + Default + Serialize>(value: Option<&Value>) -> Result<(C, Value)> {
    let c: C = parse_config(value)?;
    let v = serde_json::to_value(&c)?;
    Ok((c, v))
}

/// Resolved config (defaults filled in) of experiment `name`.
pub fn resolved_config(name: &str, config: Option<&Value>) -> Result<Value> {
    Ok(match name {
        "kemperman" => resolve::<KempermanConfig>(config)?.1,
        "ladder_height" => resolve::<LadderConfig>(config)?.1,
        "local_limit" => resolve::<LocalLimitConfig>(config)?.1,
        "population_asymptotics" => resolve::<PopulationConfig>(config)?.1,
        "phi_density" => resolve::<PhiDensityConfig>(config)?.1,
        "moderate_deviation" => resolve::<ModerateDeviationConfig>(config)?.1,
        "contour_label_scaling" => resolve::<ContourLabelConfig>(config)?.1,
        "one_point_law" => resolve::<OnePointConfig>(config)?.1,
        "rerooting_invariance" => resolve::<RerootingConfig>(config)?.1,
        "vertex_count" => resolve::<VertexCountConfig>(config)?.1,
        other => return Err(Error::UnknownExperiment(other.to_string())),
    })
}

/// Runs experiment `name` with a JSON config; missing fields take defaults.
pub fn run_named(name: &str, config: Option<&Value>) -> Result<ExperimentReport> {
    match name {
        "kemperman" => kemperman_check(&parse_config(config)?),
        "ladder_height" => ladder_height_check(&parse_config(config)?),
        "local_limit" => local_limit_check(&parse_config(config)?),
        "population_asymptotics" => population_asymptotics_check(&parse_config(config)?),
        "phi_density" => phi_density_check(&parse_config(config)?),
        "moderate_deviation" => moderate_deviation_check(&parse_config(config)?),
        "contour_label_scaling" => contour_label_scaling(&parse_config(config)?),
        "one_point_law" => one_point_law_cross_check(&parse_config(config)?),
        "rerooting_invariance" => rerooting_invariance_check(&parse_config(config)?),
        "vertex_count" => vertex_count_check(&parse_config(config)?),
        other => Err(Error::UnknownExperiment(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builder_verdicts() {
        let laws = OffspringLaws::default();
        let mut b = ReportBuilder::new("demo", 3, 9, &serde_json::json!({"n": 3}), &laws);
        b.at_most("small", 0.01, 0.02);
        b.at_least("large", 0.5, 0.6);
        b.decreasing("trend", &[3.0, 2.0, 1.0]);
        b.rows("x", &[1.0, 2.0]);
        let r = b.finish();
        assert!(!r.passed);
        assert!(r.check("small").unwrap().passed);
        assert!(!r.check("large").unwrap().passed);
        assert!(r.check("trend").unwrap().passed);
        assert_eq!(r.file_stem(), "demo_n3_seed9");
        let mut buf = Vec::new();
        r.write_replicates_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "replicate,statistic,value\n0,x,1\n1,x,2\n");
    }

    #[test]
    fn unknown_names_and_fields() {
        assert!(matches!(run_named("nope", None), Err(Error::UnknownExperiment(_))));
        let bad = serde_json::json!({"m_max": 5, "bogus": 1});
        assert!(matches!(resolved_config("kemperman", Some(&bad)), Err(Error::InvalidConfig(_))));
        for name in EXPERIMENTS {
            assert!(resolved_config(name, None).unwrap().is_object());
        }
    }

    #[test]
    fn replicates_are_ordered_and_reproducible() {
        use rand::Rng;
        let a = replicates(5, 1, 20, |i, rng| Ok((i, rng.random::<u64>()))).unwrap();
        let b = replicates(5, 1, 20, |i, rng| Ok((i, rng.random::<u64>()))).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().enumerate().all(|(i, x)| x.0 == i));
    }
}
