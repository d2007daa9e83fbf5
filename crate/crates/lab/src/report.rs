//! Reports whose verdicts can be recomputed from the numbers they carry.

use std::fs;
use std::path::{Path, PathBuf};

use roughhj::GridFunction;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentSpec;
use crate::LabError;

/// A pass/fail rule together with the numbers it is applied to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Rule {
    AtLeast { value: f64, threshold: f64 },
    AtMost { value: f64, threshold: f64 },
    AllPositive { values: Vec<f64> },
    AllAtMost { values: Vec<f64>, threshold: f64 },
    /// Each entry is at most `ratio` times its predecessor, or at most `floor`.
    Contracting { values: Vec<f64>, ratio: f64, floor: f64 },
    /// A recorded condition with no numbers behind it.
    Holds { value: bool },
}

impl Rule {
    pub fn holds(&self) -> bool {
        match self {
            Rule::AtLeast { value, threshold } => value >= threshold,
            Rule::AtMost { value, threshold } => value <= threshold,
            Rule::AllPositive { values } => !values.is_empty() && values.iter().all(|v| *v > 0.0),
            Rule::AllAtMost { values, threshold } => values.iter().all(|v| v <= threshold),
            Rule::Contracting { values, ratio, floor } => {
                values.len() >= 2 && values.windows(2).all(|w| w[1] <= (ratio * w[0]).max(*floor))
            }
            Rule::Holds { value } => *value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub rule: Rule,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Verdict {
    pub fn new(name: impl Into<String>, rule: Rule) -> Self {
        let pass = rule.holds();
        Self { name: name.into(), rule, pass, note: None }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dx: Option<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub experiment: String,
    /// The fully resolved configuration that produced this report.
    pub config: ExperimentSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theorem_bound: Option<f64>,
    pub measurements: Vec<Measurement>,
    pub verdicts: Vec<Verdict>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    /// Wall-clock seconds per stage; kept out of the JSON so reports are
    /// byte-stable.
    #[serde(skip)]
    pub runtimes: Vec<(String, f64)>,
    #[serde(skip)]
    pub slices: Vec<(String, GridFunction)>,
}

impl Report {
    /// The output directory is dropped from the echoed config so the same
    /// experiment written to two places gives identical bytes.
    pub fn new(mut config: ExperimentSpec) -> Self {
        config.out = None;
        Self {
            experiment: config.experiment.to_string(),
            config,
            theorem_bound: None,
            measurements: Vec::new(),
            verdicts: Vec::new(),
            notes: Vec::new(),
            runtimes: Vec::new(),
            slices: Vec::new(),
        }
    }

    pub fn measure(&mut self, label: impl Into<String>, dx: Option<f64>, value: f64) {
        self.measurements.push(Measurement { label: label.into(), dx, value });
    }

    pub fn verdict(&mut self, v: Verdict) {
        self.verdicts.push(v);
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    /// True when every stored pass flag agrees with its rule.
    pub fn audit(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass == v.rule.holds())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, LabError> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    CsvBundle,
}

impl std::str::FromStr for Format {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self, LabError> {
        match s {
            "json" => Ok(Format::Json),
            "csv_bundle" => Ok(Format::CsvBundle),
            other => Err(LabError::Config(format!("unknown report format '{other}'"))),
        }
    }
}

/// Writes `<experiment>.json`, `<experiment>.timings.json` and, for the
/// bundle format, one `<experiment>_<slice>.csv` per recorded grid slice.
pub fn emit_report(report: &Report, format: Format, dir: &Path) -> Result<Vec<PathBuf>, LabError> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let main = dir.join(format!("{}.json", report.experiment));
    fs::write(&main, report.to_json())?;
    written.push(main);
    let timings: serde_json::Map<String, serde_json::Value> =
        report.runtimes.iter().map(|(k, v)| (k.clone(), serde_json::json!(v))).collect();
    let tpath = dir.join(format!("{}.timings.json", report.experiment));
    fs::write(&tpath, serde_json::to_string_pretty(&timings)? + "\n")?;
    written.push(tpath);
    if format == Format::CsvBundle {
        for (name, slice) in &report.slices {
            let p = dir.join(format!("{}_{}.csv", report.experiment, name));
            fs::write(&p, slice.to_csv_string())?;
            written.push(p);
        }
    }
    Ok(written)
}
