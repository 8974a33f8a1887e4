use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;
use std::path::Path;
use std::time::Duration;

use serde::ser::Serialize;
use serde::{Deserialize, Serialize as SerializeDerive};
use serde_json::ser::{Formatter, PrettyFormatter};

use super::config::{SuiteConfig, SuiteKind};
use crate::error::{Error, Result};

/// Numeric table attached to a record and written as CSV.
#[derive(Debug, Clone, Default, PartialEq, SerializeDerive, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format!("{v:.16e}")))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Outcome of one suite on one scenario.
#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
pub struct SuiteRecord {
    pub suite: SuiteKind,
    pub scenario: String,
    pub inequality: String,
    pub checked: usize,
    pub violations: usize,
    /// Largest `(lhs - rhs) / scale` over the checks of `lhs <= rhs`.
    #[serde(with = "nonfinite::option")]
    pub worst_slack: Option<f64>,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, with = "nonfinite::map")]
    pub metrics: BTreeMap<String, f64>,
    #[serde(skip)]
    pub table: Option<Table>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl SuiteRecord {
    pub fn failed(suite: SuiteKind, scenario: &str, error: &Error) -> Self {
        SuiteRecord {
            suite,
            scenario: scenario.to_string(),
            inequality: suite.inequality().to_string(),
            checked: 0,
            violations: 0,
            worst_slack: None,
            pass: false,
            error: Some(error.to_string()),
            metrics: BTreeMap::new(),
            table: None,
            elapsed: Duration::ZERO,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, SerializeDerive, Deserialize)]
pub struct Environment {
    pub package: String,
    pub version: String,
    pub os: String,
    pub arch: String,
}

impl Environment {
    pub fn current() -> Self {
        Environment {
            package: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            os: std::env::consts::OS.into(),
            arch: std::env::consts::ARCH.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
pub struct Report {
    pub pass: bool,
    pub environment: Environment,
    pub config: SuiteConfig,
    pub records: Vec<SuiteRecord>,
}

impl Report {
    pub fn new(config: SuiteConfig, records: Vec<SuiteRecord>) -> Self {
        let pass = records.iter().all(|r| r.pass);
        Report { pass, environment: Environment::current(), config, records }
    }

    pub fn record(&self, suite: SuiteKind, scenario: &str) -> Option<&SuiteRecord> {
        self.records.iter().find(|r| r.suite == suite && r.scenario == scenario)
    }

    /// Pretty JSON with every float written with 17 significant digits.
    pub fn to_json(&self) -> Result<String> {
        to_json(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::from(
            "| suite | scenario | checked | violations | worst slack | pass |\n|---|---|---|---|---|---|\n",
        );
        for r in &self.records {
            let slack = r.worst_slack.map_or_else(|| "n/a".into(), |v| format!("{v:.3e}"));
            let pass = match (&r.error, r.pass) {
                (Some(e), _) => format!("error: {}", e.replace('|', "/")),
                (None, true) => "yes".into(),
                (None, false) => "no".into(),
            };
            let _ = writeln!(
                s,
                "| {} | {} | {} | {} | {} | {} |",
                r.suite,
                r.scenario.replace('|', "\\|"),
                r.checked,
                r.violations,
                slack,
                pass
            );
        }
        s
    }

    /// One CSV row per record.
    pub fn summary_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.records {
            w.serialize(SummaryRow::from(r))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv writes UTF-8"))
    }
}

/// Floats that may be `NaN` or infinite, written as the strings `"NaN"`,
/// `"inf"` and `"-inf"` so that reports read back unchanged.
mod nonfinite {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    impl Repr {
        fn from(v: f64) -> Self {
            match v {
                v if v.is_finite() => Repr::Num(v),
                v if v.is_nan() => Repr::Text("NaN".into()),
                v if v > 0.0 => Repr::Text("inf".into()),
                _ => Repr::Text("-inf".into()),
            }
        }

        fn value<E: serde::de::Error>(self) -> Result<f64, E> {
            match self {
                Repr::Num(v) => Ok(v),
                Repr::Text(t) => match t.as_str() {
                    "NaN" => Ok(f64::NAN),
                    "inf" => Ok(f64::INFINITY),
                    "-inf" => Ok(f64::NEG_INFINITY),
                    _ => Err(E::custom(format!("not a number: {t}"))),
                },
            }
        }
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
            v.map(Repr::from).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
            Option::<Repr>::deserialize(d)?.map(Repr::value).transpose()
        }
    }

    pub mod map {
        use super::*;

        pub fn serialize<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
            s.collect_map(m.iter().map(|(k, v)| (k, Repr::from(*v))))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, f64>, D::Error> {
            BTreeMap::<String, Repr>::deserialize(d)?.into_iter().map(|(k, v)| Ok((k, v.value()?))).collect()
        }
    }
}

/// Row of `tables/summary.csv`.
#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
pub struct SummaryRow {
    pub suite: SuiteKind,
    pub scenario: String,
    pub checked: usize,
    pub violations: usize,
    pub worst_slack: Option<f64>,
    pub pass: bool,
    pub error: Option<String>,
}

impl From<&SuiteRecord> for SummaryRow {
    fn from(r: &SuiteRecord) -> Self {
        SummaryRow {
            suite: r.suite,
            scenario: r.scenario.clone(),
            checked: r.checked,
            violations: r.violations,
            worst_slack: r.worst_slack,
            pass: r.pass,
            error: r.error.clone(),
        }
    }
}

/// Pretty JSON with floats written as `{:.16e}`; non-finite floats become `null`.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FloatFormatter::default());
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Markdown,
}

/// Writes `report.json`, `report.md`, `tables/summary.csv`, one table per
/// record that has one, and `tables/timing.csv` under `dir`.
pub fn emit_report(report: &Report, dir: impl AsRef<Path>, formats: &[Format]) -> Result<()> {
    let dir = dir.as_ref();
    let tables = dir.join("tables");
    std::fs::create_dir_all(&tables)?;
    for f in formats {
        match f {
            Format::Json => std::fs::write(dir.join("report.json"), report.to_json()?)?,
            Format::Markdown => std::fs::write(dir.join("report.md"), report.to_markdown())?,
            Format::Csv => {
                std::fs::write(tables.join("summary.csv"), report.summary_csv()?)?;
                for r in &report.records {
                    if let Some(t) = &r.table {
                        t.write_csv(tables.join(format!("{}_{}.csv", r.suite, sanitize(&r.scenario))))?;
                    }
                }
                let mut w = csv::Writer::from_path(tables.join("timing.csv"))?;
                w.write_record(["suite", "scenario", "seconds"])?;
                for r in &report.records {
                    w.write_record([r.suite.name(), &r.scenario, &format!("{:.6}", r.elapsed.as_secs_f64())])?;
                }
                w.flush()?;
            }
        }
    }
    Ok(())
}

fn sanitize(id: &str) -> String {
    id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

/// Pretty printing with `{:.16e}` floats.
#[derive(Default)]
struct FloatFormatter {
    inner: PrettyFormatter<'static>,
}

impl Formatter for FloatFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{v:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(v))
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = SuiteRecord::failed(SuiteKind::Young, "a|b", &Error::DegenerateSample);
        r.error = None;
        r.pass = true;
        r.checked = 3;
        r.worst_slack = Some(-1.0 / 3.0);
        r.metrics.insert("x".into(), 0.1);
        Report::new(SuiteConfig { scenarios: vec![], ..SuiteConfig::default() }, vec![r])
    }

    #[test]
    fn json_round_trip_with_full_precision() {
        let rep = sample();
        let text = rep.to_json().unwrap();
        assert!(text.contains("-3.3333333333333331e-1"), "{text}");
        let back = Report::from_json(&text).unwrap();
        assert_eq!(back.records[0].worst_slack, Some(-1.0 / 3.0));
        assert_eq!(back.to_json().unwrap(), text);
    }

    #[test]
    fn non_finite_values_survive_json() {
        let mut rep = sample();
        rep.records[0].worst_slack = Some(f64::INFINITY);
        rep.records[0].metrics.insert("order".into(), f64::NAN);
        rep.records[0].metrics.insert("low".into(), f64::NEG_INFINITY);
        let back = Report::from_json(&rep.to_json().unwrap()).unwrap();
        let r = &back.records[0];
        assert_eq!(r.worst_slack, Some(f64::INFINITY));
        assert!(r.metrics["order"].is_nan());
        assert_eq!(r.metrics["low"], f64::NEG_INFINITY);
        assert_eq!(r.metrics["x"], 0.1);
    }

    #[test]
    fn csv_summary_round_trips() {
        let rep = sample();
        let text = rep.summary_csv().unwrap();
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        let rows: Vec<SummaryRow> = rd.deserialize().collect::<std::result::Result<_, _>>().unwrap();
        assert_eq!(rows, vec![SummaryRow::from(&rep.records[0])]);
    }

    #[test]
    fn markdown_has_one_row_per_record() {
        let md = sample().to_markdown();
        assert_eq!(md.lines().count(), 3);
        assert!(md.contains("| young | a\\|b | 3 | 0 |"), "{md}");
    }
}
