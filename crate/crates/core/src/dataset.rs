//! Loading labelled tables (CSV or ARFF) into a schema and an ordered
//! instance sequence, and writing them back as CSV.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schema::{Attribute, AttributeKind, ClassAttribute, Schema, Value};
use crate::stream::Instance;

pub const DEFAULT_MISSING: &str = "?";

/// Column names of the UCI census-income files, class last.
pub const CENSUS_COLUMNS: [&str; 15] = [
    "age",
    "workclass",
    "fnlwgt",
    "education",
    "education-num",
    "marital-status",
    "occupation",
    "relationship",
    "race",
    "sex",
    "capital-gain",
    "capital-loss",
    "hours-per-week",
    "native-country",
    "income",
];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Arff,
}

impl Format {
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("arff") => Format::Arff,
            _ => Format::Csv,
        }
    }
}

/// Where a table lives and how its columns map onto a [`Schema`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetDescriptor {
    /// Files are read in order and concatenated.
    pub paths: Vec<PathBuf>,
    #[serde(default)]
    pub format: Format,
    /// Column names for headerless CSV; `None` means the first row is a header.
    #[serde(default)]
    pub columns: Option<Vec<String>>,
    pub sensitive: String,
    pub deprived: String,
    pub class: String,
    pub granted: String,
    /// Inferred as the other observed class value when absent.
    #[serde(default)]
    pub rejected: Option<String>,
    #[serde(default = "default_missing")]
    pub missing: String,
    /// Lines starting with this character are skipped (CSV only).
    #[serde(default)]
    pub comment: Option<char>,
    /// Drop one trailing '.' from class values.
    #[serde(default)]
    pub strip_class_period: bool,
    /// Declared feature attributes; unknown categorical values are then errors.
    #[serde(default)]
    pub attributes: Option<Vec<Attribute>>,
}

fn default_missing() -> String {
    DEFAULT_MISSING.to_string()
}

impl DatasetDescriptor {
    /// Headered CSV with the given sensitive and class columns.
    pub fn csv(path: impl Into<PathBuf>, sensitive: &str, deprived: &str, class: &str, granted: &str) -> Self {
        DatasetDescriptor {
            paths: vec![path.into()],
            format: Format::Csv,
            columns: None,
            sensitive: sensitive.into(),
            deprived: deprived.into(),
            class: class.into(),
            granted: granted.into(),
            rejected: None,
            missing: default_missing(),
            comment: None,
            strip_class_period: false,
            attributes: None,
        }
    }

    /// `adult.data` followed by `adult.test` from `dir`; sex is the sensitive
    /// attribute with "Female" deprived, income ">50K" is granted.
    pub fn census(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref();
        DatasetDescriptor {
            paths: vec![dir.join("adult.data"), dir.join("adult.test")],
            format: Format::Csv,
            columns: Some(CENSUS_COLUMNS.iter().map(|c| c.to_string()).collect()),
            sensitive: "sex".into(),
            deprived: "Female".into(),
            class: "income".into(),
            granted: ">50K".into(),
            rejected: Some("<=50K".into()),
            missing: default_missing(),
            comment: Some('|'),
            strip_class_period: true,
            attributes: None,
        }
    }

    /// Descriptor for a stream written by the synthetic generator.
    pub fn synthetic(path: impl Into<PathBuf>) -> Self {
        use crate::generator::{CLASS_NAME, DEPRIVED, GRANTED, REJECTED, SA_NAME};
        let mut d = DatasetDescriptor::csv(path, SA_NAME, DEPRIVED, CLASS_NAME, GRANTED);
        d.rejected = Some(REJECTED.into());
        d
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub schema: Schema,
    pub instances: Vec<Instance>,
}

/// One data row with its origin.
struct RawRow {
    file: usize,
    line: usize,
    fields: Vec<String>,
}

struct RawTable {
    columns: Vec<String>,
    /// Attributes declared by the file itself (ARFF header).
    declared: Option<Vec<Attribute>>,
    rows: Vec<RawRow>,
}

pub fn load_dataset(desc: &DatasetDescriptor) -> Result<Dataset> {
    if desc.paths.is_empty() {
        return Err(Error::Config("dataset descriptor lists no files".into()));
    }
    let mut table: Option<RawTable> = None;
    for (file, path) in desc.paths.iter().enumerate() {
        let part = match desc.format {
            Format::Csv => read_csv(desc, path, file)?,
            Format::Arff => read_arff(path, file)?,
        };
        match &mut table {
            None => table = Some(part),
            Some(t) => {
                if t.columns != part.columns {
                    return Err(Error::Schema(format!(
                        "{}: columns differ from {}",
                        path.display(),
                        desc.paths[0].display()
                    )));
                }
                t.rows.extend(part.rows);
            }
        }
    }
    build(desc, table.expect("at least one path"))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn read_csv(desc: &DatasetDescriptor, path: &Path, file: usize) -> Result<RawTable> {
    let text = read_text(path)?;
    let mut builder = csv::ReaderBuilder::new();
    builder
        .has_headers(desc.columns.is_none())
        .flexible(true)
        .trim(csv::Trim::All);
    if let Some(c) = desc.comment {
        let byte =
            u8::try_from(u32::from(c)).map_err(|_| Error::Config(format!("comment marker '{c}' is not ASCII")))?;
        builder.comment(Some(byte));
    }
    let mut reader = builder.from_reader(text.as_bytes());
    let columns: Vec<String> = match &desc.columns {
        Some(c) => c.clone(),
        None => reader
            .headers()
            .map_err(|e| Error::csv(path, e))?
            .iter()
            .map(str::to_string)
            .collect(),
    };
    let rows = collect_rows(&mut reader, path, file, columns.len())?;
    Ok(RawTable {
        columns,
        declared: None,
        rows,
    })
}

fn collect_rows(reader: &mut csv::Reader<&[u8]>, path: &Path, file: usize, width: usize) -> Result<Vec<RawRow>> {
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::csv(path, e))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != width {
            return Err(Error::Parse {
                path: path.into(),
                line,
                message: format!("expected {width} fields, found {}", record.len()),
            });
        }
        rows.push(RawRow {
            file,
            line,
            fields: record.iter().map(str::to_string).collect(),
        });
    }
    Ok(rows)
}

fn unquote(s: &str) -> &str {
    let s = s.trim();
    for q in ['\'', '"'] {
        if s.len() >= 2 && s.starts_with(q) && s.ends_with(q) {
            return &s[1..s.len() - 1];
        }
    }
    s
}

/// Splits an `@attribute` line body into name and type text.
fn split_attribute(body: &str) -> Option<(String, String)> {
    let body = body.trim();
    let (name, rest) = match body.chars().next()? {
        q @ ('\'' | '"') => {
            let end = body[1..].find(q)? + 1;
            (&body[1..end], &body[end + 1..])
        }
        _ => {
            let end = body.find(char::is_whitespace)?;
            (&body[..end], &body[end..])
        }
    };
    Some((name.to_string(), rest.trim().to_string()))
}

fn read_arff(path: &Path, file: usize) -> Result<RawTable> {
    let text = read_text(path)?;
    let mut columns = Vec::new();
    let mut attributes = Vec::new();
    let mut data_start = None;
    let mut offset = 0;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        offset += raw.len() + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let lower = line.to_ascii_lowercase();
        if lower.starts_with("@relation") {
            continue;
        }
        if lower.starts_with("@data") {
            data_start = Some((line_no, offset.min(text.len())));
            break;
        }
        if lower.starts_with("@attribute") {
            let parse_err = |message: String| Error::Parse {
                path: path.into(),
                line: line_no,
                message,
            };
            let (name, ty) =
                split_attribute(&line["@attribute".len()..]).ok_or_else(|| parse_err("malformed @attribute".into()))?;
            let attr = if ty.starts_with('{') {
                let inner = ty
                    .strip_prefix('{')
                    .and_then(|t| t.strip_suffix('}'))
                    .ok_or_else(|| parse_err(format!("unterminated value list for '{name}'")))?;
                Attribute::categorical(name.clone(), inner.split(',').map(|v| unquote(v).to_string()))
            } else {
                match ty.to_ascii_lowercase().as_str() {
                    "numeric" | "real" | "integer" => Attribute::numeric(name.clone()),
                    other => return Err(parse_err(format!("unsupported attribute type '{other}'"))),
                }
            };
            columns.push(name);
            attributes.push(attr);
            continue;
        }
        return Err(Error::Parse {
            path: path.into(),
            line: line_no,
            message: format!("unexpected header line '{line}'"),
        });
    }
    let (header_lines, start) = data_start.ok_or_else(|| Error::Parse {
        path: path.into(),
        line: text.lines().count(),
        message: "missing @data section".into(),
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'%'))
        .quote(b'\'')
        .from_reader(&text.as_bytes()[start..]);
    let mut rows = collect_rows(&mut reader, path, file, columns.len())?;
    for row in &mut rows {
        row.line += header_lines;
        for f in &mut row.fields {
            *f = unquote(f).to_string();
        }
    }
    Ok(RawTable {
        columns,
        declared: Some(attributes),
        rows,
    })
}

fn build(desc: &DatasetDescriptor, table: RawTable) -> Result<Dataset> {
    let RawTable {
        columns,
        declared,
        rows,
    } = table;
    let class_idx = columns
        .iter()
        .position(|c| *c == desc.class)
        .ok_or_else(|| Error::Schema(format!("class column '{}' not found", desc.class)))?;
    let feature_cols: Vec<usize> = (0..columns.len()).filter(|&i| i != class_idx).collect();
    let sensitive = feature_cols
        .iter()
        .position(|&i| columns[i] == desc.sensitive)
        .ok_or_else(|| Error::Schema(format!("sensitive column '{}' not found", desc.sensitive)))?;

    let clean_class = |raw: &str| -> String {
        let v = raw.trim();
        let v = if desc.strip_class_period {
            v.strip_suffix('.').unwrap_or(v)
        } else {
            v
        };
        v.to_string()
    };
    let rejected = match &desc.rejected {
        Some(r) => r.clone(),
        None => {
            let mut others: Vec<String> = Vec::new();
            for row in &rows {
                let v = clean_class(&row.fields[class_idx]);
                if v != desc.granted && !others.contains(&v) {
                    others.push(v);
                }
            }
            match others.as_slice() {
                [one] => one.clone(),
                [] => {
                    return Err(Error::Schema(format!(
                        "class '{}' has no value besides '{}'",
                        desc.class, desc.granted
                    )))
                }
                many => {
                    return Err(Error::Schema(format!(
                        "class '{}' has more than two values: {many:?} besides '{}'",
                        desc.class, desc.granted
                    )))
                }
            }
        }
    };

    // Declared attributes (descriptor first, then the file header) fix the
    // value sets; otherwise they are inferred from a full pass.
    let declared: Option<Vec<Attribute>> = desc
        .attributes
        .clone()
        .or_else(|| declared.map(|all| feature_cols.iter().map(|&i| all[i].clone()).collect()));
    let mut attributes = match declared {
        Some(attrs) => {
            if attrs.len() != feature_cols.len() {
                return Err(Error::Schema(format!(
                    "{} attributes declared for {} feature columns",
                    attrs.len(),
                    feature_cols.len()
                )));
            }
            for (a, &i) in attrs.iter().zip(&feature_cols) {
                if a.name != columns[i] {
                    return Err(Error::Schema(format!(
                        "declared attribute '{}' does not match column '{}'",
                        a.name, columns[i]
                    )));
                }
            }
            attrs
        }
        None => feature_cols
            .iter()
            .map(|&i| infer_attribute(&columns[i], rows.iter().map(|r| r.fields[i].as_str()), &desc.missing))
            .collect(),
    };
    for (a, &i) in attributes.iter_mut().zip(&feature_cols) {
        if !a.allows_missing && rows.iter().any(|r| r.fields[i] == desc.missing) && a.name != desc.sensitive {
            a.allows_missing = true;
        }
    }

    let schema = Schema::new(
        attributes,
        sensitive,
        &desc.deprived,
        ClassAttribute::new(desc.class.clone(), rejected, desc.granted.clone()),
    )?;
    let codes: Vec<Option<HashMap<&str, u32>>> = schema
        .attributes()
        .iter()
        .map(|a| match &a.kind {
            AttributeKind::Categorical { values } => {
                Some(values.iter().enumerate().map(|(c, v)| (v.as_str(), c as u32)).collect())
            }
            AttributeKind::Numeric => None,
        })
        .collect();

    let mut instances = Vec::with_capacity(rows.len());
    for row in &rows {
        let err = |message: String| Error::Parse {
            path: desc.paths[row.file].clone(),
            line: row.line,
            message,
        };
        let raw_label = clean_class(&row.fields[class_idx]);
        let label = schema
            .label_from_str(&raw_label)
            .ok_or_else(|| err(format!("unknown class value '{raw_label}'")))?;
        let mut features = Vec::with_capacity(feature_cols.len());
        for (j, &i) in feature_cols.iter().enumerate() {
            let raw = row.fields[i].as_str();
            let attr = &schema.attributes()[j];
            let value = if raw == desc.missing {
                if !attr.allows_missing {
                    return Err(err(format!("missing value in '{}'", attr.name)));
                }
                Value::Missing
            } else {
                match &codes[j] {
                    Some(map) => Value::Categorical(
                        *map.get(raw)
                            .ok_or_else(|| err(format!("unknown value '{raw}' for '{}'", attr.name)))?,
                    ),
                    None => Value::Numeric(
                        raw.parse::<f64>()
                            .ok()
                            .filter(|v| v.is_finite())
                            .ok_or_else(|| err(format!("'{raw}' is not a number for '{}'", attr.name)))?,
                    ),
                }
            };
            features.push(value);
        }
        instances.push(Instance::new(features, label));
    }
    Ok(Dataset { schema, instances })
}

/// Numeric if every present value parses as a finite number; otherwise
/// categorical with its distinct values sorted.
fn infer_attribute<'a>(name: &str, values: impl Iterator<Item = &'a str> + Clone, missing: &str) -> Attribute {
    let present = values.filter(|v| *v != missing);
    let numeric = present.clone().all(|v| v.parse::<f64>().is_ok_and(f64::is_finite));
    if numeric && present.clone().next().is_some() {
        return Attribute::numeric(name);
    }
    let values: std::collections::BTreeSet<&str> = present.collect();
    Attribute::categorical(name, values)
}

/// Header row then one row per instance; missing values as `?`, numbers in
/// shortest round-trip form.
pub fn write_csv<'a>(path: &Path, schema: &Schema, instances: impl IntoIterator<Item = &'a Instance>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    let mut header: Vec<&str> = schema.attributes().iter().map(|a| a.name.as_str()).collect();
    header.push(&schema.class().name);
    w.write_record(&header).map_err(|e| Error::csv(path, e))?;
    let mut record: Vec<String> = Vec::with_capacity(header.len());
    for inst in instances {
        record.clear();
        for (attr, value) in schema.attributes().iter().zip(&inst.features) {
            record.push(match value {
                Value::Numeric(x) => format!("{x}"),
                Value::Categorical(c) => attr.value_name(*c).unwrap_or(DEFAULT_MISSING).to_string(),
                Value::Missing => DEFAULT_MISSING.to_string(),
            });
        }
        record.push(schema.class().label_name(inst.label).to_string());
        w.write_record(&record).map_err(|e| Error::csv(path, e))?;
    }
    w.into_inner()
        .map_err(|e| Error::io(path, e.into_error()))?
        .flush()
        .map_err(|e| Error::io(path, e))
}

/// Label counts helper used when summarizing a loaded table.
pub fn label_counts(instances: &[Instance]) -> [usize; 2] {
    let mut counts = [0; 2];
    for i in instances {
        counts[i.label.index()] += 1;
    }
    counts
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn granted_rate(&self) -> f64 {
        let [_, g] = label_counts(&self.instances);
        g as f64 / self.instances.len().max(1) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{Group, Label};

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        let mut f = fs::File::create(&p).unwrap();
        f.write_all(body.as_bytes()).unwrap();
        p
    }

    #[test]
    fn toy_csv_in_order() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "t.csv", "x,g,y\n1.5,f,yes\n?,m,no\n-2,m,yes\n");
        let ds = load_dataset(&DatasetDescriptor::csv(&p, "g", "f", "y", "yes")).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.schema.class().rejected, "no");
        assert!(ds.schema.attributes()[0].is_numeric());
        assert!(ds.schema.attributes()[0].allows_missing);
        let labels: Vec<Label> = ds.instances.iter().map(|i| i.label).collect();
        assert_eq!(labels, vec![Label::Granted, Label::Rejected, Label::Granted]);
        assert_eq!(ds.instances[0].features[0], Value::Numeric(1.5));
        assert_eq!(ds.instances[1].features[0], Value::Missing);
        assert_eq!(ds.schema.group_of(&ds.instances[0].features), Group::Deprived);
        assert_eq!(ds.schema.group_of(&ds.instances[1].features), Group::Favored);
    }

    #[test]
    fn malformed_row_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "t.csv", "x,g,y\n1,f,yes\n2,m\n");
        let err = load_dataset(&DatasetDescriptor::csv(&p, "g", "f", "y", "yes")).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn bad_number_reports_line_under_declared_schema() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "t.csv", "x,g,y\n1,f,yes\n2,m,no\nabc,m,no\n");
        let mut d = DatasetDescriptor::csv(&p, "g", "f", "y", "yes");
        d.attributes = Some(vec![Attribute::numeric("x"), Attribute::categorical("g", ["f", "m"])]);
        match load_dataset(&d).unwrap_err() {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 4);
                assert!(message.contains("abc"));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn unknown_category_under_declared_schema() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "t.csv", "x,g,y\n1,f,yes\n2,other,no\n");
        let mut d = DatasetDescriptor::csv(&p, "g", "f", "y", "yes");
        d.attributes = Some(vec![Attribute::numeric("x"), Attribute::categorical("g", ["f", "m"])]);
        assert!(matches!(load_dataset(&d), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn unknown_label_and_missing_columns() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "t.csv", "x,g,y\n1,f,yes\n2,m,no\n3,m,maybe\n");
        assert!(load_dataset(&DatasetDescriptor::csv(&p, "g", "f", "y", "yes")).is_err());
        let mut d = DatasetDescriptor::csv(&p, "g", "f", "y", "yes");
        d.rejected = Some("no".into());
        assert!(matches!(load_dataset(&d), Err(Error::Parse { line: 4, .. })));
        assert!(matches!(
            load_dataset(&DatasetDescriptor::csv(&p, "nope", "f", "y", "yes")),
            Err(Error::Schema(_))
        ));
        assert!(matches!(
            load_dataset(&DatasetDescriptor::csv(
                dir.path().join("absent.csv"),
                "g",
                "f",
                "y",
                "yes"
            )),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn census_style_files() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "adult.data", "39, State-gov, 77516, Bachelors, 13, Never-married, Adm-clerical, Not-in-family, White, Male, 2174, 0, 40, United-States, <=50K\n50, ?, 83311, Bachelors, 13, Married-civ-spouse, Exec-managerial, Husband, White, Female, 0, 0, 13, United-States, >50K\n");
        write(dir.path(), "adult.test", "|1x3 Cross validator\n25, Private, 226802, 11th, 7, Never-married, Machine-op-inspct, Own-child, Black, Male, 0, 0, 40, United-States, >50K.\n\n");
        let ds = load_dataset(&DatasetDescriptor::census(dir.path())).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.schema.arity(), 14);
        assert_eq!(ds.schema.deprived_value(), "Female");
        assert_eq!(ds.instances[1].features[1], Value::Missing);
        assert_eq!(ds.instances[2].label, Label::Granted);
        assert_eq!(ds.schema.sensitive_attribute().name, "sex");
    }

    #[test]
    fn arff_loader() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "t.arff",
            "% comment\n@relation toy\n\n@attribute age numeric\n@attribute 'sex' {Female, Male}\n@attribute income {'<=50K', '>50K'}\n\n@data\n30, Female, '>50K'\n?, Male, <=50K\n% trailing\n41,Male,>50K\n",
        );
        let mut d = DatasetDescriptor::csv(&p, "sex", "Female", "income", ">50K");
        d.format = Format::Arff;
        let ds = load_dataset(&d).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.schema.class().rejected, "<=50K");
        assert_eq!(ds.instances[1].features[0], Value::Missing);
        assert_eq!(ds.instances[2].features[0], Value::Numeric(41.0));
        let bad = write(
            dir.path(),
            "bad.arff",
            "@relation r\n@attribute a numeric\n@attribute c {x,y}\n@attribute s {p,q}\n@data\n1,x,p\nz,y,q\n",
        );
        let mut d = DatasetDescriptor::csv(&bad, "s", "p", "c", "x");
        d.format = Format::Arff;
        assert!(matches!(load_dataset(&d), Err(Error::Parse { line: 7, .. })));
    }

    #[test]
    fn write_then_load_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = crate::generator::GeneratorConfig::stationary(5, 2, 0.1, 3);
        let (schema, chunks, _) = crate::generator::generate_stream(cfg).unwrap();
        let instances: Vec<Instance> = chunks.into_iter().flat_map(|c| c.instances).collect();
        let p = dir.path().join("nested/out.csv");
        write_csv(&p, &schema, &instances).unwrap();
        let ds = load_dataset(&DatasetDescriptor::synthetic(&p)).unwrap();
        assert_eq!(ds.schema, schema);
        assert_eq!(ds.instances, instances);
    }
}
