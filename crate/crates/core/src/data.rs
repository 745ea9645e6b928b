//! Typed datasets, CSV ingestion, stratified fold planning and splitting.
//!
//! CSV dialect: comma separated, no quoting, class column last, optional
//! header row. Missing cells are written `?`. At load time a missing
//! continuous cell is replaced by its column mean and a missing nominal cell
//! becomes an extra `?` category appended to the attribute's value list.
//!
//! Schema sidecar: one line per attribute, `name:kind[:v1|v2|...]` where kind
//! is `nominal`, `binary` or `continuous`, and a final line
//! `class:v1|v2|...`. Blank lines and lines starting with `#` are ignored.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Token used for a missing cell, both on input and as the extra nominal category.
pub const MISSING_TOKEN: &str = "?";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AttributeKind {
    Nominal(Vec<String>),
    /// A nominal attribute with exactly two values.
    Binary(Vec<String>),
    Continuous,
}

impl AttributeKind {
    /// Value list of a nominal or binary attribute.
    pub fn values(&self) -> Option<&[String]> {
        match self {
            AttributeKind::Nominal(v) | AttributeKind::Binary(v) => Some(v),
            AttributeKind::Continuous => None,
        }
    }

    pub fn is_discrete(&self) -> bool {
        !matches!(self, AttributeKind::Continuous)
    }

    /// Number of distinct values, zero for continuous attributes.
    pub fn arity(&self) -> usize {
        self.values().map_or(0, <[String]>::len)
    }

    fn value_index(&self, token: &str) -> Option<usize> {
        self.values()?.iter().position(|v| v == token)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub kind: AttributeKind,
}

impl Attribute {
    pub fn continuous(name: impl Into<String>) -> Self {
        Attribute {
            name: name.into(),
            kind: AttributeKind::Continuous,
        }
    }

    pub fn nominal<S: Into<String>>(name: impl Into<String>, values: impl IntoIterator<Item = S>) -> Self {
        Attribute {
            name: name.into(),
            kind: AttributeKind::Nominal(values.into_iter().map(Into::into).collect()),
        }
    }

    pub fn binary<S: Into<String>>(name: impl Into<String>, values: [S; 2]) -> Self {
        Attribute {
            name: name.into(),
            kind: AttributeKind::Binary(values.into_iter().map(Into::into).collect()),
        }
    }
}

/// Attribute layout plus the ordered class labels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSchema", into = "RawSchema")]
pub struct Schema {
    attributes: Vec<Attribute>,
    class_values: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct RawSchema {
    attributes: Vec<Attribute>,
    class_values: Vec<String>,
}

impl TryFrom<RawSchema> for Schema {
    type Error = Error;
    fn try_from(raw: RawSchema) -> Result<Self> {
        Schema::new(raw.attributes, raw.class_values)
    }
}

impl From<Schema> for RawSchema {
    fn from(s: Schema) -> Self {
        RawSchema {
            attributes: s.attributes,
            class_values: s.class_values,
        }
    }
}

fn check_value_list(what: &str, values: &[String]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::Schema(format!("{what}: empty value list")));
    }
    let mut seen = HashSet::new();
    for v in values {
        if !seen.insert(v.as_str()) {
            return Err(Error::Schema(format!("{what}: duplicate value {v:?}")));
        }
    }
    Ok(())
}

impl Schema {
    pub fn new(attributes: Vec<Attribute>, class_values: Vec<String>) -> Result<Self> {
        if class_values.len() < 2 {
            return Err(Error::Schema(format!(
                "at least 2 classes required, got {}",
                class_values.len()
            )));
        }
        check_value_list("class", &class_values)?;
        let mut names = HashSet::new();
        for a in &attributes {
            if !names.insert(a.name.as_str()) {
                return Err(Error::Schema(format!("duplicate attribute name {:?}", a.name)));
            }
            match &a.kind {
                AttributeKind::Nominal(v) => check_value_list(&a.name, v)?,
                AttributeKind::Binary(v) => {
                    check_value_list(&a.name, v)?;
                    if v.len() != 2 {
                        return Err(Error::Schema(format!(
                            "{}: binary attribute needs exactly 2 values, got {}",
                            a.name,
                            v.len()
                        )));
                    }
                }
                AttributeKind::Continuous => {}
            }
        }
        Ok(Schema {
            attributes,
            class_values,
        })
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn attribute(&self, index: usize) -> &Attribute {
        &self.attributes[index]
    }

    pub fn num_attributes(&self) -> usize {
        self.attributes.len()
    }

    pub fn class_values(&self) -> &[String] {
        &self.class_values
    }

    pub fn num_classes(&self) -> usize {
        self.class_values.len()
    }

    pub fn class_index(&self, label: &str) -> Option<usize> {
        self.class_values.iter().position(|c| c == label)
    }

    /// Checks cell count, cell types and index ranges of an instance.
    pub fn check_instance(&self, inst: &Instance) -> Result<()> {
        if inst.values.len() != self.attributes.len() {
            return Err(Error::Shape {
                what: "instance attribute count",
                got: inst.values.len(),
                expected: self.attributes.len(),
            });
        }
        for (a, v) in self.attributes.iter().zip(&inst.values) {
            match (&a.kind, v) {
                (_, Value::Missing) => {}
                (AttributeKind::Continuous, Value::Continuous(x)) if x.is_finite() => {}
                (kind, Value::Nominal(i)) if kind.is_discrete() && *i < kind.arity() => {}
                _ => {
                    return Err(Error::Schema(format!(
                        "value {v:?} does not conform to attribute {:?}",
                        a.name
                    )))
                }
            }
        }
        if let Some(c) = inst.class {
            if c >= self.num_classes() {
                return Err(Error::Schema(format!("class index {c} out of range")));
            }
        }
        Ok(())
    }

    /// Parses the sidecar format described in the module docs.
    pub fn parse_sidecar(text: &str) -> Result<Schema> {
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .collect();
        let Some((&(class_line, class_spec), attr_lines)) = lines.split_last() else {
            return Err(Error::Schema("empty schema file".into()));
        };
        let class_values = match class_spec.split_once(':') {
            Some(("class", vals)) => split_values(vals),
            _ => {
                return Err(Error::Parse {
                    line: class_line,
                    msg: "final line must be `class:v1|v2|...`".into(),
                })
            }
        };
        let mut attributes = Vec::with_capacity(attr_lines.len());
        for &(line, spec) in attr_lines {
            let mut parts = spec.splitn(3, ':');
            let name = parts.next().unwrap_or_default().trim();
            let kind = parts.next().map(str::trim);
            let vals = parts.next();
            let kind = match (kind, vals) {
                (Some("continuous"), None) => AttributeKind::Continuous,
                (Some("nominal"), Some(v)) => AttributeKind::Nominal(split_values(v)),
                (Some("binary"), Some(v)) => AttributeKind::Binary(split_values(v)),
                (Some("binary"), None) => AttributeKind::Binary(vec!["0".into(), "1".into()]),
                _ => {
                    return Err(Error::Parse {
                        line,
                        msg: format!("cannot parse attribute spec {spec:?}"),
                    })
                }
            };
            if name.is_empty() {
                return Err(Error::Parse {
                    line,
                    msg: "empty attribute name".into(),
                });
            }
            attributes.push(Attribute {
                name: name.to_string(),
                kind,
            });
        }
        Schema::new(attributes, class_values)
    }

    pub fn load_sidecar(path: impl AsRef<Path>) -> Result<Schema> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Schema::parse_sidecar(&text)
    }

    pub fn to_sidecar(&self) -> String {
        let mut out = String::new();
        for a in &self.attributes {
            match &a.kind {
                AttributeKind::Continuous => writeln!(out, "{}:continuous", a.name),
                AttributeKind::Nominal(v) => writeln!(out, "{}:nominal:{}", a.name, v.join("|")),
                AttributeKind::Binary(v) => writeln!(out, "{}:binary:{}", a.name, v.join("|")),
            }
            .expect("writing to a String cannot fail");
        }
        writeln!(out, "class:{}", self.class_values.join("|")).expect("writing to a String cannot fail");
        out
    }
}

fn split_values(s: &str) -> Vec<String> {
    s.split('|').map(|v| v.trim().to_string()).collect()
}

/// One attribute cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Value {
    /// Index into the attribute's value list (nominal or binary).
    Nominal(usize),
    Continuous(f64),
    Missing,
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Continuous(x) => Some(*x),
            _ => None,
        }
    }

    pub fn as_index(&self) -> Option<usize> {
        match self {
            Value::Nominal(i) => Some(*i),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub values: Vec<Value>,
    /// `None` for unlabeled prediction inputs.
    pub class: Option<usize>,
}

impl Instance {
    pub fn new(values: Vec<Value>, class: usize) -> Self {
        Instance {
            values,
            class: Some(class),
        }
    }

    pub fn unlabeled(values: Vec<Value>) -> Self {
        Instance { values, class: None }
    }

    pub fn continuous(values: &[f64], class: usize) -> Self {
        Instance::new(values.iter().map(|&x| Value::Continuous(x)).collect(), class)
    }
}

/// A labeled dataset whose instances all conform to one schema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    schema: Schema,
    instances: Vec<Instance>,
}

impl Dataset {
    pub fn new(schema: Schema, instances: Vec<Instance>) -> Result<Self> {
        for (n, inst) in instances.iter().enumerate() {
            schema
                .check_instance(inst)
                .map_err(|e| e.context(format!("instance {n}")))?;
            if inst.class.is_none() {
                return Err(Error::Schema(format!("instance {n} has no class label")));
            }
        }
        Ok(Dataset { schema, instances })
    }

    pub fn empty(schema: Schema) -> Self {
        Dataset {
            schema,
            instances: Vec::new(),
        }
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn instance(&self, n: usize) -> &Instance {
        &self.instances[n]
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.schema.num_classes()
    }

    pub fn class_of(&self, n: usize) -> usize {
        self.instances[n].class.expect("dataset instances are labeled")
    }

    pub fn labels(&self) -> Vec<usize> {
        (0..self.len()).map(|n| self.class_of(n)).collect()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes()];
        for n in 0..self.len() {
            counts[self.class_of(n)] += 1;
        }
        counts
    }

    /// Instances at `indices`, in that order (repeats allowed).
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            instances: indices.iter().map(|&i| self.instances[i].clone()).collect(),
        }
    }

    pub fn to_csv(&self, header: bool) -> String {
        let mut out = String::new();
        if header {
            let names: Vec<&str> = self.schema.attributes.iter().map(|a| a.name.as_str()).collect();
            out.push_str(&names.join(","));
            out.push_str(",class\n");
        }
        for inst in &self.instances {
            for (a, v) in self.schema.attributes.iter().zip(&inst.values) {
                match v {
                    Value::Continuous(x) => write!(out, "{x}"),
                    Value::Nominal(i) => write!(out, "{}", a.kind.values().expect("discrete")[*i]),
                    Value::Missing => write!(out, "{MISSING_TOKEN}"),
                }
                .expect("writing to a String cannot fail");
                out.push(',');
            }
            out.push_str(&self.schema.class_values[inst.class.expect("labeled")]);
            out.push('\n');
        }
        out
    }
}

fn tokenize(text: &str, header: bool) -> Vec<(usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .skip(usize::from(header))
        .map(|(i, l)| (i, l.split(',').map(str::trim).collect()))
        .collect()
}

/// Parses CSV text against `schema`, imputing missing cells.
///
/// The returned dataset's schema may differ from `schema`: a discrete
/// attribute that had missing cells gains a trailing `?` value (a binary
/// attribute becomes nominal with three values).
pub fn parse_csv(text: &str, schema: &Schema, header: bool) -> Result<Dataset> {
    let rows = tokenize(text, header);
    let width = schema.num_attributes() + 1;
    for (line, cells) in &rows {
        if cells.len() != width {
            return Err(Error::WidthMismatch {
                line: *line,
                expected: width,
                found: cells.len(),
            });
        }
    }

    let mut attributes = schema.attributes.clone();
    let mut means = vec![0.0; attributes.len()];
    for (j, attr) in attributes.iter_mut().enumerate() {
        let has_missing = rows.iter().any(|(_, c)| c[j] == MISSING_TOKEN);
        match &mut attr.kind {
            AttributeKind::Continuous => {
                let mut sum = 0.0;
                let mut count = 0usize;
                for (line, cells) in &rows {
                    if cells[j] != MISSING_TOKEN {
                        sum += parse_number(cells[j], *line, &attr.name)?;
                        count += 1;
                    }
                }
                means[j] = if count > 0 { sum / count as f64 } else { 0.0 };
            }
            kind if has_missing && kind.value_index(MISSING_TOKEN).is_none() => {
                let mut values = kind.values().expect("discrete").to_vec();
                values.push(MISSING_TOKEN.to_string());
                *kind = AttributeKind::Nominal(values);
            }
            _ => {}
        }
    }
    let schema = Schema::new(attributes, schema.class_values.clone())?;

    let mut instances = Vec::with_capacity(rows.len());
    for (line, cells) in &rows {
        let mut values = Vec::with_capacity(width - 1);
        for (j, attr) in schema.attributes.iter().enumerate() {
            let token = cells[j];
            let v = match &attr.kind {
                AttributeKind::Continuous if token == MISSING_TOKEN => Value::Continuous(means[j]),
                AttributeKind::Continuous => Value::Continuous(parse_number(token, *line, &attr.name)?),
                kind => Value::Nominal(kind.value_index(token).ok_or_else(|| Error::UnknownNominal {
                    line: *line,
                    attribute: attr.name.clone(),
                    token: token.to_string(),
                })?),
            };
            values.push(v);
        }
        let label = cells[width - 1];
        let class = schema.class_index(label).ok_or_else(|| Error::UnknownNominal {
            line: *line,
            attribute: "class".into(),
            token: label.to_string(),
        })?;
        instances.push(Instance::new(values, class));
    }
    Dataset::new(schema, instances)
}

fn parse_number(token: &str, line: usize, attribute: &str) -> Result<f64> {
    match token.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(Error::Parse {
            line,
            msg: format!("attribute {attribute:?}: cannot parse {token:?} as a finite number"),
        }),
    }
}

/// Reads a CSV file; see [`parse_csv`].
pub fn load_csv(path: impl AsRef<Path>, schema: &Schema, header: bool) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, schema, header)
}

/// Parses prediction inputs against a fixed (trained) schema.
///
/// Rows may omit the class column; a known class label in it is kept so
/// callers can score the predictions, anything else there is ignored. `?` maps to the `?` category when the
/// attribute has one and to [`Value::Missing`] otherwise; nothing is imputed.
pub fn parse_unlabeled_csv(text: &str, schema: &Schema, header: bool) -> Result<Vec<Instance>> {
    let width = schema.num_attributes();
    tokenize(text, header)
        .into_iter()
        .map(|(line, cells)| {
            if cells.len() != width && cells.len() != width + 1 {
                return Err(Error::WidthMismatch {
                    line,
                    expected: width,
                    found: cells.len(),
                });
            }
            let values = schema
                .attributes
                .iter()
                .zip(&cells)
                .map(|(attr, &token)| match &attr.kind {
                    _ if token == MISSING_TOKEN && attr.kind.value_index(token).is_none() => Ok(Value::Missing),
                    AttributeKind::Continuous => parse_number(token, line, &attr.name).map(Value::Continuous),
                    kind => kind.value_index(token).map(Value::Nominal).ok_or_else(|| Error::UnknownNominal {
                        line,
                        attribute: attr.name.clone(),
                        token: token.to_string(),
                    }),
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(match cells.get(width).and_then(|label| schema.class_index(label)) {
                Some(class) => Instance::new(values, class),
                None => Instance::unlabeled(values),
            })
        })
        .collect()
}

/// Assignment of every instance to one of `folds` cross-validation folds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    folds: usize,
    assignment: Vec<usize>,
    seed: u64,
}

impl FoldPlan {
    pub fn folds(&self) -> usize {
        self.folds
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Indices (ascending) of the instances held out in fold `j`.
    pub fn test_indices(&self, j: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&n| self.assignment[n] == j).collect()
    }

    /// Indices (ascending) of the instances used for training in fold `j`.
    pub fn train_indices(&self, j: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&n| self.assignment[n] != j).collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.folds];
        for &f in &self.assignment {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Stratified fold plan: instances of each class are shuffled, then dealt
/// round-robin, with the dealing position carried over from one class to the
/// next so that total fold sizes also stay balanced.
pub fn stratified_folds(dataset: &Dataset, folds: usize, seed: u64) -> Result<FoldPlan> {
    let n = dataset.len();
    if folds < 2 || folds > n {
        return Err(Error::param(format!("fold count {folds} must lie in 2..={n}")));
    }
    let mut rng = rng_from_seed(seed);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); dataset.num_classes()];
    for i in 0..n {
        by_class[dataset.class_of(i)].push(i);
    }
    let mut assignment = vec![0; n];
    let mut next = 0;
    for members in &mut by_class {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            assignment[i] = next;
            next = (next + 1) % folds;
        }
    }
    Ok(FoldPlan {
        folds,
        assignment,
        seed,
    })
}

/// Training and test sets of fold `j`.
pub fn split(dataset: &Dataset, plan: &FoldPlan, j: usize) -> Result<(Dataset, Dataset)> {
    if j >= plan.folds {
        return Err(Error::param(format!("fold index {j} out of range for {} folds", plan.folds)));
    }
    if plan.assignment.len() != dataset.len() {
        return Err(Error::Shape {
            what: "fold plan length",
            got: plan.assignment.len(),
            expected: dataset.len(),
        });
    }
    Ok((
        dataset.subset(&plan.train_indices(j)),
        dataset.subset(&plan.test_indices(j)),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn color_schema() -> Schema {
        Schema::new(
            vec![Attribute::continuous("x"), Attribute::nominal("color", ["red", "blue"])],
            vec!["A".into(), "B".into()],
        )
        .unwrap()
    }

    fn two_class(a: usize, b: usize) -> Dataset {
        let schema = Schema::new(vec![Attribute::continuous("x")], vec!["A".into(), "B".into()]).unwrap();
        let instances = (0..a + b)
            .map(|i| Instance::continuous(&[i as f64], usize::from(i >= a)))
            .collect();
        Dataset::new(schema, instances).unwrap()
    }

    #[test]
    fn loads_fixture_rows() {
        let ds = parse_csv("1.0,red,A\n2.0,blue,B\n", &color_schema(), false).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.labels(), vec![0, 1]);
        assert_eq!(ds.instance(1).values, vec![Value::Continuous(2.0), Value::Nominal(1)]);
    }

    #[test]
    fn header_row_is_skipped_when_requested() {
        let ds = parse_csv("x,color,class\n1.0,red,A\n", &color_schema(), true).unwrap();
        assert_eq!(ds.len(), 1);
    }

    #[test]
    fn continuous_missing_gets_column_mean() {
        let ds = parse_csv("1.0,red,A\n?,red,B\n2.0,blue,A\n", &color_schema(), false).unwrap();
        assert_eq!(ds.instance(1).values[0], Value::Continuous(1.5));
    }

    #[test]
    fn nominal_missing_gets_extra_category() {
        let schema = Schema::new(
            vec![Attribute::binary("flag", ["n", "y"])],
            vec!["A".into(), "B".into()],
        )
        .unwrap();
        let ds = parse_csv("y,A\n?,B\n", &schema, false).unwrap();
        assert_eq!(
            ds.schema().attribute(0).kind,
            AttributeKind::Nominal(vec!["n".into(), "y".into(), "?".into()])
        );
        assert_eq!(ds.instance(1).values[0], Value::Nominal(2));
    }

    #[test]
    fn unknown_nominal_is_rejected() {
        let err = parse_csv("1.0,green,A\n", &color_schema(), false).unwrap_err();
        assert!(err.to_string().contains("unknown nominal value"), "{err}");
    }

    #[test]
    fn width_mismatch_and_bad_number() {
        assert!(matches!(
            parse_csv("1.0,red\n", &color_schema(), false),
            Err(Error::WidthMismatch { line: 1, expected: 3, found: 2 })
        ));
        assert!(matches!(
            parse_csv("abc,red,A\n", &color_schema(), false),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn schema_invariants() {
        assert!(Schema::new(vec![], vec!["A".into()]).is_err());
        assert!(Schema::new(vec![Attribute::nominal("a", ["x", "x"])], vec!["A".into(), "B".into()]).is_err());
        assert!(Schema::new(
            vec![Attribute::continuous("a"), Attribute::continuous("a")],
            vec!["A".into(), "B".into()]
        )
        .is_err());
        let bad_binary = Attribute {
            name: "b".into(),
            kind: AttributeKind::Binary(vec!["x".into()]),
        };
        assert!(Schema::new(vec![bad_binary], vec!["A".into(), "B".into()]).is_err());
    }

    #[test]
    fn sidecar_round_trips() {
        let text = "x:continuous\ncolor:nominal:red|blue\nflag:binary:0|1\nclass:A|B\n";
        let schema = Schema::parse_sidecar(text).unwrap();
        assert_eq!(schema.num_attributes(), 3);
        assert_eq!(schema.to_sidecar(), text);
        assert!(Schema::parse_sidecar("x:weird\nclass:A|B").is_err());
        assert!(Schema::parse_sidecar("x:continuous\n").is_err());
    }

    #[test]
    fn unlabeled_rows_accept_optional_class_column() {
        let rows = parse_unlabeled_csv("1.0,red\n2.0,blue,B\n?,red\n3.0,red,Z\n", &color_schema(), false).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[2].values[0], Value::Missing);
        let classes: Vec<Option<usize>> = rows.iter().map(|r| r.class).collect();
        assert_eq!(classes, [None, Some(1), None, None]);
    }

    #[test]
    fn exact_stratification() {
        let ds = two_class(5, 5);
        let plan = stratified_folds(&ds, 5, 3).unwrap();
        for j in 0..5 {
            let test = plan.test_indices(j);
            assert_eq!(test.len(), 2);
            let a = test.iter().filter(|&&i| ds.class_of(i) == 0).count();
            assert_eq!(a, 1);
        }
    }

    #[test]
    fn seven_into_three() {
        let ds = two_class(4, 3);
        for seed in 0..20 {
            let plan = stratified_folds(&ds, 3, seed).unwrap();
            let mut sizes = plan.fold_sizes();
            sizes.sort_unstable();
            assert_eq!(sizes, vec![2, 2, 3]);
            let a: Vec<usize> = (0..3)
                .map(|j| plan.test_indices(j).iter().filter(|&&i| ds.class_of(i) == 0).count())
                .collect();
            assert!(a.iter().max().unwrap() - a.iter().min().unwrap() <= 1);
        }
    }

    #[test]
    fn fold_count_out_of_range() {
        let ds = two_class(5, 5);
        assert!(stratified_folds(&ds, 11, 0).is_err());
        assert!(stratified_folds(&ds, 1, 0).is_err());
        assert!(stratified_folds(&ds, 10, 0).is_ok());
    }

    #[test]
    fn split_partitions() {
        let ds = two_class(5, 5);
        let plan = stratified_folds(&ds, 5, 1).unwrap();
        let (train, test) = split(&ds, &plan, 0).unwrap();
        assert_eq!((train.len(), test.len()), (8, 2));
        let mut all: Vec<usize> = (0..5).flat_map(|j| plan.test_indices(j)).collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        assert!(split(&ds, &plan, 5).is_err());
    }
}
