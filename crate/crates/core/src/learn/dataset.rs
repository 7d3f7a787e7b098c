use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Feature layout a regressor was trained on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Schema {
    /// 17 search features.
    Search,
    /// 13 sensing-node features.
    Ipp,
    /// Ad-hoc layout of the given width.
    Raw(usize),
}

impl Schema {
    pub fn len(self) -> usize {
        match self {
            Schema::Search => 17,
            Schema::Ipp => 13,
            Schema::Raw(n) => n,
        }
    }

    pub fn is_empty(self) -> bool {
        self.len() == 0
    }

    pub fn id(self) -> String {
        match self {
            Schema::Search => "search-v1".into(),
            Schema::Ipp => "ipp-v1".into(),
            Schema::Raw(n) => format!("raw-{n}"),
        }
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

/// Finite feature values tagged with their schema.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    schema: Schema,
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(schema: Schema, values: Vec<f64>) -> Result<Self> {
        if values.len() != schema.len() {
            return Err(Error::contract(format!(
                "{schema} expects {} features, got {}",
                schema.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::contract(format!("feature {i} is not finite")));
        }
        Ok(FeatureVector { schema, values })
    }

    pub fn schema(&self) -> Schema {
        self.schema
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// One oracle-labelled example.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub features: Vec<f64>,
    /// Timestep the label was taken at (1-based).
    pub t: usize,
    pub target: f64,
    /// Training iteration that produced the record.
    pub iteration: usize,
}

/// Aggregated labelled examples for one schema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperienceDataset {
    schema: Schema,
    records: Vec<Record>,
}

impl ExperienceDataset {
    pub fn new(schema: Schema) -> Self {
        ExperienceDataset {
            schema,
            records: Vec::new(),
        }
    }

    pub fn schema(&self) -> Schema {
        self.schema
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn push(&mut self, record: Record) -> Result<()> {
        if record.features.len() != self.schema.len() {
            return Err(Error::contract(format!(
                "{} expects {} features, got {}",
                self.schema,
                self.schema.len(),
                record.features.len()
            )));
        }
        self.records.push(record);
        Ok(())
    }

    /// Appends every record of `batch`, tagging it with `iteration`.
    pub fn aggregate(&mut self, batch: Vec<Record>, iteration: usize) -> Result<()> {
        for mut r in batch {
            r.iteration = iteration;
            self.push(r)?;
        }
        Ok(())
    }

    /// First record whose target or features are not finite.
    pub fn check_finite(&self) -> Result<()> {
        match self
            .records
            .iter()
            .position(|r| !r.target.is_finite() || r.features.iter().any(|f| !f.is_finite()))
        {
            Some(i) => Err(Error::NonFiniteTarget(i)),
            None => Ok(()),
        }
    }

    pub fn from_records(schema: Schema, records: Vec<Record>) -> Result<Self> {
        let mut d = ExperienceDataset::new(schema);
        for r in records {
            d.push(r)?;
        }
        Ok(d)
    }
}
