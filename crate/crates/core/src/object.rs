use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Result, UnnError};
use crate::pdf::Pdf;
use crate::point::{check_dims, Point};
use crate::support::{support_ball, SupportBall};

/// A pdf together with its support ball and an optional class label.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertainObject {
    pdf: Pdf,
    support: SupportBall,
    label: Option<String>,
}

impl UncertainObject {
    pub fn new(pdf: Pdf, label: Option<String>) -> Result<Self> {
        pdf.validate()?;
        let support = support_ball(&pdf);
        Ok(UncertainObject { pdf, support, label })
    }

    pub fn labeled(pdf: Pdf, label: impl Into<String>) -> Result<Self> {
        Self::new(pdf, Some(label.into()))
    }

    pub fn certain(at: Point, label: Option<String>) -> Self {
        let support = SupportBall::point(at.clone());
        UncertainObject { pdf: Pdf::point(at), support, label }
    }

    pub fn pdf(&self) -> &Pdf {
        &self.pdf
    }

    pub fn support(&self) -> &SupportBall {
        &self.support
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.pdf.dim()
    }

    pub fn with_label(mut self, label: Option<String>) -> Self {
        self.label = label;
        self
    }
}

/// On-disk record of one object: `{"label": ..., "pdf": {...}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObjectRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub pdf: Pdf,
}

impl From<&UncertainObject> for ObjectRecord {
    fn from(o: &UncertainObject) -> Self {
        ObjectRecord { label: o.label.clone(), pdf: o.pdf.clone() }
    }
}

impl TryFrom<ObjectRecord> for UncertainObject {
    type Error = UnnError;

    fn try_from(r: ObjectRecord) -> Result<Self> {
        UncertainObject::new(r.pdf, r.label)
    }
}

/// Labeled training set of uncertain objects sharing one dimensionality.
///
/// Labels are kept sorted; `class_of(i)` indexes into `labels()`.
#[derive(Debug, Clone)]
pub struct Dataset {
    objects: Vec<UncertainObject>,
    dim: usize,
    labels: Vec<String>,
    class_ids: Vec<usize>,
    members: Vec<Vec<usize>>,
}

impl Dataset {
    pub fn new(objects: Vec<UncertainObject>) -> Result<Self> {
        let first = objects.first().ok_or(UnnError::EmptyTrainingSet)?;
        let dim = first.dim();
        let mut set = BTreeSet::new();
        for (i, o) in objects.iter().enumerate() {
            check_dims(dim, o.dim())?;
            let label = o
                .label()
                .ok_or_else(|| UnnError::InvalidDataset(format!("object {i} has no label")))?;
            set.insert(label.to_string());
        }
        if set.len() < 2 {
            return Err(UnnError::InvalidDataset(format!(
                "need at least 2 distinct labels, found {}",
                set.len()
            )));
        }
        let labels: Vec<String> = set.into_iter().collect();
        let mut members = vec![Vec::new(); labels.len()];
        let class_ids = objects
            .iter()
            .enumerate()
            .map(|(i, o)| {
                let c = labels.binary_search_by(|l| l.as_str().cmp(o.label().unwrap())).unwrap();
                members[c].push(i);
                c
            })
            .collect();
        Ok(Dataset { objects, dim, labels, class_ids, members })
    }

    pub fn objects(&self) -> &[UncertainObject] {
        &self.objects
    }

    pub fn object(&self, i: usize) -> &UncertainObject {
        &self.objects[i]
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Sorted distinct labels.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn class_of(&self, i: usize) -> usize {
        self.class_ids[i]
    }

    pub fn class_index(&self, label: &str) -> Result<usize> {
        self.labels
            .binary_search_by(|l| l.as_str().cmp(label))
            .map_err(|_| UnnError::UnknownLabel(label.to_string()))
    }

    /// Object indices of class `c`, in dataset order.
    pub fn members(&self, c: usize) -> &[usize] {
        &self.members[c]
    }

    pub fn is_discrete(&self) -> bool {
        self.objects.iter().all(|o| o.pdf().is_discrete())
    }

    /// Sub-dataset of the given object indices, keeping their order.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        Dataset::new(indices.iter().map(|&i| self.objects[i].clone()).collect())
    }

    pub fn into_objects(self) -> Vec<UncertainObject> {
        self.objects
    }
}
