//! Recall@K and mean Recall@K over grouped predictions.
//!
//! A [`SceneGroup`] models one scene's candidate instances. Within a group,
//! each instance is predicted as its argmax class, the top-k instances by
//! predicted-class score are selected (ties broken by ascending instance id),
//! and a selected instance whose argmax equals its true class is a hit. Hits
//! and ground-truth counts are pooled over groups; per-class recall is
//! hits/count, and mean recall is the unweighted mean over non-background
//! classes that actually occur.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::error::{Error, Result};

/// One scored candidate within a scene.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub id: u64,
    pub true_class: usize,
    pub scores: Vec<f64>,
}

impl Instance {
    pub fn new(id: u64, true_class: usize, scores: Vec<f64>) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "instance {id} has an empty score vector"
            )));
        }
        if true_class >= scores.len() {
            return Err(Error::InvalidArgument(format!(
                "instance {id}: true class {true_class} out of range for {} scores",
                scores.len()
            )));
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "instance {id} has a non-finite score"
            )));
        }
        Ok(Self {
            id,
            true_class,
            scores,
        })
    }

    /// Argmax class; ties resolve to the lowest index.
    pub fn predicted_class(&self) -> usize {
        let mut best = 0;
        for (i, &s) in self.scores.iter().enumerate() {
            if s > self.scores[best] {
                best = i;
            }
        }
        best
    }
}

/// A nonempty set of instances ranked together.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneGroup {
    instances: Vec<Instance>,
}

impl SceneGroup {
    pub fn new(instances: Vec<Instance>) -> Result<Self> {
        let first = instances.first().ok_or_else(|| {
            Error::InvalidArgument("scene group needs at least one instance".into())
        })?;
        let width = first.scores.len();
        if let Some(bad) = instances.iter().find(|i| i.scores.len() != width) {
            return Err(Error::DimensionMismatch(format!(
                "instance {} has {} scores, group width is {width}",
                bad.id,
                bad.scores.len()
            )));
        }
        Ok(Self { instances })
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn n_classes(&self) -> usize {
        self.instances[0].scores.len()
    }
}

/// Pooled per-class and mean recall at a fixed K.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub k: usize,
    /// Recall for every class with nonzero ground truth (background included
    /// here; it is excluded only from `mean_recall`).
    pub per_class: BTreeMap<usize, f64>,
    /// Unweighted mean over non-background classes with nonzero ground truth.
    pub mean_recall: f64,
    /// Ground-truth totals for all classes.
    pub counts: Vec<usize>,
    pub background: Option<usize>,
}

/// Computes the report for the given K. `background`, when set, names the
/// class excluded from the mean (and from the CSV export).
pub fn recall_at_k(
    groups: &[SceneGroup],
    k: usize,
    background: Option<usize>,
) -> Result<EvalReport> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be ≥ 1".into()));
    }
    let first = groups.first().ok_or_else(|| {
        Error::InvalidArgument("recall_at_k needs at least one scene group".into())
    })?;
    let n = first.n_classes();
    if let Some(bad) = groups.iter().find(|g| g.n_classes() != n) {
        return Err(Error::DimensionMismatch(format!(
            "group score width {} differs from {n}",
            bad.n_classes()
        )));
    }
    if let Some(bg) = background {
        if bg >= n {
            return Err(Error::InvalidArgument(format!(
                "background index {bg} out of range for {n} classes"
            )));
        }
    }

    let mut counts = vec![0usize; n];
    let mut hits = vec![0usize; n];
    for group in groups {
        for instance in group.instances() {
            counts[instance.true_class] += 1;
        }
        let mut ranked: Vec<(f64, u64, usize, usize)> = group
            .instances()
            .iter()
            .map(|instance| {
                let predicted = instance.predicted_class();
                (
                    instance.scores[predicted],
                    instance.id,
                    predicted,
                    instance.true_class,
                )
            })
            .collect();
        ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        for &(_, _, predicted, true_class) in ranked.iter().take(k) {
            if predicted == true_class {
                hits[true_class] += 1;
            }
        }
    }

    let mut per_class = BTreeMap::new();
    for class in 0..n {
        if counts[class] > 0 {
            per_class.insert(class, hits[class] as f64 / counts[class] as f64);
        }
    }
    let included: Vec<f64> = per_class
        .iter()
        .filter(|(&class, _)| background != Some(class))
        .map(|(_, &recall)| recall)
        .collect();
    let mean_recall = if included.is_empty() {
        0.0
    } else {
        included.iter().sum::<f64>() / included.len() as f64
    };
    Ok(EvalReport {
        k,
        per_class,
        mean_recall,
        counts,
        background,
    })
}

impl EvalReport {
    fn class_name(&self, class: usize, labels: Option<&[String]>) -> String {
        match labels {
            Some(names) => names[class].clone(),
            None => format!("class{class}"),
        }
    }

    fn check_labels(&self, labels: Option<&[String]>) -> Result<()> {
        if let Some(names) = labels {
            if names.len() != self.counts.len() {
                return Err(Error::DimensionMismatch(format!(
                    "{} labels for {} classes",
                    names.len(),
                    self.counts.len()
                )));
            }
        }
        Ok(())
    }

    /// JSON object with `k`, `mean_recall`, `per_class`, `counts`.
    pub fn to_json(&self, labels: Option<&[String]>) -> Result<Value> {
        self.check_labels(labels)?;
        let mut per_class = serde_json::Map::new();
        for (&class, &recall) in &self.per_class {
            per_class.insert(self.class_name(class, labels), json!(recall));
        }
        let mut count_map = serde_json::Map::new();
        for (class, &count) in self.counts.iter().enumerate() {
            count_map.insert(self.class_name(class, labels), json!(count));
        }
        Ok(json!({
            "k": self.k,
            "mean_recall": self.mean_recall,
            "per_class": Value::Object(per_class),
            "counts": Value::Object(count_map),
        }))
    }

    /// CSV `label,count,recall` over non-background classes with ground
    /// truth, ordered by descending count (head classes first), ties by
    /// ascending class index. Recalls carry 17 significant digits.
    pub fn to_csv(&self, labels: Option<&[String]>) -> Result<String> {
        self.check_labels(labels)?;
        let mut rows: Vec<(usize, usize, f64)> = self
            .per_class
            .iter()
            .filter(|(&class, _)| self.background != Some(class))
            .map(|(&class, &recall)| (class, self.counts[class], recall))
            .collect();
        rows.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let mut out = String::from("label,count,recall\n");
        for (class, count, recall) in rows {
            out.push_str(&format!(
                "{},{count},{recall:.16e}\n",
                self.class_name(class, labels)
            ));
        }
        Ok(out)
    }
}
