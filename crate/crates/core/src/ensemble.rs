//! Hard-voting ensembles of trained heads.
//!
//! A class wins outright when it collects strictly more votes than every
//! other class. Otherwise the prediction of the member with the highest
//! validation macro F1 is used, so the result never depends on member order.

use crate::dataio::Sample;
use crate::error::{Error, Result};
use crate::model::Checkpoint;
use crate::train::{predict, Metrics};

#[derive(Debug, Clone)]
pub struct EnsembleMember {
    pub checkpoint: Checkpoint,
}

impl EnsembleMember {
    pub fn new(checkpoint: Checkpoint) -> Self {
        Self { checkpoint }
    }

    pub fn val_f1(&self) -> f64 {
        self.checkpoint.meta.best_val_f1
    }
}

fn check_member_count(m: usize) -> Result<()> {
    if m < 3 || m.is_multiple_of(2) {
        return Err(Error::Config(format!(
            "hard voting needs an odd number of at least 3 members, got {m}"
        )));
    }
    Ok(())
}

fn check_f1_range(f1s: &[f64]) -> Result<()> {
    if let Some(f) = f1s.iter().find(|f| !(0.0..=1.0).contains(*f)) {
        return Err(Error::Config(format!("validation F1 {f} outside [0, 1]")));
    }
    Ok(())
}

fn check_f1s(f1s: &[f64]) -> Result<()> {
    check_f1_range(f1s)?;
    for (i, a) in f1s.iter().enumerate() {
        if f1s[i + 1..].contains(a) {
            return Err(Error::Config(format!(
                "two members share validation F1 {a}; the tie-break would be ambiguous"
            )));
        }
    }
    Ok(())
}

/// Combines one sample's member predictions.
pub fn hard_vote(predictions: &[usize], member_f1: &[f64]) -> Result<usize> {
    check_member_count(predictions.len())?;
    if member_f1.len() != predictions.len() {
        return Err(Error::Config(format!(
            "{} predictions but {} member scores",
            predictions.len(),
            member_f1.len()
        )));
    }
    check_f1s(member_f1)?;
    Ok(vote(predictions, member_f1))
}

fn vote(predictions: &[usize], member_f1: &[f64]) -> usize {
    let mut tally: Vec<(usize, usize)> = Vec::new();
    for &p in predictions {
        match tally.iter_mut().find(|(class, _)| *class == p) {
            Some((_, n)) => *n += 1,
            None => tally.push((p, 1)),
        }
    }
    let top = tally.iter().map(|&(_, n)| n).max().unwrap_or(0);
    let mut leaders = tally.iter().filter(|&&(_, n)| n == top);
    let first = leaders.next().map(|&(c, _)| c);
    if let (Some(class), None) = (first, leaders.next()) {
        return class;
    }
    let best = (0..predictions.len())
        .max_by(|&a, &b| member_f1[a].total_cmp(&member_f1[b]))
        .expect("at least one member");
    predictions[best]
}

#[derive(Debug, Clone)]
pub struct Ensemble {
    members: Vec<EnsembleMember>,
}

impl Ensemble {
    /// Rejects even or short member lists, heads with differing feature
    /// dimension or class count, and shared validation scores. Copies of one
    /// checkpoint may share a score since they always vote alike.
    pub fn new(members: Vec<EnsembleMember>) -> Result<Self> {
        check_member_count(members.len())?;
        check_f1_range(
            &members
                .iter()
                .map(EnsembleMember::val_f1)
                .collect::<Vec<_>>(),
        )?;
        for (i, a) in members.iter().enumerate() {
            for b in &members[i + 1..] {
                if a.val_f1() == b.val_f1() && a.checkpoint.params != b.checkpoint.params {
                    return Err(Error::Config(format!(
                        "two different members share validation F1 {}; the tie-break would be ambiguous",
                        a.val_f1()
                    )));
                }
            }
        }
        let dims = members[0].checkpoint.params.dims();
        for (i, m) in members.iter().enumerate().skip(1) {
            let d = m.checkpoint.params.dims();
            if d.embed != dims.embed || d.classes != dims.classes {
                return Err(Error::Config(format!(
                    "member {i} has {} features / {} classes, member 0 has {} / {}",
                    d.embed, d.classes, dims.embed, dims.classes
                )));
            }
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[EnsembleMember] {
        &self.members
    }

    pub fn member_f1s(&self) -> Vec<f64> {
        self.members.iter().map(EnsembleMember::val_f1).collect()
    }
}

#[derive(Debug, Clone)]
pub struct EnsembleReport {
    pub ensemble: Metrics,
    pub members: Vec<Metrics>,
}

/// Combines per-member prediction lists (`member_predictions[m][sample]`).
pub fn combine_predictions(
    member_predictions: &[Vec<usize>],
    member_f1: &[f64],
) -> Result<Vec<usize>> {
    check_member_count(member_predictions.len())?;
    check_f1s(member_f1)?;
    combine(member_predictions, member_f1)
}

fn combine(member_predictions: &[Vec<usize>], member_f1: &[f64]) -> Result<Vec<usize>> {
    let n = member_predictions[0].len();
    if member_predictions.iter().any(|p| p.len() != n) {
        return Err(Error::Dimension(
            "members predicted different sample counts".into(),
        ));
    }
    let mut column = vec![0; member_predictions.len()];
    Ok((0..n)
        .map(|i| {
            for (slot, preds) in column.iter_mut().zip(member_predictions) {
                *slot = preds[i];
            }
            vote(&column, member_f1)
        })
        .collect())
}

/// Scores every member alone and the hard-voting combination.
pub fn ensemble_evaluate(
    ensemble: &Ensemble,
    dataset: &[Sample],
    workers: usize,
) -> Result<EnsembleReport> {
    if dataset.is_empty() {
        return Err(Error::Data("cannot evaluate on an empty dataset".into()));
    }
    let dims = ensemble.members[0].checkpoint.params.dims();
    if dataset[0].speech.dim() != dims.embed {
        return Err(Error::Dimension(format!(
            "ensemble expects {}-dimensional features, data has {}",
            dims.embed,
            dataset[0].speech.dim()
        )));
    }
    let labels: Vec<usize> = dataset.iter().map(|s| s.label).collect();
    let member_predictions = ensemble
        .members
        .iter()
        .map(|m| predict(&m.checkpoint.params, dataset, workers))
        .collect::<Result<Vec<_>>>()?;
    let combined = combine(&member_predictions, &ensemble.member_f1s())?;
    let members = member_predictions
        .iter()
        .map(|p| Metrics::from_predictions(&labels, p, dims.classes))
        .collect::<Result<Vec<_>>>()?;
    Ok(EnsembleReport {
        ensemble: Metrics::from_predictions(&labels, &combined, dims.classes)?,
        members,
    })
}
