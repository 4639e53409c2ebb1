use super::field::OpticalField;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Combined {
    pub field: OpticalField,
    /// Total loss seen by each branch, dB.
    pub applied_loss_db: Vec<f64>,
}

/// Passive N:1 combiner. Every branch is moved to the first branch's frame,
/// attenuated by its own loss plus `excess_loss_db`, and summed.
pub fn combine(fields: &[OpticalField], per_branch_loss_db: &[f64], excess_loss_db: f64) -> Result<Combined> {
    let first = fields.first().ok_or_else(|| Error::invalid("combiner needs at least one input"))?;
    if per_branch_loss_db.len() != fields.len() {
        return Err(Error::config(format!(
            "{} branch losses given for {} inputs",
            per_branch_loss_db.len(),
            fields.len()
        )));
    }
    let mut acc = OpticalField::dark(first.len(), first.sample_rate, first.ref_offset);
    let mut applied = Vec::with_capacity(fields.len());
    for (f, &loss) in fields.iter().zip(per_branch_loss_db) {
        if f.sample_rate != first.sample_rate {
            return Err(Error::config("combiner inputs use different sample rates"));
        }
        if f.len() != first.len() {
            return Err(Error::Length(format!("combiner input has {} samples, expected {}", f.len(), first.len())));
        }
        let total = loss + excess_loss_db;
        let mut b = f.clone();
        b.apply_gain_db(-total);
        b.reframe(first.ref_offset);
        acc.envelope.iter_mut().zip(&b.envelope).for_each(|(a, x)| *a += x);
        applied.push(total);
    }
    Ok(Combined { field: acc, applied_loss_db: applied })
}
