use std::cmp::Ordering;

use pbio::json::JsonRecord;
use serde_json::{Number, Value as Json};

use crate::error::EngineError;
use crate::model::{Comparator, Condition, Literal, ProcessDefinition, Topology};

/// Outcome of evaluating an XOR split's branches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChosenBranch {
    /// Index into the definition's control edges.
    pub edge: usize,
    /// Position among the split's conditional branches, `None` for the default.
    pub condition: Option<usize>,
}

/// Picks the first branch (in declaration order) whose condition holds on
/// `output`, falling back to the default branch. A condition on a field the
/// output lacks is an error, never a silent fall-through.
pub fn evaluate_conditions(
    def: &ProcessDefinition,
    topo: &Topology,
    split: usize,
    output: &JsonRecord,
) -> Result<ChosenBranch, EngineError> {
    let activity = &def.activities[split].name;
    let mut default = None;
    let mut position = 0;
    for &e in &topo.outgoing[split] {
        let edge = &def.control_edges[e];
        let Some(cond) = &edge.condition else {
            if edge.is_default {
                default = Some(e);
            }
            continue;
        };
        let value = output
            .get(&cond.field)
            .ok_or_else(|| EngineError::MissingField { activity: activity.clone(), field: cond.field.clone() })?;
        let holds = condition_holds(cond, value).ok_or_else(|| EngineError::ConditionTypeMismatch {
            activity: activity.clone(),
            field: cond.field.clone(),
        })?;
        if holds {
            return Ok(ChosenBranch { edge: e, condition: Some(position) });
        }
        position += 1;
    }
    let edge = default.expect("validated XOR splits have a default branch");
    Ok(ChosenBranch { edge, condition: None })
}

/// `None` when the value and literal are not comparable.
pub fn condition_holds(cond: &Condition, value: &Json) -> Option<bool> {
    let ord = match (&cond.literal, value) {
        (Literal::Number(lit), Json::Number(v)) => compare_numbers(v, lit)?,
        (Literal::Text(lit), Json::String(v)) if !cond.op.is_ordering() => v.as_str().cmp(lit.as_str()),
        _ => return None,
    };
    Some(match cond.op {
        Comparator::Eq => ord == Ordering::Equal,
        Comparator::Ne => ord != Ordering::Equal,
        Comparator::Lt => ord == Ordering::Less,
        Comparator::Le => ord != Ordering::Greater,
        Comparator::Gt => ord == Ordering::Greater,
        Comparator::Ge => ord != Ordering::Less,
    })
}

fn as_integer(n: &Number) -> Option<i128> {
    n.as_i64().map(i128::from).or_else(|| n.as_u64().map(i128::from))
}

fn compare_numbers(a: &Number, b: &Number) -> Option<Ordering> {
    match (as_integer(a), as_integer(b)) {
        (Some(x), Some(y)) => Some(x.cmp(&y)),
        _ => a.as_f64()?.partial_cmp(&b.as_f64()?),
    }
}
