//! Full abstraction, executed: the symbolic verdict against concrete
//! bisimilarity under every closing solution.

use serde::Serialize;

use super::{closing_space, concrete_bisim, instantiate_pair, symbolic_bisim, BisimError};
use crate::domain::DomainConfig;
use crate::params::Instance;
use crate::syntax::Agent;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Crosscheck {
    pub symbolic: bool,
    /// Concrete bisimilarity held for every closing solution.
    pub concrete: bool,
    pub agree: bool,
    pub closings: usize,
    /// The first closing solution where the concrete check failed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failing: Option<String>,
}

pub fn crosscheck(inst: &dyn Instance, p: &Agent, q: &Agent, dom: &DomainConfig) -> Result<Crosscheck, BisimError> {
    let symbolic = symbolic_bisim(inst, p, q, dom)?.bisimilar;
    let closings = closing_space(inst, p, q, dom).enumerate();
    let mut failing = None;
    for s in &closings {
        let (ps, qs) = instantiate_pair(s, p, q)?;
        if !concrete_bisim(inst, &s.assertion, &ps, &qs, dom)?.bisimilar {
            failing = Some(s.to_string());
            break;
        }
    }
    let concrete = failing.is_none();
    Ok(Crosscheck {
        symbolic,
        concrete,
        agree: symbolic == concrete,
        closings: closings.len(),
        failing,
    })
}
