//! A verification workbench for psi-calculi: nominal data, parameterised
//! instances, concrete and symbolic operational semantics, constraint
//! solving over finite domains, and bisimulation checking.

pub mod bisim;
pub mod concrete;
pub mod constraints;
pub mod correspondence;
pub mod data;
pub mod domain;
pub mod gen;
pub mod instances;
pub mod lts;
pub mod nominal;
pub mod params;
pub mod symbolic;
pub mod syntax;

pub use data::{Assertion, Condition, Sym, Term};
pub use instances::{registry_lookup, requisite_pool, InstanceError, INSTANCE_KEYS};
pub use nominal::{Alpha, FreshSession, Name, NameSeq, Nominal, NominalError, Subst, Substitution};
pub use params::{check_requisites, Frame, Instance, Pool, RequisiteReport, RequisiteSamples};
pub use syntax::{check_guarded, frame_of, parse, parse_agent, Agent, ParseError, ParsedUnit};
pub use concrete::{early_transitions, late_transitions, ConcreteAction, ConcreteTransition, SemanticsError};
pub use domain::{int_literals, DomainConfig};
pub use constraints::{check_solution, solutions, Constraint, Solution};
pub use symbolic::{symbolic_transitions, SymbolicAction, SymbolicTransition};
pub use bisim::{
    concrete_bisim, crosscheck, Crosscheck, static_equivalent, symbolic_bisim, symbolic_static_equivalent, BisimError,
    ConcreteVerdict, SymbolicVerdict,
};
pub use lts::{build_lts, Lts, LtsMode};
