//! Laws of the nominal kernel on random agents and terms.

mod common;

use common::*;
use proptest::prelude::*;
use psi_core::registry_lookup;

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 1000,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn swapping_is_an_involution(p in pi_agent(), m in term(), a in name(), b in name()) {
        swap_involution(&p, &m, a, b).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn pi_semantics_is_equivariant(p in pi_agent(), m in name(), x in name(), a in name(), b in name()) {
        let pi = registry_lookup("pi").unwrap();
        equivariance(&*pi, &p, &psi_core::Term::Name(m), x, a, b).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn assign_semantics_is_equivariant(p in assign_agent(), x in name(), a in name(), b in name()) {
        let inst = registry_lookup("assign").unwrap();
        equivariance(&*inst, &p, &psi_core::Term::Int(2), x, a, b).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn identity_substitutions_change_nothing(p in pi_agent(), m in term(), x in name()) {
        subst_identity(&p, &m, x).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn alpha_equivalence_laws(p in pi_agent(), a in name(), b in name()) {
        alpha_laws(&p, a, b).map_err(TestCaseError::fail)?;
    }
}
