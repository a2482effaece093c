//! Almost-complex structures, the Nijenhuis tensor and the covariant exterior
//! derivative on tangent-bundle-valued forms, with the identities relating them.

mod form;
mod identities;
mod nijenhuis;
mod structure;

pub use form::{
    covariant_derivative, dnabla, dnabla_at, FormJet, VectorFieldSpec, VectorValuedForm,
};
pub use identities::{
    check_anticommute, check_eq1, check_eq2, cyclic_curvature_sum, Residual, StructureAtPoint,
};
pub use nijenhuis::{lie_bracket, nijenhuis, nijenhuis_tensor, VectorJet};
pub use structure::{make_ac_field, standard_j0, ACStructureField};
