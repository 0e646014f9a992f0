//! Certification engine for mode stability of the corotational wave maps
//! self-similar blowup.

pub mod algebra;
pub mod certify;
pub mod cli;
pub mod fuchsian;
pub mod recurrence;
pub mod shooting;
pub mod simcoords;
pub mod transform;
