//! Chemical reaction network analysis: structure, elementary flux modes,
//! network translation, and steady-state parametrization.

pub mod blp;
pub mod crn;
pub mod deadline;
pub mod efm;
pub mod gcrn;
pub mod io;
pub mod linalg;
pub mod pipeline;
pub mod r2r;
pub mod report;
pub mod translate;
