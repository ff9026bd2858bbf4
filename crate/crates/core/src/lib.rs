pub mod angular;
pub mod constants;
pub mod material;
pub mod quadrature;
pub mod cp;
pub mod spectroscopy;
pub mod scenario;
pub mod validate;
