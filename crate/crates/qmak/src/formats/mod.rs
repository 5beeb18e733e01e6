pub mod certificate;
pub mod density;
pub mod dimacs;
pub mod state;
