pub mod cli;
pub mod drive;
pub mod effective;
pub mod error;
pub mod fock;
pub mod functionals;
pub mod linalg;
pub mod magnus;
pub mod optimizer;
pub mod propagate;
pub mod quadrature;
