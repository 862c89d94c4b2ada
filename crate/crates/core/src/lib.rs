pub mod compactify;
pub mod decimal;
pub mod equilibria;
pub mod integrator;
pub mod interval;
pub mod lyapunov;
pub mod pipeline;
pub mod polyfield;
pub mod problem_file;
pub mod report;
