pub mod checks;
pub mod classical;
pub mod dags;
