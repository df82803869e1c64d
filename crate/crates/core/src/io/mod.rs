pub mod csv;
pub mod spec;
pub mod svg;
