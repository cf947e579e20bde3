pub mod cantor;
pub mod cb;
pub mod map;
pub mod ordinal;
