#![cfg_attr(not(feature = "std"), no_std)]
extern crate alloc;

pub mod fiber;
pub mod games;
pub mod polish;
pub mod rational;
pub mod scattered;
pub mod seqcore;
pub mod sorgenfrey;
