//! Concrete worlds: chess through a one-square eye and a corridor of doors.

pub mod chess;
pub mod doors;
