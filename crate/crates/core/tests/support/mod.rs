#![allow(dead_code)]

pub mod gradcheck;
pub mod ray_launch;
pub mod scenes;
