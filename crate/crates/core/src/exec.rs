//! Pluggable task execution.
//!
//! Work is expressed as `n` independent indexed tasks. Executors may run
//! them in any order on any number of workers but must return results in
//! index order, so output never depends on the worker count.

use alloc::vec::Vec;

pub trait Executor: Sync {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs tasks one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}

/// Splits `0..len` into at most `parts` contiguous ranges of near-equal size.
pub fn chunk_ranges(len: usize, parts: usize) -> Vec<core::ops::Range<usize>> {
    let parts = parts.max(1).min(len.max(1));
    let base = len / parts;
    let extra = len % parts;
    let mut out = Vec::with_capacity(parts);
    let mut start = 0;
    for i in 0..parts {
        let size = base + usize::from(i < extra);
        out.push(start..start + size);
        start += size;
    }
    out
}
