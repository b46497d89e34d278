// Copyright 2026 The Profiler Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Execution hooks for long-running algorithms.
//!
//! Algorithms call [`Runtime::checkpoint`] between units of work and fan out
//! independent work through [`Runtime::map`]. The std companion crate
//! supplies a thread-pool runtime with cancellation and budgets; this crate
//! only ships [`Sequential`].

use alloc::vec::Vec;

/// Why a run stopped early.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum Interrupt {
    #[error("cancelled")]
    Cancelled,
    #[error("time budget exceeded")]
    TimeBudget,
    #[error("memory budget exceeded: {used} bytes in use, limit {limit}")]
    MemoryBudget { used: usize, limit: usize },
}

pub trait Runtime: Sync {
    /// Evaluates `f(0) .. f(len - 1)` and returns the results in index order.
    /// Implementations may run calls concurrently.
    fn map<T, F>(&self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync;

    /// Reports progress in `[0, 1]` and the caller's current working-set
    /// size. Returns an error when the run should stop.
    fn checkpoint(&self, progress: f64, bytes_in_use: usize) -> Result<(), Interrupt> {
        let _ = (progress, bytes_in_use);
        Ok(())
    }
}

/// Runs everything on the calling thread and never interrupts.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Runtime for Sequential {
    fn map<T, F>(&self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        (0..len).map(f).collect()
    }
}
