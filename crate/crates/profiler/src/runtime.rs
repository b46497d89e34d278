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

//! A [`Runtime`] backed by a dedicated rayon pool, with cooperative
//! cancellation, a wall-clock budget and a best-effort memory budget.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use profiler_core::runtime::{Interrupt, Runtime};
use rayon::prelude::*;

/// State shared between a running job and whoever controls it.
#[derive(Debug, Default)]
pub struct TaskControl {
    cancelled: AtomicBool,
    /// Bit pattern of a non-negative `f64`; the bit order of such values
    /// matches their numeric order, so `fetch_max` keeps progress monotone.
    progress: AtomicU64,
    /// Microseconds since the job started at the latest checkpoint, and the
    /// longest gap seen between two consecutive checkpoints.
    last_checkpoint_us: AtomicU64,
    max_gap_us: AtomicU64,
}

impl TaskControl {
    pub fn new() -> Arc<Self> {
        Arc::new(Self::default())
    }

    pub fn cancel(&self) {
        self.cancelled.store(true, Ordering::SeqCst);
    }

    pub fn is_cancelled(&self) -> bool {
        self.cancelled.load(Ordering::SeqCst)
    }

    /// Raises the reported progress; lower values are ignored.
    pub fn report(&self, progress: f64) {
        let p = if progress.is_nan() { 0.0 } else { progress.clamp(0.0, 1.0) };
        self.progress.fetch_max(p.to_bits(), Ordering::SeqCst);
    }

    pub fn progress(&self) -> f64 {
        f64::from_bits(self.progress.load(Ordering::SeqCst))
    }

    fn record_checkpoint(&self, at_us: u64) {
        let previous = self.last_checkpoint_us.fetch_max(at_us, Ordering::SeqCst);
        self.max_gap_us.fetch_max(at_us.saturating_sub(previous), Ordering::SeqCst);
    }

    /// Longest observed interval between checkpoints.
    pub fn max_checkpoint_gap(&self) -> Duration {
        Duration::from_micros(self.max_gap_us.load(Ordering::SeqCst))
    }
}

#[derive(Debug, Clone, Default)]
pub struct Budgets {
    pub time: Option<Duration>,
    pub memory_bytes: Option<usize>,
}

pub struct PoolRuntime {
    pool: rayon::ThreadPool,
    control: Arc<TaskControl>,
    started: Instant,
    budgets: Budgets,
    /// Maps the job-local progress in `[0, 1]` onto a slice of the task's
    /// overall progress, for multi-phase jobs.
    phase: parking_lot::Mutex<(f64, f64)>,
}

impl PoolRuntime {
    pub fn new(threads: usize, control: Arc<TaskControl>, budgets: Budgets) -> std::io::Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .thread_name(|i| format!("profiler-worker-{i}"))
            .build()
            .map_err(std::io::Error::other)?;
        Ok(PoolRuntime {
            pool,
            control,
            started: Instant::now(),
            budgets,
            phase: parking_lot::Mutex::new((0.0, 1.0)),
        })
    }

    /// A single-threaded runtime with no budgets, for one-shot CLI use.
    pub fn unbounded(threads: usize) -> std::io::Result<Self> {
        Self::new(threads, TaskControl::new(), Budgets::default())
    }

    pub fn control(&self) -> &Arc<TaskControl> {
        &self.control
    }

    /// Subsequent checkpoints report progress inside `[start, end]`.
    pub fn set_phase(&self, start: f64, end: f64) {
        *self.phase.lock() = (start, end);
        self.control.report(start);
    }

    /// Checks cancellation and the time budget without reporting progress.
    pub fn check(&self) -> Result<(), Interrupt> {
        self.control.record_checkpoint(self.started.elapsed().as_micros() as u64);
        if self.control.is_cancelled() {
            return Err(Interrupt::Cancelled);
        }
        if let Some(limit) = self.budgets.time {
            if self.started.elapsed() > limit {
                return Err(Interrupt::TimeBudget);
            }
        }
        Ok(())
    }
}

impl Runtime for PoolRuntime {
    fn map<T: Send, F: Fn(usize) -> T + Sync>(&self, len: usize, f: F) -> Vec<T> {
        let f = &f;
        self.pool.install(|| (0..len).into_par_iter().map(f).collect())
    }

    fn checkpoint(&self, progress: f64, bytes_in_use: usize) -> Result<(), Interrupt> {
        self.check()?;
        if let Some(limit) = self.budgets.memory_bytes {
            if bytes_in_use > limit {
                return Err(Interrupt::MemoryBudget { used: bytes_in_use, limit });
            }
        }
        let (start, end) = *self.phase.lock();
        self.control.report(start + (end - start) * progress.clamp(0.0, 1.0));
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order_across_threads() {
        let rt = PoolRuntime::unbounded(4).unwrap();
        assert_eq!(rt.map(100, |i| i * 2), (0..100).map(|i| i * 2).collect::<Vec<_>>());
    }

    #[test]
    fn progress_never_decreases() {
        let c = TaskControl::new();
        c.report(0.5);
        c.report(0.2);
        assert_eq!(c.progress(), 0.5);
        c.report(2.0);
        assert_eq!(c.progress(), 1.0);
    }

    #[test]
    fn phases_scale_progress() {
        let rt = PoolRuntime::unbounded(1).unwrap();
        rt.set_phase(0.5, 1.0);
        rt.checkpoint(0.5, 0).unwrap();
        assert_eq!(rt.control().progress(), 0.75);
    }

    #[test]
    fn budgets_interrupt() {
        let c = TaskControl::new();
        let rt = PoolRuntime::new(1, c.clone(), Budgets { time: None, memory_bytes: Some(10) }).unwrap();
        assert_eq!(rt.checkpoint(0.1, 11), Err(Interrupt::MemoryBudget { used: 11, limit: 10 }));
        c.cancel();
        assert_eq!(rt.checkpoint(0.1, 0), Err(Interrupt::Cancelled));
        let rt = PoolRuntime::new(1, TaskControl::new(), Budgets { time: Some(Duration::ZERO), memory_bytes: None })
            .unwrap();
        std::thread::sleep(Duration::from_millis(2));
        assert_eq!(rt.checkpoint(0.1, 0), Err(Interrupt::TimeBudget));
    }
}
