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

//! Dependency discovery and validation over columnar tables.
//!
//! This crate is `no_std` (it needs `alloc`). It holds the algorithms only:
//! CSV decoding from an in-memory string, dictionary-encoded tables, stripped
//! partitions, functional dependency discovery (exact and approximate),
//! metric FD validation, unary inclusion dependencies, frequent itemsets and
//! association rules, column statistics, and the typo-candidate pipeline.
//! File IO, threading, and the task engine live in the `profiler` crate.

#![cfg_attr(not(test), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod arm;
pub mod colset;
pub mod csv;
pub mod fd;
pub mod ind;
pub mod mfd;
pub mod pli;
pub mod runtime;
pub mod stats;
pub mod table;
pub mod typo;

pub use colset::ColumnSet;
pub use pli::StrippedPartition;
pub use runtime::{Interrupt, Runtime, Sequential};
pub use table::{Column, DatasetError, NullMode, Table, ValueType};
