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

//! Engine, storage, HTTP API and command line for the data profiler. The
//! algorithms live in `profiler-core`; this crate adds threads, files and
//! networking.

pub mod cli;
pub mod config;
pub mod engine;
pub mod exec;
pub mod http;
pub mod io;
pub mod registry;
pub mod results;
pub mod runtime;
pub mod spec;
