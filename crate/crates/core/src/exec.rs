//! Trial execution. With the `parallel` feature, trials fan out over rayon;
//! otherwise (or with one thread) they run in a plain loop. Results come back
//! in trial order either way.

use std::fmt;
use std::num::NonZeroUsize;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    /// rayon's global pool (one worker per core).
    #[default]
    Auto,
    Threads(NonZeroUsize),
}

impl FromStr for Parallelism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Self::Auto);
        }
        s.parse::<NonZeroUsize>()
            .map(Self::Threads)
            .map_err(|_| Error::InvalidConfig(format!("threads must be `auto` or a positive integer, got `{s}`")))
    }
}

impl fmt::Display for Parallelism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Auto => f.write_str("auto"),
            Self::Threads(n) => write!(f, "{n}"),
        }
    }
}

impl Serialize for Parallelism {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Parallelism {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

enum Mode {
    Sequential,
    #[cfg(feature = "parallel")]
    Global,
    #[cfg(feature = "parallel")]
    Pool(rayon::ThreadPool),
}

pub struct Executor {
    mode: Mode,
}

impl fmt::Debug for Executor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Executor").field("threads", &self.threads()).finish()
    }
}

impl Default for Executor {
    fn default() -> Self {
        Self::new(Parallelism::Auto).unwrap_or_else(|_| Self::sequential())
    }
}

impl Executor {
    pub fn sequential() -> Self {
        Self { mode: Mode::Sequential }
    }

    /// Without the `parallel` feature every setting runs sequentially.
    pub fn new(parallelism: Parallelism) -> Result<Self> {
        #[cfg(feature = "parallel")]
        {
            let mode = match parallelism {
                Parallelism::Auto => Mode::Global,
                Parallelism::Threads(n) if n.get() == 1 => Mode::Sequential,
                Parallelism::Threads(n) => Mode::Pool(
                    rayon::ThreadPoolBuilder::new()
                        .num_threads(n.get())
                        .build()
                        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?,
                ),
            };
            Ok(Self { mode })
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = parallelism;
            Ok(Self::sequential())
        }
    }

    pub fn threads(&self) -> usize {
        match &self.mode {
            Mode::Sequential => 1,
            #[cfg(feature = "parallel")]
            Mode::Global => rayon::current_num_threads(),
            #[cfg(feature = "parallel")]
            Mode::Pool(pool) => pool.current_num_threads(),
        }
    }

    /// Evaluates `f(0), ..., f(count - 1)` and returns them in index order.
    pub fn map<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match &self.mode {
            Mode::Sequential => (0..count).map(f).collect(),
            #[cfg(feature = "parallel")]
            Mode::Global => {
                use rayon::prelude::*;
                (0..count).into_par_iter().map(f).collect()
            }
            #[cfg(feature = "parallel")]
            Mode::Pool(pool) => {
                use rayon::prelude::*;
                pool.install(|| (0..count).into_par_iter().map(f).collect())
            }
        }
    }
}
