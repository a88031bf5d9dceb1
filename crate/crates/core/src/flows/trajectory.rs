use std::fmt::Write as _;

use crate::liegroup::{Rotation, UnitVector};

/// A state that can be written as one CSV row.
pub trait CsvState {
    fn header() -> &'static str;
    fn write_fields(&self, out: &mut String);
}

impl CsvState for UnitVector {
    fn header() -> &'static str {
        "t,x1,x2,x3"
    }
    fn write_fields(&self, out: &mut String) {
        for v in self.coords().iter() {
            let _ = write!(out, ",{v:.16e}");
        }
    }
}

impl CsvState for Rotation {
    fn header() -> &'static str {
        "t,k00,k01,k02,k10,k11,k12,k20,k21,k22"
    }
    fn write_fields(&self, out: &mut String) {
        let m = self.matrix();
        for i in 0..3 {
            for j in 0..3 {
                let _ = write!(out, ",{:.16e}", m[(i, j)]);
            }
        }
    }
}

/// Sampled solution: strictly increasing times and the state at each.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    pub scenario_hash: u64,
}

impl<S: Clone> Trajectory<S> {
    pub fn new(scenario_hash: u64) -> Self {
        Self { times: Vec::new(), states: Vec::new(), scenario_hash }
    }

    pub fn push(&mut self, t: f64, state: S) {
        debug_assert!(self.times.last().is_none_or(|last| t > *last));
        self.times.push(t);
        self.states.push(state);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, &S)> {
        self.times.last().map(|t| (*t, self.states.last().unwrap()))
    }

    /// State stored at exactly time `t`.
    pub fn at(&self, t: f64) -> Option<&S> {
        self.times.iter().position(|s| *s == t).map(|i| &self.states[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &S)> {
        self.times.iter().copied().zip(self.states.iter())
    }

    pub fn max_gap(&self) -> f64 {
        self.times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }
}

impl<S: Clone + CsvState> Trajectory<S> {
    /// CSV with 17 significant digits per value.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.len() * 120);
        out.push_str(S::header());
        out.push('\n');
        for (t, s) in self.iter() {
            let _ = write!(out, "{t:.16e}");
            s.write_fields(&mut out);
            out.push('\n');
        }
        out
    }
}
