//! Labeled linear feasibility systems.

use alloc::string::String;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Le,
    Ge,
}

/// One sparse row `Σ coeffs · x  (relation)  rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub label: String,
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Row {
    pub fn lhs(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates the row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let d = self.lhs(x) - self.rhs;
        match self.relation {
            Relation::Eq => d.abs(),
            Relation::Le => d.max(0.0),
            Relation::Ge => (-d).max(0.0),
        }
    }
}

/// Rows over bounded variables: `lower[j] ≤ x[j] ≤ upper[j]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConstraintSystem {
    pub vars: Vec<String>,
    pub lower: Vec<f64>,
    pub upper: Vec<Option<f64>>,
    pub rows: Vec<Row>,
}

impl ConstraintSystem {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a nonnegative variable.
    pub fn add_var(&mut self, label: String) -> usize {
        self.add_bounded_var(label, 0.0, None)
    }

    pub fn add_bounded_var(&mut self, label: String, lower: f64, upper: Option<f64>) -> usize {
        self.vars.push(label);
        self.lower.push(lower);
        self.upper.push(upper);
        self.vars.len() - 1
    }

    /// Adds a row, merging repeated variable indices and dropping zeros.
    pub fn add_row(&mut self, label: String, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) {
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(coeffs.len());
        for (j, a) in coeffs {
            match merged.iter_mut().find(|(k, _)| *k == j) {
                Some(entry) => entry.1 += a,
                None => merged.push((j, a)),
            }
        }
        merged.retain(|&(_, a)| a != 0.0);
        merged.sort_by_key(|&(j, _)| j);
        self.rows.push(Row { label, coeffs: merged, relation, rhs });
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_index(&self, label: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == label)
    }

    pub fn row_index(&self, label: &str) -> Option<usize> {
        self.rows.iter().position(|r| r.label == label)
    }
}
