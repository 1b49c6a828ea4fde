//! A small linear/mixed-integer model representation.
//!
//! The rest of the crate builds its optimisation models through [`Model`]:
//! named variables with bounds and objective coefficients, and named linear
//! rows.  Models that contain only continuous variables can be solved
//! directly with [`Model::solve`] (a simplex backend); models with binary
//! variables are meant to be written out in LP format for an external
//! solver, or turned into a pure LP via [`Model::substitute`].

mod format;

pub use format::{parse_lp, ParseError};

use std::collections::HashMap;
use std::io;

use thiserror::Error;

/// Handle to a variable of a [`Model`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(usize);

impl VarId {
    /// Position of the variable in the model's declaration order.
    pub fn index(self) -> usize {
        self.0
    }
}

/// Continuous or binary domain of a variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
    /// Coefficient of the variable in the (minimised) objective.
    pub objective: f64,
}

/// Direction of a linear row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub name: String,
    /// One entry per variable; duplicate variables are merged on insertion.
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// Errors from [`Model::solve`] and [`Model::solve_mip`].
#[derive(Debug, Error)]
pub enum SolveError {
    #[error("model is infeasible")]
    Infeasible,
    #[error("objective is unbounded")]
    Unbounded,
    #[error("model has binary variables; substitute or branch before solving as an LP")]
    BinaryVariables,
    #[error("solver failed: {0}")]
    Numerical(String),
}

/// Errors from [`Model::substitute`].
#[derive(Debug, Error)]
pub enum SubstituteError {
    #[error("row {row} reduces to an unsatisfiable constant relation")]
    InconsistentRow { row: String },
}

/// A solved continuous model: one value per variable plus the objective
/// (including any constant offset of the model).
#[derive(Debug, Clone)]
pub struct LpSolution {
    values: Vec<f64>,
    objective: f64,
}

impl LpSolution {
    pub fn objective(&self) -> f64 {
        self.objective
    }

    pub fn value(&self, var: VarId) -> f64 {
        self.values[var.0]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// A named minimisation model over continuous and binary variables.
#[derive(Debug, Clone, Default)]
pub struct Model {
    name: String,
    vars: Vec<Variable>,
    rows: Vec<Row>,
    objective_offset: f64,
    by_name: HashMap<String, VarId>,
}

impl Model {
    pub fn new(name: impl Into<String>) -> Self {
        Model {
            name: name.into(),
            ..Model::default()
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Adds a variable.  Names must be unique; a duplicate name is a
    /// programming error and panics.
    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        kind: VarKind,
        lower: f64,
        upper: f64,
        objective: f64,
    ) -> VarId {
        let name = name.into();
        assert!(
            lower <= upper,
            "variable {name}: lower bound {lower} exceeds upper bound {upper}"
        );
        let id = VarId(self.vars.len());
        let previous = self.by_name.insert(name.clone(), id);
        assert!(previous.is_none(), "duplicate variable name {name}");
        self.vars.push(Variable {
            name,
            kind,
            lower,
            upper,
            objective,
        });
        id
    }

    /// Adds a row.  Terms mentioning the same variable are merged and terms
    /// with a zero coefficient are dropped.
    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        terms: impl IntoIterator<Item = (VarId, f64)>,
        sense: Sense,
        rhs: f64,
    ) {
        let mut merged: Vec<(VarId, f64)> = Vec::new();
        for (var, coef) in terms {
            assert!(var.0 < self.vars.len(), "row references unknown variable");
            match merged.iter_mut().find(|(v, _)| *v == var) {
                Some((_, c)) => *c += coef,
                None => merged.push((var, coef)),
            }
        }
        merged.retain(|(_, c)| *c != 0.0);
        self.rows.push(Row {
            name: name.into(),
            terms: merged,
            sense,
            rhs,
        });
    }

    pub fn var(&self, id: VarId) -> &Variable {
        &self.vars[id.0]
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.by_name.get(name).copied()
    }

    pub fn vars(&self) -> impl Iterator<Item = (VarId, &Variable)> {
        self.vars.iter().enumerate().map(|(i, v)| (VarId(i), v))
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Constant added to the objective value (cost terms that do not depend
    /// on any variable).
    pub fn objective_offset(&self) -> f64 {
        self.objective_offset
    }

    pub fn set_objective_offset(&mut self, offset: f64) {
        self.objective_offset = offset;
    }

    pub fn has_binary_vars(&self) -> bool {
        self.vars.iter().any(|v| v.kind == VarKind::Binary)
    }

    /// Returns a copy of the model with every assigned variable replaced by
    /// its value: assigned columns disappear, their contribution moves into
    /// row right-hand sides and the objective offset.  Rows whose variables
    /// are all assigned are checked against their right-hand side (within
    /// `1e-9`) and dropped.
    pub fn substitute(
        &self,
        assignment: &HashMap<VarId, f64>,
    ) -> Result<Model, SubstituteError> {
        let mut out = Model::new(self.name.clone());
        let mut remap: Vec<Option<VarId>> = vec![None; self.vars.len()];
        for (id, var) in self.vars.iter().enumerate() {
            match assignment.get(&VarId(id)) {
                Some(value) => {
                    debug_assert!(
                        *value >= var.lower - 1e-9 && *value <= var.upper + 1e-9,
                        "substituted value {} outside bounds of {}",
                        value,
                        var.name
                    );
                    out.objective_offset += var.objective * value;
                }
                None => {
                    remap[id] = Some(out.add_var(
                        var.name.clone(),
                        var.kind,
                        var.lower,
                        var.upper,
                        var.objective,
                    ));
                }
            }
        }
        out.objective_offset += self.objective_offset;
        for row in &self.rows {
            let mut terms = Vec::with_capacity(row.terms.len());
            let mut rhs = row.rhs;
            for &(var, coef) in &row.terms {
                match remap[var.0] {
                    Some(new_id) => terms.push((new_id, coef)),
                    None => rhs -= coef * assignment[&var],
                }
            }
            if terms.is_empty() {
                let ok = match row.sense {
                    Sense::Le => 0.0 <= rhs + 1e-9,
                    Sense::Ge => 0.0 >= rhs - 1e-9,
                    Sense::Eq => rhs.abs() <= 1e-9,
                };
                if !ok {
                    return Err(SubstituteError::InconsistentRow {
                        row: row.name.clone(),
                    });
                }
            } else {
                out.rows.push(Row {
                    name: row.name.clone(),
                    terms,
                    sense: row.sense,
                    rhs,
                });
            }
        }
        Ok(out)
    }

    /// Solves the model as a pure LP with a simplex backend.  Fails with
    /// [`SolveError::BinaryVariables`] if binary variables are present.
    pub fn solve(&self) -> Result<LpSolution, SolveError> {
        if self.has_binary_vars() {
            return Err(SolveError::BinaryVariables);
        }
        self.solve_backend(false)
    }

    /// Solves the model including its binary variables by branch and bound.
    /// Intended for cross-checks on very small models.
    pub fn solve_mip(&self) -> Result<LpSolution, SolveError> {
        self.solve_backend(true)
    }

    fn solve_backend(&self, mip: bool) -> Result<LpSolution, SolveError> {
        let mut problem = microlp::Problem::new(microlp::OptimizationDirection::Minimize);
        let mut handles = Vec::with_capacity(self.vars.len());
        for var in &self.vars {
            let handle = match var.kind {
                VarKind::Continuous => problem.add_var(var.objective, (var.lower, var.upper)),
                VarKind::Binary if mip => {
                    problem.add_integer_var(var.objective, (var.lower as i32, var.upper as i32))
                }
                VarKind::Binary => problem.add_var(var.objective, (var.lower, var.upper)),
            };
            handles.push(handle);
        }
        for row in &self.rows {
            let expr: Vec<(microlp::Variable, f64)> =
                row.terms.iter().map(|&(v, c)| (handles[v.0], c)).collect();
            let op = match row.sense {
                Sense::Le => microlp::ComparisonOp::Le,
                Sense::Ge => microlp::ComparisonOp::Ge,
                Sense::Eq => microlp::ComparisonOp::Eq,
            };
            problem.add_constraint(expr, op, row.rhs);
        }
        match problem.solve() {
            Ok(solution) => {
                let values = handles.iter().map(|&h| solution[h]).collect();
                Ok(LpSolution {
                    values,
                    objective: solution.objective() + self.objective_offset,
                })
            }
            Err(microlp::Error::Infeasible) => Err(SolveError::Infeasible),
            Err(microlp::Error::Unbounded) => Err(SolveError::Unbounded),
            Err(microlp::Error::InternalError(msg)) => Err(SolveError::Numerical(msg)),
        }
    }

    /// Writes the model in LP file format.
    pub fn write_lp(&self, out: &mut impl io::Write) -> io::Result<()> {
        format::write_lp(self, out)
    }

    pub fn to_lp_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_lp(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("LP output is ASCII")
    }

    /// Structural equality up to variable/row declaration order and zero
    /// coefficients; used to check that writing and re-parsing a model
    /// preserves it.
    pub fn same_model(&self, other: &Model) -> bool {
        if self.num_vars() != other.num_vars() || self.num_rows() != other.num_rows() {
            return false;
        }
        if (self.objective_offset - other.objective_offset).abs() > 0.0 {
            return false;
        }
        for var in &self.vars {
            let Some(other_id) = other.var_by_name(&var.name) else {
                return false;
            };
            let o = other.var(other_id);
            if var.kind != o.kind
                || var.lower != o.lower
                || var.upper != o.upper
                || var.objective != o.objective
            {
                return false;
            }
        }
        // A row normalised for comparison: name-sorted terms, sense, rhs.
        type NormalRow = (Vec<(String, f64)>, Sense, f64);
        let key = |m: &Model, row: &Row| -> NormalRow {
            let mut terms: Vec<(String, f64)> = row
                .terms
                .iter()
                .map(|&(v, c)| (m.var(v).name.clone(), c))
                .collect();
            terms.sort_by(|a, b| a.0.cmp(&b.0));
            (terms, row.sense, row.rhs)
        };
        let mut mine: HashMap<&str, NormalRow> = HashMap::new();
        for row in &self.rows {
            mine.insert(&row.name, key(self, row));
        }
        other
            .rows
            .iter()
            .all(|row| mine.get(row.name.as_str()) == Some(&key(other, row)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (Model, VarId, VarId) {
        // minimise t2 subject to t1 <= t2, t2 - t1 >= 1, both non-negative.
        let mut m = Model::new("toy");
        let t1 = m.add_var("t1", VarKind::Continuous, 0.0, f64::INFINITY, 0.0);
        let t2 = m.add_var("t2", VarKind::Continuous, 0.0, f64::INFINITY, 1.0);
        m.add_row("chain", [(t1, 1.0), (t2, -1.0)], Sense::Le, 0.0);
        m.add_row("span", [(t2, 1.0), (t1, -1.0)], Sense::Ge, 1.0);
        (m, t1, t2)
    }

    #[test]
    fn solves_small_lp() {
        let (m, t1, t2) = toy();
        let sol = m.solve().unwrap();
        assert!((sol.objective() - 1.0).abs() < 1e-9);
        assert!((sol.value(t1) - 0.0).abs() < 1e-9);
        assert!((sol.value(t2) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn reports_infeasible() {
        let (mut m, t1, _) = toy();
        m.add_row("cap", [(t1, 1.0)], Sense::Ge, 5.0);
        m.add_row("cap2", [(t1, 1.0)], Sense::Le, 1.0);
        assert!(matches!(m.solve(), Err(SolveError::Infeasible)));
    }

    #[test]
    fn merges_duplicate_terms_and_drops_zeros() {
        let mut m = Model::new("dup");
        let x = m.add_var("x", VarKind::Continuous, 0.0, 10.0, 1.0);
        let y = m.add_var("y", VarKind::Continuous, 0.0, 10.0, 0.0);
        m.add_row("r", [(x, 1.0), (x, 2.0), (y, 0.0)], Sense::Ge, 6.0);
        assert_eq!(m.rows()[0].terms, vec![(x, 3.0)]);
        let sol = m.solve().unwrap();
        assert!((sol.value(x) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn objective_offset_is_added() {
        let (mut m, _, _) = toy();
        m.set_objective_offset(2.5);
        let sol = m.solve().unwrap();
        assert!((sol.objective() - 3.5).abs() < 1e-9);
    }

    #[test]
    fn refuses_to_solve_binary_models_as_lp() {
        let mut m = Model::new("bin");
        m.add_var("a", VarKind::Binary, 0.0, 1.0, 1.0);
        assert!(matches!(m.solve(), Err(SolveError::BinaryVariables)));
    }

    #[test]
    fn substitute_folds_values_into_rows_and_objective() {
        let mut m = Model::new("sub");
        let a = m.add_var("a", VarKind::Binary, 0.0, 1.0, 2.0);
        let x = m.add_var("x", VarKind::Continuous, 0.0, f64::INFINITY, 1.0);
        m.add_row("r", [(x, 1.0), (a, -4.0)], Sense::Ge, 1.0);
        m.add_row("fixed", [(a, 1.0)], Sense::Le, 1.0);
        let assignment = HashMap::from([(a, 1.0)]);
        let reduced = m.substitute(&assignment).unwrap();
        assert_eq!(reduced.num_vars(), 1);
        assert_eq!(reduced.num_rows(), 1); // the all-constant row is dropped
        assert_eq!(reduced.rows()[0].rhs, 5.0);
        assert!((reduced.objective_offset() - 2.0).abs() < 1e-12);
        let sol = reduced.solve().unwrap();
        assert!((sol.objective() - 7.0).abs() < 1e-9);
    }

    #[test]
    fn substitute_detects_inconsistent_constant_rows() {
        let mut m = Model::new("sub");
        let a = m.add_var("a", VarKind::Binary, 0.0, 1.0, 0.0);
        m.add_row("broken", [(a, 1.0)], Sense::Ge, 2.0);
        let assignment = HashMap::from([(a, 1.0)]);
        assert!(matches!(
            m.substitute(&assignment),
            Err(SubstituteError::InconsistentRow { .. })
        ));
    }

    #[test]
    fn solve_is_deterministic() {
        let (m, _, _) = toy();
        let a = m.solve().unwrap();
        let b = m.solve().unwrap();
        assert_eq!(a.values(), b.values());
        assert_eq!(a.objective().to_bits(), b.objective().to_bits());
    }
}
