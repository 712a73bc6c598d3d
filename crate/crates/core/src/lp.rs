//! Self-contained exact-rational linear programming.
//!
//! Two-phase dense simplex with Bland's pivot rule. Bland's rule plus exact
//! arithmetic rules out cycling, so the solver terminates on every input and
//! the three outcome tags below are total. Returned optima are basic
//! solutions, i.e. vertices of the feasible polytope.
//!
//! Instances here are desk-scale (at most a few hundred variables); there is
//! deliberately no presolve, scaling, or floating point anywhere.

use num_traits::{One, Signed, Zero};

use crate::par;
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Ge,
    Le,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl Constraint {
    pub fn new(coeffs: Vec<Rational>, relation: Relation, rhs: Rational) -> Self {
        Constraint {
            coeffs,
            relation,
            rhs,
        }
    }
}

/// A maximization problem. Variables with `nonneg[j] == false` are free.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub variable_count: usize,
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
    pub nonneg: Vec<bool>,
}

impl LinearProgram {
    /// Maximization with all variables nonnegative.
    pub fn maximize(objective: Vec<Rational>) -> Self {
        let variable_count = objective.len();
        LinearProgram {
            variable_count,
            objective,
            constraints: Vec::new(),
            nonneg: vec![true; variable_count],
        }
    }

    pub fn push(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) {
        debug_assert_eq!(coeffs.len(), self.variable_count);
        self.constraints.push(Constraint::new(coeffs, relation, rhs));
    }

    pub fn mark_free(&mut self, variable: usize) {
        self.nonneg[variable] = false;
    }

    /// Exact satisfaction check of every constraint and sign restriction.
    pub fn is_feasible_point(&self, point: &[Rational]) -> bool {
        if point.len() != self.variable_count {
            return false;
        }
        for (j, value) in point.iter().enumerate() {
            if self.nonneg[j] && value.is_negative() {
                return false;
            }
        }
        self.constraints.iter().all(|c| {
            let lhs: Rational = c
                .coeffs
                .iter()
                .zip(point)
                .map(|(a, x)| a * x)
                .fold(Rational::zero(), |acc, t| acc + t);
            match c.relation {
                Relation::Ge => lhs >= c.rhs,
                Relation::Le => lhs <= c.rhs,
                Relation::Eq => lhs == c.rhs,
            }
        })
    }

    pub fn objective_at(&self, point: &[Rational]) -> Rational {
        self.objective
            .iter()
            .zip(point)
            .map(|(c, x)| c * x)
            .fold(Rational::zero(), |acc, t| acc + t)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal {
        solution: Vec<Rational>,
        objective: Rational,
    },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(&self) -> Option<(&[Rational], &Rational)> {
        match self {
            LpOutcome::Optimal {
                solution,
                objective,
            } => Some((solution, objective)),
            _ => None,
        }
    }
}

/// How each original variable maps into the standard-form columns.
enum VariableColumns {
    Single(usize),
    Split { plus: usize, minus: usize },
}

struct Tableau {
    /// rows[i] has the column coefficients followed by the rhs.
    rows: Vec<Vec<Rational>>,
    /// basis[i] = column basic in row i.
    basis: Vec<usize>,
    columns: usize,
}

impl Tableau {
    fn rhs(&self, row: usize) -> &Rational {
        &self.rows[row][self.columns]
    }

    /// Makes `col` basic in `row` and eliminates it everywhere else,
    /// including from the supplied objective rows.
    fn pivot(&mut self, row: usize, col: usize, objectives: &mut [&mut Vec<Rational>]) {
        let pivot_value = self.rows[row][col].clone();
        debug_assert!(!pivot_value.is_zero());
        for cell in self.rows[row].iter_mut() {
            if !cell.is_zero() {
                *cell /= &pivot_value;
            }
        }
        let pivot_row = self.rows[row].clone();
        let eliminate = |target: &mut Vec<Rational>| {
            let factor = target[col].clone();
            if factor.is_zero() {
                return;
            }
            for (cell, pivot_cell) in target.iter_mut().zip(&pivot_row) {
                if !pivot_cell.is_zero() {
                    *cell -= &factor * pivot_cell;
                }
            }
        };
        par::for_each_mut_indexed(&mut self.rows, |i, target| {
            if i != row {
                eliminate(target);
            }
        });
        for objective in objectives.iter_mut() {
            eliminate(objective);
        }
        self.basis[row] = col;
    }

    /// One simplex maximization run with Bland's rule on the given reduced
    /// objective row (length columns + 1; last cell tracks the value).
    /// Returns false when an unbounded ray was found.
    fn run(&mut self, objective: &mut Vec<Rational>, other: Option<&mut Vec<Rational>>) -> bool {
        let mut spare = other;
        loop {
            // Bland: entering column = lowest index with positive reduced cost.
            let entering = (0..self.columns).find(|&j| objective[j].is_positive());
            let Some(col) = entering else {
                return true;
            };
            // Ratio test; ties broken by the lowest basic variable index.
            let mut best: Option<(Rational, usize, usize)> = None;
            for i in 0..self.rows.len() {
                let coeff = &self.rows[i][col];
                if !coeff.is_positive() {
                    continue;
                }
                let ratio = self.rhs(i) / coeff;
                let candidate = (ratio, self.basis[i], i);
                best = match best {
                    None => Some(candidate),
                    Some(current) => {
                        if (candidate.0.clone(), candidate.1) < (current.0.clone(), current.1) {
                            Some(candidate)
                        } else {
                            Some(current)
                        }
                    }
                };
            }
            let Some((_, _, row)) = best else {
                return false;
            };
            match spare.as_deref_mut() {
                Some(extra) => self.pivot(row, col, &mut [objective, extra]),
                None => self.pivot(row, col, &mut [objective]),
            }
        }
    }
}

/// Solves a maximization LP exactly.
pub fn solve_lp(lp: &LinearProgram) -> LpOutcome {
    debug_assert_eq!(lp.objective.len(), lp.variable_count);
    debug_assert_eq!(lp.nonneg.len(), lp.variable_count);

    // Standard form: free variables split, rhs made nonnegative, slack and
    // surplus columns appended, artificials for rows without a ready basis.
    let mut mapping = Vec::with_capacity(lp.variable_count);
    let mut columns = 0;
    for j in 0..lp.variable_count {
        if lp.nonneg[j] {
            mapping.push(VariableColumns::Single(columns));
            columns += 1;
        } else {
            mapping.push(VariableColumns::Split {
                plus: columns,
                minus: columns + 1,
            });
            columns += 2;
        }
    }
    let structural = columns;

    struct RowBuild {
        coeffs: Vec<Rational>,
        rhs: Rational,
        relation: Relation,
    }
    let mut rows: Vec<RowBuild> = lp
        .constraints
        .iter()
        .map(|c| {
            let mut coeffs = vec![Rational::zero(); structural];
            for (j, a) in c.coeffs.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                match mapping[j] {
                    VariableColumns::Single(col) => coeffs[col] = a.clone(),
                    VariableColumns::Split { plus, minus } => {
                        coeffs[plus] = a.clone();
                        coeffs[minus] = -a.clone();
                    }
                }
            }
            let mut row = RowBuild {
                coeffs,
                rhs: c.rhs.clone(),
                relation: c.relation,
            };
            if row.rhs.is_negative() {
                for cell in row.coeffs.iter_mut() {
                    *cell = -cell.clone();
                }
                row.rhs = -row.rhs.clone();
                row.relation = match row.relation {
                    Relation::Ge => Relation::Le,
                    Relation::Le => Relation::Ge,
                    Relation::Eq => Relation::Eq,
                };
            }
            row
        })
        .collect();

    // Slack / surplus columns.
    let mut slack_cols = 0;
    for row in &rows {
        if row.relation != Relation::Eq {
            slack_cols += 1;
        }
    }
    let mut artificial_rows: Vec<usize> = Vec::new();
    let total_structural = structural + slack_cols;
    let mut next_slack = structural;
    let mut basis = vec![usize::MAX; rows.len()];
    for (i, row) in rows.iter_mut().enumerate() {
        row.coeffs.resize(total_structural, Rational::zero());
        match row.relation {
            Relation::Le => {
                row.coeffs[next_slack] = Rational::one();
                basis[i] = next_slack;
                next_slack += 1;
            }
            Relation::Ge => {
                row.coeffs[next_slack] = -Rational::one();
                next_slack += 1;
                artificial_rows.push(i);
            }
            Relation::Eq => {
                artificial_rows.push(i);
            }
        }
    }
    let artificial_base = total_structural;
    let columns = total_structural + artificial_rows.len();
    let mut tableau_rows = Vec::with_capacity(rows.len());
    for row in &rows {
        let mut cells = row.coeffs.clone();
        cells.resize(columns, Rational::zero());
        cells.push(row.rhs.clone());
        tableau_rows.push(cells);
    }
    for (k, &i) in artificial_rows.iter().enumerate() {
        tableau_rows[i][artificial_base + k] = Rational::one();
        basis[i] = artificial_base + k;
    }

    let mut tableau = Tableau {
        rows: tableau_rows,
        basis,
        columns,
    };

    // Phase-2 objective as a reduced-cost row (value cell last).
    let mut phase2 = vec![Rational::zero(); columns + 1];
    for j in 0..lp.variable_count {
        let c = &lp.objective[j];
        if c.is_zero() {
            continue;
        }
        match mapping[j] {
            VariableColumns::Single(col) => phase2[col] = c.clone(),
            VariableColumns::Split { plus, minus } => {
                phase2[plus] = c.clone();
                phase2[minus] = -c.clone();
            }
        }
    }

    if !artificial_rows.is_empty() {
        // Phase 1: maximize −Σ artificials, starting from the artificial basis.
        let mut phase1 = vec![Rational::zero(); columns + 1];
        for k in 0..artificial_rows.len() {
            phase1[artificial_base + k] = -Rational::one();
        }
        // Reduce against the starting basis (each artificial basic in its row).
        for &i in &artificial_rows {
            let row = tableau.rows[i].clone();
            for (cell, row_cell) in phase1.iter_mut().zip(&row) {
                *cell += row_cell;
            }
        }
        let bounded = tableau.run(&mut phase1, Some(&mut phase2));
        debug_assert!(bounded, "phase 1 is bounded above by zero");
        // Optimal phase-1 value is −Σ artificials; stored in the value cell.
        if !phase1[columns].is_zero() {
            return LpOutcome::Infeasible;
        }
        // Drive any artificial still basic (at zero) out of the basis.
        for i in 0..tableau.rows.len() {
            if tableau.basis[i] < artificial_base {
                continue;
            }
            let col = (0..total_structural).find(|&j| !tableau.rows[i][j].is_zero());
            match col {
                Some(col) => tableau.pivot(i, col, &mut [&mut phase1, &mut phase2]),
                None => {
                    // Redundant row: every structural coefficient is zero.
                    debug_assert!(tableau.rhs(i).is_zero());
                }
            }
        }
        // Forbid re-entering artificial columns in phase 2.
        for row in tableau.rows.iter_mut() {
            for j in artificial_base..columns {
                row[j] = Rational::zero();
            }
        }
        for j in artificial_base..columns {
            phase2[j] = Rational::zero();
        }
    }

    if !tableau.run(&mut phase2, None) {
        return LpOutcome::Unbounded;
    }

    let mut column_values = vec![Rational::zero(); columns];
    for (i, &col) in tableau.basis.iter().enumerate() {
        if col != usize::MAX && col < columns {
            column_values[col] = tableau.rhs(i).clone();
        }
    }
    let solution: Vec<Rational> = mapping
        .iter()
        .map(|m| match m {
            VariableColumns::Single(col) => column_values[*col].clone(),
            VariableColumns::Split { plus, minus } => {
                column_values[*plus].clone() - &column_values[*minus]
            }
        })
        .collect();
    let objective = lp.objective_at(&solution);
    debug_assert!(lp.is_feasible_point(&solution));
    LpOutcome::Optimal {
        solution,
        objective,
    }
}
