//! Shared helpers for the integration suites: seeded random games and an
//! independent brute-force LP oracle.
//!
//! The brute-force oracle deliberately shares nothing with the production
//! simplex: it standard-forms the program on its own, row-reduces, runs on
//! its own i128 fraction type (checked arithmetic, panics on overflow),
//! and enumerates every basis.

#![allow(dead_code)]

use num_traits::{ToPrimitive, Zero};
use rand::prelude::IndexedRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sce_core::lp::{LinearProgram, Relation};
use sce_core::rational::{rat, Rational};
use sce_core::{NormalFormGame, StackelbergGame};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Dense random utility tensor with integer payoffs in [lo, hi].
pub fn random_game(
    rng: &mut ChaCha8Rng,
    strategy_counts: &[usize],
    lo: i64,
    hi: i64,
) -> NormalFormGame {
    NormalFormGame::from_fn(strategy_counts.to_vec(), |_, _| {
        rat(rng.random_range(lo..=hi))
    })
}

/// Random shape with `players` players and 2–3 strategies each.
pub fn random_shape(rng: &mut ChaCha8Rng, players: usize) -> Vec<usize> {
    (0..players).map(|_| rng.random_range(2..=3)).collect()
}

/// Mostly-binary shape: all players get 2 strategies, one random player 3.
pub fn small_shape(rng: &mut ChaCha8Rng, players: usize) -> Vec<usize> {
    let mut shape = vec![2; players];
    if rng.random_range(0..2u8) == 0 {
        let lucky = rng.random_range(0..players);
        shape[lucky] = 3;
    }
    shape
}

/// Random Stackelberg partition with exactly `leader_count` leaders, in a
/// shuffled asking order.
pub fn random_sg(
    rng: &mut ChaCha8Rng,
    game: NormalFormGame,
    leader_count: usize,
) -> StackelbergGame {
    let mut players: Vec<usize> = (0..game.player_count()).collect();
    for i in (1..players.len()).rev() {
        let j = rng.random_range(0..=i);
        players.swap(i, j);
    }
    let leaders = players[..leader_count].to_vec();
    StackelbergGame::new(game, leaders).expect("indices in range")
}

pub fn pick<'v, T>(rng: &mut ChaCha8Rng, items: &'v [T]) -> &'v T {
    items.choose(rng).expect("nonempty")
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut value: u128 = 1;
    for i in 0..k {
        value = value * (n - i) as u128 / (i + 1) as u128;
    }
    value
}

/// Plain reduced fraction on i128 with overflow checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Frac {
    num: i128,
    den: i128,
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

impl Frac {
    pub const ZERO: Frac = Frac { num: 0, den: 1 };

    pub fn new(num: i128, den: i128) -> Frac {
        assert!(den != 0, "zero denominator");
        let sign = if den < 0 { -1 } else { 1 };
        let g = gcd(num, den);
        Frac {
            num: sign * num / g,
            den: sign * den / g,
        }
    }

    pub fn from_rational(value: &Rational) -> Frac {
        let num = value.numer().to_i128().expect("test values fit i128");
        let den = value.denom().to_i128().expect("test values fit i128");
        Frac::new(num, den)
    }

    pub fn to_rational(self) -> Rational {
        Rational::new(self.num.into(), self.den.into())
    }

    pub fn is_zero(self) -> bool {
        self.num == 0
    }

    pub fn is_negative(self) -> bool {
        self.num < 0
    }

    pub fn add(self, other: Frac) -> Frac {
        Frac::new(
            self.num
                .checked_mul(other.den)
                .and_then(|a| other.num.checked_mul(self.den).map(|b| (a, b)))
                .and_then(|(a, b)| a.checked_add(b))
                .expect("fraction overflow"),
            self.den.checked_mul(other.den).expect("fraction overflow"),
        )
    }

    pub fn sub(self, other: Frac) -> Frac {
        self.add(other.neg())
    }

    pub fn mul(self, other: Frac) -> Frac {
        Frac::new(
            self.num.checked_mul(other.num).expect("fraction overflow"),
            self.den.checked_mul(other.den).expect("fraction overflow"),
        )
    }

    pub fn div(self, other: Frac) -> Frac {
        assert!(other.num != 0, "division by zero");
        Frac::new(
            self.num.checked_mul(other.den).expect("fraction overflow"),
            self.den.checked_mul(other.num).expect("fraction overflow"),
        )
    }

    pub fn neg(self) -> Frac {
        Frac {
            num: -self.num,
            den: self.den,
        }
    }

    pub fn greater(self, other: Frac) -> bool {
        self.sub(other).num > 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BruteOutcome {
    Infeasible,
    Optimal(Rational),
}

/// Exact maximum over all basic feasible solutions of the standard-form
/// system. Valid for bounded programs: every nonempty standard-form
/// polyhedron contains a basic feasible solution, and a bounded objective
/// attains its maximum at one.
pub fn brute_force_lp_max(lp: &LinearProgram) -> BruteOutcome {
    // Standard form: split free variables, flip negative right-hand sides,
    // append one slack/surplus column per inequality.
    let mut column_of_var: Vec<(usize, Option<usize>)> = Vec::new();
    let mut columns = 0usize;
    for j in 0..lp.variable_count {
        if lp.nonneg[j] {
            column_of_var.push((columns, None));
            columns += 1;
        } else {
            column_of_var.push((columns, Some(columns + 1)));
            columns += 2;
        }
    }
    let structural = columns;
    let slack_count = lp
        .constraints
        .iter()
        .filter(|c| c.relation != Relation::Eq)
        .count();
    let total = structural + slack_count;

    let mut rows: Vec<Vec<Frac>> = Vec::new();
    let mut rhs: Vec<Frac> = Vec::new();
    let mut next_slack = structural;
    for constraint in &lp.constraints {
        let mut row = vec![Frac::ZERO; total];
        for (j, a) in constraint.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let value = Frac::from_rational(a);
            let (plus, minus) = column_of_var[j];
            row[plus] = value;
            if let Some(minus) = minus {
                row[minus] = value.neg();
            }
        }
        let mut b = Frac::from_rational(&constraint.rhs);
        let mut slack_sign = Frac::new(1, 1);
        if b.is_negative() {
            b = b.neg();
            slack_sign = slack_sign.neg();
            for cell in row.iter_mut() {
                *cell = cell.neg();
            }
        }
        match constraint.relation {
            Relation::Eq => {}
            Relation::Le => {
                row[next_slack] = slack_sign;
                next_slack += 1;
            }
            Relation::Ge => {
                row[next_slack] = slack_sign.neg();
                next_slack += 1;
            }
        }
        rows.push(row);
        rhs.push(b);
    }

    // Forward reduction: keep independent rows, detect inconsistency, drop
    // redundancy.
    let mut reduced: Vec<(Vec<Frac>, Frac)> = Vec::new();
    let mut pivot_cols: Vec<usize> = Vec::new();
    for (mut row, mut b) in rows.into_iter().zip(rhs) {
        for ((basis_row, basis_rhs), pivot_col) in reduced.iter().zip(&pivot_cols) {
            let factor = row[*pivot_col];
            if factor.is_zero() {
                continue;
            }
            for (cell, base) in row.iter_mut().zip(basis_row) {
                if !base.is_zero() {
                    *cell = cell.sub(factor.mul(*base));
                }
            }
            b = b.sub(factor.mul(*basis_rhs));
        }
        match row.iter().position(|v| !v.is_zero()) {
            Some(col) => {
                let pivot = row[col];
                for cell in row.iter_mut() {
                    if !cell.is_zero() {
                        *cell = cell.div(pivot);
                    }
                }
                b = b.div(pivot);
                reduced.push((row, b));
                pivot_cols.push(col);
            }
            None => {
                if !b.is_zero() {
                    return BruteOutcome::Infeasible;
                }
            }
        }
    }
    let rank = reduced.len();
    if rank == 0 {
        return BruteOutcome::Optimal(
            lp.objective_at(&vec![Rational::zero(); lp.variable_count]),
        );
    }

    let objective: Vec<Frac> = {
        let mut cells = vec![Frac::ZERO; total];
        for (j, c) in lp.objective.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let value = Frac::from_rational(c);
            let (plus, minus) = column_of_var[j];
            cells[plus] = value;
            if let Some(minus) = minus {
                cells[minus] = value.neg();
            }
        }
        cells
    };

    let mut best: Option<Frac> = None;
    let mut basis: Vec<usize> = (0..rank).collect();
    let mut scratch = vec![vec![Frac::ZERO; rank + 1]; rank];
    loop {
        if let Some(value) = basis_objective(&reduced, &basis, &objective, &mut scratch) {
            if best.map_or(true, |b| value.greater(b)) {
                best = Some(value);
            }
        }
        // Next combination of `rank` columns out of `total`.
        let mut i = rank;
        let exhausted = loop {
            if i == 0 {
                break true;
            }
            i -= 1;
            if basis[i] != i + total - rank {
                basis[i] += 1;
                for k in i + 1..rank {
                    basis[k] = basis[k - 1] + 1;
                }
                break false;
            }
        };
        if exhausted {
            return match best {
                Some(value) => BruteOutcome::Optimal(value.to_rational()),
                None => BruteOutcome::Infeasible,
            };
        }
    }
}

/// Objective value of the basic solution on the chosen columns; `None`
/// when the basis is singular or the solution goes negative.
fn basis_objective(
    reduced: &[(Vec<Frac>, Frac)],
    basis: &[usize],
    objective: &[Frac],
    matrix: &mut [Vec<Frac>],
) -> Option<Frac> {
    let rank = reduced.len();
    for (target, (row, b)) in matrix.iter_mut().zip(reduced) {
        for (cell, &j) in target.iter_mut().zip(basis) {
            *cell = row[j];
        }
        target[rank] = *b;
    }
    // Gaussian elimination with exact pivots.
    for col in 0..rank {
        let pivot_row = (col..rank).find(|&r| !matrix[r][col].is_zero())?;
        matrix.swap(col, pivot_row);
        let pivot = matrix[col][col];
        for cell in matrix[col].iter_mut() {
            if !cell.is_zero() {
                *cell = cell.div(pivot);
            }
        }
        for r in 0..rank {
            if r == col {
                continue;
            }
            let factor = matrix[r][col];
            if factor.is_zero() {
                continue;
            }
            for c in col..=rank {
                let delta = factor.mul(matrix[col][c]);
                if !delta.is_zero() {
                    matrix[r][c] = matrix[r][c].sub(delta);
                }
            }
        }
    }
    let mut value = Frac::ZERO;
    for (i, &j) in basis.iter().enumerate() {
        let x = matrix[i][rank];
        if x.is_negative() {
            return None;
        }
        if !objective[j].is_zero() {
            value = value.add(objective[j].mul(x));
        }
    }
    Some(value)
}
