//! Compilation of a [`SubsetFamily`] into a set-cover QUBO.
//!
//! The Hamiltonian is `H = H_A + H_B` over binary variables:
//!
//! - one *selection* variable `x_i` per retained subset `V_i`;
//! - *counting* variables `x_{a,m}` (`m = 1..=M_a`) asserting that element
//!   `a` is covered by exactly `m` selected subsets, where `M_a` is the
//!   number of retained subsets containing `a`.
//!
//! `H_A` charges `A` per element whose one-hot counting row is violated and
//! `A` per mismatch between the asserted count and the actual number of
//! selected subsets containing the element (both as squared penalties);
//! `H_B` charges `B` per selected subset. With `0 < B < A` every minimum of
//! `H` is a maximum-coverage selection of minimum size, and a fully coverable
//! universe gives ground energy `B * k` for a minimum cover of size `k`.
//!
//! Elements contained in no subset get no counting variables; each adds the
//! constant `A` to the offset, so partial-cover instances still have
//! well-defined ground energies. The `worst_case_m` switch instead allocates
//! the pessimistic `M_a = N` counting rows for every element, reproducing
//! the `N(2L-1)(L+1)`-variable sizing bound for unpruned pulling families.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::pulling::{PulledSubset, SubsetFamily};
use crate::{Error, Result};

/// What a dense QUBO index stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum VarKind {
    /// Selection variable of subset `subset` (position in the family).
    Set { subset: usize },
    /// Counting variable: element `element` covered by exactly `count` sets.
    Count { element: usize, count: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub index: usize,
    pub kind: VarKind,
}

/// Expanded quadratic form: `offset + sum linear[i]*x_i + sum quad[i,j]*x_i*x_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Qubo {
    pub num_vars: usize,
    pub offset: f64,
    pub penalty_a: f64,
    pub penalty_b: f64,
    /// Dense per-variable coefficients.
    pub linear: Vec<f64>,
    /// Upper-triangular pairs `(i, j)` with `i < j`; zero entries dropped.
    pub quadratic: BTreeMap<(usize, usize), f64>,
    pub var_registry: Vec<Variable>,
}

/// Options for [`build_qubo`].
#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    pub penalty_a: f64,
    pub penalty_b: f64,
    /// Allocate `M_a = N` counting rows per element instead of per-element
    /// counts (the pessimistic sizing bound).
    pub worst_case_m: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            penalty_a: 2.0,
            penalty_b: 1.0,
            worst_case_m: false,
        }
    }
}

/// The subsets a decoded assignment selected, and what they cover.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverSolution {
    pub selected_indices: Vec<usize>,
    pub selected: Vec<PulledSubset>,
    pub covered: BTreeSet<usize>,
    pub coverage_fraction: f64,
    /// True iff the whole universe is covered and every counting row is
    /// one-hot with the asserted count matching the actual one.
    pub feasible: bool,
}

impl Qubo {
    pub fn num_set_vars(&self) -> usize {
        self.var_registry
            .iter()
            .filter(|v| matches!(v.kind, VarKind::Set { .. }))
            .count()
    }

    /// Evaluate the expanded form on a 0/1 assignment.
    pub fn energy(&self, assignment: &[u8]) -> Result<f64> {
        if assignment.len() != self.num_vars {
            return Err(Error::LengthMismatch(format!(
                "assignment has {} bits, QUBO has {} variables",
                assignment.len(),
                self.num_vars
            )));
        }
        let mut e = self.offset;
        for (i, &c) in self.linear.iter().enumerate() {
            if assignment[i] != 0 {
                e += c;
            }
        }
        for (&(i, j), &c) in &self.quadratic {
            if assignment[i] != 0 && assignment[j] != 0 {
                e += c;
            }
        }
        Ok(e)
    }

    /// Interpret an assignment as a cover of `family`'s universe.
    pub fn decode(&self, assignment: &[u8], family: &SubsetFamily) -> Result<CoverSolution> {
        if assignment.len() != self.num_vars {
            return Err(Error::LengthMismatch(format!(
                "assignment has {} bits, QUBO has {} variables",
                assignment.len(),
                self.num_vars
            )));
        }
        if self.num_set_vars() != family.subsets.len() {
            return Err(Error::InvalidParam(format!(
                "QUBO has {} selection variables but the family has {} subsets",
                self.num_set_vars(),
                family.subsets.len()
            )));
        }
        let mut selected_indices = Vec::new();
        for v in &self.var_registry {
            if let VarKind::Set { subset } = v.kind {
                if assignment[v.index] != 0 {
                    selected_indices.push(subset);
                }
            }
        }
        let selected: Vec<PulledSubset> = selected_indices
            .iter()
            .map(|&i| family.subsets[i].clone())
            .collect();
        let covered: BTreeSet<usize> = selected
            .iter()
            .flat_map(|s| s.positions.iter().copied())
            .collect();

        // Actual per-element counts under this selection.
        let mut actual = vec![0usize; family.universe_size];
        for s in &selected {
            for &p in &s.positions {
                actual[p] += 1;
            }
        }
        // Asserted counts from the one-hot rows: feasibility needs exactly
        // one active counting variable per element, agreeing with `actual`.
        let mut hot = vec![Vec::new(); family.universe_size];
        for v in &self.var_registry {
            if let VarKind::Count { element, count } = v.kind {
                if assignment[v.index] != 0 {
                    hot[element].push(count);
                }
            }
        }
        let counts_ok = (0..family.universe_size).all(|alpha| {
            if hot[alpha].len() == 1 {
                hot[alpha][0] == actual[alpha]
            } else {
                // No counting row can be satisfied: only legal if the
                // element has no rows at all and nothing covers it.
                hot[alpha].is_empty()
                    && actual[alpha] == 0
                    && !self
                        .var_registry
                        .iter()
                        .any(|v| matches!(v.kind, VarKind::Count { element, .. } if element == alpha))
            }
        });
        let full_cover = covered.len() == family.universe_size;
        Ok(CoverSolution {
            feasible: full_cover && counts_ok,
            coverage_fraction: covered.len() as f64 / family.universe_size as f64,
            selected_indices,
            selected,
            covered,
        })
    }

    /// Plain-text export: header `n_vars offset A B`, then `i coeff` lines
    /// for linear terms and `i j coeff` lines for quadratic terms.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{} {} {} {}\n",
            self.num_vars, self.offset, self.penalty_a, self.penalty_b
        );
        for (i, &c) in self.linear.iter().enumerate() {
            if c != 0.0 {
                out.push_str(&format!("{i} {c}\n"));
            }
        }
        for (&(i, j), &c) in &self.quadratic {
            out.push_str(&format!("{i} {j} {c}\n"));
        }
        out
    }

    /// Parse the plain-text format. The text carries no variable-kind
    /// metadata, so every variable is registered as a selection variable;
    /// the result supports energy evaluation but not [`Qubo::decode`]
    /// against a counting-variable family.
    pub fn from_text(text: &str) -> Result<Qubo> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .enumerate()
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let bad = |line: usize, message: String| Error::Parse {
            path: "<qubo text>".into(),
            line: line + 1,
            message,
        };
        let (header_no, header) = lines
            .next()
            .ok_or_else(|| Error::EmptyInput("QUBO text is empty".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(bad(header_no, "header must be `n_vars offset A B`".into()));
        }
        let num_vars: usize = fields[0]
            .parse()
            .map_err(|e| bad(header_no, format!("bad variable count: {e}")))?;
        let parse_f = |tok: &str, line: usize| -> Result<f64> {
            tok.parse::<f64>()
                .map_err(|e| bad(line, format!("bad coefficient `{tok}`: {e}")))
        };
        let offset = parse_f(fields[1], header_no)?;
        let penalty_a = parse_f(fields[2], header_no)?;
        let penalty_b = parse_f(fields[3], header_no)?;

        let mut linear = vec![0.0; num_vars];
        let mut quadratic = BTreeMap::new();
        for (no, line) in lines {
            let toks: Vec<&str> = line.split_whitespace().collect();
            let idx = |tok: &str| -> Result<usize> {
                let i: usize = tok
                    .parse()
                    .map_err(|e| bad(no, format!("bad index `{tok}`: {e}")))?;
                if i >= num_vars {
                    return Err(bad(no, format!("index {i} out of range 0..{num_vars}")));
                }
                Ok(i)
            };
            match toks.as_slice() {
                [i, c] => linear[idx(i)?] += parse_f(c, no)?,
                [i, j, c] => {
                    let (i, j) = (idx(i)?, idx(j)?);
                    if i == j {
                        return Err(bad(no, format!("self-pair on variable {i}")));
                    }
                    *quadratic.entry((i.min(j), i.max(j))).or_insert(0.0) += parse_f(c, no)?;
                }
                _ => return Err(bad(no, "expected `i coeff` or `i j coeff`".into())),
            }
        }
        Ok(Qubo {
            num_vars,
            offset,
            penalty_a,
            penalty_b,
            linear,
            quadratic,
            var_registry: (0..num_vars)
                .map(|index| Variable {
                    index,
                    kind: VarKind::Set { subset: index },
                })
                .collect(),
        })
    }
}

/// Compile `family` into the expanded QUBO.
///
/// Variable layout: all selection variables in family order, then counting
/// variables ordered by `(element, count)`.
pub fn build_qubo(family: &SubsetFamily, opts: &BuildOptions) -> Result<Qubo> {
    let (a, b) = (opts.penalty_a, opts.penalty_b);
    if !(b > 0.0 && b < a) || !a.is_finite() {
        return Err(Error::InvalidParam(format!(
            "penalties must satisfy 0 < B < A, got A={a}, B={b}"
        )));
    }
    if family.subsets.is_empty() {
        return Err(Error::EmptyInput("family has no subsets".into()));
    }
    let n_sets = family.subsets.len();
    let counts = family.element_counts();
    let m_cap: Vec<usize> = if opts.worst_case_m {
        vec![n_sets; family.universe_size]
    } else {
        counts.clone()
    };

    // Registry: selection vars first, counting vars by (element, count).
    let mut var_registry: Vec<Variable> = (0..n_sets)
        .map(|subset| Variable {
            index: subset,
            kind: VarKind::Set { subset },
        })
        .collect();
    let mut count_base = vec![usize::MAX; family.universe_size];
    let mut next = n_sets;
    for alpha in 0..family.universe_size {
        count_base[alpha] = next;
        for m in 1..=m_cap[alpha] {
            var_registry.push(Variable {
                index: next,
                kind: VarKind::Count {
                    element: alpha,
                    count: m,
                },
            });
            next += 1;
        }
    }
    let num_vars = next;
    let count_var = |alpha: usize, m: usize| count_base[alpha] + (m - 1);

    let mut members = vec![Vec::new(); family.universe_size];
    for (i, s) in family.subsets.iter().enumerate() {
        for &p in &s.positions {
            members[p].push(i);
        }
    }

    let mut offset = 0.0;
    let mut linear = vec![0.0; num_vars];
    let mut quadratic: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let add_quad = |u: usize, v: usize, c: f64, quadratic: &mut BTreeMap<(usize, usize), f64>| {
        *quadratic.entry((u.min(v), u.max(v))).or_insert(0.0) += c;
    };

    for alpha in 0..family.universe_size {
        let m_a = m_cap[alpha];
        // One-hot term A*(1 - sum_m x_{a,m})^2: with x^2 = x this expands to
        // A - A*sum_m x_m + 2A*sum_{m<m'} x_m x_m'. For m_a = 0 only the
        // constant survives (the element can never satisfy its row).
        offset += a;
        for m in 1..=m_a {
            linear[count_var(alpha, m)] -= a;
            for m2 in (m + 1)..=m_a {
                add_quad(count_var(alpha, m), count_var(alpha, m2), 2.0 * a, &mut quadratic);
            }
        }
        // Count-consistency term A*(sum_m m*x_{a,m} - sum_{i: a in V_i} x_i)^2.
        for m in 1..=m_a {
            linear[count_var(alpha, m)] += a * (m * m) as f64;
            for m2 in (m + 1)..=m_a {
                add_quad(
                    count_var(alpha, m),
                    count_var(alpha, m2),
                    2.0 * a * (m * m2) as f64,
                    &mut quadratic,
                );
            }
        }
        for (k, &i) in members[alpha].iter().enumerate() {
            linear[i] += a;
            for &i2 in &members[alpha][k + 1..] {
                add_quad(i, i2, 2.0 * a, &mut quadratic);
            }
            for m in 1..=m_a {
                add_quad(count_var(alpha, m), i, -2.0 * a * m as f64, &mut quadratic);
            }
        }
    }
    // Sparsity term B per selected subset.
    for coeff in linear.iter_mut().take(n_sets) {
        *coeff += b;
    }

    quadratic.retain(|_, c| *c != 0.0);
    Ok(Qubo {
        num_vars,
        offset,
        penalty_a: a,
        penalty_b: b,
        linear,
        quadratic,
        var_registry,
    })
}
