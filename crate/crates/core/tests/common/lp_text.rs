//! Reads the LP text written by `ttr_core::lp` back into a microlp problem.

use std::collections::HashMap;

use microlp::{ComparisonOp, OptimizationDirection, Problem, Variable};

#[derive(Debug, Default)]
pub struct LpModel {
    pub names: Vec<String>,
    index: HashMap<String, usize>,
    objective: Vec<f64>,
    lower: Vec<f64>,
    binary: Vec<bool>,
    rows: Vec<(Vec<(usize, f64)>, ComparisonOp, f64)>,
}

impl LpModel {
    fn var(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), i);
        self.objective.push(0.0);
        self.lower.push(0.0);
        self.binary.push(false);
        i
    }

    pub fn num_binaries(&self) -> usize {
        self.binary.iter().filter(|&&b| b).count()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Objective,
    Rows,
    Bounds,
    Binary,
}

fn parse_terms(tokens: &[&str], model: &mut LpModel) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    let mut sign = 1.0;
    let mut coef: Option<f64> = None;
    for t in tokens {
        match *t {
            "+" => sign = 1.0,
            "-" => sign = -1.0,
            _ => {
                if let Ok(c) = t.parse::<f64>() {
                    coef = Some(c);
                } else {
                    let v = model.var(t);
                    out.push((v, sign * coef.unwrap_or(1.0)));
                    sign = 1.0;
                    coef = None;
                }
            }
        }
    }
    out
}

pub fn parse(text: &str) -> LpModel {
    let mut model = LpModel::default();
    let mut section = Section::None;
    let mut objective_tokens: Vec<String> = Vec::new();
    let mut row_tokens: Vec<String> = Vec::new();
    for line in text.lines() {
        let trimmed = line.trim();
        if trimmed.starts_with('\\') || trimmed.is_empty() {
            continue;
        }
        match trimmed {
            "Minimize" => {
                section = Section::Objective;
                continue;
            }
            "Subject To" => {
                section = Section::Rows;
                continue;
            }
            "Bounds" => {
                section = Section::Bounds;
                continue;
            }
            "Binary" => {
                section = Section::Binary;
                continue;
            }
            "End" => break,
            _ => {}
        }
        match section {
            Section::Objective => objective_tokens.extend(trimmed.split_whitespace().map(String::from)),
            Section::Rows => row_tokens.extend(trimmed.split_whitespace().map(String::from)),
            Section::Bounds => {
                let t: Vec<&str> = trimmed.split_whitespace().collect();
                assert_eq!(t.len(), 3, "bound line {trimmed}");
                assert_eq!(t[1], ">=");
                let v = model.var(t[0]);
                model.lower[v] = t[2].parse().unwrap();
            }
            Section::Binary => {
                for name in trimmed.split_whitespace() {
                    let v = model.var(name);
                    model.binary[v] = true;
                }
            }
            Section::None => panic!("text before the objective: {trimmed}"),
        }
    }

    let obj: Vec<&str> = objective_tokens.iter().map(String::as_str).filter(|t| !t.ends_with(':')).collect();
    for (v, c) in parse_terms(&obj, &mut model) {
        model.objective[v] += c;
    }

    let mut current: Vec<&str> = Vec::new();
    let mut iter = row_tokens.iter().map(String::as_str).peekable();
    while let Some(t) = iter.next() {
        if t.ends_with(':') {
            current.clear();
            continue;
        }
        let op = match t {
            ">=" => Some(ComparisonOp::Ge),
            "<=" => Some(ComparisonOp::Le),
            "=" => Some(ComparisonOp::Eq),
            _ => None,
        };
        match op {
            Some(op) => {
                let rhs: f64 = iter.next().expect("right-hand side").parse().unwrap();
                let terms = parse_terms(&current, &mut model);
                model.rows.push((terms, op, rhs));
                current.clear();
            }
            None => current.push(t),
        }
    }
    model
}

/// Optimal objective, or `None` if the solver gives up or finds no solution.
pub fn solve(model: &LpModel) -> Option<f64> {
    let mut p = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<Variable> = (0..model.names.len())
        .map(|i| {
            if model.binary[i] {
                p.add_binary_var(model.objective[i])
            } else {
                p.add_var(model.objective[i], (model.lower[i], f64::INFINITY))
            }
        })
        .collect();
    for (terms, op, rhs) in &model.rows {
        let expr: Vec<(Variable, f64)> = terms.iter().map(|&(v, c)| (vars[v], c)).collect();
        p.add_constraint(expr.as_slice(), *op, *rhs);
    }
    let sol = p.solve().ok()?.into_solution().ok()?;
    Some(sol.objective())
}
