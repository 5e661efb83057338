//! Big-M mixed-integer model in CPLEX LP text format.
//!
//! Variable names are 1-based: `a_k_i`, `d_k_i` (times), `e_k_i` (penalty),
//! `y_k1_k2_i` for `k1 < k2` (1 when `k1` leaves station `i` first) and
//! `z_k_i_p` (train `k` on track `p` at station `i`, origin excluded).

use std::fmt::Write as _;
use std::io::{self, Write};

use thiserror::Error;

use crate::model::{Instance, LpExportConfig, ModelError, ObjectiveConfig};
use crate::scalar::Scalar;
use crate::validate::Profile;

#[derive(Debug, Error)]
pub enum LpError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LpStats {
    pub continuous: usize,
    pub binaries: usize,
    pub constraints: usize,
}

impl LpStats {
    pub fn variables(&self) -> usize {
        self.continuous + self.binaries
    }
}

fn a(k: usize, i: usize) -> String {
    format!("a_{}_{}", k + 1, i + 1)
}
fn d(k: usize, i: usize) -> String {
    format!("d_{}_{}", k + 1, i + 1)
}
fn e(k: usize, i: usize) -> String {
    format!("e_{}_{}", k + 1, i + 1)
}
fn y(k1: usize, k2: usize, i: usize) -> String {
    debug_assert!(k1 < k2);
    format!("y_{}_{}_{}", k1 + 1, k2 + 1, i + 1)
}
fn z(k: usize, i: usize, p: usize) -> String {
    format!("z_{}_{}_{}", k + 1, i + 1, p + 1)
}

fn fmt_num(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

struct Rows {
    buf: String,
    count: usize,
}

impl Rows {
    fn push(&mut self, terms: &[(f64, String)], op: &str, rhs: f64) {
        self.count += 1;
        let _ = write!(self.buf, " c{}:", self.count);
        write_terms(&mut self.buf, terms);
        let _ = writeln!(self.buf, " {op} {}", fmt_num(rhs));
    }
}

fn write_terms(buf: &mut String, terms: &[(f64, String)]) {
    for (n, (c, v)) in terms.iter().enumerate() {
        if n > 0 && n % 8 == 0 {
            buf.push_str("\n   ");
        }
        let sign = if *c < 0.0 { '-' } else { '+' };
        if n == 0 && sign == '+' {
            let _ = write!(buf, " {} {v}", fmt_num(c.abs()));
        } else {
            let _ = write!(buf, " {sign} {} {v}", fmt_num(c.abs()));
        }
    }
}

/// Writes the model and returns its size.
pub fn export_lp<S: Scalar, W: Write>(
    inst: &Instance,
    cfg: &ObjectiveConfig<S>,
    lp: &LpExportConfig,
    profile: Profile,
    out: &mut W,
) -> Result<LpStats, LpError> {
    inst.check()?;
    lp.check(inst)?;
    let (k_n, i_n) = (inst.num_trains, inst.num_stations);
    let m = lp.big_m as f64;
    let h = inst.headway as f64;
    let lambda = cfg.lambda.to_f64_lossy();
    let mut rows = Rows { buf: String::new(), count: 0 };

    for k in 0..k_n {
        for i in 0..i_n {
            let plan = inst.planned_arrival[k][i] as f64;
            rows.push(&[(1.0, e(k, i)), (-1.0, a(k, i))], ">=", -plan);
            rows.push(&[(1.0, e(k, i)), (lambda, a(k, i))], ">=", lambda * plan);
            rows.push(&[(1.0, d(k, i)), (-1.0, a(k, i))], ">=", inst.min_dwell[i] as f64);
            if i + 1 < i_n {
                rows.push(&[(1.0, a(k, i + 1)), (-1.0, d(k, i))], ">=", inst.min_run[k][i] as f64);
            }
        }
    }

    let mut binaries = Vec::new();
    for i in 0..i_n {
        for k1 in 0..k_n {
            for k2 in k1 + 1..k_n {
                let yv = y(k1, k2, i);
                binaries.push(yv.clone());
                let mut pair = |x1: String, x2: String| {
                    rows.push(&[(1.0, x2.clone()), (-1.0, x1.clone()), (-m, yv.clone())], ">=", h - m);
                    rows.push(&[(1.0, x1), (-1.0, x2), (m, yv.clone())], ">=", h);
                };
                pair(d(k1, i), d(k2, i));
                if i + 1 < i_n {
                    pair(a(k1, i + 1), a(k2, i + 1));
                }
            }
        }
    }

    for i in 1..i_n {
        let cap = inst.track_capacity[i];
        for k in 0..k_n {
            let terms: Vec<(f64, String)> = (0..cap).map(|p| (1.0, z(k, i, p))).collect();
            rows.push(&terms, "=", 1.0);
            binaries.extend((0..cap).map(|p| z(k, i, p)));
        }
        // k1 reaches station i before k2 and both use track p: k2 arrives h after k1 leaves
        for k1 in 0..k_n {
            for k2 in 0..k_n {
                if k1 == k2 {
                    continue;
                }
                for p in 0..cap {
                    let mut terms = vec![(1.0, a(k2, i)), (-1.0, d(k1, i)), (-m, z(k1, i, p)), (-m, z(k2, i, p))];
                    let rhs = if k1 < k2 {
                        terms.push((-m, y(k1, k2, i - 1)));
                        h - 3.0 * m
                    } else {
                        terms.push((m, y(k2, k1, i - 1)));
                        h - 2.0 * m
                    };
                    rows.push(&terms, ">=", rhs);
                }
            }
        }
    }

    let mut text = String::new();
    let _ = writeln!(text, "\\ train timetable rescheduling, {k_n} trains x {i_n} stations, big M {}", lp.big_m);
    text.push_str("Minimize\n obj:");
    let obj: Vec<(f64, String)> = (0..k_n).flat_map(|k| (0..i_n).map(move |i| (1.0, e(k, i)))).collect();
    write_terms(&mut text, &obj);
    text.push_str("\nSubject To\n");
    text.push_str(&rows.buf);
    text.push_str("Bounds\n");
    for k in 0..k_n {
        for i in 0..i_n {
            let bound = match profile {
                Profile::StrictMilp => Some(inst.planned_arrival[k][i] + inst.occurred_delay[k][i]),
                Profile::Operational => inst.delay_floor(k, i),
            };
            let _ = writeln!(text, " {} >= {}", a(k, i), bound.unwrap_or(0));
            let _ = writeln!(text, " {} >= {}", d(k, i), inst.planned_departure[k][i]);
            let _ = writeln!(text, " {} >= 0", e(k, i));
        }
    }
    if !binaries.is_empty() {
        text.push_str("Binary\n");
        for chunk in binaries.chunks(8) {
            let _ = writeln!(text, " {}", chunk.join(" "));
        }
    }
    text.push_str("End\n");
    out.write_all(text.as_bytes())?;
    Ok(LpStats { continuous: 3 * k_n * i_n, binaries: binaries.len(), constraints: rows.count })
}
