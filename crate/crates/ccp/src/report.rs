//! Text dumps: node and propagation traces, node LPs in MPS layout, dominance edges.

use std::fmt::Write as _;
use std::io::Write;

use ccp_core::engine::{mode_label, NodeRecord, PropagationRecord, TraceSink};
use ccp_core::lp::{LpModel, LpStatus};
use ccp_core::preprocess::DominanceGraph;
use ccp_core::Sense;

fn status_label(s: LpStatus) -> &'static str {
    match s {
        LpStatus::Optimal => "optimal",
        LpStatus::Infeasible => "infeasible",
        LpStatus::Unbounded => "unbounded",
        LpStatus::IterationLimit => "iteration-limit",
    }
}

fn list(v: &[usize]) -> String {
    let items: Vec<String> = v.iter().map(|i| i.to_string()).collect();
    format!("[{}]", items.join(","))
}

fn vector(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
    format!("({})", items.join(","))
}

pub fn node_line(r: &NodeRecord) -> String {
    let parent = r.parent.map(|p| p.to_string()).unwrap_or_else(|| "-".into());
    let branch = r
        .branch
        .map(|(i, one)| format!("z{}={}", i, one as u8))
        .unwrap_or_else(|| "-".into());
    let lp = match (r.lp_status, r.lp_objective) {
        (Some(s), Some(v)) if v.is_finite() => format!("{} {:.6}", status_label(s), v),
        (Some(s), _) => format!("{} -", status_label(s)),
        _ => "none -".into(),
    };
    format!(
        "node {} parent {} branch {} n0 {} n1 {} lp {} action {}",
        r.id,
        parent,
        branch,
        r.zeros,
        r.ones,
        lp,
        r.action.label()
    )
}

/// One header line per node, then one line per approximate round with the
/// bound changes relative to the previous round.
pub fn propagation_lines(r: &PropagationRecord) -> String {
    let res = &r.result;
    let mut out = String::new();
    let cause = res.cause.map(|c| c.label()).unwrap_or("-");
    let _ = writeln!(
        out,
        "prop {} mode {} iterations {} r0 {} r1 {} pruned {} cause {} bounds {}",
        r.node,
        mode_label(res.mode),
        res.iterations,
        list(&res.to_zero),
        list(&res.to_one),
        res.pruned,
        cause,
        vector(&res.bounds)
    );
    let mut prev: Option<&[f64]> = None;
    for (k, round) in res.rounds.iter().enumerate() {
        let delta: Vec<f64> = match prev {
            Some(p) => round.bounds.iter().zip(p).map(|(a, b)| a - b).collect(),
            None => round.bounds.clone(),
        };
        let _ = writeln!(
            out,
            "  round {} bounds {} delta {} r0 {} r1 {}",
            k + 1,
            vector(&round.bounds),
            vector(&delta),
            list(&round.to_zero),
            list(&round.to_one)
        );
        prev = Some(&round.bounds);
    }
    out
}

/// Writes traces to `out`; optionally captures the LP of one node.
pub struct TextTrace<W: Write> {
    out: Option<W>,
    pub dump_node: Option<usize>,
    pub captured_lp: Option<String>,
    pub error: Option<std::io::Error>,
}

impl<W: Write> TextTrace<W> {
    pub fn new(out: Option<W>, dump_node: Option<usize>) -> Self {
        TextTrace {
            out,
            dump_node,
            captured_lp: None,
            error: None,
        }
    }

    fn emit(&mut self, text: &str) {
        if self.error.is_some() {
            return;
        }
        if let Some(w) = self.out.as_mut() {
            if let Err(e) = w.write_all(text.as_bytes()) {
                self.error = Some(e);
            }
        }
    }

    pub fn finish(mut self) -> std::io::Result<Option<String>> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        if let Some(w) = self.out.as_mut() {
            w.flush()?;
        }
        Ok(self.captured_lp)
    }
}

impl<W: Write> TraceSink for TextTrace<W> {
    fn node(&mut self, record: &NodeRecord) {
        let mut line = node_line(record);
        line.push('\n');
        self.emit(&line);
    }

    fn propagation(&mut self, record: &PropagationRecord) {
        let text = propagation_lines(record);
        self.emit(&text);
    }

    fn node_lp(&mut self, node: usize, lp: &LpModel) {
        // keep the last LP of the node (after any cut rounds)
        if self.dump_node == Some(node) {
            self.captured_lp = Some(write_mps(lp, &format!("node{node}")));
        }
    }
}

fn mps_number(x: f64) -> String {
    format!("{x}")
}

/// Fixed-layout MPS text. Columns are `C<j>`, rows `R<i>`, objective `COST`.
pub fn write_mps(lp: &LpModel, name: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "NAME          {name}");
    let _ = writeln!(out, "ROWS");
    let _ = writeln!(out, " N  COST");
    for (i, r) in lp.rows().iter().enumerate() {
        let t = match r.sense {
            Sense::Le => "L",
            Sense::Ge => "G",
            Sense::Eq => "E",
        };
        let _ = writeln!(out, " {t}  R{i}");
    }
    let _ = writeln!(out, "COLUMNS");
    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); lp.num_vars()];
    for (i, r) in lp.rows().iter().enumerate() {
        for &(j, a) in &r.coeffs {
            if a != 0.0 {
                by_col[j].push((i, a));
            }
        }
    }
    for (j, entries) in by_col.iter().enumerate() {
        let c = lp.objective()[j];
        if c != 0.0 {
            let _ = writeln!(out, "    {:<8}  {:<8}  {:>12}", format!("C{j}"), "COST", mps_number(c));
        }
        for &(i, a) in entries {
            let _ = writeln!(out, "    {:<8}  {:<8}  {:>12}", format!("C{j}"), format!("R{i}"), mps_number(a));
        }
    }
    let _ = writeln!(out, "RHS");
    for (i, r) in lp.rows().iter().enumerate() {
        if r.rhs != 0.0 {
            let _ = writeln!(out, "    {:<8}  {:<8}  {:>12}", "RHS", format!("R{i}"), mps_number(r.rhs));
        }
    }
    let _ = writeln!(out, "BOUNDS");
    for j in 0..lp.num_vars() {
        let (lo, hi) = (lp.lower()[j], lp.upper()[j]);
        let col = format!("C{j}");
        if lo == hi {
            let _ = writeln!(out, " FX BND       {:<8}  {:>12}", col, mps_number(lo));
            continue;
        }
        match (lo.is_finite(), hi.is_finite()) {
            (false, false) => {
                let _ = writeln!(out, " FR BND       {col}");
            }
            (false, true) => {
                let _ = writeln!(out, " MI BND       {col}");
                let _ = writeln!(out, " UP BND       {:<8}  {:>12}", col, mps_number(hi));
            }
            (true, _) => {
                if lo != 0.0 {
                    let _ = writeln!(out, " LO BND       {:<8}  {:>12}", col, mps_number(lo));
                }
                if hi.is_finite() {
                    let _ = writeln!(out, " UP BND       {:<8}  {:>12}", col, mps_number(hi));
                }
            }
        }
    }
    let _ = writeln!(out, "ENDATA");
    out
}

/// Reduced dominance edges (or all pairs when not reduced) followed by the percentages.
pub fn dominance_dump(g: &DominanceGraph) -> String {
    let st = g.stats();
    let mut out = g.edge_list();
    let _ = writeln!(out, "%DP {:.2}", st.pair_percent());
    if g.reduced().is_some() {
        let _ = writeln!(out, "%NDI {:.2}", st.reduced_percent());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ccp_core::fixtures::example1;
    use ccp_core::lp::LpRow;
    use ccp_core::preprocess::{build_dominance_graph, quantile_bounds, transitive_reduction};

    #[test]
    fn mps_layout() {
        let mut lp = LpModel::new();
        lp.add_var(0.0, f64::INFINITY, 2.0);
        lp.add_var(1.0, 1.0, 0.0);
        lp.add_row(LpRow {
            coeffs: vec![(0, 1.0), (1, -3.0)],
            sense: Sense::Ge,
            rhs: 4.0,
        })
        .unwrap();
        let text = write_mps(&lp, "t");
        assert!(text.contains(" G  R0"));
        assert!(text.contains("C1        R0"));
        assert!(text.contains(" FX BND       C1"));
        assert!(text.trim_end().ends_with("ENDATA"));
    }

    #[test]
    fn dominance_dump_of_example() {
        let inst = example1();
        let qb = quantile_bounds(&inst);
        let g = transitive_reduction(build_dominance_graph(&inst, &qb, false));
        let text = dominance_dump(&g);
        assert_eq!(text.lines().next(), Some("3 -> 4"));
        assert!(text.contains("%DP 4.76"));
    }
}
