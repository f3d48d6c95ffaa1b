//! Export of the integer multi-commodity flow model (one commodity per team)
//! in CPLEX LP text format.
//!
//! Every team gets a copy of the unconstrained time-expanded network. Arc
//! variables are named `x_<team>_<arc>`, where arc ids below the base arc
//! count are shared by all teams and higher ids belong to one team only
//! (its super source, super sink and funnel arcs). Rows, in order:
//!
//! * `c_<team>_<node>`: flow conservation at every network node
//! * `src_<team>` / `snk_<team>`: the team ships exactly its size
//! * `cap_<arc>`: at most one unit over all teams on every shared arc

use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use super::network::{build_network, ArcKind, NetworkOptions, NetworkRequest, TimeExpandedNetwork};
use crate::instance::TapfInstance;

const TERMS_PER_LINE: usize = 8;

struct TeamArc {
    id: usize,
    /// `None` is the team's super source (as tail) or super sink (as head).
    tail: Option<u32>,
    head: Option<u32>,
    cap: u32,
}

/// Writes the model for horizon `horizon`. Output is deterministic.
pub fn export_ilp(instance: &TapfInstance, horizon: usize) -> String {
    let digest = Sha256::digest(instance.to_text().as_bytes());
    let hash: String = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();
    let nets: Vec<TimeExpandedNetwork> = instance
        .teams
        .iter()
        .enumerate()
        .map(|(i, team)| {
            build_network(&NetworkRequest {
                graph: &instance.graph,
                team_id: i,
                team,
                horizon,
                constraints: &[],
                bias: None,
                options: NetworkOptions::default(),
            })
            .expect("unconstrained network always builds")
        })
        .collect();
    let base = nets
        .first()
        .map(|n| n.arcs().iter().filter(|a| a.kind != ArcKind::Funnel).count())
        .unwrap_or(0);

    let mut out = String::new();
    let _ = writeln!(out, "\\ integer multi-commodity flow model");
    let _ = writeln!(out, "\\ instance sha256 {hash}");
    let _ = writeln!(out, "\\ horizon {horizon}");
    let _ = writeln!(out, "\\ commodities {}", instance.teams.len());
    out.push_str("Minimize\n obj: 0 x_0_0\nSubject To\n");

    let mut all_vars: Vec<(String, u32)> = Vec::new();
    for (i, net) in nets.iter().enumerate() {
        let mut arcs: Vec<TeamArc> = net
            .arcs()
            .iter()
            .enumerate()
            .map(|(id, a)| TeamArc {
                id,
                tail: Some(a.tail),
                head: Some(a.head),
                cap: a.capacity,
            })
            .collect();
        // funnel arcs come after the base arcs in the network already
        for &(node, units) in net.supplies() {
            arcs.push(TeamArc {
                id: arcs.len(),
                tail: None,
                head: Some(node),
                cap: units,
            });
        }
        for &(node, units) in net.demands() {
            arcs.push(TeamArc {
                id: arcs.len(),
                tail: Some(node),
                head: None,
                cap: units,
            });
        }
        let var = |a: &TeamArc| format!("x_{i}_{}", a.id);
        let mut leaving: Vec<Vec<usize>> = vec![Vec::new(); net.node_count()];
        let mut entering: Vec<Vec<usize>> = vec![Vec::new(); net.node_count()];
        for (k, a) in arcs.iter().enumerate() {
            if let Some(t) = a.tail {
                leaving[t as usize].push(k);
            }
            if let Some(h) = a.head {
                entering[h as usize].push(k);
            }
        }
        for node in 0..net.node_count() {
            let mut terms: Vec<(bool, String)> = Vec::new();
            terms.extend(leaving[node].iter().map(|&k| (true, var(&arcs[k]))));
            terms.extend(entering[node].iter().map(|&k| (false, var(&arcs[k]))));
            write_row(&mut out, &format!("c_{i}_{node}"), &terms, "=", 0);
        }
        let k = net.team_size();
        let src: Vec<(bool, String)> = arcs
            .iter()
            .filter(|a| a.tail.is_none())
            .map(|a| (true, var(a)))
            .collect();
        write_row(&mut out, &format!("src_{i}"), &src, "=", k);
        let snk: Vec<(bool, String)> = arcs
            .iter()
            .filter(|a| a.head.is_none())
            .map(|a| (true, var(a)))
            .collect();
        write_row(&mut out, &format!("snk_{i}"), &snk, "=", k);
        all_vars.extend(arcs.iter().map(|a| (var(a), a.cap)));
    }
    for a in 0..base {
        let terms: Vec<(bool, String)> = (0..nets.len()).map(|i| (true, format!("x_{i}_{a}"))).collect();
        write_row(&mut out, &format!("cap_{a}"), &terms, "<=", 1);
    }

    out.push_str("Bounds\n");
    for (name, cap) in &all_vars {
        let _ = writeln!(out, " 0 <= {name} <= {cap}");
    }
    out.push_str("General\n");
    for chunk in all_vars.chunks(TERMS_PER_LINE) {
        out.push(' ');
        let names: Vec<&str> = chunk.iter().map(|(n, _)| n.as_str()).collect();
        out.push_str(&names.join(" "));
        out.push('\n');
    }
    out.push_str("End\n");
    out
}

fn write_row(out: &mut String, name: &str, terms: &[(bool, String)], sense: &str, rhs: usize) {
    let _ = write!(out, " {name}:");
    if terms.is_empty() {
        // keep the row so that row order does not depend on the graph
        let _ = writeln!(out, " 0 x_0_0 {sense} {rhs}");
        return;
    }
    for (n, (positive, var)) in terms.iter().enumerate() {
        if n > 0 && n % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if *positive { '+' } else { '-' };
        if n == 0 && *positive {
            let _ = write!(out, " {var}");
        } else {
            let _ = write!(out, " {sign} {var}");
        }
    }
    let _ = writeln!(out, " {sense} {rhs}");
}
