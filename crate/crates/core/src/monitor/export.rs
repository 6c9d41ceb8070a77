//! JSON and Graphviz renderings of a monitor.

use serde_json::{json, Value};

use super::Qrm;
use crate::scalar::Scalar;

impl<S: Scalar> Qrm<S> {
    /// Machine-readable description: states, transitions, registers with
    /// initial values, per-state update programs and the reward register.
    pub fn to_json(&self) -> Value {
        let regs = self.registers();
        let atoms = self.atoms();
        let states: Vec<Value> = (0..self.num_states())
            .map(|q| {
                let updates: Vec<Value> = self
                    .program(q)
                    .iter()
                    .map(|u| {
                        json!({
                            "target": regs[u.target].name,
                            "expr": u.expr.render(atoms, regs),
                        })
                    })
                    .collect();
                json!({ "id": q, "next": self.successor(q), "updates": updates })
            })
            .collect();
        json!({
            "formula": self.formula().map(|f| f.to_string()),
            "atoms": atoms,
            "initial_state": self.initial_state(),
            "registers": regs
                .iter()
                .map(|r| json!({ "name": r.name, "init": r.init.to_f64_lossy() }))
                .collect::<Vec<_>>(),
            "states": states,
            "reward_register": regs[self.reward_register()].name,
            "weight": self.weight().to_f64_lossy(),
        })
    }

    /// Graphviz digraph with each state's program as its label.
    pub fn to_dot(&self) -> String {
        let regs = self.registers();
        let atoms = self.atoms();
        let esc = |s: &str| s.replace('\\', "\\\\").replace('"', "\\\"");
        let mut out = String::from("digraph qrm {\n  rankdir=LR;\n  node [shape=box, fontname=\"monospace\"];\n");
        if let Some(f) = self.formula() {
            out.push_str(&format!("  label=\"{}\";\n", esc(&f.to_string())));
        }
        out.push_str("  start [shape=point];\n  start -> q0;\n");
        for q in 0..self.num_states() {
            let mut lines = vec![format!("q{q}")];
            for u in self.program(q) {
                lines.push(format!(
                    "{} <- {}",
                    regs[u.target].name,
                    u.expr.render(atoms, regs)
                ));
            }
            let label: Vec<String> = lines.iter().map(|l| esc(l)).collect();
            out.push_str(&format!("  q{q} [label=\"{}\\l\"];\n", label.join("\\l")));
        }
        for q in 0..self.num_states() {
            out.push_str(&format!("  q{q} -> q{};\n", self.successor(q)));
        }
        out.push_str(&format!(
            "  reward [shape=plaintext, label=\"reward = V({})\"];\n}}\n",
            esc(&regs[self.reward_register()].name)
        ));
        out
    }
}

#[cfg(test)]
mod tests {
    use crate::formula::parse;
    use crate::monitor::synth;

    #[test]
    fn json_lists_every_state() {
        let m = synth::<f64>(&parse("F b").unwrap()).unwrap();
        let j = m.to_json();
        assert_eq!(j["states"].as_array().unwrap().len(), m.num_states());
        assert_eq!(j["formula"], "F b");
        assert_eq!(j["states"][0]["updates"][0]["expr"], "L(b)");
    }

    #[test]
    fn dot_has_one_edge_per_state() {
        let m = synth::<f64>(&parse("!a U (a & F b)").unwrap()).unwrap();
        let dot = m.to_dot();
        assert!(dot.starts_with("digraph qrm {"));
        assert_eq!(dot.matches(" -> q").count(), m.num_states() + 1);
    }
}
