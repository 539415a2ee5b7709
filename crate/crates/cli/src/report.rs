//! The JSON report every command produces.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use sitecalc::comonad::SieveFilter;
use sitecalc::fincat::FinCategory;
use sitecalc::site::{AxiomWitness, Sieve};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One command run. `verdict` is absent for commands that only compute.
/// Witnesses and details refer to objects, arrows and declarations by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool_version: String,
    pub command: String,
    pub inputs: BTreeMap<String, String>,
    pub verdict: Option<bool>,
    pub witnesses: Vec<Value>,
    pub details: BTreeMap<String, Value>,
    pub notes: Vec<String>,
    pub timing_ms: u64,
}

impl Report {
    pub fn new(command: &str, inputs: &BTreeMap<String, String>) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            tool_version: TOOL_VERSION.to_string(),
            command: command.to_string(),
            inputs: inputs.clone(),
            verdict: None,
            witnesses: Vec::new(),
            details: BTreeMap::new(),
            notes: Vec::new(),
            timing_ms: 0,
        }
    }

    pub fn detail(&mut self, key: &str, value: impl Serialize) {
        self.details
            .insert(key.to_string(), serde_json::to_value(value).expect("serializable detail"));
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// The report with the timing zeroed, for comparing runs.
    pub fn untimed(&self) -> Self {
        Report {
            timing_ms: 0,
            ..self.clone()
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let verdict = match self.verdict {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "DONE",
        };
        let inputs: Vec<String> = self.inputs.iter().map(|(k, v)| format!("{k}={v}")).collect();
        writeln!(out, "{} {} [{}]", verdict, self.command, inputs.join(", ")).unwrap();
        for (k, v) in &self.details {
            writeln!(out, "  {k}: {}", compact(v)).unwrap();
        }
        for w in &self.witnesses {
            writeln!(out, "  witness: {}", compact(w)).unwrap();
        }
        for n in &self.notes {
            writeln!(out, "  note: {n}").unwrap();
        }
        out
    }
}

fn compact(v: &Value) -> String {
    serde_json::to_string(v).expect("values serialize")
}

pub(crate) fn sieve(cat: &FinCategory, s: &Sieve) -> Value {
    json!(s.names(cat))
}

pub(crate) fn filter(cat: &FinCategory, f: &SieveFilter) -> Value {
    Value::Array(f.sieves().iter().map(|s| sieve(cat, s)).collect())
}

pub(crate) fn axiom_witness(cat: &FinCategory, w: &AxiomWitness) -> Value {
    let on = |s: &Sieve| cat.object_name(s.base()).to_string();
    match w {
        AxiomWitness::Maximality { object } => json!({"axiom": "maximality", "object": cat.object_name(*object)}),
        AxiomWitness::UpClosure { cover, larger } => {
            json!({"axiom": "up_closure", "object": on(cover), "cover": sieve(cat, cover), "larger": sieve(cat, larger)})
        }
        AxiomWitness::Stability { cover, arrow } => {
            json!({"axiom": "stability", "object": on(cover), "cover": sieve(cat, cover), "arrow": cat.arrow_name(*arrow)})
        }
        AxiomWitness::Filteredness { left, right } => {
            json!({"axiom": "filteredness", "object": on(left), "left": sieve(cat, left), "right": sieve(cat, right)})
        }
        AxiomWitness::WeakLocality { cover, sieve: s } => {
            json!({"axiom": "weak_locality", "object": on(cover), "cover": sieve(cat, cover), "sieve": sieve(cat, s)})
        }
        AxiomWitness::Locality { sieve: s } => json!({"axiom": "locality", "object": on(s), "sieve": sieve(cat, s)}),
        AxiomWitness::Transitivity { cover, multicomposite } => json!({
            "axiom": "transitivity",
            "object": on(cover),
            "cover": sieve(cat, cover),
            "multicomposite": sieve(cat, multicomposite)
        }),
        AxiomWitness::CoverageCondition { cover, arrow } => json!({
            "axiom": "coverage_condition",
            "object": on(cover),
            "cover": sieve(cat, cover),
            "arrow": cat.arrow_name(*arrow)
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let mut inputs = BTreeMap::new();
        inputs.insert("site".to_string(), "J".to_string());
        let mut r = Report::new("saturate", &inputs);
        r.verdict = Some(false);
        r.witnesses.push(json!({"object": "b", "sieve": ["f"]}));
        r.detail("covers", json!({"a": [["id_a"]]}));
        r.notes.push("a note".into());
        r.timing_ms = 12;
        let back = Report::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.untimed().timing_ms, 0);
        assert!(r.to_text().starts_with("FAIL saturate [site=J]"));
    }
}
