//! Deterministic report rendering: canonical key order (sorted), floats
//! at 17 significant digits, and a SHA-256 digest of the inputs.

use std::io::{self, Write};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub struct Report {
    pub command: String,
    pub inputs_digest: String,
    pub seed: u64,
    pub tolerances: Value,
    pub results: Value,
    pub residual_table: Vec<qsuff::verify::ResidualEntry>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.residual_table.iter().all(|e| e.pass)
    }

    pub fn to_value(&self) -> Value {
        json!({
            "command": self.command,
            "inputs_digest": self.inputs_digest,
            "seed": self.seed,
            "tolerances": self.tolerances,
            "results": self.results,
            "residual_table": self.residual_table.iter().map(|e| json!({
                "check": e.check,
                "value": e.value,
                "tol": e.tol,
                "pass": e.pass,
            })).collect::<Vec<_>>(),
            "passed": self.passed(),
        })
    }

    pub fn to_json_string(&self) -> String {
        let mut out = Vec::new();
        let formatter = SciFormatter::default();
        let mut ser = serde_json::Serializer::with_formatter(&mut out, formatter);
        serde::Serialize::serialize(&self.to_value(), &mut ser).expect("serialization");
        out.push(b'\n');
        String::from_utf8(out).expect("utf8 json")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("command: {}\n", self.command));
        s.push_str(&format!("inputs_digest: {}\n", self.inputs_digest));
        s.push_str(&format!("seed: {}\n", self.seed));
        for e in &self.residual_table {
            s.push_str(&format!(
                "[{}] {} = {:.3e} (tol {:.1e})\n",
                if e.pass { "pass" } else { "FAIL" },
                e.check,
                e.value,
                e.tol
            ));
        }
        s.push_str(&format!(
            "overall: {}\n",
            if self.passed() { "pass" } else { "FAIL" }
        ));
        s
    }
}

/// JSON formatter printing every float with 17 significant digits.
#[derive(Default)]
pub struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{:.16e}", value)
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{:.7e}", value)
    }
}

/// SHA-256 over the raw inputs plus the command line that matters.
pub fn digest(parts: &[&[u8]]) -> String {
    let mut hasher = Sha256::new();
    for p in parts {
        hasher.update((p.len() as u64).to_le_bytes());
        hasher.update(p);
    }
    hex::encode(hasher.finalize())
}
