//! Line-oriented pulse program format.
//!
//! ```text
//! COUPLINGS ab=160.7 bc=-194.4 ac=47.6
//! ROTATION_COST 0
//! DURATION 0.003111387678903547
//! ROT q=a axis=y angle=-1.5707963267948966
//! ZZ pair=ab angle=3.141592653589793
//! ```
//!
//! Numbers use the shortest representation that parses back to the same
//! value, so `parse(emit(p)) == p` and `emit(parse(s)) == s`.

use std::fmt::Write as _;
use std::str::FromStr;

use super::{program_duration, Couplings, PulsePrimitive, PulseProgram};
use crate::error::{Error, Result};
use crate::num::Real;

impl<T: Real> PulseProgram<T> {
    pub fn to_text(&self) -> Result<String> {
        let c = &self.couplings;
        let mut out = String::new();
        let _ = writeln!(out, "COUPLINGS ab={} bc={} ac={}", c.ab, c.bc, c.ac);
        let _ = writeln!(out, "ROTATION_COST {}", c.rotation_cost);
        let _ = writeln!(out, "DURATION {}", program_duration(self)?);
        for step in &self.steps {
            let _ = match step {
                PulsePrimitive::Rot { qubit, axis, angle } => writeln!(out, "ROT q={qubit} axis={axis} angle={angle}"),
                PulsePrimitive::Zz { pair, angle } => writeln!(out, "ZZ pair={pair} angle={angle}"),
            };
        }
        Ok(out)
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Reads `key=value` fields in the given order.
fn fields<'a>(line: usize, rest: &'a str, keys: &[&str]) -> Result<Vec<&'a str>> {
    let parts: Vec<&str> = rest.split(' ').collect();
    if parts.len() != keys.len() {
        return Err(parse_err(line, format!("expected {} fields, found {}", keys.len(), parts.len())));
    }
    parts
        .iter()
        .zip(keys)
        .map(|(part, key)| {
            part.strip_prefix(key)
                .and_then(|s| s.strip_prefix('='))
                .ok_or_else(|| parse_err(line, format!("expected `{key}=…`, found {part:?}")))
        })
        .collect()
}

fn value<V: FromStr>(line: usize, s: &str) -> Result<V> {
    s.parse().map_err(|_| parse_err(line, format!("cannot parse {s:?}")))
}

fn label<V: FromStr<Err = Error>>(line: usize, s: &str) -> Result<V> {
    s.parse().map_err(|e: Error| parse_err(line, e.to_string()))
}

fn header<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>, key: &str) -> Result<(usize, &'a str)> {
    let (n, l) = lines.next().ok_or_else(|| parse_err(0, format!("missing {key} header")))?;
    let rest = l
        .strip_prefix(key)
        .and_then(|r| r.strip_prefix(' '))
        .ok_or_else(|| parse_err(n, format!("expected {key} header")))?;
    Ok((n, rest))
}

pub fn parse_program<T: Real>(text: &str) -> Result<PulseProgram<T>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (n, rest) = header(&mut lines, "COUPLINGS")?;
    let v = fields(n, rest, &["ab", "bc", "ac"])?;
    let (ab, bc, ac): (T, T, T) = (value(n, v[0])?, value(n, v[1])?, value(n, v[2])?);
    let (n, rest) = header(&mut lines, "ROTATION_COST")?;
    let rotation_cost: T = value(n, rest)?;
    let (duration_line, duration) = header(&mut lines, "DURATION")?;
    let duration = duration.to_string();

    let mut steps = Vec::new();
    for (n, l) in lines {
        let (kind, rest) = l.split_once(' ').ok_or_else(|| parse_err(n, "missing fields"))?;
        let step = match kind {
            "ROT" => {
                let v = fields(n, rest, &["q", "axis", "angle"])?;
                PulsePrimitive::Rot { qubit: label(n, v[0])?, axis: label(n, v[1])?, angle: value(n, v[2])? }
            }
            "ZZ" => {
                let v = fields(n, rest, &["pair", "angle"])?;
                PulsePrimitive::Zz { pair: label(n, v[0])?, angle: value(n, v[1])? }
            }
            other => return Err(parse_err(n, format!("unknown primitive {other:?}"))),
        };
        steps.push(step);
    }

    let prog = PulseProgram { steps, couplings: Couplings { ab, bc, ac, rotation_cost } };
    let expected = program_duration(&prog)?.to_string();
    if expected != duration {
        return Err(parse_err(duration_line, format!("duration {duration} disagrees with steps ({expected})")));
    }
    Ok(prog)
}
