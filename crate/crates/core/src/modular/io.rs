//! Plain-text and binary exchange formats for grid functions.
//!
//! CSV: a header line `n,m,lower_1..lower_n,upper_1..upper_n`, the matching
//! values, a `value` line, then one value per line in storage order.
//!
//! Binary (little endian): magic `MOGF`, `u32` version 1, `u32` n, `u32` m,
//! `n` lower bounds, `n` upper bounds and `mⁿ` values, all `f64`.

use std::fmt::Write as _;

use super::GridFunction;
use crate::error::{Error, Result};
use crate::nfunction::Domain;
use crate::scalar::Scalar;

const MAGIC: &[u8; 4] = b"MOGF";
const VERSION: u32 = 1;

fn grid_err(msg: impl Into<String>) -> Error {
    Error::Grid(msg.into())
}

impl<T: Scalar> GridFunction<T> {
    pub fn to_csv(&self) -> String {
        let n = self.dim();
        let mut head: Vec<String> = vec!["n".into(), "m".into()];
        head.extend((1..=n).map(|i| format!("lower_{i}")));
        head.extend((1..=n).map(|i| format!("upper_{i}")));
        let mut out = head.join(",");
        out.push('\n');
        let mut meta = vec![n.to_string(), self.resolution().to_string()];
        let d = self.domain();
        meta.extend(d.lower().iter().chain(d.upper()).map(|v| format!("{:.16e}", v.as_f64())));
        out.push_str(&meta.join(","));
        out.push_str("\nvalue\n");
        for v in self.values() {
            let _ = writeln!(out, "{:.16e}", v.as_f64());
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| grid_err("empty CSV"))?;
        if !header.starts_with("n,m") {
            return Err(grid_err(format!("unexpected CSV header `{header}`")));
        }
        let meta = lines.next().ok_or_else(|| grid_err("missing metadata line"))?;
        let fields: Vec<&str> = meta.split(',').map(str::trim).collect();
        let parse_usize = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| grid_err(format!("bad integer `{s}`")))
        };
        let parse_f = |s: &str| {
            s.parse::<f64>()
                .map(T::lit)
                .map_err(|_| grid_err(format!("bad number `{s}`")))
        };
        let n = parse_usize(fields.first().copied().unwrap_or(""))?;
        let m = parse_usize(fields.get(1).copied().unwrap_or(""))?;
        if fields.len() != 2 + 2 * n {
            return Err(grid_err(format!(
                "metadata line needs {} fields, has {}",
                2 + 2 * n,
                fields.len()
            )));
        }
        let lower = fields[2..2 + n].iter().map(|s| parse_f(s)).collect::<Result<Vec<T>>>()?;
        let upper = fields[2 + n..].iter().map(|s| parse_f(s)).collect::<Result<Vec<T>>>()?;
        match lines.next() {
            Some(l) if l.trim() == "value" => {}
            other => return Err(grid_err(format!("expected `value` line, got {other:?}"))),
        }
        let values = lines.map(|l| parse_f(l.trim())).collect::<Result<Vec<T>>>()?;
        GridFunction::new(Domain::new(lower, upper)?, m, values)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.dim();
        let mut out = Vec::with_capacity(16 + 8 * (2 * n + self.len()));
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(n as u32).to_le_bytes());
        out.extend_from_slice(&(self.resolution() as u32).to_le_bytes());
        let d = self.domain();
        for v in d.lower().iter().chain(d.upper()).chain(self.values()) {
            out.extend_from_slice(&v.as_f64().to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 16 || &bytes[..4] != MAGIC {
            return Err(grid_err("not a grid function file (bad magic)"));
        }
        let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes"));
        if word(4) != VERSION {
            return Err(grid_err(format!("unsupported version {}", word(4))));
        }
        let n = word(8) as usize;
        let m = word(12) as usize;
        let count = m
            .checked_pow(n as u32)
            .and_then(|c| c.checked_add(2 * n))
            .ok_or_else(|| grid_err("lattice size overflows"))?;
        let body = &bytes[16..];
        if body.len() != 8 * count {
            return Err(grid_err(format!(
                "expected {} payload bytes, got {}",
                8 * count,
                body.len()
            )));
        }
        let floats: Vec<T> = body
            .chunks_exact(8)
            .map(|c| T::lit(f64::from_le_bytes(c.try_into().expect("8 bytes"))))
            .collect();
        let domain = Domain::new(floats[..n].to_vec(), floats[n..2 * n].to_vec())?;
        GridFunction::new(domain, m, floats[2 * n..].to_vec())
    }
}
