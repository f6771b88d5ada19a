//! JSON file formats for tensors, vectors, hypergraphs and TCP instances.
//!
//! Tensor files carry an optional construction recipe. The recipe is kept on
//! load only if the accompanying checksum matches both the recipe and the
//! entries, so hand-edited files are analysed from scratch.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::classes::permutations;
use crate::error::{Error, Result};
use crate::provenance::Provenance;
use crate::tcp::TcpInstance;
use crate::tensor::{checked_len, Tensor};

/// Duplicate listings of one symmetric orbit must agree this closely.
const ORBIT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    Coo,
    Dense,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TensorFile {
    order: usize,
    dim: usize,
    layout: Layout,
    symmetric: bool,
    entries: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<Provenance>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    checksum: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorFile {
    pub dim: usize,
    pub entries: Vec<f64>,
}

/// SHA-256 over the recipe and the exact bit patterns of the entries.
pub fn checksum(t: &Tensor, p: &Provenance) -> Result<String> {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(p)?);
    h.update((t.order() as u64).to_le_bytes());
    h.update((t.dim() as u64).to_le_bytes());
    for v in t.values() {
        h.update(v.to_bits().to_le_bytes());
    }
    Ok(hex::encode(h.finalize()))
}

pub fn tensor_to_json(t: &Tensor, layout: Layout) -> Result<Value> {
    let entries = match layout {
        Layout::Dense => serde_json::to_value(t.values())?,
        Layout::Coo => {
            let mut list = Vec::new();
            for (k, &v) in t.values().iter().enumerate() {
                if v == 0.0 {
                    continue;
                }
                let idx = t.multi_index(k);
                if t.symmetric() && idx.windows(2).any(|w| w[0] > w[1]) {
                    continue;
                }
                let mut row: Vec<Value> = idx.into_iter().map(Value::from).collect();
                row.push(serde_json::to_value(v)?);
                list.push(Value::Array(row));
            }
            Value::Array(list)
        }
    };
    let (provenance, checksum) = match t.provenance() {
        Some(p) => (Some(p.clone()), Some(checksum(t, p)?)),
        None => (None, None),
    };
    Ok(serde_json::to_value(TensorFile {
        order: t.order(),
        dim: t.dim(),
        layout,
        symmetric: t.symmetric(),
        entries,
        provenance,
        checksum,
    })?)
}

pub fn tensor_from_json(v: &Value) -> Result<Tensor> {
    let file: TensorFile = serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))?;
    if file.order < 2 || file.dim < 1 {
        return Err(Error::Parse(format!(
            "order must be >= 2 and dim >= 1, got order {} dim {}",
            file.order, file.dim
        )));
    }
    let len = checked_len(file.order, file.dim)?;
    let values = match file.layout {
        Layout::Dense => {
            let values: Vec<f64> =
                serde_json::from_value(file.entries).map_err(|e| Error::Parse(e.to_string()))?;
            if values.len() != len {
                return Err(Error::Parse(format!(
                    "dense layout needs {len} entries, found {}",
                    values.len()
                )));
            }
            values
        }
        Layout::Coo => coo_values(&file, len)?,
    };
    let t = Tensor::new(file.order, file.dim, values, file.symmetric)
        .map_err(|e| Error::Parse(e.to_string()))?;
    Ok(match (file.provenance, file.checksum) {
        (Some(p), Some(c)) if checksum(&t, &p)? == c => t.with_provenance(p),
        _ => t,
    })
}

fn coo_values(file: &TensorFile, len: usize) -> Result<Vec<f64>> {
    let rows: Vec<Vec<Value>> =
        serde_json::from_value(file.entries.clone()).map_err(|e| Error::Parse(e.to_string()))?;
    let mut values = vec![0.0; len];
    let mut seen: HashMap<usize, f64> = HashMap::new();
    let m = file.order;
    let n = file.dim;
    for row in rows {
        if row.len() != m + 1 {
            return Err(Error::Parse(format!(
                "coo entry {row:?} needs {m} indices and a value"
            )));
        }
        let idx: Vec<usize> = row[..m]
            .iter()
            .map(|v| {
                v.as_u64()
                    .map(|i| i as usize)
                    .filter(|&i| i < n)
                    .ok_or_else(|| Error::Parse(format!("bad index {v} for dimension {n}")))
            })
            .collect::<Result<_>>()?;
        let value = row[m]
            .as_f64()
            .ok_or_else(|| Error::Parse(format!("bad value {}", row[m])))?;
        let targets = if file.symmetric {
            permutations(&idx)
        } else {
            vec![idx]
        };
        for t in targets {
            let pos = t.iter().fold(0, |acc, &i| acc * n + i);
            if let Some(&prev) = seen.get(&pos) {
                if (prev - value).abs() > ORBIT_TOL * prev.abs().max(value.abs()).max(1.0) {
                    return Err(Error::Parse(format!(
                        "conflicting values {prev} and {value} at {t:?}"
                    )));
                }
            }
            seen.insert(pos, value);
            values[pos] = value;
        }
    }
    Ok(values)
}

pub fn vector_from_json(v: &Value) -> Result<Vec<f64>> {
    let file: VectorFile = serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))?;
    if file.entries.len() != file.dim {
        return Err(Error::Parse(format!(
            "vector declares dim {} but has {} entries",
            file.dim,
            file.entries.len()
        )));
    }
    Ok(file.entries)
}

pub fn vector_to_json(x: &[f64]) -> Result<Value> {
    Ok(serde_json::to_value(VectorFile {
        dim: x.len(),
        entries: x.to_vec(),
    })?)
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn read_tensor(path: &Path) -> Result<Tensor> {
    tensor_from_json(&read_json(path)?)
}

/// A TCP instance: `{"tensor": <tensor object or path>, "q": [...]}`. A
/// relative tensor path is resolved against `base`.
pub fn tcp_instance_from_json(v: &Value, base: Option<&Path>) -> Result<TcpInstance> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Parse("TCP instance must be an object".into()))?;
    let tensor = match obj.get("tensor") {
        Some(Value::String(p)) => {
            let path = Path::new(p);
            let path = match base {
                Some(b) if path.is_relative() => b.join(path),
                _ => path.to_path_buf(),
            };
            read_tensor(&path)?
        }
        Some(t) => tensor_from_json(t)?,
        None => return Err(Error::Parse("TCP instance has no tensor".into())),
    };
    let q = match obj.get("q") {
        Some(q @ Value::Object(_)) => vector_from_json(q)?,
        Some(q) => serde_json::from_value(q.clone()).map_err(|e| Error::Parse(e.to_string()))?,
        None => return Err(Error::Parse("TCP instance has no q".into())),
    };
    TcpInstance::new(tensor, q).map_err(|e| Error::Parse(e.to_string()))
}

pub fn read_tcp_instance(path: &Path) -> Result<TcpInstance> {
    tcp_instance_from_json(&read_json(path)?, path.parent())
}
