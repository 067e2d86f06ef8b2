//! Scheme documents.
//!
//! ```json
//! {"name": "midpoint", "claimed_order": 2, "J": 1, "K": 1, "a": [["1"]], "c": ["1/2"]}
//! ```
//!
//! Every coefficient is a string: `"p/q"` or `"p"` is exact, a decimal or
//! scientific literal is a float. Unknown fields are rejected.

use std::path::Path;

use cfet_core::{Scalar, Scheme};
use serde::{Deserialize, Serialize};

use crate::error::CfetError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeDocument {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claimed_order: Option<u32>,
    #[serde(rename = "J")]
    pub stages: usize,
    #[serde(rename = "K")]
    pub nodes: usize,
    pub a: Vec<Vec<String>>,
    pub c: Vec<String>,
}

fn parse_scalar(field: String, text: &str) -> Result<Scalar, CfetError> {
    text.parse().map_err(|source| CfetError::Scalar { field, source })
}

impl SchemeDocument {
    pub fn to_scheme(&self) -> Result<Scheme, CfetError> {
        if self.stages == 0 || self.nodes == 0 {
            return Err(CfetError::Dimension("J and K must be positive".into()));
        }
        if self.a.len() != self.stages {
            return Err(CfetError::Dimension(format!("J = {} but a has {} rows", self.stages, self.a.len())));
        }
        if let Some((j, row)) = self.a.iter().enumerate().find(|(_, r)| r.len() != self.nodes) {
            return Err(CfetError::Dimension(format!("K = {} but a[{j}] has {} entries", self.nodes, row.len())));
        }
        if self.c.len() != self.nodes {
            return Err(CfetError::Dimension(format!("K = {} but c has {} entries", self.nodes, self.c.len())));
        }
        let a = self
            .a
            .iter()
            .enumerate()
            .map(|(j, row)| row.iter().enumerate().map(|(k, s)| parse_scalar(format!("a[{j}][{k}]"), s)).collect())
            .collect::<Result<Vec<Vec<Scalar>>, _>>()?;
        let c = self
            .c
            .iter()
            .enumerate()
            .map(|(k, s)| parse_scalar(format!("c[{k}]"), s))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Scheme::new(self.name.clone(), a, c, self.claimed_order)?)
    }

    pub fn from_scheme(s: &Scheme) -> Self {
        let a = s.coefficients();
        SchemeDocument {
            name: s.name().to_string(),
            claimed_order: s.claimed_order(),
            stages: s.stages(),
            nodes: s.nodes(),
            a: (0..a.rows()).map(|j| a.row(j).iter().map(ToString::to_string).collect()).collect(),
            c: s.node_positions().iter().map(ToString::to_string).collect(),
        }
    }
}

pub fn parse_scheme(text: &str) -> Result<Scheme, CfetError> {
    serde_json::from_str::<SchemeDocument>(text)?.to_scheme()
}

pub fn load_scheme(reader: impl std::io::Read) -> Result<Scheme, CfetError> {
    serde_json::from_reader::<_, SchemeDocument>(reader)?.to_scheme()
}

pub fn load_scheme_file(path: &Path) -> Result<Scheme, CfetError> {
    let file =
        std::fs::File::open(path).map_err(|source| CfetError::Io { path: path.display().to_string(), source })?;
    load_scheme(std::io::BufReader::new(file))
}

pub fn scheme_to_json(s: &Scheme) -> String {
    serde_json::to_string_pretty(&SchemeDocument::from_scheme(s)).expect("scheme documents always serialize")
}

/// Bundled scheme files, by name.
pub const BUNDLED: [(&str, &str); 4] = [
    ("midpoint", include_str!("../schemes/midpoint.json")),
    ("left-endpoint", include_str!("../schemes/left-endpoint.json")),
    ("cf4", include_str!("../schemes/cf4.json")),
    ("negative-weight-demo", include_str!("../schemes/negative-weight-demo.json")),
];

pub fn bundled_scheme(name: &str) -> Option<Scheme> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, text)| parse_scheme(text).expect("bundled scheme file"))
}

/// A path to a scheme file, or the name of a bundled scheme when no such
/// file exists.
pub fn resolve_scheme(spec: &str) -> Result<Scheme, CfetError> {
    let path = Path::new(spec);
    if path.exists() {
        return load_scheme_file(path);
    }
    bundled_scheme(spec).ok_or_else(|| CfetError::Io {
        path: spec.to_string(),
        source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or bundled scheme"),
    })
}
