use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Layer, Masking, PosEncoding, Uhat};
use crate::error::{Error, Result};
use crate::linalg::AffineMap;
use crate::scalar::{FieldKind, QuadRat, Rat, Scalar};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapDocument {
    pub matrix: Vec<Vec<String>>,
    pub offset: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LayerDocument {
    Attention {
        masking: Masking,
        #[serde(rename = "A")]
        query: MapDocument,
        #[serde(rename = "B")]
        key: MapDocument,
        #[serde(rename = "C")]
        output: MapDocument,
    },
    Relu {
        /// 1-based payload coordinate.
        coord: usize,
    },
    Affine {
        map: MapDocument,
    },
}

/// Serialized form of a machine; scalars are strings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UhatDocument {
    pub field: FieldKind,
    pub input_dim: usize,
    pub pe: PosEncoding,
    pub layers: Vec<LayerDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accept: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
}

fn map_doc<S: Scalar>(m: &AffineMap<S>) -> MapDocument {
    MapDocument {
        matrix: m
            .dense_matrix()
            .iter()
            .map(|r| r.iter().map(ToString::to_string).collect())
            .collect(),
        offset: m.offset().iter().map(ToString::to_string).collect(),
    }
}

fn parse_all<S: Scalar>(items: &[String]) -> Result<Vec<S>> {
    items.iter().map(|s| S::parse_scalar(s)).collect()
}

fn map_from_doc<S: Scalar>(d: &MapDocument, cols: usize, what: &str) -> Result<AffineMap<S>> {
    let matrix = d
        .matrix
        .iter()
        .map(|r| {
            if r.len() != cols {
                Err(Error::dims(what.to_string(), cols, r.len()))
            } else {
                parse_all(r)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    AffineMap::new(matrix, parse_all(&d.offset)?, cols)
}

impl<S: Scalar> Uhat<S> {
    pub fn to_document(&self) -> UhatDocument {
        UhatDocument {
            field: S::FIELD,
            input_dim: self.input_dim,
            pe: self.pe.clone(),
            layers: self
                .layers
                .iter()
                .map(|l| match l {
                    Layer::Attention {
                        query,
                        key,
                        output,
                        masking,
                    } => LayerDocument::Attention {
                        masking: *masking,
                        query: map_doc(query),
                        key: map_doc(key),
                        output: map_doc(output),
                    },
                    Layer::Relu { coord } => LayerDocument::Relu { coord: coord + 1 },
                    Layer::Affine { map } => LayerDocument::Affine { map: map_doc(map) },
                })
                .collect(),
            accept: self
                .accept
                .as_ref()
                .map(|t| t.iter().map(ToString::to_string).collect()),
            metadata: self.metadata.clone(),
        }
    }

    pub fn from_document(doc: &UhatDocument) -> Result<Self> {
        if doc.field != S::FIELD && !(S::FIELD == FieldKind::Sqrt2 && doc.field == FieldKind::Rational) {
            return Err(Error::FieldMismatch(format!(
                "document is over {}, expected {}",
                doc.field,
                S::FIELD
            )));
        }
        let pe_w = doc.pe.width();
        let mut w = doc.input_dim + usize::from(doc.pe.is_none());
        let mut layers = Vec::with_capacity(doc.layers.len());
        for (k, l) in doc.layers.iter().enumerate() {
            let full = pe_w + w;
            let layer = match l {
                LayerDocument::Attention {
                    masking,
                    query,
                    key,
                    output,
                } => Layer::Attention {
                    query: map_from_doc(query, full, &format!("layer {} A", k + 1))?,
                    key: map_from_doc(key, full, &format!("layer {} B", k + 1))?,
                    output: map_from_doc(output, 2 * full, &format!("layer {} C", k + 1))?,
                    masking: *masking,
                },
                LayerDocument::Relu { coord } => {
                    if *coord == 0 {
                        return Err(Error::Malformed(format!(
                            "layer {}: relu coordinates are 1-based",
                            k + 1
                        )));
                    }
                    Layer::Relu { coord: coord - 1 }
                }
                LayerDocument::Affine { map } => Layer::Affine {
                    map: map_from_doc(map, full, &format!("layer {} map", k + 1))?,
                },
            };
            w = layer.output_width(pe_w, w)?;
            layers.push(layer);
        }
        let accept = doc.accept.as_ref().map(|t| parse_all(t)).transpose()?;
        let mut u = Uhat::new(doc.input_dim, doc.pe.clone(), layers, accept)?;
        u.metadata = doc.metadata.clone();
        Ok(u)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: UhatDocument = serde_json::from_str(text)?;
        Self::from_document(&doc)
    }
}

/// A machine over whichever field its document names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnyUhat {
    Rational(Uhat<Rat>),
    Quadratic(Uhat<QuadRat>),
}

impl AnyUhat {
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: UhatDocument = serde_json::from_str(text)?;
        match doc.field {
            FieldKind::Rational => Ok(AnyUhat::Rational(Uhat::from_document(&doc)?)),
            FieldKind::Sqrt2 => Ok(AnyUhat::Quadratic(Uhat::from_document(&doc)?)),
        }
    }

    pub fn to_json(&self) -> String {
        match self {
            AnyUhat::Rational(u) => u.to_json(),
            AnyUhat::Quadratic(u) => u.to_json(),
        }
    }

    pub fn field(&self) -> FieldKind {
        match self {
            AnyUhat::Rational(_) => FieldKind::Rational,
            AnyUhat::Quadratic(_) => FieldKind::Sqrt2,
        }
    }

    /// The machine over ℚ(√2), lifting rational machines.
    pub fn to_quadratic(&self) -> Uhat<QuadRat> {
        match self {
            AnyUhat::Rational(u) => super::lift_uhat(u),
            AnyUhat::Quadratic(u) => u.clone(),
        }
    }
}
