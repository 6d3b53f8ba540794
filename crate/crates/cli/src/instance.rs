//! Instance files: the on-disk JSON form of a correlation spec. Rationals
//! travel as strings ("3/4", "0.25", "2"), so parsing is exact.

use serde::{Deserialize, Serialize};

use revcheck_core::num::exact_str;
use revcheck_core::{parse_rational, CorrelationSpec, Dist1D, Error, Rat, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointJson {
    pub value: String,
    pub prob: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassJson {
    pub law: Vec<PointJson>,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AtomJson {
    pub values: Vec<String>,
    pub prob: String,
}

/// Top-level instance document. `kind` selects which of the optional
/// payload fields must be present.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub kind: String,
    /// Per-item laws (`independent`, `common_base_value`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub items: Option<Vec<Vec<PointJson>>>,
    /// Shared base law (`common_base_value`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base: Option<Vec<PointJson>>,
    /// Law-and-multiplicity classes (`semi_independent`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classes: Option<Vec<ClassJson>>,
    /// Independent feature laws (`linear`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub features: Option<Vec<Vec<PointJson>>>,
    /// Feature-to-item weights, one row per feature (`linear`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<String>>>,
    /// Item count (`explicit`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_items: Option<usize>,
    /// Raw support listing (`explicit`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub atoms: Option<Vec<AtomJson>>,
}

fn law_from_json(points: &[PointJson]) -> Result<Dist1D<Rat>> {
    Dist1D::new(
        points
            .iter()
            .map(|p| Ok((parse_rational(&p.value)?, parse_rational(&p.prob)?)))
            .collect::<Result<_>>()?,
    )
}

fn law_to_json(law: &Dist1D<Rat>) -> Vec<PointJson> {
    law.support()
        .iter()
        .map(|(v, p)| PointJson { value: exact_str(v), prob: exact_str(p) })
        .collect()
}

impl InstanceFile {
    pub fn to_spec(&self) -> Result<CorrelationSpec<Rat>> {
        let missing = |field: &str| {
            Error::InvalidSpec(format!("kind {:?} requires the {field:?} field", self.kind))
        };
        let laws = |field: Option<&Vec<Vec<PointJson>>>, name: &str| -> Result<Vec<Dist1D<Rat>>> {
            field
                .ok_or_else(|| missing(name))?
                .iter()
                .map(|points| law_from_json(points))
                .collect()
        };
        let spec = match self.kind.as_str() {
            "independent" => CorrelationSpec::Independent {
                items: laws(self.items.as_ref(), "items")?,
            },
            "semi_independent" => CorrelationSpec::SemiIndependent {
                classes: self
                    .classes
                    .as_ref()
                    .ok_or_else(|| missing("classes"))?
                    .iter()
                    .map(|c| Ok((law_from_json(&c.law)?, c.count)))
                    .collect::<Result<_>>()?,
            },
            "common_base_value" => CorrelationSpec::CommonBaseValue {
                items: laws(self.items.as_ref(), "items")?,
                base: law_from_json(self.base.as_ref().ok_or_else(|| missing("base"))?)?,
            },
            "linear" => CorrelationSpec::Linear {
                features: laws(self.features.as_ref(), "features")?,
                matrix: self
                    .matrix
                    .as_ref()
                    .ok_or_else(|| missing("matrix"))?
                    .iter()
                    .map(|row| row.iter().map(|s| parse_rational(s)).collect())
                    .collect::<Result<_>>()?,
            },
            "explicit" => CorrelationSpec::Explicit {
                n_items: self.n_items.ok_or_else(|| missing("n_items"))?,
                atoms: self
                    .atoms
                    .as_ref()
                    .ok_or_else(|| missing("atoms"))?
                    .iter()
                    .map(|a| {
                        Ok((
                            a.values.iter().map(|s| parse_rational(s)).collect::<Result<_>>()?,
                            parse_rational(&a.prob)?,
                        ))
                    })
                    .collect::<Result<_>>()?,
            },
            other => {
                return Err(Error::InvalidSpec(format!(
                    "unknown kind {other:?}; expected independent, semi_independent, \
                     common_base_value, linear, or explicit"
                )))
            }
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_spec(spec: &CorrelationSpec<Rat>, name: Option<String>) -> Self {
        let mut file = InstanceFile {
            name,
            kind: spec.kind_name().to_string(),
            items: None,
            base: None,
            classes: None,
            features: None,
            matrix: None,
            n_items: None,
            atoms: None,
        };
        match spec {
            CorrelationSpec::Independent { items } => {
                file.items = Some(items.iter().map(law_to_json).collect());
            }
            CorrelationSpec::SemiIndependent { classes } => {
                file.classes = Some(
                    classes
                        .iter()
                        .map(|(law, count)| ClassJson { law: law_to_json(law), count: *count })
                        .collect(),
                );
            }
            CorrelationSpec::CommonBaseValue { items, base } => {
                file.items = Some(items.iter().map(law_to_json).collect());
                file.base = Some(law_to_json(base));
            }
            CorrelationSpec::Linear { features, matrix } => {
                file.features = Some(features.iter().map(law_to_json).collect());
                file.matrix = Some(
                    matrix
                        .iter()
                        .map(|row| row.iter().map(exact_str).collect())
                        .collect(),
                );
            }
            CorrelationSpec::Explicit { n_items, atoms } => {
                file.n_items = Some(*n_items);
                file.atoms = Some(
                    atoms
                        .iter()
                        .map(|(values, prob)| AtomJson {
                            values: values.iter().map(exact_str).collect(),
                            prob: exact_str(prob),
                        })
                        .collect(),
                );
            }
        }
        file
    }
}
