//! Unary numerical predicates: families `θ_n : {1..n} → {0,1}` that depend on
//! positions only.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Builtin {
    /// `θ_n(i) = 1` iff `i` is even.
    EvenPos,
    /// `θ_n(i) = 1` iff `i ≤ ⌈n/2⌉`.
    FirstHalf,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredicateRule {
    Builtin(Builtin),
    /// Explicit 0/1 vectors per sequence length.
    Table(BTreeMap<usize, Vec<u8>>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PredicateDef {
    pub name: String,
    #[serde(flatten)]
    pub rule: PredicateRule,
}

impl PredicateDef {
    pub fn builtin(name: &str, b: Builtin) -> Self {
        PredicateDef {
            name: name.to_string(),
            rule: PredicateRule::Builtin(b),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let PredicateRule::Table(t) = &self.rule {
            for (n, row) in t {
                if row.len() != *n {
                    return Err(Error::Malformed(format!(
                        "predicate `{}` table for length {n} has {} entries",
                        self.name,
                        row.len()
                    )));
                }
                if row.iter().any(|&b| b > 1) {
                    return Err(Error::Malformed(format!(
                        "predicate `{}` table entries must be 0 or 1",
                        self.name
                    )));
                }
            }
        }
        Ok(())
    }

    /// `θ_n(i)` for a 1-based position `i ∈ [1, n]`.
    pub fn holds(&self, n: usize, i: usize) -> Result<bool> {
        if i == 0 || i > n {
            return Err(Error::PositionOutOfRange { position: i, len: n });
        }
        match &self.rule {
            PredicateRule::Builtin(Builtin::EvenPos) => Ok(i.is_multiple_of(2)),
            PredicateRule::Builtin(Builtin::FirstHalf) => Ok(i <= n.div_ceil(2)),
            PredicateRule::Table(t) => t
                .get(&n)
                .map(|row| row[i - 1] == 1)
                .ok_or_else(|| Error::PredicateUndefined {
                    name: self.name.clone(),
                    len: n,
                }),
        }
    }
}

/// Named predicate definitions available to formulas.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Registry {
    defs: BTreeMap<String, PredicateRule>,
}

impl Registry {
    pub fn empty() -> Self {
        Registry::default()
    }

    /// `evenpos` and `firsthalf`.
    pub fn with_builtins() -> Self {
        let mut r = Registry::empty();
        r.defs
            .insert("evenpos".into(), PredicateRule::Builtin(Builtin::EvenPos));
        r.defs
            .insert("firsthalf".into(), PredicateRule::Builtin(Builtin::FirstHalf));
        r
    }

    pub fn insert(&mut self, def: PredicateDef) -> Result<()> {
        def.validate()?;
        match self.defs.get(&def.name) {
            Some(existing) if *existing != def.rule => Err(Error::PredicateConflict(def.name)),
            _ => {
                self.defs.insert(def.name, def.rule);
                Ok(())
            }
        }
    }

    /// Add every definition of `other`; identical redefinitions are fine.
    pub fn merge(&mut self, other: &Registry) -> Result<()> {
        for def in other.iter() {
            self.insert(def)?;
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<PredicateDef> {
        self.defs
            .get(name)
            .map(|rule| PredicateDef {
                name: name.to_string(),
                rule: rule.clone(),
            })
            .ok_or_else(|| Error::UnknownPredicate(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.defs.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = PredicateDef> + '_ {
        self.defs.iter().map(|(n, r)| PredicateDef {
            name: n.clone(),
            rule: r.clone(),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: Registry = serde_json::from_str(text)?;
        let mut out = Registry::empty();
        for def in raw.iter() {
            out.insert(def)?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins() {
        let r = Registry::with_builtins();
        let even = r.get("evenpos").unwrap();
        assert!(!even.holds(3, 1).unwrap());
        assert!(even.holds(3, 2).unwrap());
        let half = r.get("firsthalf").unwrap();
        assert_eq!(
            (1..=5).map(|i| half.holds(5, i).unwrap()).collect::<Vec<_>>(),
            vec![true, true, true, false, false]
        );
        assert!(half.holds(3, 0).is_err());
        assert!(matches!(r.get("nope"), Err(Error::UnknownPredicate(_))));
    }

    #[test]
    fn tables_and_json() {
        let r =
            Registry::from_json(r#"{"odd3": {"table": {"3": [1, 0, 1]}}, "evenpos": {"builtin": "evenpos"}}"#).unwrap();
        let odd = r.get("odd3").unwrap();
        assert!(odd.holds(3, 3).unwrap());
        assert!(matches!(odd.holds(4, 1), Err(Error::PredicateUndefined { .. })));
        let text = serde_json::to_string(&r).unwrap();
        assert_eq!(Registry::from_json(&text).unwrap(), r);
        assert!(Registry::from_json(r#"{"bad": {"table": {"2": [1]}}}"#).is_err());
    }

    #[test]
    fn conflicting_definitions() {
        let mut r = Registry::with_builtins();
        assert!(r.insert(PredicateDef::builtin("evenpos", Builtin::EvenPos)).is_ok());
        assert!(matches!(
            r.insert(PredicateDef::builtin("evenpos", Builtin::FirstHalf)),
            Err(Error::PredicateConflict(_))
        ));
    }

    #[test]
    fn def_json_shape() {
        let d = PredicateDef::builtin("evenpos", Builtin::EvenPos);
        let v = serde_json::to_value(&d).unwrap();
        assert_eq!(v, serde_json::json!({"name": "evenpos", "builtin": "evenpos"}));
        assert_eq!(serde_json::from_value::<PredicateDef>(v).unwrap(), d);
    }
}
