use crate::error::{Error, Result};

/// Limits on the exponential parts of the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    /// Conditional assignments created while lowering a machine.
    pub assignments: usize,
    /// Score comparisons emitted by one attention layer while lowering.
    pub comparisons: usize,
    /// Enumerated `(w, z)` pairs, or `w` vectors when rationalizing.
    pub enumeration: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            assignments: 100_000,
            comparisons: 5_000_000,
            enumeration: 100_000,
        }
    }
}

impl Caps {
    /// Parse overrides of the form `assignments=500,enumeration=2000`.
    pub fn parse_overrides(&self, text: &str) -> Result<Caps> {
        let mut caps = *self;
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("cap `{item}` needs key=value")))?;
            let value: usize = value
                .trim()
                .replace('_', "")
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("cap `{item}` is not a number")))?;
            match key.trim() {
                "assignments" => caps.assignments = value,
                "comparisons" => caps.comparisons = value,
                "enumeration" => caps.enumeration = value,
                other => return Err(Error::InvalidArgument(format!("unknown cap `{other}`"))),
            }
        }
        Ok(caps)
    }

    pub(crate) fn check(what: &str, count: usize, cap: usize) -> Result<()> {
        if count > cap {
            Err(Error::ResourceCap {
                what: format!("{what} ({count})"),
                cap,
            })
        } else {
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides() {
        let c = Caps::default()
            .parse_overrides("assignments=10, enumeration=1_000, comparisons=7")
            .unwrap();
        assert_eq!(c.comparisons, 7);
        assert_eq!(c.assignments, 10);
        assert_eq!(c.enumeration, 1000);
        assert!(Caps::default().parse_overrides("bogus=1").is_err());
        assert!(Caps::default().parse_overrides("assignments").is_err());
        assert_eq!(Caps::default().parse_overrides("").unwrap(), Caps::default());
    }

    #[test]
    fn check_reports_resource_error() {
        assert!(Caps::check("pairs", 11, 10).unwrap_err().is_resource());
        assert!(Caps::check("pairs", 10, 10).is_ok());
    }
}
