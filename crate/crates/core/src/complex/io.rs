use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ComplexBuilder, End, EndedComplex, FiniteComplex};
use crate::error::{Error, Result};

/// On-disk description of a complex. Ends are optional; without them the
/// file describes a finite complex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexFile {
    pub dims: usize,
    pub cells: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub incidence: Vec<(String, String, i64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ends: Vec<EndFile>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndFile {
    pub cross_section: ComplexFile,
    pub attachment: BTreeMap<String, String>,
}

impl ComplexFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("complex files serialize")
    }

    pub fn from_finite(c: &FiniteComplex) -> Self {
        let cells = (0..c.dim_count()).map(|d| (d.to_string(), c.cells(d).to_vec())).collect();
        ComplexFile { dims: c.top_dim().unwrap_or(0), cells, incidence: c.incidences(), ends: Vec::new() }
    }

    pub fn from_ended(e: &EndedComplex) -> Self {
        let mut f = Self::from_finite(e.core());
        f.ends = e
            .ends()
            .iter()
            .map(|end| EndFile {
                cross_section: Self::from_finite(&end.cross_section),
                attachment: end.attachment.clone(),
            })
            .collect();
        f
    }

    pub fn to_finite(&self) -> Result<FiniteComplex> {
        let mut b = ComplexBuilder::new();
        for (dim, labels) in &self.cells {
            let dim: usize = dim.parse().map_err(|_| Error::Parse(format!("bad dimension key `{dim}`")))?;
            if dim > self.dims {
                return Err(Error::Parse(format!("cells of dimension {dim} exceed dims = {}", self.dims)));
            }
            for l in labels {
                b.cell(l.clone(), dim)?;
            }
        }
        for (a, c, d) in &self.incidence {
            if *d == 0 {
                return Err(Error::Parse(format!("zero incidence degree for (`{a}`, `{c}`)")));
            }
            b.incidence(a.clone(), c.clone(), *d);
        }
        b.build()
    }

    /// Builds the ended complex; a file without ends yields zero ends.
    pub fn to_ended(&self) -> Result<EndedComplex> {
        let core = self.to_finite()?;
        let mut ends = Vec::new();
        for end in &self.ends {
            if !end.cross_section.ends.is_empty() {
                return Err(Error::Parse("cross-sections cannot have ends".into()));
            }
            ends.push(End { cross_section: end.cross_section.to_finite()?, attachment: end.attachment.clone() });
        }
        EndedComplex::new(core, ends)
    }
}
