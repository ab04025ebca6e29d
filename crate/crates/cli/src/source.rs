use std::path::PathBuf;

use clap::Args;
use cwtoric_core::complex::{build_named, Built, ComplexFile};
use cwtoric_core::CatalogSpec;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] cwtoric_core::Error),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Io { .. } => "io",
            CliError::Usage(_) => "usage",
        }
    }

    pub fn message(&self) -> String {
        self.to_string()
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Args, Debug, Clone)]
pub struct SourceArgs {
    /// Named catalog complex.
    #[arg(long, conflicts_with = "input")]
    pub catalog: Option<String>,
    /// Complex file in the JSON complex format.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub size: Option<usize>,
    /// Number of ends of `sigma_k`.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub genus: Option<usize>,
    #[arg(long)]
    pub ends: Option<usize>,
    #[arg(long)]
    pub finite_components: Option<usize>,
    #[arg(long)]
    pub length: Option<usize>,
    /// Finite factor of `product_with_plane`.
    #[arg(long)]
    pub factor: Option<String>,
    #[arg(long)]
    pub factor_size: Option<usize>,
    #[arg(long)]
    pub factor_genus: Option<usize>,
}

impl SourceArgs {
    pub fn spec(&self) -> Option<CatalogSpec> {
        let name = self.catalog.as_ref()?;
        let mut s = CatalogSpec::named(name);
        s.size = self.size;
        s.k = self.k;
        s.g = self.genus;
        s.ends = self.ends;
        s.finite_components = self.finite_components;
        s.length = self.length;
        if let Some(f) = &self.factor {
            let mut fs = CatalogSpec::named(f);
            fs.size = self.factor_size;
            fs.g = self.factor_genus;
            s.factor = Some(Box::new(fs));
        }
        Some(s)
    }

    pub fn load(&self) -> CliResult<Built> {
        if let Some(spec) = self.spec() {
            return Ok(build_named(&spec)?);
        }
        let Some(path) = &self.input else {
            return Err(CliError::Usage("one of --catalog or --input is required".into()));
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })?;
        let file = ComplexFile::parse(&text)?;
        if file.ends.is_empty() {
            Ok(Built::Finite(file.to_finite()?))
        } else {
            Ok(Built::Ended(file.to_ended()?))
        }
    }

    /// Loads and refuses complexes that fail validation.
    pub fn load_valid(&self) -> CliResult<Built> {
        let b = self.load()?;
        match &b {
            Built::Finite(c) => c.validate().into_result()?,
            Built::Ended(e) => e.validate().into_result()?,
        }
        Ok(b)
    }

    pub fn describe(&self) -> String {
        match (&self.catalog, &self.input) {
            (Some(c), _) => c.clone(),
            (None, Some(p)) => p.display().to_string(),
            _ => String::new(),
        }
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &std::path::Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })?;
    serde_json::from_str(&text).map_err(|e| CliError::Core(cwtoric_core::Error::Parse(e.to_string())))
}
