//! Reduction certificates as versioned JSON.

use std::path::Path;

use qmak_core::reduction::ReductionCertificate;
use qmak_core::sat::{ThreeSatInstance, TwoOutOfFourInstance};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const CERTIFICATE_SCHEMA: &str = "qmak-certificate";
pub const CERTIFICATE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Envelope {
    schema: String,
    version: u32,
    certificate: ReductionCertificate,
}

pub fn certificate_to_json(cert: &ReductionCertificate) -> Result<String> {
    let env = Envelope {
        schema: CERTIFICATE_SCHEMA.into(),
        version: CERTIFICATE_VERSION,
        certificate: cert.clone(),
    };
    Ok(serde_json::to_string_pretty(&env)? + "\n")
}

/// Parses and re-validates; certificates are checked again on load since
/// deserialization bypasses the instance constructors.
pub fn certificate_from_json(path: &Path, text: &str) -> Result<ReductionCertificate> {
    let env: Envelope = serde_json::from_str(text).map_err(|e| CliError::parse(path, e.line(), e.to_string()))?;
    if env.schema != CERTIFICATE_SCHEMA || env.version != CERTIFICATE_VERSION {
        return Err(CliError::parse(
            path,
            1,
            format!("unsupported certificate {} v{}", env.schema, env.version),
        ));
    }
    let c = env.certificate;
    let invalid = |e: qmak_core::Error| CliError::parse(path, 1, e.to_string());
    let source = ThreeSatInstance::new(c.source.num_vars(), c.source.clauses().to_vec()).map_err(invalid)?;
    let target = TwoOutOfFourInstance::new(c.target.num_vars(), c.target.clauses().to_vec()).map_err(invalid)?;
    if source != c.source || target != c.target {
        return Err(CliError::parse(
            path,
            1,
            "instance metadata inconsistent with its clauses",
        ));
    }
    c.validate().map_err(invalid)?;
    Ok(c)
}

pub fn write_certificate(path: &Path, cert: &ReductionCertificate) -> Result<()> {
    std::fs::write(path, certificate_to_json(cert)?).map_err(|e| CliError::io(path, e))
}

pub fn read_certificate(path: &Path) -> Result<ReductionCertificate> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    certificate_from_json(path, &text)
}
