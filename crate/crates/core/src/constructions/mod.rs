//! Constructive procedures: ideal-limit estimation, oscillation certificates, escape extensions of
//! selector stems, a 0/1 adversary against regular matrices, and round-by-round demonstrations
//! that every basic open set of selectors contains escapes.

mod adversary;
mod certificate;
mod demo;
mod escape;
mod limits;
mod oscillation;

pub use adversary::{
    steinhaus_adversary, AdversaryConfig, AdversaryDiagnostic, AdversaryMode, AdversaryReport,
    PhaseRecord,
};
pub use certificate::{
    build_certificate, values_digest, verify_certificate, CertificateAudit, EncodedSequence,
    OscillationCertificate, ScaleWitness,
};
pub use demo::{meagerness_demo, random_stem, DemoRound, DemoStep, StemSchedule, OSCILLATION_ROW};
pub use escape::{escape_rowfinite, escape_unbounded, EscapeAudit, EscapeCaps, EscapeResult};
pub use limits::{
    default_eps_grid, default_eta_grid, exception_evidence, ideal_limit, ideal_limit_structured,
    ExceptionEvidence, IdealLimitVerdict, LimitStatus, StructuredLimit, StructuredSequence,
};
pub use oscillation::{oscillation_pair, OscillationPair};

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub(crate) fn serialize_display<T: std::fmt::Display, S: serde::Serializer>(
    value: &T,
    s: S,
) -> Result<S::Ok, S::Error> {
    s.collect_str(value)
}
